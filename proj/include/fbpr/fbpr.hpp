#pragma once

#include "fbpr/constructions.hpp"
#include "fbpr/error.hpp"
#include "fbpr/exact_rank.hpp"
#include "fbpr/experiments.hpp"
#include "fbpr/fb_core.hpp"
#include "fbpr/feasibility.hpp"
#include "fbpr/io.hpp"
#include "fbpr/lengths.hpp"
#include "fbpr/plots.hpp"
#include "fbpr/polyphase_matrix.hpp"
#include "fbpr/svg.hpp"
