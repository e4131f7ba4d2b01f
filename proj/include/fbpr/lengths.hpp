#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include <boost/rational.hpp>

#include "fbpr/fb_core.hpp"

namespace fbpr {

using Rational = boost::rational<std::int64_t>;

namespace detail {

// Sum over p of ceil or floor of (m_{h;p} - 1)/floor(m_v/D).
inline int phase_cover_sum(int D, int m_h, int m_v, bool use_ceiling) {
  const int q = m_v / D;
  int s = 0;
  for (int p = 0; p < D; ++p) {
    const int a = polyphase_length(m_h, D, p) - 1;
    s += use_ceiling ? ceil_div(a, q) : floor_div(a, q);
  }
  return s;
}

inline std::optional<int> minimal_length(int C, int D, int m_h, bool use_ceiling) {
  require(C >= 1 && D >= 1, "length search: C and D must be positive");
  require(m_h >= D, "length search: need m_h >= D");
  for (int m_v = D; m_v <= m_h + D; ++m_v)
    if (C >= D + phase_cover_sum(D, m_h, m_v, use_ceiling)) return m_v;
  return std::nullopt;
}

inline int minimal_length_or_throw(int C, int D, int m_h, bool use_ceiling, const char* name) {
  if (auto m = minimal_length(C, D, m_h, use_ceiling)) return *m;
  throw InfeasibleConfiguration(std::string(name) + ": no synthesis length up to m_h + D satisfies the condition (C=" +
                                std::to_string(C) + ", D=" + std::to_string(D) + ", m_h=" + std::to_string(m_h) + ")");
}

}  // namespace detail

// C/D >= 1 + (1/D) sum_p ceil((m_{h;p} - 1)/floor(m_v/D)), multiplied through by D.
inline bool sufficient_condition(int C, int D, int m_h, int m_v) {
  return m_v >= D && C >= D + detail::phase_cover_sum(D, m_h, m_v, true);
}

// Same with the inner ceiling replaced by a floor.
inline bool necessary_condition(int C, int D, int m_h, int m_v) {
  return m_v >= D && C >= D + detail::phase_cover_sum(D, m_h, m_v, false);
}

inline std::optional<int> try_sufficient_length(int C, int D, int m_h) {
  return detail::minimal_length(C, D, m_h, true);
}

inline std::optional<int> try_necessary_length(int C, int D, int m_h) {
  return detail::minimal_length(C, D, m_h, false);
}

inline int sufficient_length(int C, int D, int m_h) {
  return detail::minimal_length_or_throw(C, D, m_h, true, "sufficient_length");
}

inline int necessary_length(int C, int D, int m_h) {
  return detail::minimal_length_or_throw(C, D, m_h, false, "necessary_length");
}

// D * ceil((m_h - D)/(C - D)), clamped below at D.
inline int counting_length(int C, int D, int m_h) {
  detail::require(D >= 1 && C > D, "counting_length: need C > D");
  detail::require(m_h >= D, "counting_length: need m_h >= D");
  return std::max(D, D * ceil_div(m_h - D, C - D));
}

struct LengthBounds {
  int mv_L;
  int mv_U;
  bool counting_sandwich;  // (m_h-D)/(C/D-1) <= mv_C < D + (m_h-D)/(C/D-1)
};

inline LengthBounds length_bounds(int C, int D, int m_h) {
  detail::require(D >= 1 && C >= 2 * D, "length_bounds: need C >= 2D");
  detail::require(m_h > D, "length_bounds: need m_h > D");
  const int mv_L = ceil_div(D * (m_h - D), C);
  const int mv_U = D + ceil_div(D * (m_h - D), C + 1 - 2 * D);
  const Rational mid(std::int64_t{D} * (m_h - D), C - D);
  const Rational mv_C(counting_length(C, D, m_h));
  return {mv_L, mv_U, mid <= mv_C && mv_C < D + mid};
}

struct GapReport {
  int gap_SN, gap_UC, gap_CL;
  Rational bound_SN, bound_UC, bound_CL;
  bool SN_below, UC_below, CL_below;  // strict inequalities
  bool all_below() const { return SN_below && UC_below && CL_below; }
};

inline GapReport gaps(int C, int D, int m_h) {
  detail::require(D >= 2, "gaps: need D >= 2");
  detail::require(C >= 2 * D, "gaps: need C >= 2D");
  detail::require(m_h > D, "gaps: need m_h > D");
  const std::int64_t c = C, d = D, m = m_h;
  const int mv_S = sufficient_length(C, D, m_h);
  const int mv_N = necessary_length(C, D, m_h);
  const int mv_C = counting_length(C, D, m_h);
  const auto b = length_bounds(C, D, m_h);
  GapReport g{mv_S - mv_N,
              b.mv_U - mv_C,
              mv_C - b.mv_L,
              Rational(d + 1) + Rational(m * d * (2 * d - 1), c * (c - 2 * d + 1)),
              Rational(d + 1) + Rational(m * d * (d - 1), (c - d) * (c - 2 * d + 1)),
              Rational(d + 1) + Rational(m * d * d, c * (c - d)),
              false, false, false};
  g.SN_below = Rational(g.gap_SN) < g.bound_SN;
  g.UC_below = Rational(g.gap_UC) < g.bound_UC;
  g.CL_below = Rational(g.gap_CL) < g.bound_CL;
  return g;
}

struct LengthReport {
  int C, D, m_h;
  int mv_L, mv_N, mv_C, mv_S, mv_U;
  int gap_SN, gap_UC, gap_CL;
  bool counting_sandwich;
  std::optional<GapReport> gap_certificate;  // present when D >= 2

  // max(D, mv_L) <= mv_N <= mv_C <= mv_S <= min(m_h, mv_U)
  bool chain_holds() const {
    return std::max(D, mv_L) <= mv_N && mv_N <= mv_C && mv_C <= mv_S && mv_S <= std::min(m_h, mv_U);
  }
};

inline LengthReport length_report(int C, int D, int m_h) {
  detail::require(D >= 1 && C >= 2 * D, "length_report: need C >= 2D");
  detail::require(m_h > D, "length_report: need m_h > D");
  const auto b = length_bounds(C, D, m_h);
  LengthReport r{C, D, m_h, b.mv_L, necessary_length(C, D, m_h), counting_length(C, D, m_h),
                 sufficient_length(C, D, m_h), b.mv_U, 0, 0, 0, b.counting_sandwich, std::nullopt};
  r.gap_SN = r.mv_S - r.mv_N;
  r.gap_UC = r.mv_U - r.mv_C;
  r.gap_CL = r.mv_C - r.mv_L;
  if (D >= 2) r.gap_certificate = gaps(C, D, m_h);
  return r;
}

inline constexpr const char* kLengthCsvHeader = "C,D,m_h,mv_L,mv_N,mv_C,mv_S,mv_U";

// One CSV row; functionals undefined for this (C, D, m_h) are left blank.
inline std::string length_csv_row(int C, int D, int m_h) {
  auto cell = [](std::optional<int> v) { return v ? std::to_string(*v) : std::string(); };
  const bool wide = C >= 2 * D && m_h > D;
  std::optional<int> L, U, Cn;
  if (wide) {
    const auto b = length_bounds(C, D, m_h);
    L = b.mv_L;
    U = b.mv_U;
  }
  if (C > D) Cn = counting_length(C, D, m_h);
  return std::to_string(C) + "," + std::to_string(D) + "," + std::to_string(m_h) + "," + cell(L) + "," +
         cell(try_necessary_length(C, D, m_h)) + "," + cell(Cn) + "," + cell(try_sufficient_length(C, D, m_h)) +
         "," + cell(U);
}

}  // namespace fbpr
