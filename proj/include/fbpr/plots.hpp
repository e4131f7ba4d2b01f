#pragma once

#include <string>
#include <vector>

#include "fbpr/experiments.hpp"
#include "fbpr/svg.hpp"

namespace fbpr {

// Length functionals against C, one group of curves per (D, m_h).
inline std::string length_curves_svg(const std::vector<LengthRow>& rows) {
  std::vector<svg::Series> series;
  auto add = [&series](const std::string& name, bool dashed) -> svg::Series& {
    for (auto& s : series)
      if (s.name == name) return s;
    series.push_back({name, {}, dashed});
    return series.back();
  };
  for (const auto& r : rows) {
    const std::string tag = " D=" + std::to_string(r.D) + " m_h=" + std::to_string(r.m_h);
    if (r.mv_N) add("mv_N" + tag, true).points.emplace_back(r.C, *r.mv_N);
    if (r.mv_C) add("mv_C" + tag, false).points.emplace_back(r.C, *r.mv_C);
    if (r.mv_S) add("mv_S" + tag, false).points.emplace_back(r.C, *r.mv_S);
  }
  return svg::line_chart("Synthesis length functionals", "channels C", "m_v", series);
}

inline std::string feasibility_svg(const ExperimentGrid& g) {
  const auto& c = g.config;
  svg::Series mvC{"mv_C", {}, false}, mvS{"mv_S", {}, true};
  for (int C = c.C_min; C <= c.C_max; ++C) {
    if (C > c.D) mvC.points.emplace_back(C, counting_length(C, c.D, c.m_h));
    if (auto s = try_sufficient_length(C, c.D, c.m_h); s && *s <= c.mv_max) mvS.points.emplace_back(C, *s);
  }
  auto value = [&g](int C, int m_v) -> std::optional<double> {
    const auto& cell = g.cell(C, m_v);
    if (!cell.valid) return std::nullopt;
    return static_cast<double>(cell.successes);
  };
  return svg::heatmap("PR-feasible banks out of " + std::to_string(c.trials) + " (D=" + std::to_string(c.D) +
                          ", m_h=" + std::to_string(c.m_h) + ")",
                      "channels C", "m_v", c.C_min, c.C_max, c.mv_min, c.mv_max, value, c.trials, {mvC, mvS});
}

inline std::string sweep_svg(const Sweep& s) {
  svg::Series rnd{"random input", {}, false}, pulse{"unit pulse", {}, true};
  for (const auto& r : s.rows) {
    rnd.points.emplace_back(r.m_v, r.distortion_random);
    pulse.points.emplace_back(r.m_v, r.distortion_pulse);
  }
  return svg::line_chart("Reconstruction distortion (C=" + std::to_string(s.config.C) + ", D=" +
                             std::to_string(s.config.D) + ", m_h=" + std::to_string(s.config.m_h) + ")",
                         "m_v", "distortion [%]", {rnd, pulse});
}

inline std::string boxplot_svg(const std::vector<BoxStats>& boxes) {
  std::vector<svg::Box> b;
  for (const auto& x : boxes) b.push_back({static_cast<double>(x.C), x.q1, x.median, x.q3, x.whisker_lo, x.whisker_hi});
  return svg::boxplot("Distortion at m_v = ceil(0.9 mv_C)", "channels C", "distortion [%]", b);
}

}  // namespace fbpr
