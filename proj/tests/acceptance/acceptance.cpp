// Acceptance run: one PASS/FAIL line per criterion, with wall time against its budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "fbpr/fbpr.hpp"

using namespace fbpr;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

void run(int id, const char* title, double budget_s, const std::function<Verdict()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v{false, ""};
  try {
    v = fn();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = budget_s <= 0 || secs <= budget_s;
  const bool pass = v.pass && in_time;
  failures += !pass;
  std::printf("%s  AC%-2d %s: %s [%.2f s", pass ? "PASS" : "FAIL", id, title, v.detail.c_str(), secs);
  if (budget_s > 0) std::printf(" / budget %.0f s%s", budget_s, in_time ? "" : ", over budget");
  std::printf("]\n");
  std::fflush(stdout);
}

double rel_err(const std::vector<double>& a, std::vector<double> b) {
  std::vector<double> aa = a;
  const std::size_t n = std::max(aa.size(), b.size());
  aa.resize(n, 0.0);
  b.resize(n, 0.0);
  double d = 0, s = 0;
  for (std::size_t k = 0; k < n; ++k) {
    d += (aa[k] - b[k]) * (aa[k] - b[k]);
    s += b[k] * b[k];
  }
  return s > 0 ? std::sqrt(d / s) : std::sqrt(d);
}

McConfig phase_grid_config() {
  McConfig cfg;  // C 6..24, D 3, m_h 30, m_v 3..30, 200 trials, variance-100 uniform
  return cfg;
}

std::optional<ExperimentGrid> phase_grid;

}  // namespace

int main() {
  run(1, "exact lengths", 1, [] {
    const int s = sufficient_length(6, 3, 7), n = necessary_length(6, 3, 13);
    std::ostringstream os;
    os << "mv_S(6,3,7)=" << s << " mv_N(6,3,13)=" << n;
    return Verdict{s == 6 && n == 9, os.str()};
  });

  run(2, "matrix shapes", 1, [] {
    const auto a = build_hp(trial_bank(0, 6, 3, 7, 0, Distribution::uniform_var100), 6, 2);
    const auto b = build_hp(trial_bank(0, 6, 3, 13, 0, Distribution::uniform_var100), 8, 2);
    std::ostringstream os;
    os << a.rows() << "x" << a.cols() << " and " << b.rows() << "x" << b.cols();
    return Verdict{a.rows() == 10 && a.cols() == 12 && b.rows() == 16 && b.cols() == 12, os.str()};
  });

  run(3, "target row anchor", 1, [] {
    const int k = kappa(2, 6, 13, 8, 3);
    return Verdict{k == 13, "kappa(2,6)=" + std::to_string(k)};
  });

  run(4, "rank certificates", 1, [] {
    const auto r1 = algorithm1_bank(6, 3, 7, 6);
    const auto r2 = algorithm2_bank(6, 3, 13, 8, 6, TargetIndexing::closed_form);
    if (!succeeded(r1) || !succeeded(r2)) return Verdict{false, "construction failed"};
    const auto& c1 = std::get<CertificateBank>(r1);
    const auto& c2 = std::get<CertificateBank>(r2);
    const std::vector<std::vector<int>> want1{{0}, {6}, {1}, {4}, {2}, {5}};
    const std::vector<std::vector<int>> want2{{6}, {12}, {1}, {7}, {2}, {8, 0}};
    const auto v1 = verify_certificate(c1), v2 = verify_certificate(c2);
    std::ostringstream os;
    os << "row cert ranks";
    for (const auto& r : v1.ranks) os << ' ' << r.rank << '/' << r.rows;
    os << ", augmented rank " << v2.ranks.at(0).rank << '/' << v2.ranks.at(0).cols;
    return Verdict{v1.ok && v2.ok && c1.assignments == want1 && c2.assignments == want2, os.str()};
  });

  run(5, "length chain, gap bounds, multiples of D", 10, [] {
    long cells = 0, chain_bad = 0, gap_bad = 0, mult_bad = 0;
    for (int D = 2; D <= 6; ++D)
      for (int C = 2 * D; C <= 32; ++C)
        for (int m_h = D + 1; m_h <= 64; ++m_h) {
          const auto r = length_report(C, D, m_h);
          ++cells;
          chain_bad += !r.chain_holds();
          gap_bad += !r.gap_certificate->all_below();
          if (C % D == 0) mult_bad += r.mv_S != r.mv_C;
        }
    std::ostringstream os;
    os << cells << " cells; chain violations " << chain_bad << ", gap violations " << gap_bad
       << ", mv_S != mv_C at C=kD " << mult_bad;
    return Verdict{chain_bad == 0 && gap_bad == 0 && mult_bad == 0, os.str()};
  });

  run(6, "feasibility phase diagram", 600, [] {
    phase_grid = run_feasibility_mc(phase_grid_config());
    const auto& g = *phase_grid;
    const auto& cfg = g.config;
    int above_bad = 0, below_bad = 0, checked_above = 0, checked_below = 0;
    std::string first;
    for (int C = cfg.C_min; C <= cfg.C_max; ++C) {
      const int mvS = sufficient_length(C, cfg.D, cfg.m_h);
      const int mvC = counting_length(C, cfg.D, cfg.m_h);
      for (int m_v = cfg.mv_min; m_v <= cfg.mv_max; ++m_v) {
        const auto& cell = g.cell(C, m_v);
        if (!cell.valid) continue;
        if (m_v >= mvS) {
          ++checked_above;
          if (cell.successes != cfg.trials) {
            ++above_bad;
            if (first.empty()) first = " first: C=" + std::to_string(C) + " m_v=" + std::to_string(m_v);
          }
        }
        if (m_v < mvC) {
          ++checked_below;
          if (cell.successes != 0) {
            ++below_bad;
            if (first.empty()) first = " first: C=" + std::to_string(C) + " m_v=" + std::to_string(m_v);
          }
        }
      }
    }
    std::ostringstream os;
    os << checked_above << " cells at/above mv_S (" << above_bad << " not 200/200), " << checked_below
       << " cells below mv_C (" << below_bad << " not 0/200), up-set violations " << g.upset_violations.size() << first;
    return Verdict{above_bad == 0 && below_bad == 0, os.str()};
  });

  run(7, "distortion knee", 60, [] {
    SweepConfig cfg;  // C 7, D 3, m_h 30, seed 0, delay D-1
    const auto s = run_distortion_sweep(cfg);
    bool ok = true;
    std::ostringstream os;
    for (const auto& r : s.rows) {
      if (r.m_v >= 21) ok = ok && r.distortion_random <= 1e-6 && r.distortion_pulse <= 1e-6;
      if (r.m_v == 20) {
        ok = ok && r.distortion_random > 10 && r.distortion_pulse > 10;
        os << "m_v=20: " << r.distortion_random << "% / " << r.distortion_pulse << "%; ";
      }
      if (r.m_v == 18) {
        ok = ok && r.distortion_random > 30 && r.distortion_pulse > 30;
        os << "m_v=18: " << r.distortion_random << "% / " << r.distortion_pulse << "%; ";
      }
    }
    double worst = 0;
    for (const auto& r : s.rows)
      if (r.m_v >= 21) worst = std::max({worst, r.distortion_random, r.distortion_pulse});
    os << "max for m_v>=21: " << worst << "% (n0=" << minimal_delay(3) << ")";
    return Verdict{ok && s.rows.size() == 28, os.str()};
  });

  run(8, "oracle equivalence", 60, [] {
    std::mt19937 gen(2024);
    std::uniform_real_distribution<double> u(-1, 1);
    auto draw = [&](int C, int D, int m, Role role) {
      std::vector<std::vector<double>> t(static_cast<std::size_t>(C), std::vector<double>(static_cast<std::size_t>(m)));
      for (auto& f : t)
        for (auto& v : f) v = u(gen);
      return FilterBank<double>(D, role, std::move(t));
    };
    double worst_sim = 0, worst_pr = 0;
    for (int k = 0; k < 100; ++k) {
      const int D = 1 + k % 4;
      const int C = D + 1 + static_cast<int>(gen() % (2 * D + 4));
      const int m_h = D + static_cast<int>(gen() % 20);
      const int m_v = D + static_cast<int>(gen() % 20);
      std::vector<double> x(1 + gen() % 100);
      for (auto& s : x) s = u(gen);
      const auto h = draw(C, D, m_h, Role::analysis);
      const auto v = draw(C, D, m_v, Role::synthesis);
      worst_sim = std::max(worst_sim, rel_err(polyphase_response(h, v, x), simulate(h, v, x)));

      // A perfect-reconstruction design on a bank wide enough to admit one.
      const int Cw = 2 * D + static_cast<int>(gen() % (2 * D + 2));
      const int mh = 2 * D + static_cast<int>(gen() % 30);
      const auto hw = draw(Cw, D, mh, Role::analysis);
      const int mv = sufficient_length(Cw, D, mh);
      const auto range = delay_range(mh, mv, D);
      const int n0 = D - 1 + static_cast<int>(gen() % static_cast<unsigned>(range.hi - (D - 1) + 1));
      const auto syn = design_synthesis(hw, mv, n0);
      if (!syn.exact()) return Verdict{false, "design not exact at mv_S for trial " + std::to_string(k)};
      std::vector<double> ref(static_cast<std::size_t>(n0), 0.0);
      ref.insert(ref.end(), x.begin(), x.end());
      worst_pr = std::max(worst_pr, rel_err(simulate(hw, syn.bank, x), ref));
    }
    std::ostringstream os;
    os << "simulate vs polyphase max rel err " << worst_sim << ", PR reconstruction max rel err " << worst_pr;
    return Verdict{worst_sim <= 1e-10 && worst_pr <= 1e-8, os.str()};
  });

  run(9, "scale invariance of verdicts", 120, [] {
    if (!phase_grid) phase_grid = run_feasibility_mc(phase_grid_config());
    auto cfg = phase_grid_config();
    cfg.scale = -0.0137;
    const auto scaled = run_feasibility_mc(cfg);
    long compared = 0, differ = 0;
    for (std::size_t k = 0; k < phase_grid->cells.size(); ++k) {
      const auto& a = phase_grid->cells[k].trials;
      const auto& b = scaled.cells[k].trials;
      for (std::size_t t = 0; t < a.size(); ++t) {
        compared += static_cast<long>(a[t].verdicts.size());
        for (std::size_t d = 0; d < a[t].verdicts.size(); ++d) differ += a[t].verdicts[d] != b[t].verdicts[d];
      }
    }
    std::ostringstream os;
    os << compared << " (cell, trial, delay) verdicts under scale " << cfg.scale << ", " << differ << " differ";
    return Verdict{differ == 0 && compared > 0, os.str()};
  });

  // Reported only.
  {
    const auto t0 = std::chrono::steady_clock::now();
    if (!phase_grid) phase_grid = run_feasibility_mc(phase_grid_config());
    const auto& g = *phase_grid;
    int agree = 0, total = 0;
    std::ostringstream log;
    for (int C = g.config.C_min; C <= g.config.C_max; ++C) {
      const int mvC = counting_length(C, g.config.D, g.config.m_h);
      // Per trial the empirical minimal length is the first feasible m_v.
      for (int trial = 0; trial < g.config.trials; ++trial) {
        std::optional<int> first;
        for (int m_v = g.config.mv_min; m_v <= g.config.mv_max && !first; ++m_v) {
          const auto& cell = g.cell(C, m_v);
          if (cell.valid && cell.trials[static_cast<std::size_t>(trial)].first_feasible >= 0) first = m_v;
        }
        ++total;
        if (first == mvC) {
          ++agree;
        } else {
          log << "\n      finding: C=" << C << " trial=" << trial << " minimal feasible m_v="
              << (first ? std::to_string(*first) : std::string("none in range")) << " vs mv_C=" << mvC;
        }
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("INFO  AC10 minimal feasible length vs counting length: %d/%d (C, trial) pairs agree [%.2f s]%s\n", agree,
                total, secs, log.str().c_str());
  }

  if (failures)
    std::printf("FAILED: %d criterion(s) failed\n", failures);
  else
    std::printf("ALL PASSED\n");
  return failures ? 1 : 0;
}
