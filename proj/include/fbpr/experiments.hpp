#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <initializer_list>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fbpr/feasibility.hpp"
#include "fbpr/io.hpp"
#include "fbpr/lengths.hpp"

namespace fbpr {

// SplitMix64 finalizer applied to a keyed counter. Each stream is a pure
// function of (seed, stream key), so draws do not depend on scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) : key_(mix(seed)) {
    for (auto v : stream) key_ = mix(key_ ^ mix(v + 0x632be59bd9b4e019ull));
  }

  std::uint64_t next() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ull); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

enum class Distribution { uniform_var100, uniform_unit_var };

inline std::string_view to_string(Distribution d) {
  return d == Distribution::uniform_var100 ? "uniform_var100" : "uniform_unit_var";
}

// Zero-mean uniform with the requested variance: half-width sqrt(3 * var).
inline double half_width(Distribution d) { return d == Distribution::uniform_var100 ? std::sqrt(300.0) : std::sqrt(3.0); }

// Stream tags keep banks and signals drawn from disjoint substreams.
enum : std::uint64_t { kBankStream = 1, kSignalStream = 2 };

inline FilterBank<double> random_bank(int C, int D, int m_h, Distribution dist, CounterRng& rng) {
  const double a = half_width(dist);
  std::vector<std::vector<double>> taps(static_cast<std::size_t>(C), std::vector<double>(static_cast<std::size_t>(m_h)));
  for (auto& f : taps)
    for (auto& t : f) t = rng.uniform(-a, a);
  return FilterBank<double>(D, Role::analysis, std::move(taps));
}

inline std::vector<double> random_signal(int m_x, CounterRng& rng) {
  std::vector<double> x(static_cast<std::size_t>(m_x));
  const double a = std::sqrt(3.0);
  for (auto& v : x) v = rng.uniform(-a, a);
  return x;
}

// Bank for Monte-Carlo trial `trial` at channel count C. The bank does not
// depend on m_v, so one draw is tested against every synthesis length.
inline FilterBank<double> trial_bank(std::uint64_t seed, int C, int D, int m_h, int trial, Distribution dist) {
  CounterRng rng(seed, {kBankStream, static_cast<std::uint64_t>(C), static_cast<std::uint64_t>(D),
                        static_cast<std::uint64_t>(m_h), static_cast<std::uint64_t>(trial)});
  return random_bank(C, D, m_h, dist, rng);
}

inline std::vector<double> trial_signal(std::uint64_t seed, int C, int trial, int m_x) {
  CounterRng rng(seed, {kSignalStream, static_cast<std::uint64_t>(C), static_cast<std::uint64_t>(trial)});
  return random_signal(m_x, rng);
}

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// Runs fn(0..n-1) on a small worker pool; the first exception is rethrown.
template <class Fn>
void parallel_for(int n, Fn&& fn, unsigned threads = default_threads()) {
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (int k; (k = next.fetch_add(1)) < n;) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
        next.store(n);
      }
    }
  };
  const unsigned t = std::min<unsigned>(threads, static_cast<unsigned>(std::max(n, 1)));
  if (t <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------- lengths

struct LengthRow {
  int C, D, m_h;
  std::optional<int> mv_L, mv_N, mv_C, mv_S, mv_U;
  bool chain_checked = false;
  bool chain_holds = false;
};

inline LengthRow length_row(int C, int D, int m_h) {
  LengthRow r{C, D, m_h, std::nullopt, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
  r.mv_N = try_necessary_length(C, D, m_h);
  r.mv_S = try_sufficient_length(C, D, m_h);
  if (C > D) r.mv_C = counting_length(C, D, m_h);
  if (C >= 2 * D && m_h > D) {
    const auto rep = length_report(C, D, m_h);
    r.mv_L = rep.mv_L;
    r.mv_U = rep.mv_U;
    r.chain_checked = true;
    r.chain_holds = rep.chain_holds();
  }
  return r;
}

// Rows for C = D+1..C_max of every (D, m_h) pair.
inline std::vector<LengthRow> run_length_curves(const std::vector<int>& D_list, const std::vector<int>& m_h_list,
                                                int C_max) {
  std::vector<LengthRow> rows;
  for (int D : D_list)
    for (int m_h : m_h_list)
      for (int C = D + 1; C <= C_max; ++C) rows.push_back(length_row(C, D, m_h));
  return rows;
}

inline std::string length_curves_csv(const std::vector<LengthRow>& rows) {
  auto cell = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  std::ostringstream os;
  os << kLengthCsvHeader << '\n';
  for (const auto& r : rows)
    os << r.C << ',' << r.D << ',' << r.m_h << ',' << cell(r.mv_L) << ',' << cell(r.mv_N) << ',' << cell(r.mv_C)
       << ',' << cell(r.mv_S) << ',' << cell(r.mv_U) << '\n';
  return os.str();
}

// ------------------------------------------------------------ feasibility

struct McConfig {
  int C_min = 6, C_max = 24;
  int D = 3, m_h = 30;
  int mv_min = 3, mv_max = 30;
  int trials = 200;
  std::uint64_t seed = 0;
  Distribution distribution = Distribution::uniform_var100;
  DelayScan scan = DelayScan::multiples_of_D;
  double tol = kDefaultTolerance;
  double scale = 1.0;  // multiplies every drawn bank
  unsigned threads = default_threads();
};

struct TrialOutcome {
  double best_residual;  // min over scanned delays of the worst phase residual
  int first_feasible;    // -1 when no scanned delay is feasible
  int feasible_delays;
  std::vector<bool> verdicts;  // one per scanned delay, in scan order
};

struct FeasibilityCell {
  int C, m_v;
  bool valid;      // m_v >= D and the delay range is nonempty
  int successes;   // trials with a feasible scanned delay
  std::vector<TrialOutcome> trials;
};

struct ExperimentGrid {
  McConfig config;
  std::vector<FeasibilityCell> cells;  // C-major, then m_v
  std::vector<std::string> upset_violations;

  int mv_count() const { return config.mv_max - config.mv_min + 1; }
  const FeasibilityCell& cell(int C, int m_v) const {
    return cells.at(static_cast<std::size_t>((C - config.C_min) * mv_count() + (m_v - config.mv_min)));
  }
  // Successes recounted against another tolerance.
  int successes_at(int C, int m_v, double tol) const {
    int s = 0;
    for (const auto& t : cell(C, m_v).trials) s += t.best_residual <= tol;
    return s;
  }
  // Smallest m_v from which every cell up to mv_max has all trials feasible.
  std::optional<int> phase_boundary(int C) const {
    std::optional<int> b;
    for (int m_v = config.mv_max; m_v >= config.mv_min; --m_v) {
      const auto& c = cell(C, m_v);
      if (!c.valid || c.successes != config.trials) break;
      b = m_v;
    }
    return b;
  }
};

inline ExperimentGrid run_feasibility_mc(const McConfig& cfg) {
  detail::require(cfg.trials >= 1, "run_feasibility_mc: trials must be positive");
  detail::require(cfg.C_min >= 1 && cfg.C_min <= cfg.C_max, "run_feasibility_mc: bad channel range");
  detail::require(cfg.mv_min >= 1 && cfg.mv_min <= cfg.mv_max, "run_feasibility_mc: bad synthesis length range");
  detail::require(cfg.D >= 1 && cfg.m_h >= cfg.D, "run_feasibility_mc: need m_h >= D >= 1");
  detail::require(cfg.scale != 0.0 && std::isfinite(cfg.scale), "run_feasibility_mc: scale must be finite and nonzero");

  ExperimentGrid g{cfg, {}, {}};
  const int nC = cfg.C_max - cfg.C_min + 1;
  const int nV = g.mv_count();
  g.cells.reserve(static_cast<std::size_t>(nC * nV));
  for (int C = cfg.C_min; C <= cfg.C_max; ++C)
    for (int m_v = cfg.mv_min; m_v <= cfg.mv_max; ++m_v) {
      const bool valid = m_v >= cfg.D && !delay_range(cfg.m_h, m_v, cfg.D).empty();
      g.cells.push_back({C, m_v, valid, 0, std::vector<TrialOutcome>(valid ? static_cast<std::size_t>(cfg.trials) : 0)});
    }

  // One task per (C, trial): draw the bank once, sweep all m_v.
  parallel_for(
      nC * cfg.trials,
      [&](int task) {
        const int C = cfg.C_min + task / cfg.trials;
        const int trial = task % cfg.trials;
        auto bank = trial_bank(cfg.seed, C, cfg.D, cfg.m_h, trial, cfg.distribution);
        if (cfg.scale != 1.0) bank = bank.scaled(cfg.scale);
        PhaseCache<double> cache(bank);
        for (int m_v = cfg.mv_min; m_v <= cfg.mv_max; ++m_v) {
          auto& cell = g.cells[static_cast<std::size_t>((C - cfg.C_min) * nV + (m_v - cfg.mv_min))];
          if (!cell.valid) continue;
          const PolyphaseSystem<double> sys(cache, m_v);
          TrialOutcome out{std::numeric_limits<double>::infinity(), -1, 0, {}};
          for (int n0 : scanned_delays(cfg.m_h, m_v, cfg.D, cfg.scan)) {
            const double w = sys.worst_residual(n0);
            out.best_residual = std::min(out.best_residual, w);
            out.verdicts.push_back(w <= cfg.tol);
            if (w <= cfg.tol) {
              if (out.first_feasible < 0) out.first_feasible = n0;
              ++out.feasible_delays;
            }
          }
          cell.trials[static_cast<std::size_t>(trial)] = out;
        }
      },
      cfg.threads);

  for (auto& c : g.cells)
    for (const auto& t : c.trials) c.successes += t.first_feasible >= 0;

  // A trial whose feasible lengths are not an up-set is logged.
  for (int C = cfg.C_min; C <= cfg.C_max; ++C)
    for (int trial = 0; trial < cfg.trials; ++trial) {
      bool seen = false;
      for (int m_v = cfg.mv_min; m_v <= cfg.mv_max; ++m_v) {
        const auto& c = g.cell(C, m_v);
        if (!c.valid) continue;
        const bool ok = c.trials[static_cast<std::size_t>(trial)].first_feasible >= 0;
        if (seen && !ok) {
          g.upset_violations.push_back("C=" + std::to_string(C) + " trial=" + std::to_string(trial) +
                                       " infeasible at m_v=" + std::to_string(m_v) + " after a feasible shorter length");
          break;
        }
        seen = seen || ok;
      }
    }
  return g;
}

inline std::string feasibility_csv(const ExperimentGrid& g) {
  auto opt = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  std::ostringstream os;
  os << "C,m_v,successes,trials,mv_C,mv_S\n";
  for (const auto& c : g.cells) {
    const std::optional<int> mvC = c.C > g.config.D ? std::optional<int>(counting_length(c.C, g.config.D, g.config.m_h))
                                                    : std::nullopt;
    os << c.C << ',' << c.m_v << ',' << (c.valid ? std::to_string(c.successes) : std::string()) << ','
       << g.config.trials << ',' << opt(mvC) << ',' << opt(try_sufficient_length(c.C, g.config.D, g.config.m_h))
       << '\n';
  }
  return os.str();
}

// ------------------------------------------------------------- distortion

enum class DelayPolicy { minimal, fixed, best };

// Smallest delay at which every output phase has a target row: n0 = D - 1.
inline int minimal_delay(int D) { return D - 1; }

struct SweepConfig {
  int C = 7, D = 3, m_h = 30;
  int mv_min = 3, mv_max = 30;
  std::uint64_t seed = 0;
  int m_x = 100;
  DelayPolicy policy = DelayPolicy::minimal;
  int delay = 0;  // used with DelayPolicy::fixed
  Distribution distribution = Distribution::uniform_var100;
};

struct SweepRow {
  int m_v;
  int n0;
  bool feasible;
  double distortion_random;
  double distortion_pulse;
};

struct Sweep {
  SweepConfig config;
  std::optional<int> mv_C;
  std::vector<SweepRow> rows;
};

namespace detail {

inline std::optional<int> pick_delay(const FilterBank<double>& bank, int m_v, DelayPolicy policy, int fixed,
                                     const std::vector<double>& x) {
  const int D = bank.subsampling();
  const auto range = delay_range(bank.filter_length(), m_v, D);
  if (policy == DelayPolicy::fixed) return range.contains(fixed) ? std::optional<int>(fixed) : std::nullopt;
  if (policy == DelayPolicy::minimal)
    return range.contains(minimal_delay(D)) ? std::optional<int>(minimal_delay(D)) : std::nullopt;
  std::optional<int> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int n0 = 0; n0 <= range.hi; ++n0) {
    const auto s = design_synthesis(bank, m_v, n0);
    const double d = distortion(bank, s.bank, x, n0).percent;
    if (d < best_d) {
      best_d = d;
      best = n0;
    }
  }
  return best;
}

}  // namespace detail

inline Sweep run_distortion_sweep(const SweepConfig& cfg) {
  detail::require(cfg.mv_min >= cfg.D && cfg.mv_min <= cfg.mv_max, "run_distortion_sweep: need D <= mv_min <= mv_max");
  detail::require(cfg.m_x >= 1, "run_distortion_sweep: input length must be positive");
  const auto bank = trial_bank(cfg.seed, cfg.C, cfg.D, cfg.m_h, 0, cfg.distribution);
  const auto x = trial_signal(cfg.seed, cfg.C, 0, cfg.m_x);
  const std::vector<double> pulse{1.0};
  Sweep s{cfg, cfg.C > cfg.D ? std::optional<int>(counting_length(cfg.C, cfg.D, cfg.m_h)) : std::nullopt, {}};
  for (int m_v = cfg.mv_min; m_v <= cfg.mv_max; ++m_v) {
    const auto n0 = detail::pick_delay(bank, m_v, cfg.policy, cfg.delay, x);
    if (!n0) continue;
    const auto syn = design_synthesis(bank, m_v, *n0);
    s.rows.push_back({m_v, *n0, syn.exact(), distortion(bank, syn.bank, x, *n0).percent,
                      distortion(bank, syn.bank, pulse, *n0).percent});
  }
  return s;
}

inline std::string sweep_csv(const Sweep& s) {
  std::ostringstream os;
  os << "m_v,n0,feasible,distortion_random,distortion_pulse,mv_C\n";
  for (const auto& r : s.rows)
    os << r.m_v << ',' << r.n0 << ',' << (r.feasible ? 1 : 0) << ',' << format_real(r.distortion_random) << ','
       << format_real(r.distortion_pulse) << ',' << (s.mv_C ? std::to_string(*s.mv_C) : std::string()) << '\n';
  return os.str();
}

struct BoxplotConfig {
  int C_min = 7, C_max = 24;
  int D = 3, m_h = 30;
  int trials = 200;
  std::uint64_t seed = 0;
  int m_x = 100;
  DelayPolicy policy = DelayPolicy::minimal;
  int delay = 0;
  unsigned threads = default_threads();
};

struct BoxStats {
  int C, m_v, n0;
  double q1, median, q3;
  double whisker_lo, whisker_hi;
  int outliers;
  double frac_below_1pct;
  double coverage;  // fraction of samples inside the whiskers
  std::vector<double> samples;
};

// Sample quantile by linear interpolation between order statistics:
// position (n - 1) * prob in the sorted sample.
inline double quantile_sorted(const std::vector<double>& s, double prob) {
  detail::require(!s.empty(), "quantile of an empty sample");
  const double pos = prob * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

inline BoxStats box_stats(int C, int m_v, int n0, std::vector<double> samples) {
  std::vector<double> s = samples;
  std::sort(s.begin(), s.end());
  BoxStats b{C, m_v, n0, quantile_sorted(s, 0.25), quantile_sorted(s, 0.5), quantile_sorted(s, 0.75), 0, 0, 0, 0, 0,
             std::move(samples)};
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_lo = b.q1;
  b.whisker_hi = b.q3;
  int below = 0;
  for (double v : s) {
    if (v < lo_fence || v > hi_fence) {
      ++b.outliers;
    } else {
      b.whisker_lo = std::min(b.whisker_lo, v);
      b.whisker_hi = std::max(b.whisker_hi, v);
    }
    below += v < 1.0;
  }
  b.frac_below_1pct = static_cast<double>(below) / static_cast<double>(s.size());
  b.coverage = 1.0 - static_cast<double>(b.outliers) / static_cast<double>(s.size());
  return b;
}

// Synthesis length for the boxplot: ceil(0.9 * mv_C), never below D.
inline int boxplot_length(int C, int D, int m_h) { return std::max(D, ceil_div(9 * counting_length(C, D, m_h), 10)); }

inline std::vector<BoxStats> run_distortion_boxplot(const BoxplotConfig& cfg) {
  detail::require(cfg.trials >= 1, "run_distortion_boxplot: trials must be positive");
  detail::require(cfg.C_min > cfg.D && cfg.C_min <= cfg.C_max, "run_distortion_boxplot: need D < C_min <= C_max");
  std::vector<BoxStats> out;
  for (int C = cfg.C_min; C <= cfg.C_max; ++C) {
    const int m_v = boxplot_length(C, cfg.D, cfg.m_h);
    std::vector<double> samples(static_cast<std::size_t>(cfg.trials));
    std::vector<int> delays(static_cast<std::size_t>(cfg.trials), -1);
    parallel_for(
        cfg.trials,
        [&](int trial) {
          const auto bank = trial_bank(cfg.seed, C, cfg.D, cfg.m_h, trial, Distribution::uniform_unit_var);
          const auto x = trial_signal(cfg.seed, C, trial, cfg.m_x);
          const auto n0 = detail::pick_delay(bank, m_v, cfg.policy, cfg.delay, x);
          if (!n0) throw DomainError("run_distortion_boxplot: no admissible delay for C=" + std::to_string(C));
          const auto syn = design_synthesis(bank, m_v, *n0);
          samples[static_cast<std::size_t>(trial)] = distortion(bank, syn.bank, x, *n0).percent;
          delays[static_cast<std::size_t>(trial)] = *n0;
        },
        cfg.threads);
    // n0 is reported as -1 when the policy picked different delays per trial.
    const bool same = std::all_of(delays.begin(), delays.end(), [&](int d) { return d == delays.front(); });
    out.push_back(box_stats(C, m_v, same ? delays.front() : -1, std::move(samples)));
  }
  return out;
}

inline std::string boxplot_csv(const std::vector<BoxStats>& boxes) {
  std::ostringstream os;
  os << "C,m_v,n0,q1,median,q3,whisker_lo,whisker_hi,outliers,frac_below_1pct,coverage\n";
  for (const auto& b : boxes)
    os << b.C << ',' << b.m_v << ',' << b.n0 << ',' << format_real(b.q1) << ',' << format_real(b.median) << ','
       << format_real(b.q3) << ',' << format_real(b.whisker_lo) << ',' << format_real(b.whisker_hi) << ','
       << b.outliers << ',' << format_real(b.frac_below_1pct) << ',' << format_real(b.coverage) << '\n';
  return os.str();
}

}  // namespace fbpr
