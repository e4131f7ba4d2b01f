// Command-line front end: length functionals, feasibility tests, synthesis
// design, simulation, certificates and the Monte-Carlo experiments.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fbpr/fbpr.hpp"

namespace {

using namespace fbpr;

constexpr int kExitDomain = 2;
constexpr int kExitSolver = 3;

struct Common {
  int C = 0, D = 0, m_h = 0, m_v = 0;
  std::string delay;
  int trials = 200;
  std::uint64_t seed = 0;
  double tol = kDefaultTolerance;
  std::string out, svg_path;
  bool all_delays = false;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw DomainError("cannot write '" + path + "'");
  f << text;
}

int parse_int(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw DomainError(std::string(what) + ": expected an integer, got '" + s + "'");
}

Distribution parse_distribution(const std::string& s) {
  if (s == "var100" || s == "uniform_var100") return Distribution::uniform_var100;
  if (s == "unit" || s == "uniform_unit_var") return Distribution::uniform_unit_var;
  throw DomainError("unknown distribution '" + s + "' (use var100 or unit)");
}

// Analysis bank from --bank, or a random draw keyed by --seed.
struct BankSource {
  std::string path;
  bool random = false;
  std::string distribution = "var100";
};

FilterBank<std::complex<double>> obtain_bank(const BankSource& src, const Common& c) {
  if (!src.path.empty()) {
    auto b = load_bank(src.path);
    detail::require(b.role() == Role::analysis, "expected an analysis bank in '" + src.path + "'");
    return b;
  }
  detail::require(src.random, "give --bank <file> or --random with -C, -D and --filter-len");
  detail::require(c.C >= 1 && c.D >= 1 && c.m_h >= c.D, "--random needs -C, -D and --filter-len >= D");
  return trial_bank(c.seed, c.C, c.D, c.m_h, 0, parse_distribution(src.distribution)).cast<std::complex<double>>();
}

std::vector<std::complex<double>> read_signal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open input signal '" + path + "'");
  std::vector<std::complex<double>> x;
  for (std::string tok; in >> tok;) x.push_back(parse_scalar(tok));
  detail::require(!x.empty(), "input signal '" + path + "' is empty");
  return x;
}

DelayPolicy parse_policy(const std::string& s, int& fixed) {
  if (s.empty() || s == "minimal") return DelayPolicy::minimal;
  if (s == "best") return DelayPolicy::best;
  fixed = parse_int(s, "--delay");
  return DelayPolicy::fixed;
}

std::string format_residuals(const FeasibilityResult& r) {
  std::ostringstream os;
  os << "n0=" << r.n0 << " feasible=" << (r.feasible ? 1 : 0) << " tol=" << format_real(r.tol) << " residuals=";
  for (std::size_t p = 0; p < r.residuals.size(); ++p) os << (p ? "," : "") << format_real(r.residuals[p]);
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oversampled FIR filter banks: synthesis lengths, PR feasibility and design"};
  app.require_subcommand(1);
  Common c;

  auto add_shape = [&c](CLI::App* s) {
    s->add_option("-C,--channels", c.C, "number of channels");
    s->add_option("-D,--subsampling", c.D, "subsampling factor");
    s->add_option("--filter-len", c.m_h, "analysis filter length m_h");
  };
  auto add_output = [&c](CLI::App* s, bool with_svg) {
    s->add_option("--out", c.out, "output path (CSV or bank file); stdout when omitted");
    if (with_svg) s->add_option("--svg", c.svg_path, "write an SVG plot to this path");
  };

  // lengths
  auto* lengths = app.add_subcommand("lengths", "length functionals for one (C, D, m_h) or whole curves");
  add_shape(lengths);
  add_output(lengths, true);
  bool curves = false, show_gaps = false;
  std::vector<int> d_list{1, 2, 3, 4}, mh_list{30};
  int c_max = 24;
  lengths->add_flag("--curves", curves, "emit curves over C = D+1..--c-max");
  lengths->add_option("--d-list", d_list, "subsampling factors for --curves")->delimiter(',');
  lengths->add_option("--mh-list", mh_list, "analysis lengths for --curves")->delimiter(',');
  lengths->add_option("--c-max", c_max, "largest channel count for --curves");
  lengths->add_flag("--gaps", show_gaps, "also print the gap values and their bounds");

  // feasible
  BankSource src;
  auto add_bank = [&src](CLI::App* s) {
    s->add_option("--bank", src.path, "analysis bank file");
    s->add_flag("--random", src.random, "draw a random analysis bank from --seed");
    s->add_option("--distribution", src.distribution, "random bank distribution: var100 or unit");
  };
  auto* feasible = app.add_subcommand("feasible", "test PR feasibility of a synthesis length");
  add_shape(feasible);
  add_bank(feasible);
  feasible->add_option("--synth-len", c.m_v, "synthesis filter length m_v")->required();
  feasible->add_option("--delay", c.delay, "delay n0; all admissible delays are scanned when omitted");
  feasible->add_option("--tol", c.tol, "residual tolerance");
  feasible->add_option("--seed", c.seed, "seed for --random");

  // design
  auto* design = app.add_subcommand("design", "minimum-norm synthesis bank for a delay");
  add_shape(design);
  add_bank(design);
  add_output(design, false);
  design->add_option("--synth-len", c.m_v, "synthesis filter length m_v")->required();
  design->add_option("--delay", c.delay, "delay n0")->required();
  design->add_option("--tol", c.tol, "residual tolerance");
  design->add_option("--seed", c.seed, "seed for --random");

  // simulate
  std::string synth_path, input_path;
  bool pulse = false;
  auto* simulate_cmd = app.add_subcommand("simulate", "run a signal through analysis and synthesis banks");
  add_output(simulate_cmd, false);
  simulate_cmd->add_option("--bank", src.path, "analysis bank file")->required();
  simulate_cmd->add_option("--synth", synth_path, "synthesis bank file")->required();
  simulate_cmd->add_option("--input", input_path, "input signal file (whitespace-separated scalars)");
  simulate_cmd->add_flag("--pulse", pulse, "use a unit pulse as input");
  simulate_cmd->add_option("--delay", c.delay, "report the distortion against x delayed by n0");

  // certificate
  int algorithm = 1;
  std::string json_path;
  auto* cert_cmd = app.add_subcommand("certificate", "0/1 rank-certificate bank from the covering constructions");
  add_shape(cert_cmd);
  add_output(cert_cmd, false);
  cert_cmd->add_option("--algorithm", algorithm, "1: full row rank, 2: full column rank of [H_p | delta]")
      ->check(CLI::IsMember({1, 2}));
  cert_cmd->add_option("--synth-len", c.m_v, "synthesis filter length m_v")->required();
  cert_cmd->add_option("--delay", c.delay, "delay n0 (algorithm 2)");
  cert_cmd->add_option("--json", json_path, "write the assignment sidecar to this path");
  bool time_domain_row = false;
  cert_cmd->add_flag("--time-domain-row", time_domain_row,
                     "algorithm 2 targets the time-domain reconstruction row instead of the closed form");

  // mc-feasibility
  McConfig mc;
  std::string mc_dist = "var100";
  auto* mc_cmd = app.add_subcommand("mc-feasibility", "Monte-Carlo PR-feasibility grid over (C, m_v)");
  add_output(mc_cmd, true);
  mc_cmd->add_option("-C,--channels", c.C, "single channel count (overrides --c-min/--c-max)");
  mc_cmd->add_option("--c-min", mc.C_min, "smallest channel count");
  mc_cmd->add_option("--c-max", mc.C_max, "largest channel count");
  mc_cmd->add_option("-D,--subsampling", mc.D, "subsampling factor");
  mc_cmd->add_option("--filter-len", mc.m_h, "analysis filter length m_h");
  mc_cmd->add_option("--mv-min", mc.mv_min, "smallest synthesis length");
  mc_cmd->add_option("--mv-max", mc.mv_max, "largest synthesis length");
  mc_cmd->add_option("--trials", mc.trials, "Monte-Carlo trials per cell");
  mc_cmd->add_option("--seed", mc.seed, "random seed");
  mc_cmd->add_option("--tol", mc.tol, "residual tolerance");
  mc_cmd->add_option("--distribution", mc_dist, "bank distribution: var100 or unit");
  mc_cmd->add_option("--threads", mc.threads, "worker threads");
  mc_cmd->add_flag("--all-delays", c.all_delays, "scan every delay rather than multiples of D");

  // distortion-sweep
  SweepConfig sw;
  auto* sweep_cmd = app.add_subcommand("distortion-sweep", "distortion against m_v for one random bank");
  add_output(sweep_cmd, true);
  sweep_cmd->add_option("-C,--channels", sw.C, "number of channels");
  sweep_cmd->add_option("-D,--subsampling", sw.D, "subsampling factor");
  sweep_cmd->add_option("--filter-len", sw.m_h, "analysis filter length m_h");
  sweep_cmd->add_option("--mv-min", sw.mv_min, "smallest synthesis length");
  sweep_cmd->add_option("--mv-max", sw.mv_max, "largest synthesis length");
  sweep_cmd->add_option("--seed", sw.seed, "random seed");
  sweep_cmd->add_option("--delay", c.delay, "delay: an integer, 'minimal' (D-1, default) or 'best'");

  // distortion-boxplot
  BoxplotConfig bx;
  auto* box_cmd = app.add_subcommand("distortion-boxplot", "distortion spread at m_v = ceil(0.9 mv_C)");
  add_output(box_cmd, true);
  box_cmd->add_option("--c-min", bx.C_min, "smallest channel count");
  box_cmd->add_option("--c-max", bx.C_max, "largest channel count");
  box_cmd->add_option("-D,--subsampling", bx.D, "subsampling factor");
  box_cmd->add_option("--filter-len", bx.m_h, "analysis filter length m_h");
  box_cmd->add_option("--trials", bx.trials, "Monte-Carlo trials per box");
  box_cmd->add_option("--seed", bx.seed, "random seed");
  box_cmd->add_option("--threads", bx.threads, "worker threads");
  box_cmd->add_option("--delay", c.delay, "delay: an integer, 'minimal' (D-1, default) or 'best'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitDomain;
  }

  try {
    if (lengths->parsed()) {
      if (curves) {
        const auto rows = run_length_curves(d_list, mh_list, c_max);
        write_text(c.out, length_curves_csv(rows));
        if (!c.svg_path.empty()) write_text(c.svg_path, length_curves_svg(rows));
        for (const auto& r : rows)
          if (r.chain_checked && !r.chain_holds)
            std::cerr << "chain violated at C=" << r.C << " D=" << r.D << " m_h=" << r.m_h << '\n';
      } else {
        detail::require(c.C >= 1 && c.D >= 1 && c.m_h >= c.D, "lengths needs -C, -D and --filter-len >= D");
        const auto r = length_row(c.C, c.D, c.m_h);
        std::string text = length_curves_csv({r});
        if (show_gaps && c.D >= 2 && c.C >= 2 * c.D && c.m_h > c.D) {
          const auto g = gaps(c.C, c.D, c.m_h);
          auto frac = [](const Rational& q) { return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator()); };
          text += "gap_SN=" + std::to_string(g.gap_SN) + " < " + frac(g.bound_SN) + "\n" +
                  "gap_UC=" + std::to_string(g.gap_UC) + " < " + frac(g.bound_UC) + "\n" +
                  "gap_CL=" + std::to_string(g.gap_CL) + " < " + frac(g.bound_CL) + "\n";
        }
        write_text(c.out, text);
      }
    } else if (feasible->parsed()) {
      const auto bank = obtain_bank(src, c);
      const int m_h = bank.filter_length(), D = bank.subsampling();
      if (!c.delay.empty()) {
        std::cout << format_residuals(pr_feasible(bank, c.m_v, parse_int(c.delay, "--delay"), c.tol)) << '\n';
      } else {
        const PolyphaseSystem<std::complex<double>> sys(bank, c.m_v);
        const auto found = search_delays(sys, m_h, DelayScan::all, c.tol);
        const auto range = delay_range(m_h, c.m_v, D);
        std::cout << "delays=0.." << range.hi << " feasible="
                  << (found.first_feasible ? 1 : 0);
        if (found.first_feasible) std::cout << " n0=" << *found.first_feasible;
        std::cout << " best_residual=" << format_real(found.best_residual) << '\n';
      }
    } else if (design->parsed()) {
      const auto bank = obtain_bank(src, c);
      const auto s = design_synthesis(bank, c.m_v, parse_int(c.delay, "--delay"), c.tol);
      std::ostringstream os;
      write_bank(os, s.bank);
      write_text(c.out, os.str());
      std::cerr << format_residuals(s.feasibility) << (s.exact() ? "" : " (least-squares approximation)") << '\n';
    } else if (simulate_cmd->parsed()) {
      const auto a = load_bank(src.path);
      const auto s = load_bank(synth_path);
      detail::require(pulse != !input_path.empty(), "give exactly one of --input and --pulse");
      const auto x = pulse ? std::vector<std::complex<double>>{1.0} : read_signal(input_path);
      const auto y = simulate(a, s, x);
      std::ostringstream os;
      for (const auto& v : y) os << format_scalar(v) << '\n';
      write_text(c.out, os.str());
      if (!c.delay.empty())
        std::cerr << "distortion_percent=" << format_real(distortion(a, s, x, parse_int(c.delay, "--delay")).percent)
                  << '\n';
    } else if (cert_cmd->parsed()) {
      const auto res = algorithm == 1
                           ? algorithm1_bank(c.C, c.D, c.m_h, c.m_v)
                           : algorithm2_bank(c.C, c.D, c.m_h, c.m_v, c.delay.empty() ? 0 : parse_int(c.delay, "--delay"),
                                             time_domain_row ? TargetIndexing::time_domain : TargetIndexing::closed_form);
      if (const auto* f = std::get_if<ConstructionFailure>(&res)) {
        std::cout << "failure after " << f->block_columns_used << " block-columns: " << f->reason << '\n';
        return 0;
      }
      const auto& cert = std::get<CertificateBank>(res);
      std::ostringstream os;
      write_bank(os, cert.bank);
      write_text(c.out, os.str());
      if (!json_path.empty()) write_text(json_path, certificate_json(cert).dump(2) + "\n");
      const auto rep = verify_certificate(cert);
      std::cerr << "verified=" << (rep.ok ? 1 : 0) << ' ' << rep.message << '\n';
    } else if (mc_cmd->parsed()) {
      if (c.C > 0) mc.C_min = mc.C_max = c.C;
      mc.scan = c.all_delays ? DelayScan::all : DelayScan::multiples_of_D;
      mc.distribution = parse_distribution(mc_dist);
      const auto g = run_feasibility_mc(mc);
      write_text(c.out, feasibility_csv(g));
      if (!c.svg_path.empty()) write_text(c.svg_path, feasibility_svg(g));
      for (const auto& v : g.upset_violations) std::cerr << "up-set violation: " << v << '\n';
    } else if (sweep_cmd->parsed()) {
      sw.policy = parse_policy(c.delay, sw.delay);
      const auto s = run_distortion_sweep(sw);
      write_text(c.out, sweep_csv(s));
      if (!c.svg_path.empty()) write_text(c.svg_path, sweep_svg(s));
    } else if (box_cmd->parsed()) {
      bx.policy = parse_policy(c.delay, bx.delay);
      const auto boxes = run_distortion_boxplot(bx);
      write_text(c.out, boxplot_csv(boxes));
      if (!c.svg_path.empty()) write_text(c.svg_path, boxplot_svg(boxes));
    }
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
  return 0;
}
