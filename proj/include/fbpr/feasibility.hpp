#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/SVD>

#include "fbpr/polyphase_matrix.hpp"

namespace fbpr {

inline constexpr double kDefaultTolerance = 1e-8;

// Range membership via a thin SVD. Singular values at or below
// max(rows, cols) * eps * sigma_max count as zero.
template <class T>
class RangeTester {
 public:
  using Real = typename Eigen::NumTraits<T>::Real;

  explicit RangeTester(const Matrix<T>& A, bool with_solver = false) : rows_(static_cast<int>(A.rows())) {
    if (!A.allFinite()) throw SolverError("range test: matrix has non-finite entries");
    const int opts = with_solver ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : Eigen::ComputeThinU;
    Eigen::BDCSVD<Matrix<T>> svd(A, opts);
    if (svd.info() != Eigen::Success) throw SolverError("range test: SVD did not converge");
    set_rank(svd.singularValues(), A);
    U_ = svd.matrixU().leftCols(rank_);
    if (with_solver) V_ = svd.matrixV().leftCols(rank_);
  }

  int rows() const { return rows_; }
  int rank() const { return static_cast<int>(rank_); }
  bool full_row_rank() const { return rank_ == rows_; }
  const Vector<Real>& singular_values() const { return s_; }

  // || e_k - U U^H e_k ||, evaluated directly rather than as sqrt(1 - |u_k|^2).
  double residual_unit(int k) const {
    if (full_row_rank()) return 0.0;
    Vector<T> e = -(U_ * U_.row(k).adjoint());
    e(k) += T(1);
    return static_cast<double>(e.norm());
  }

  double residual(const Vector<T>& b) const {
    if (full_row_rank()) return 0.0;
    return static_cast<double>((b - U_ * (U_.adjoint() * b)).norm());
  }

  Vector<T> min_norm_solution(const Vector<T>& b) const {
    if (V_.cols() != rank_) throw DomainError("range test: built without solver factors");
    Vector<T> c = U_.adjoint() * b;
    for (Eigen::Index k = 0; k < rank_; ++k) c(k) /= s_(k);
    return V_ * c;
  }

 private:
  void set_rank(const Vector<Real>& s, const Matrix<T>& A) {
    s_ = s;
    const Real smax = s_.size() ? s_(0) : Real(0);
    const Real cut = static_cast<Real>(std::max(A.rows(), A.cols())) * std::numeric_limits<Real>::epsilon() * smax;
    rank_ = 0;
    while (rank_ < s_.size() && s_(rank_) > cut && s_(rank_) > Real(0)) ++rank_;
  }

  int rows_;
  Eigen::Index rank_ = 0;
  Vector<Real> s_;
  Matrix<T> U_, V_;
};

// Factorizations of H_p for one bank, keyed by n = m_{v;p}. H_p depends on
// (p, m_v) only through n, so a sweep over m_v reuses most of them.
template <class T>
class PhaseCache {
 public:
  struct Entry {
    PolyphaseMatrix<T> matrix;
    RangeTester<T> tester;
  };

  PhaseCache(const FilterBank<T>& bank, bool with_solver = false) : bank_(bank), with_solver_(with_solver) {}

  const FilterBank<T>& bank() const { return bank_; }
  bool with_solver() const { return with_solver_; }
  std::size_t size() const { return entries_.size(); }

  std::shared_ptr<const Entry> get(int m_v, int p) {
    const int n = polyphase_length(m_v, bank_.subsampling(), p);
    auto it = entries_.find(n);
    if (it == entries_.end()) {
      auto H = build_hp(bank_, m_v, p);
      RangeTester<T> t(H.entries, with_solver_);
      it = entries_.emplace(n, std::make_shared<const Entry>(Entry{std::move(H), std::move(t)})).first;
    }
    return it->second;
  }

 private:
  FilterBank<T> bank_;
  bool with_solver_;
  std::map<int, std::shared_ptr<const Entry>> entries_;
};

// The D systems H_p w_p = delta for one (bank, m_v).
template <class T>
class PolyphaseSystem {
 public:
  PolyphaseSystem(const FilterBank<T>& bank, int m_v, bool with_solver = false)
      : D_(bank.subsampling()), m_h_(bank.filter_length()), m_v_(m_v) {
    detail::require(m_v >= D_, "synthesis length must be at least D");
    PhaseCache<T> cache(bank, with_solver);
    for (int p = 0; p < D_; ++p) slots_.push_back(cache.get(m_v, p));
  }

  // Shares factorizations with other lengths of the same bank.
  PolyphaseSystem(PhaseCache<T>& cache, int m_v)
      : D_(cache.bank().subsampling()), m_h_(cache.bank().filter_length()), m_v_(m_v) {
    detail::require(m_v >= D_, "synthesis length must be at least D");
    for (int p = 0; p < D_; ++p) slots_.push_back(cache.get(m_v, p));
  }

  int subsampling() const { return D_; }
  int synthesis_length() const { return m_v_; }
  // The matrix may have been built for another phase of equal length.
  const PolyphaseMatrix<T>& matrix(int p) const { return slots_[static_cast<std::size_t>(p)]->matrix; }
  const RangeTester<T>& tester(int p) const { return slots_[static_cast<std::size_t>(p)]->tester; }

  std::optional<int> row(int p, int n0) const { return reconstruction_row(p, n0, m_h_, m_v_, D_); }

  // Distance of the phase-p target from range(H_p); a delay with no target row scores 1.
  double residual(int p, int n0) const {
    const auto r = row(p, n0);
    return r ? tester(p).residual_unit(*r) : 1.0;
  }

  double worst_residual(int n0) const {
    double w = 0.0;
    for (int p = 0; p < D_; ++p) w = std::max(w, residual(p, n0));
    return w;
  }

 private:
  int D_, m_h_, m_v_;
  std::vector<std::shared_ptr<const typename PhaseCache<T>::Entry>> slots_;
};

struct FeasibilityResult {
  int m_v;
  int n0;
  std::vector<double> residuals;  // one per phase
  bool feasible;
  double tol;
};

template <class T>
FeasibilityResult evaluate_delay(const PolyphaseSystem<T>& sys, int n0, double tol) {
  FeasibilityResult r{sys.synthesis_length(), n0, {}, true, tol};
  for (int p = 0; p < sys.subsampling(); ++p) {
    r.residuals.push_back(sys.residual(p, n0));
    r.feasible = r.feasible && r.residuals.back() <= tol;
  }
  return r;
}

template <class T>
FeasibilityResult pr_feasible(const FilterBank<T>& bank, int m_v, int n0, double tol = kDefaultTolerance) {
  detail::require(bank.role() == Role::analysis, "pr_feasible: expects an analysis bank");
  detail::require(m_v >= bank.subsampling(), "pr_feasible: synthesis length must be at least D");
  detail::require(delay_range(bank.filter_length(), m_v, bank.subsampling()).contains(n0),
                  "pr_feasible: delay outside the admissible range");
  return evaluate_delay(PolyphaseSystem<T>(bank, m_v), n0, tol);
}

enum class DelayScan { all, multiples_of_D };

inline std::vector<int> scanned_delays(int m_h, int m_v, int D, DelayScan scan) {
  std::vector<int> out;
  const auto range = delay_range(m_h, m_v, D);
  const int step = scan == DelayScan::all ? 1 : D;
  for (int n0 = 0; n0 <= range.hi; n0 += step) out.push_back(n0);
  return out;
}

struct DelaySearch {
  std::optional<int> first_feasible;
  double best_residual;  // min over scanned delays of the worst phase residual
  std::optional<int> best_delay;
};

template <class T>
DelaySearch search_delays(const PolyphaseSystem<T>& sys, int m_h, DelayScan scan, double tol) {
  DelaySearch out{std::nullopt, std::numeric_limits<double>::infinity(), std::nullopt};
  for (int n0 : scanned_delays(m_h, sys.synthesis_length(), sys.subsampling(), scan)) {
    const double w = sys.worst_residual(n0);
    if (w < out.best_residual) {
      out.best_residual = w;
      out.best_delay = n0;
    }
    if (!out.first_feasible && w <= tol) out.first_feasible = n0;
  }
  return out;
}

template <class T>
std::optional<int> pr_feasible_any_delay(const FilterBank<T>& bank, int m_v, double tol = kDefaultTolerance,
                                         DelayScan scan = DelayScan::all) {
  detail::require(bank.role() == Role::analysis, "pr_feasible_any_delay: expects an analysis bank");
  const PolyphaseSystem<T> sys(bank, m_v);
  for (int n0 : scanned_delays(bank.filter_length(), m_v, bank.subsampling(), scan))
    if (sys.worst_residual(n0) <= tol) return n0;
  return std::nullopt;
}

template <class T>
struct SynthesisBank {
  FilterBank<T> bank;
  std::uint64_t analysis_digest;
  int n0;
  FeasibilityResult feasibility;
  bool exact() const { return feasibility.feasible; }
};

// Minimum-norm least-squares solution of every phase equation, interleaved
// into length-m_v filters. Phases without a target row get zero components.
template <class T>
SynthesisBank<T> design_synthesis(const FilterBank<T>& bank, int m_v, int n0, double tol = kDefaultTolerance) {
  detail::require(bank.role() == Role::analysis, "design_synthesis: expects an analysis bank");
  detail::require(delay_range(bank.filter_length(), m_v, bank.subsampling()).contains(n0),
                  "design_synthesis: delay outside the admissible range");
  const int C = bank.channels();
  const int D = bank.subsampling();
  const PolyphaseSystem<T> sys(bank, m_v, true);

  std::vector<std::vector<std::vector<T>>> parts(static_cast<std::size_t>(C),
                                                 std::vector<std::vector<T>>(static_cast<std::size_t>(D)));
  for (int p = 0; p < D; ++p) {
    const auto& H = sys.matrix(p);
    const int n = H.synth_len;
    Vector<T> w = Vector<T>::Zero(H.cols());
    if (const auto r = sys.row(p, n0)) w = sys.tester(p).min_norm_solution(Vector<T>::Unit(H.rows(), *r));
    for (int i = 0; i < C; ++i)
      parts[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)].assign(w.data() + i * n, w.data() + (i + 1) * n);
  }
  std::vector<std::vector<T>> taps;
  for (const auto& pc : parts) taps.push_back(interleave(pc, m_v));
  return {FilterBank<T>(D, Role::synthesis, std::move(taps)), digest(bank), n0, evaluate_delay(sys, n0, tol)};
}

namespace detail {

template <class T>
void require_pair(const FilterBank<T>& a, const FilterBank<T>& s) {
  require(a.channels() == s.channels(), "analysis and synthesis banks differ in channel count");
  require(a.subsampling() == s.subsampling(), "analysis and synthesis banks differ in subsampling factor");
}

inline int output_length(int m_x, int m_h, int m_v, int D) {
  const int kept = ceil_div(m_x + m_h - 1, D);
  return D * (kept - 1) + m_v;
}

}  // namespace detail

// x_hat = sum_i up_D(down_D(x * h_i)) * v_i; down_D keeps the samples at kD.
template <class T>
std::vector<T> simulate(const FilterBank<T>& analysis, const FilterBank<T>& synthesis, const std::vector<T>& x) {
  detail::require_pair(analysis, synthesis);
  detail::require(!x.empty(), "simulate: empty input");
  const int D = analysis.subsampling();
  const int m_h = analysis.filter_length(), m_v = synthesis.filter_length();
  const int m_x = static_cast<int>(x.size());
  const int kept = ceil_div(m_x + m_h - 1, D);
  std::vector<T> out(static_cast<std::size_t>(detail::output_length(m_x, m_h, m_v, D)), T{});
  for (int i = 0; i < analysis.channels(); ++i) {
    const auto& h = analysis.channel(i);
    const auto& v = synthesis.channel(i);
    for (int k = 0; k < kept; ++k) {
      T y{};
      const int t = k * D;
      for (int j = std::max(0, t - m_h + 1); j <= std::min(t, m_x - 1); ++j)
        y += x[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(t - j)];
      if (y == T{}) continue;
      for (int q = 0; q < m_v; ++q) out[static_cast<std::size_t>(t + q)] += y * v[static_cast<std::size_t>(q)];
    }
  }
  return out;
}

// Output predicted from the stacked products g_p = H_p w_p alone. Input
// sample j = bD + r excites block-row (D - r) mod D of g_p, shifted by
// b + [r > 0] positions along the output phase p.
template <class T>
std::vector<T> polyphase_response(const FilterBank<T>& analysis, const FilterBank<T>& synthesis,
                                  const std::vector<T>& x) {
  detail::require_pair(analysis, synthesis);
  detail::require(!x.empty(), "polyphase_response: empty input");
  const int D = analysis.subsampling();
  const int C = analysis.channels();
  const int m_h = analysis.filter_length(), m_v = synthesis.filter_length();
  const int m_x = static_cast<int>(x.size());
  const int len = detail::output_length(m_x, m_h, m_v, D);
  std::vector<T> out(static_cast<std::size_t>(len), T{});
  const auto vgrid = polyphase_decompose(synthesis);
  for (int p = 0; p < D && p < len; ++p) {
    const auto H = build_hp(analysis, m_v, p);
    const int n = H.synth_len;
    Vector<T> w(C * n);
    for (int i = 0; i < C; ++i)
      for (int k = 0; k < n; ++k)
        w(i * n + k) = vgrid[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)].taps[static_cast<std::size_t>(k)];
    const Vector<T> g = H.entries * w;
    for (int m = p; m < len; m += D) {
      const int M = (m - p) / D;
      T acc{};
      for (int j = 0; j < m_x; ++j) {
        const int b = j / D, r = j % D;
        const int l = (D - r) % D;
        const int idx = M - b - (r > 0 ? 1 : 0);
        const int height = H.block_rows[static_cast<std::size_t>(l) + 1] - H.block_rows[static_cast<std::size_t>(l)];
        if (idx >= 0 && idx < height) acc += x[static_cast<std::size_t>(j)] * g(H.block_rows[static_cast<std::size_t>(l)] + idx);
      }
      out[static_cast<std::size_t>(m)] = acc;
    }
  }
  return out;
}

template <class T>
struct DistortionReport {
  int m_x;
  int n0;
  double percent;
  std::vector<T> error;  // x_hat minus x delayed by n0, over the whole output
};

// 100 * ||x_hat - x[. - n0]|| / ||x||, where the reference is zero outside
// [n0, n0 + m_x) so energy leaking anywhere in the output counts as error.
template <class T>
DistortionReport<T> distortion(const FilterBank<T>& analysis, const FilterBank<T>& synthesis, const std::vector<T>& x,
                               int n0) {
  detail::require(n0 >= 0, "distortion: delay must be nonnegative");
  double xnorm2 = 0.0;
  for (const auto& v : x) xnorm2 += std::norm(v);
  detail::require(xnorm2 > 0.0, "distortion: input must be nonzero");
  auto xh = simulate(analysis, synthesis, x);
  const std::size_t len = std::max(xh.size(), static_cast<std::size_t>(n0) + x.size());
  xh.resize(len, T{});
  double err2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) xh[static_cast<std::size_t>(n0) + k] -= x[k];
  for (const auto& e : xh) err2 += std::norm(e);
  return {static_cast<int>(x.size()), n0, 100.0 * std::sqrt(err2 / xnorm2), std::move(xh)};
}

}  // namespace fbpr
