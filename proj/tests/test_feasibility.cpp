#include <gtest/gtest.h>

#include <complex>
#include <random>
#include <set>
#include <sstream>

#include "fbpr/constructions.hpp"
#include "fbpr/feasibility.hpp"
#include "fbpr/io.hpp"
#include "fbpr/lengths.hpp"

using namespace fbpr;

namespace {

template <class T>
FilterBank<T> random_bank(int C, int D, int m, std::mt19937& gen, Role role = Role::analysis) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<std::vector<T>> t(static_cast<std::size_t>(C), std::vector<T>(static_cast<std::size_t>(m)));
  for (auto& f : t)
    for (auto& v : f) {
      if constexpr (std::is_same_v<T, double>) v = u(gen);
      else v = T(u(gen), u(gen));
    }
  return FilterBank<T>(D, role, std::move(t));
}

template <class T>
std::vector<T> random_signal(int m, std::mt19937& gen) {
  std::normal_distribution<double> n(0, 1);
  std::vector<T> x(static_cast<std::size_t>(m));
  for (auto& v : x) {
    if constexpr (std::is_same_v<T, double>) v = n(gen);
    else v = T(n(gen), n(gen));
  }
  return x;
}

// Full-rate reference: filter, zero the samples off the grid kD, filter again.
template <class T>
std::vector<T> brute_simulate(const FilterBank<T>& h, const FilterBank<T>& v, const std::vector<T>& x) {
  const int D = h.subsampling();
  const std::size_t ylen = x.size() + static_cast<std::size_t>(h.filter_length()) - 1;
  std::vector<T> out(ylen + static_cast<std::size_t>(v.filter_length()) - 1, T{});
  for (int i = 0; i < h.channels(); ++i) {
    std::vector<T> y(ylen, T{});
    for (std::size_t a = 0; a < x.size(); ++a)
      for (int b = 0; b < h.filter_length(); ++b) y[a + static_cast<std::size_t>(b)] += x[a] * h.tap(i, b);
    for (std::size_t k = 0; k < ylen; ++k)
      if (k % static_cast<std::size_t>(D) != 0) y[k] = T{};
    for (std::size_t k = 0; k < ylen; ++k)
      for (int b = 0; b < v.filter_length(); ++b) out[k + static_cast<std::size_t>(b)] += y[k] * v.tap(i, b);
  }
  return out;
}

template <class T>
double max_abs_diff(const std::vector<T>& a, std::vector<T> b) {
  std::vector<T> aa = a;
  const std::size_t n = std::max(aa.size(), b.size());
  aa.resize(n, T{});
  b.resize(n, T{});
  double d = 0.0;
  for (std::size_t k = 0; k < n; ++k) d = std::max(d, static_cast<double>(std::abs(aa[k] - b[k])));
  return d;
}

}  // namespace

TEST(RangeTester, UnitVectorsInAndOutOfRange) {
  Matrix<double> A = Matrix<double>::Zero(3, 1);
  A(0, 0) = 2.0;
  const RangeTester<double> t(A, true);
  EXPECT_EQ(t.rank(), 1);
  EXPECT_FALSE(t.full_row_rank());
  EXPECT_NEAR(t.residual_unit(0), 0.0, 1e-15);
  EXPECT_NEAR(t.residual_unit(1), 1.0, 1e-15);
  Vector<double> b(3);
  b << 1, 1, 0;
  EXPECT_NEAR(t.residual(b), 1.0, 1e-15);
  EXPECT_NEAR(t.min_norm_solution(b)(0), 0.5, 1e-15);
}

TEST(RangeTester, DiagonalOfOnesHalfResidual) {
  // Target e_0 against the single column (1, 1)/sqrt(2): residual 1/sqrt(2).
  Matrix<double> A(2, 1);
  A << 1, 1;
  EXPECT_NEAR(RangeTester<double>(A).residual_unit(0), std::sqrt(0.5), 1e-15);
}

TEST(RangeTester, RejectsNonFiniteEntries) {
  Matrix<double> A = Matrix<double>::Identity(2, 2);
  A(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(RangeTester<double>{A}, SolverError);
  A(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(RangeTester<double>{A}, SolverError);
  EXPECT_THROW(RangeTester<double>(Matrix<double>::Identity(2, 2)).min_norm_solution(Vector<double>::Ones(2)),
               DomainError);
}

TEST(PrFeasible, RowCertificateBankIsFeasibleAtSynthesisLength) {
  const auto cert = std::get<CertificateBank>(algorithm1_bank(6, 3, 7, 6));
  for (int n0 : {2, 3, 4, 5, 6}) EXPECT_TRUE(pr_feasible(cert.bank, 6, n0).feasible) << n0;
  // Delay 0 leaves phases 1 and 2 without a target row: causality forbids it.
  const auto zero = pr_feasible(cert.bank, 6, 0);
  EXPECT_FALSE(zero.feasible);
  EXPECT_EQ(zero.residuals[0], 0.0);
  EXPECT_EQ(zero.residuals[1], 1.0);
  EXPECT_EQ(zero.residuals[2], 1.0);
}

TEST(PrFeasible, ColumnCertificateBankIsInfeasible) {
  const auto cl = std::get<CertificateBank>(algorithm2_bank(6, 3, 13, 8, 6, TargetIndexing::closed_form));
  const PolyphaseSystem<double> sys(cl.bank, 8);
  EXPECT_GT(sys.tester(2).residual_unit(13), 0.5);
  const auto td = std::get<CertificateBank>(algorithm2_bank(6, 3, 13, 8, 6, TargetIndexing::time_domain));
  const auto r = pr_feasible(td.bank, 8, 6);
  EXPECT_FALSE(r.feasible);
  EXPECT_GT(r.residuals[2], 0.5);
}

TEST(PhaseCache, SharedFactorizationsMatchFreshOnes) {
  std::mt19937 gen(4);
  const auto bank = random_bank<double>(7, 3, 30, gen);
  PhaseCache<double> cache(bank);
  std::set<int> lens;
  for (int m_v = 3; m_v <= 30; ++m_v) {
    const PolyphaseSystem<double> shared(cache, m_v), fresh(bank, m_v);
    for (int p = 0; p < 3; ++p) {
      lens.insert(polyphase_length(m_v, 3, p));
      ASSERT_EQ(shared.matrix(p).entries, build_hp(bank, m_v, p).entries) << m_v << "," << p;
      ASSERT_EQ(shared.tester(p).rank(), fresh.tester(p).rank());
    }
    for (int n0 : scanned_delays(30, m_v, 3, DelayScan::all)) ASSERT_EQ(shared.worst_residual(n0), fresh.worst_residual(n0));
  }
  EXPECT_EQ(cache.size(), lens.size());
  EXPECT_THROW(PolyphaseSystem<double>(cache, 2), DomainError);
}

TEST(PrFeasible, DomainChecks) {
  std::mt19937 gen(1);
  const auto bank = random_bank<double>(6, 3, 7, gen);
  EXPECT_THROW(pr_feasible(bank, 2, 0), DomainError);
  EXPECT_THROW(pr_feasible(bank, 6, 7), DomainError);
  EXPECT_THROW(pr_feasible(bank, 6, -1), DomainError);
  const auto syn = random_bank<double>(6, 3, 7, gen, Role::synthesis);
  EXPECT_THROW(pr_feasible(syn, 6, 2), DomainError);
}

TEST(PrFeasible, RandomBanksFeasibleAtSufficientLength) {
  std::mt19937 gen(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto bank = random_bank<double>(6, 3, 30, gen);
    ASSERT_TRUE(pr_feasible_any_delay(bank, sufficient_length(6, 3, 30)).has_value()) << trial;
  }
}

TEST(PrFeasible, RandomBanksInfeasibleBelowNecessaryLength) {
  std::mt19937 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto bank = random_bank<double>(8, 3, 30, gen);
    ASSERT_FALSE(pr_feasible_any_delay(bank, necessary_length(8, 3, 30) - 1).has_value()) << trial;
  }
}

TEST(PrFeasible, SingleChannelSubsamplingCoprimePair) {
  // h1 = 1 + z^-1 and h2 = 1 + 2 z^-1 are coprime; one-tap synthesis solves v1 + v2 = 1, v1 + 2 v2 = 0.
  const FilterBank<double> bank(1, Role::analysis, {{1, 1}, {1, 2}});
  EXPECT_TRUE(pr_feasible(bank, 1, 0).feasible);
  const auto s = design_synthesis(bank, 1, 0);
  EXPECT_TRUE(s.exact());
  EXPECT_NEAR(s.bank.tap(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(s.bank.tap(1, 0), -1.0, 1e-12);
  const FilterBank<double> common(1, Role::analysis, {{1, 1}, {2, 2}});
  EXPECT_FALSE(pr_feasible(common, 1, 0).feasible);
}

TEST(DesignSynthesis, TrivialIdentityBank) {
  const FilterBank<double> bank(1, Role::analysis, {{1.0}});
  const auto s = design_synthesis(bank, 1, 0);
  EXPECT_TRUE(s.exact());
  EXPECT_EQ(s.bank.role(), Role::synthesis);
  EXPECT_EQ(s.analysis_digest, digest(bank));
  EXPECT_NEAR(s.bank.tap(0, 0), 1.0, 1e-15);
}

TEST(DesignSynthesis, FeasibleDesignsReconstructDelayedInput) {
  std::mt19937 gen(4);
  struct Cfg {
    int C, D, m_h;
  };
  for (const Cfg c : {Cfg{6, 3, 7}, Cfg{7, 3, 30}, Cfg{5, 2, 11}, Cfg{9, 4, 17}, Cfg{3, 1, 8}}) {
    const int m_v = sufficient_length(c.C, c.D, c.m_h);
    const auto bank = random_bank<double>(c.C, c.D, c.m_h, gen);
    const auto x = random_signal<double>(100, gen);
    for (int n0 : scanned_delays(c.m_h, m_v, c.D, DelayScan::all)) {
      if (n0 < c.D - 1) continue;
      const auto s = design_synthesis(bank, m_v, n0);
      ASSERT_TRUE(s.exact()) << c.C << "," << c.D << "," << c.m_h << "," << n0;
      const auto xh = simulate(bank, s.bank, x);
      for (std::size_t k = 0; k < xh.size(); ++k) {
        const long src = static_cast<long>(k) - n0;
        const double expect = (src >= 0 && src < 100) ? x[static_cast<std::size_t>(src)] : 0.0;
        ASSERT_NEAR(xh[k], expect, 1e-8) << "k=" << k;
      }
    }
  }
}

TEST(DesignSynthesis, InfeasibleDesignIsFlagged) {
  std::mt19937 gen(5);
  const auto bank = random_bank<double>(7, 3, 30, gen);
  const auto s = design_synthesis(bank, 12, 3);
  EXPECT_FALSE(s.exact());
  EXPECT_GT(*std::max_element(s.feasibility.residuals.begin(), s.feasibility.residuals.end()), 1e-3);
}

TEST(Simulate, MatchesFullRateReferenceAndPolyphasePrediction) {
  std::mt19937 gen(6);
  for (int trial = 0; trial < 40; ++trial) {
    const int D = 1 + static_cast<int>(gen() % 4);
    const int C = 1 + static_cast<int>(gen() % 6);
    const int m_h = D + static_cast<int>(gen() % 12);
    const int m_v = D + static_cast<int>(gen() % 12);
    const int m_x = 1 + static_cast<int>(gen() % 30);
    const auto h = random_bank<double>(C, D, m_h, gen);
    const auto v = random_bank<double>(C, D, m_v, gen, Role::synthesis);
    const auto x = random_signal<double>(m_x, gen);
    const auto xh = simulate(h, v, x);
    ASSERT_LT(max_abs_diff(xh, brute_simulate(h, v, x)), 1e-10);
    ASSERT_LT(max_abs_diff(xh, polyphase_response(h, v, x)), 1e-10);
  }
}

TEST(Simulate, ComplexScalars) {
  using Z = std::complex<double>;
  std::mt19937 gen(7);
  const auto h = random_bank<Z>(5, 2, 9, gen);
  const auto v = random_bank<Z>(5, 2, 7, gen, Role::synthesis);
  const auto x = random_signal<Z>(25, gen);
  EXPECT_LT(max_abs_diff(simulate(h, v, x), brute_simulate(h, v, x)), 1e-10);
  EXPECT_LT(max_abs_diff(simulate(h, v, x), polyphase_response(h, v, x)), 1e-10);
}

TEST(Simulate, ComplexDesignReconstructs) {
  using Z = std::complex<double>;
  std::mt19937 gen(8);
  const auto bank = random_bank<Z>(6, 3, 13, gen);
  const int m_v = sufficient_length(6, 3, 13);
  const auto s = design_synthesis(bank, m_v, 5);
  ASSERT_TRUE(s.exact());
  const auto x = random_signal<Z>(50, gen);
  EXPECT_LT(distortion(bank, s.bank, x, 5).percent, 1e-8);
  // Complex rescaling of the analysis bank leaves feasibility unchanged.
  EXPECT_TRUE(pr_feasible(bank.scaled(Z(0.3, -1.7)), m_v, 5).feasible);
}

TEST(Simulate, RejectsMismatchedBanks) {
  std::mt19937 gen(9);
  const auto h = random_bank<double>(5, 2, 9, gen);
  const auto v = random_bank<double>(4, 2, 7, gen, Role::synthesis);
  const auto w = random_bank<double>(5, 3, 7, gen, Role::synthesis);
  EXPECT_THROW(simulate(h, v, {1.0}), DomainError);
  EXPECT_THROW(simulate(h, w, {1.0}), DomainError);
  EXPECT_THROW(simulate(h, random_bank<double>(5, 2, 7, gen, Role::synthesis), std::vector<double>{}), DomainError);
}

TEST(Distortion, ZeroForPerfectPairAndScaleInvariantInInput) {
  std::mt19937 gen(10);
  const auto bank = random_bank<double>(7, 3, 30, gen);
  const int m_v = sufficient_length(7, 3, 30);
  const auto s = design_synthesis(bank, m_v, 2);
  ASSERT_TRUE(s.exact());
  auto x = random_signal<double>(100, gen);
  EXPECT_LT(distortion(bank, s.bank, x, 2).percent, 1e-8);
  const auto bad = design_synthesis(bank, 15, 2);
  const double d1 = distortion(bank, bad.bank, x, 2).percent;
  for (auto& v : x) v *= 7.0;
  EXPECT_NEAR(distortion(bank, bad.bank, x, 2).percent, d1, 1e-9 * d1);
  EXPECT_GT(d1, 1.0);
  EXPECT_THROW(distortion(bank, s.bank, std::vector<double>(4, 0.0), 2), DomainError);
  EXPECT_THROW(distortion(bank, s.bank, x, -1), DomainError);
}

TEST(Distortion, VanishesExactlyWhenFeasible) {
  std::mt19937 gen(11);
  for (int trial = 0; trial < 6; ++trial) {
    const auto bank = random_bank<double>(7, 3, 30, gen);
    const auto x = random_signal<double>(100, gen);
    for (int m_v = 15; m_v <= 24; ++m_v) {
      const int n0 = 2;
      const bool feasible = pr_feasible(bank, m_v, n0).feasible;
      const double d = distortion(bank, design_synthesis(bank, m_v, n0).bank, x, n0).percent;
      ASSERT_EQ(feasible, d < 1e-6) << "m_v=" << m_v << " d=" << d;
    }
  }
}

TEST(Tolerance, VerdictsStableAcrossTenfoldChange) {
  std::mt19937 gen(12);
  for (int trial = 0; trial < 10; ++trial)
    for (int C = 7; C <= 12; ++C) {
      const auto bank = random_bank<double>(C, 3, 30, gen);
      for (int m_v = 3; m_v <= 30; ++m_v) {
        if (delay_range(30, m_v, 3).empty()) continue;
        const PolyphaseSystem<double> sys(bank, m_v);
        const auto a = search_delays(sys, 30, DelayScan::multiples_of_D, kDefaultTolerance);
        const auto b = search_delays(sys, 30, DelayScan::multiples_of_D, 10 * kDefaultTolerance);
        ASSERT_EQ(a.first_feasible.has_value(), b.first_feasible.has_value()) << C << "," << m_v;
      }
    }
}

TEST(Scaling, FeasibilityInvariantUnderBankScaling) {
  std::mt19937 gen(13);
  for (int trial = 0; trial < 5; ++trial) {
    const auto bank = random_bank<double>(8, 3, 30, gen);
    for (int m_v = 9; m_v <= 24; m_v += 3) {
      const auto a = pr_feasible_any_delay(bank, m_v, kDefaultTolerance, DelayScan::multiples_of_D);
      for (double c : {-0.0137, 3.0e3, 1.0 / 7.0})
        ASSERT_EQ(a, pr_feasible_any_delay(bank.scaled(c), m_v, kDefaultTolerance, DelayScan::multiples_of_D));
    }
  }
}

TEST(SynthesisBank, RoundTripsThroughTextFormat) {
  std::mt19937 gen(14);
  const auto bank = random_bank<double>(6, 3, 7, gen);
  const auto s = design_synthesis(bank, 6, 3);
  std::stringstream ss;
  write_bank(ss, s.bank);
  const auto back = real_part(read_bank(ss));
  EXPECT_EQ(back, s.bank);
}
