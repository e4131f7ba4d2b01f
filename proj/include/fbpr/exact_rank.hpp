#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <Eigen/Dense>

#include "fbpr/error.hpp"

namespace fbpr {

using BigInt = boost::multiprecision::cpp_int;

// Rank over the rationals via fraction-free (Bareiss) elimination.
inline int exact_rank(std::vector<std::vector<BigInt>> a) {
  const std::size_t rows = a.size();
  if (rows == 0) return 0;
  const std::size_t cols = a.front().size();
  BigInt prev = 1;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = r;
    while (piv < rows && a[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) a[i][j] = (a[r][c] * a[i][j] - a[i][c] * a[r][j]) / prev;
      a[i][c] = 0;
    }
    prev = a[r][c];
    ++r;
  }
  return static_cast<int>(r);
}

// Exact rank of a matrix whose entries are integers stored as doubles.
template <class Derived>
int exact_rank_integral(const Eigen::MatrixBase<Derived>& m) {
  std::vector<std::vector<BigInt>> a(static_cast<std::size_t>(m.rows()),
                                     std::vector<BigInt>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = static_cast<double>(m(r, c));
      detail::require(std::isfinite(v) && v == std::nearbyint(v) && std::fabs(v) < 9.0e15,
                      "exact_rank: entries must be integers");
      a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = static_cast<long long>(v);
    }
  return exact_rank(std::move(a));
}

}  // namespace fbpr
