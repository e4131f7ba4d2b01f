#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fbpr/fb_core.hpp"

namespace fbpr {

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
struct ConvMatrix {
  std::vector<T> kernel;
  int input_len;
  Matrix<T> entries;  // (kernel.size() + input_len - 1) x input_len, Toeplitz
};

template <class T>
ConvMatrix<T> conv_matrix(const std::vector<T>& kernel, int input_len) {
  detail::require(!kernel.empty(), "conv_matrix: kernel must be nonempty");
  detail::require(input_len >= 1, "conv_matrix: input length must be positive");
  const int m = static_cast<int>(kernel.size());
  Matrix<T> A = Matrix<T>::Zero(m + input_len - 1, input_len);
  for (int c = 0; c < input_len; ++c)
    for (int k = 0; k < m; ++k) A(c + k, c) = kernel[static_cast<std::size_t>(k)];
  return {kernel, input_len, std::move(A)};
}

// [C{h_1} ... C{h_C}]
template <class T>
Matrix<T> stacked_conv(const std::vector<std::vector<T>>& kernels, int input_len) {
  detail::require(!kernels.empty(), "stacked_conv: no kernels");
  const auto m = kernels.front().size();
  for (const auto& k : kernels) detail::require(k.size() == m, "stacked_conv: kernels must share one length");
  Matrix<T> out(static_cast<Eigen::Index>(m) + input_len - 1,
                static_cast<Eigen::Index>(kernels.size()) * input_len);
  for (std::size_t i = 0; i < kernels.size(); ++i)
    out.middleCols(static_cast<Eigen::Index>(i) * input_len, input_len) = conv_matrix(kernels[i], input_len).entries;
  return out;
}

// Block-row l holds the phase-l analysis components convolved against
// length-n synthesis components, n = m_{v;p}; block-column i is channel i.
template <class T>
struct PolyphaseMatrix {
  int phase;
  int synth_len;                // m_{v;p}
  Matrix<T> entries;
  std::vector<int> block_rows;  // D+1 offsets; block-row l spans [block_rows[l], block_rows[l+1])
  std::vector<int> block_cols;  // C+1 offsets

  int rows() const { return static_cast<int>(entries.rows()); }
  int cols() const { return static_cast<int>(entries.cols()); }
};

// Block-row offsets of H_p; depends on p only through n = m_{v;p}.
inline std::vector<int> block_row_offsets(int m_h, int D, int n) {
  std::vector<int> off{0};
  for (int l = 0; l < D; ++l) off.push_back(off.back() + polyphase_length(m_h, D, l) + n - 1);
  return off;
}

template <class T>
PolyphaseMatrix<T> build_hp(const FilterBank<T>& bank, int m_v, int p) {
  const int D = bank.subsampling();
  const int C = bank.channels();
  const int m_h = bank.filter_length();
  detail::require(m_v >= D, "build_hp: synthesis length must be at least D");
  detail::require(p >= 0 && p < D, "build_hp: phase out of range");
  const int n = polyphase_length(m_v, D, p);

  PolyphaseMatrix<T> H{p, n, {}, block_row_offsets(m_h, D, n), {}};
  for (int i = 0; i <= C; ++i) H.block_cols.push_back(i * n);
  H.entries = Matrix<T>::Zero(H.block_rows.back(), C * n);

  const auto grid = polyphase_decompose(bank);
  for (int l = 0; l < D; ++l) {
    std::vector<std::vector<T>> kernels;
    for (const auto& comp : grid[static_cast<std::size_t>(l)]) kernels.push_back(comp.taps);
    const int r0 = H.block_rows[static_cast<std::size_t>(l)];
    H.entries.middleRows(r0, H.block_rows[static_cast<std::size_t>(l) + 1] - r0) = stacked_conv(kernels, n);
  }
  return H;
}

// Closed-form row of the target 1 under the channel-major block layout:
// with n0 = m0*D + r0, kappa = d + sum_{k < l*} (m_{h;k} + m_{v;p} - 1), where
// (l*, d) = (p - r0, m0) if p >= r0 and (D - r0 + p, m0 + 1) otherwise.
inline int kappa(int p, int n0, int m_h, int m_v, int D) {
  detail::require(D >= 1 && p >= 0 && p < D, "kappa: phase out of range");
  detail::require(m_v >= D, "kappa: synthesis length must be at least D");
  detail::require(delay_range(m_h, m_v, D).contains(n0), "kappa: delay outside the admissible range");
  const int m0 = n0 / D;
  const int r0 = n0 % D;
  const int l_star = p >= r0 ? p - r0 : D - r0 + p;
  const int d = p >= r0 ? m0 : m0 + 1;
  return d + block_row_offsets(m_h, D, polyphase_length(m_v, D, p))[static_cast<std::size_t>(l_star)];
}

// Row of H_p that must equal 1 for the filter bank output to be x[n - n0].
// Phase p of the output collects samples nD + p; the unit response of the
// input phase that lands on n0 sits in block-row l = (n0 - p) mod D at local
// offset (n0 - p - l)/D. Empty when that offset falls outside the block-row.
inline std::optional<int> reconstruction_row(int p, int n0, int m_h, int m_v, int D) {
  detail::require(D >= 1 && p >= 0 && p < D, "reconstruction_row: phase out of range");
  detail::require(m_v >= D && m_h >= D, "reconstruction_row: lengths must be at least D");
  detail::require(n0 >= 0, "reconstruction_row: delay must be nonnegative");
  const int l = ((n0 - p) % D + D) % D;
  const int beta = (n0 - p - l) / D;
  const int n = polyphase_length(m_v, D, p);
  const int height = polyphase_length(m_h, D, l) + n - 1;
  if (beta < 0 || beta >= height) return std::nullopt;
  return block_row_offsets(m_h, D, n)[static_cast<std::size_t>(l)] + beta;
}

enum class TargetIndexing { time_domain, closed_form };

inline std::optional<int> target_row(int p, int n0, int m_h, int m_v, int D, TargetIndexing ix) {
  if (ix == TargetIndexing::closed_form) return kappa(p, n0, m_h, m_v, D);
  return reconstruction_row(p, n0, m_h, m_v, D);
}

template <class T>
struct TargetVector {
  int phase;
  int delay;
  int kappa;
  Vector<T> entries;
};

template <class T>
TargetVector<T> target_vector(const FilterBank<T>& bank, int m_v, int p, int n0,
                              TargetIndexing ix = TargetIndexing::time_domain) {
  const int D = bank.subsampling();
  const int m_h = bank.filter_length();
  const auto row = target_row(p, n0, m_h, m_v, D, ix);
  if (!row) throw DomainError("target_vector: delay has no target row in this phase");
  const int rows = block_row_offsets(m_h, D, polyphase_length(m_v, D, p)).back();
  detail::require(*row < rows, "target_vector: target row exceeds the matrix height");
  Vector<T> e = Vector<T>::Zero(rows);
  e(*row) = T(1);
  return {p, n0, *row, std::move(e)};
}

}  // namespace fbpr
