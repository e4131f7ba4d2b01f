#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "fbpr/error.hpp"

namespace fbpr {

// Floor and ceiling of a/b for b > 0 and any sign of a.
constexpr int floor_div(int a, int b) {
  const int q = a / b;
  return (a % b != 0 && a < 0) ? q - 1 : q;
}

constexpr int ceil_div(int a, int b) {
  const int q = a / b;
  return (a % b != 0 && a > 0) ? q + 1 : q;
}

template <class T>
struct is_complex : std::false_type {};
template <class R>
struct is_complex<std::complex<R>> : std::true_type {};

enum class Role { analysis, synthesis };

inline std::string_view to_string(Role r) {
  return r == Role::analysis ? "analysis" : "synthesis";
}

inline Role role_from_string(std::string_view s) {
  if (s == "analysis") return Role::analysis;
  if (s == "synthesis") return Role::synthesis;
  throw FormatError("unknown filter-bank role '" + std::string(s) + "'");
}

// Lengths (ceil((m - p)/D))_p of the D polyphase components of a length-m filter.
inline std::vector<int> polyphase_lengths(int m_alpha, int D) {
  detail::require(m_alpha >= 1 && D >= 1, "polyphase_lengths: need m >= 1 and D >= 1");
  std::vector<int> out(static_cast<std::size_t>(D));
  for (int p = 0; p < D; ++p) out[static_cast<std::size_t>(p)] = std::max(0, ceil_div(m_alpha - p, D));
  return out;
}

// Length of phase p alone.
inline int polyphase_length(int m_alpha, int D, int p) { return std::max(0, ceil_div(m_alpha - p, D)); }

// Phase holding the shortest component; the first index attaining floor(m/D).
inline int shortest_phase(int m_alpha, int D) { return m_alpha % D; }

// Component p collects taps with index = p (mod D): f_p[n] = f[nD + p].
template <class T>
std::vector<std::vector<T>> polyphase_split(const std::vector<T>& f, int D) {
  detail::require(D >= 1, "polyphase_split: D must be positive");
  std::vector<std::vector<T>> parts(static_cast<std::size_t>(D));
  for (std::size_t k = 0; k < f.size(); ++k) parts[k % static_cast<std::size_t>(D)].push_back(f[k]);
  return parts;
}

// Inverse of polyphase_split.
template <class T>
std::vector<T> interleave(const std::vector<std::vector<T>>& parts, int length) {
  const auto D = parts.size();
  detail::require(D >= 1, "interleave: no components");
  std::vector<T> f(static_cast<std::size_t>(length), T{});
  for (std::size_t p = 0; p < D; ++p) {
    const auto expect = static_cast<std::size_t>(polyphase_length(length, static_cast<int>(D), static_cast<int>(p)));
    detail::require(parts[p].size() == expect, "interleave: component length does not match filter length");
    for (std::size_t n = 0; n < expect; ++n) f[n * D + p] = parts[p][n];
  }
  return f;
}

template <class T>
class FilterBank {
 public:
  using scalar_type = T;

  FilterBank(int D, Role role, std::vector<std::vector<T>> taps)
      : D_(D), role_(role), taps_(std::move(taps)) {
    detail::require(D_ >= 1, "FilterBank: subsampling factor must be positive");
    detail::require(!taps_.empty(), "FilterBank: at least one channel required");
    const auto m = taps_.front().size();
    detail::require(m >= 1, "FilterBank: filters must be nonempty");
    for (const auto& h : taps_)
      detail::require(h.size() == m, "FilterBank: all filters must share one length");
    detail::require(static_cast<int>(m) >= D_,
                    "FilterBank: filter length must be at least D (no empty polyphase components)");
  }

  int channels() const { return static_cast<int>(taps_.size()); }
  int subsampling() const { return D_; }
  int filter_length() const { return static_cast<int>(taps_.front().size()); }
  Role role() const { return role_; }
  const std::vector<std::vector<T>>& taps() const { return taps_; }
  const std::vector<T>& channel(int i) const { return taps_.at(static_cast<std::size_t>(i)); }
  const T& tap(int i, int n) const { return taps_.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(n)); }

  FilterBank scaled(T c) const {
    auto t = taps_;
    for (auto& h : t)
      for (auto& x : h) x *= c;
    return FilterBank(D_, role_, std::move(t));
  }

  template <class U>
  FilterBank<U> cast() const {
    std::vector<std::vector<U>> t;
    t.reserve(taps_.size());
    for (const auto& h : taps_) t.emplace_back(h.begin(), h.end());
    return FilterBank<U>(D_, role_, std::move(t));
  }

  friend bool operator==(const FilterBank& a, const FilterBank& b) {
    return a.D_ == b.D_ && a.role_ == b.role_ && a.taps_ == b.taps_;
  }

 private:
  int D_;
  Role role_;
  std::vector<std::vector<T>> taps_;
};

template <class T>
struct PolyphaseComponent {
  int channel;
  int phase;
  std::vector<T> taps;
};

// grid[p][i] holds component p of channel i.
template <class T>
std::vector<std::vector<PolyphaseComponent<T>>> polyphase_decompose(const FilterBank<T>& bank) {
  const int D = bank.subsampling();
  std::vector<std::vector<PolyphaseComponent<T>>> grid(static_cast<std::size_t>(D));
  for (int i = 0; i < bank.channels(); ++i) {
    auto parts = polyphase_split(bank.channel(i), D);
    for (int p = 0; p < D; ++p)
      grid[static_cast<std::size_t>(p)].push_back({i, p, std::move(parts[static_cast<std::size_t>(p)])});
  }
  return grid;
}

// Admissible delays 0 <= n0 <= hi, with hi = D*(floor(m_h/D) + floor(m_v/D) - 2).
struct DelayRange {
  int hi = -1;
  bool empty() const { return hi < 0; }
  bool contains(int n0) const { return n0 >= 0 && n0 <= hi; }
  int size() const { return hi + 1; }
};

inline DelayRange delay_range(int m_h, int m_v, int D) {
  detail::require(D >= 1 && m_h >= D && m_v >= 1, "delay_range: need m_h >= D >= 1 and m_v >= 1");
  const int bound = m_h / D + m_v / D - 2;
  return DelayRange{bound < 0 ? -1 : D * bound};
}

// Stable 64-bit FNV-1a digest of the bank's shape and tap bit patterns.
template <class T>
std::uint64_t digest(const FilterBank<T>& bank) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < n; ++k) {
      h ^= b[k];
      h *= 1099511628211ull;
    }
  };
  const int shape[4] = {bank.channels(), bank.subsampling(), bank.filter_length(), static_cast<int>(bank.role())};
  mix(shape, sizeof shape);
  for (const auto& f : bank.taps()) mix(f.data(), f.size() * sizeof(T));
  return h;
}

}  // namespace fbpr
