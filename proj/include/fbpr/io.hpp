#pragma once

#include <cerrno>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "fbpr/fb_core.hpp"

namespace fbpr {

// Shortest round-trip decimal form of a double.
inline std::string format_real(double x) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline std::string format_scalar(double x) { return format_real(x); }

inline std::string format_scalar(const std::complex<double>& z) {
  if (z.imag() == 0.0) return format_real(z.real());
  std::string im = format_real(z.imag());
  if (im.front() != '-') im.insert(im.begin(), '+');
  return format_real(z.real()) + im + "J";
}

// Accepts `re`, `re+imJ`, `re-imJ` (also lower-case j).
inline std::complex<double> parse_scalar(const std::string& tok) {
  auto to_double = [&tok](const std::string& s) {
    if (s.empty()) throw FormatError("bad scalar '" + tok + "'");
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE) throw FormatError("bad scalar '" + tok + "'");
    return v;
  };
  if (tok.empty()) throw FormatError("empty scalar");
  const char last = tok.back();
  if (last != 'J' && last != 'j') return {to_double(tok), 0.0};
  const std::string body = tok.substr(0, tok.size() - 1);
  for (std::size_t k = body.size(); k-- > 1;) {
    const char c = body[k];
    if ((c == '+' || c == '-') && body[k - 1] != 'e' && body[k - 1] != 'E')
      return {to_double(body.substr(0, k)), to_double(body.substr(k))};
  }
  return {0.0, to_double(body)};
}

template <class T>
void write_bank(std::ostream& os, const FilterBank<T>& bank) {
  os << bank.channels() << ' ' << bank.subsampling() << ' ' << bank.filter_length() << ' '
     << to_string(bank.role()) << '\n';
  for (const auto& f : bank.taps()) {
    for (std::size_t n = 0; n < f.size(); ++n) os << (n ? " " : "") << format_scalar(f[n]);
    os << '\n';
  }
}

inline FilterBank<std::complex<double>> read_bank(std::istream& is) {
  int C = 0, D = 0, m = 0;
  std::string role;
  if (!(is >> C >> D >> m >> role)) throw FormatError("filter bank header must read `C D m_len role`");
  detail::require(C >= 1 && D >= 1 && m >= 1, "filter bank header: C, D and m_len must be positive");
  std::vector<std::vector<std::complex<double>>> taps(static_cast<std::size_t>(C));
  for (auto& f : taps) {
    f.reserve(static_cast<std::size_t>(m));
    for (int n = 0; n < m; ++n) {
      std::string tok;
      if (!(is >> tok)) throw FormatError("filter bank body ended early");
      f.push_back(parse_scalar(tok));
    }
  }
  std::string extra;
  if (is >> extra) throw FormatError("unexpected trailing token '" + extra + "'");
  return FilterBank<std::complex<double>>(D, role_from_string(role), std::move(taps));
}

inline bool is_real(const FilterBank<std::complex<double>>& bank) {
  for (const auto& f : bank.taps())
    for (const auto& z : f)
      if (z.imag() != 0.0) return false;
  return true;
}

inline FilterBank<double> real_part(const FilterBank<std::complex<double>>& bank) {
  std::vector<std::vector<double>> taps;
  for (const auto& f : bank.taps()) {
    std::vector<double> r;
    for (const auto& z : f) r.push_back(z.real());
    taps.push_back(std::move(r));
  }
  return FilterBank<double>(bank.subsampling(), bank.role(), std::move(taps));
}

inline FilterBank<std::complex<double>> load_bank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open filter bank file '" + path + "'");
  return read_bank(in);
}

template <class T>
void save_bank(const std::string& path, const FilterBank<T>& bank) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write '" + path + "'");
  write_bank(out, bank);
}

// Row-major CSV, full precision.
template <class Derived>
void write_matrix_csv(std::ostream& os, const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << format_scalar(m(r, c));
    os << '\n';
  }
}

}  // namespace fbpr
