#pragma once

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fbpr/exact_rank.hpp"
#include "fbpr/lengths.hpp"
#include "fbpr/polyphase_matrix.hpp"

namespace fbpr {

enum class CertificateKind { row_rank_cert, col_rank_cert };

inline std::string_view to_string(CertificateKind k) {
  return k == CertificateKind::row_rank_cert ? "row_rank_cert" : "col_rank_cert";
}

// One assigned 1-diagonal: channel `channel`, block-row `block_row`, local start row `start`.
// Its tap index in h_channel is start*D + block_row.
struct DiagonalAssignment {
  int channel;
  int block_row;
  int start;
  bool extended;  // Case 1 (continues the previous diagonal) versus Case 2
};

struct CertificateBank {
  FilterBank<double> bank;
  CertificateKind kind;
  int m_v;
  int phase;                          // phase whose matrix the cursor walked
  std::optional<int> n0;              // col_rank_cert only
  std::optional<int> target_row;      // col_rank_cert only
  std::optional<int> c_star;          // channel that received the extra top tap
  std::vector<std::vector<int>> assignments;  // per channel: tap indices set to 1
  std::vector<DiagonalAssignment> trace;
  std::vector<int> block_columns_per_row;     // consumed per block-row
};

struct ConstructionFailure {
  int block_columns_used;
  int uncovered_from;  // first uncovered global row (Algorithm 1) or block-row reached (Algorithm 2)
  std::string reason;
};

using ConstructionResult = std::variant<CertificateBank, ConstructionFailure>;

inline bool succeeded(const ConstructionResult& r) { return std::holds_alternative<CertificateBank>(r); }

namespace detail {

// Toeplitz law: local entry (r, c) of block (l, i) is a structural zero when
// the kernel index r - c falls outside [0, m_{h;l}).
inline bool structural_zero(int m_h, int D, int l, int r, int c) {
  const int k = r - c;
  return k < 0 || k >= polyphase_length(m_h, D, l);
}

inline FilterBank<double> bank_from_assignments(int D, int m_h, const std::vector<std::vector<int>>& taps) {
  std::vector<std::vector<double>> h(taps.size(), std::vector<double>(static_cast<std::size_t>(m_h), 0.0));
  for (std::size_t i = 0; i < taps.size(); ++i)
    for (int k : taps[i]) h[i][static_cast<std::size_t>(k)] += 1.0;
  return FilterBank<double>(D, Role::analysis, std::move(h));
}

}  // namespace detail

// Walks H_p for p = m_v mod D (the shortest phase, n = floor(m_v/D)) and puts
// a single 1-diagonal in each block-column until the last row is covered.
// Channels left over after coverage get the top diagonal of block-row 0,
// which keeps one nonzero tap per channel without reducing row rank.
inline ConstructionResult algorithm1_bank(int C, int D, int m_h, int m_v) {
  detail::require(D >= 1 && C >= 2 * D, "algorithm1_bank: need C >= 2D");
  detail::require(m_h >= D && m_v >= D, "algorithm1_bank: need m_h >= D and m_v >= D");
  const int p = shortest_phase(m_v, D);
  const int n = polyphase_length(m_v, D, p);
  const auto off = block_row_offsets(m_h, D, n);

  CertificateBank cert{detail::bank_from_assignments(D, m_h, std::vector<std::vector<int>>(static_cast<std::size_t>(C))),
                       CertificateKind::row_rank_cert, m_v, p, std::nullopt, std::nullopt, std::nullopt,
                       std::vector<std::vector<int>>(static_cast<std::size_t>(C)), {}, std::vector<int>(static_cast<std::size_t>(D), 0)};

  int l = 0, s = 0;  // cursor: block-row and first uncovered local row
  int k = 0;
  for (; k < C && l < D; ++k) {
    const int height = off[static_cast<std::size_t>(l) + 1] - off[static_cast<std::size_t>(l)];
    const bool extend = !detail::structural_zero(m_h, D, l, s, 0);
    const int t = extend ? s : polyphase_length(m_h, D, l) - 1;
    cert.assignments[static_cast<std::size_t>(k)].push_back(t * D + l);
    cert.trace.push_back({k, l, t, extend});
    ++cert.block_columns_per_row[static_cast<std::size_t>(l)];
    if (t + n - 1 == height - 1) {
      ++l;
      s = 0;
    } else {
      s = t + n;
    }
  }
  if (l < D) return ConstructionFailure{k, off[static_cast<std::size_t>(l)] + s, "last row of H_p not covered"};
  for (int r = 0; r < D; ++r)
    if (cert.block_columns_per_row[static_cast<std::size_t>(r)] != ceil_div(polyphase_length(m_h, D, r) + n - 1, n))
      throw std::logic_error("algorithm1_bank: block-row coverage count mismatch");
  for (; k < C; ++k) cert.assignments[static_cast<std::size_t>(k)].push_back(0);
  cert.bank = detail::bank_from_assignments(D, m_h, cert.assignments);
  return cert;
}

// Walks H_p for p = m_v mod D starting at h_{1,0}[n] = 1 and covers columns;
// then gives the channel that owns the target row an extra top tap h[0] = 1.
inline ConstructionResult algorithm2_bank(int C, int D, int m_h, int m_v, int n0,
                                          TargetIndexing ix = TargetIndexing::closed_form) {
  detail::require(D >= 1 && C >= 2 * D, "algorithm2_bank: need C >= 2D");
  detail::require(m_h > D && m_v >= D, "algorithm2_bank: need m_h > D and m_v >= D");
  detail::require(delay_range(m_h, m_v, D).contains(n0), "algorithm2_bank: delay outside the admissible range");
  const int p = shortest_phase(m_v, D);
  const int n = polyphase_length(m_v, D, p);
  detail::require(polyphase_length(m_h, D, 0) > n, "algorithm2_bank: need m_{h;0} > m_{v;p} for the first diagonal");
  const auto row = target_row(p, n0, m_h, m_v, D, ix);
  detail::require(row.has_value(), "algorithm2_bank: delay has no target row in the shortest phase");
  const auto off = block_row_offsets(m_h, D, n);

  CertificateBank cert{detail::bank_from_assignments(D, m_h, std::vector<std::vector<int>>(static_cast<std::size_t>(C))),
                       CertificateKind::col_rank_cert, m_v, p, n0, *row, std::nullopt,
                       std::vector<std::vector<int>>(static_cast<std::size_t>(C)), {}, std::vector<int>(static_cast<std::size_t>(D), 0)};

  int l = 0, t = n;
  for (int k = 0; k < C; ++k) {
    bool extend = true;
    if (k > 0) {
      extend = !detail::structural_zero(m_h, D, l, t + n, 0);
      if (extend) {
        t += n;
      } else {
        if (l == D - 1) return ConstructionFailure{k, l, "no free entries left below the structural zeros"};
        ++l;
        t = 0;
      }
    }
    cert.assignments[static_cast<std::size_t>(k)].push_back(t * D + l);
    cert.trace.push_back({k, l, t, extend});
    ++cert.block_columns_per_row[static_cast<std::size_t>(l)];
  }

  // Every block-row the cursor left behind holds floor((m_{h;l} + n - 1)/n)
  // diagonals, one fewer in block-row 0 whose first diagonal starts at row n.
  for (int r = 0; r < l; ++r)
    if (cert.block_columns_per_row[static_cast<std::size_t>(r)] !=
        (polyphase_length(m_h, D, r) + n - 1) / n - (r == 0 ? 1 : 0))
      throw std::logic_error("algorithm2_bank: block-column coverage count mismatch");

  // Exactly one diagonal can meet the target row; if none does, no extra tap.
  for (const auto& a : cert.trace) {
    const int first = off[static_cast<std::size_t>(a.block_row)] + a.start;
    if (*row >= first && *row < first + n) {
      cert.c_star = a.channel;
      cert.assignments[static_cast<std::size_t>(a.channel)].push_back(0);
      break;
    }
  }
  cert.bank = detail::bank_from_assignments(D, m_h, cert.assignments);
  return cert;
}

struct PhaseRank {
  int phase;
  int rows;
  int cols;
  int rank;
};

struct CertificateReport {
  bool ok;
  std::vector<PhaseRank> ranks;  // every H_p (row cert) or the augmented matrix (col cert)
  std::optional<int> offending_phase;
  std::string message;
};

inline CertificateReport verify_certificate(const CertificateBank& cert) {
  const int D = cert.bank.subsampling();
  CertificateReport rep{true, {}, std::nullopt, "ok"};
  if (cert.kind == CertificateKind::row_rank_cert) {
    for (int p = 0; p < D; ++p) {
      const auto H = build_hp(cert.bank, cert.m_v, p);
      const int r = exact_rank_integral(H.entries);
      rep.ranks.push_back({p, H.rows(), H.cols(), r});
      if (r != H.rows() && rep.ok) {
        rep.ok = false;
        rep.offending_phase = p;
        rep.message = "H_" + std::to_string(p) + " has rank " + std::to_string(r) + " < " + std::to_string(H.rows()) +
                      " rows";
      }
    }
    return rep;
  }
  detail::require(cert.target_row.has_value(), "verify_certificate: column certificate without a target row");
  const auto H = build_hp(cert.bank, cert.m_v, cert.phase);
  detail::require(*cert.target_row < H.rows(), "verify_certificate: target row exceeds matrix height");
  Matrix<double> A(H.rows(), H.cols() + 1);
  A << H.entries, Vector<double>::Unit(H.rows(), *cert.target_row);
  const int r = exact_rank_integral(A);
  rep.ranks.push_back({cert.phase, static_cast<int>(A.rows()), static_cast<int>(A.cols()), r});
  if (r != A.cols()) {
    rep.ok = false;
    rep.offending_phase = cert.phase;
    rep.message = "[H_" + std::to_string(cert.phase) + " | delta] has rank " + std::to_string(r) + " < " +
                  std::to_string(A.cols()) + " columns";
  }
  return rep;
}

inline nlohmann::json certificate_json(const CertificateBank& cert) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(cert.kind));
  j["C"] = cert.bank.channels();
  j["D"] = cert.bank.subsampling();
  j["m_h"] = cert.bank.filter_length();
  j["m_v"] = cert.m_v;
  j["phase"] = cert.phase;
  j["n0"] = cert.n0 ? nlohmann::json(*cert.n0) : nlohmann::json(nullptr);
  j["target_row"] = cert.target_row ? nlohmann::json(*cert.target_row) : nlohmann::json(nullptr);
  j["c_star"] = cert.c_star ? nlohmann::json(*cert.c_star) : nlohmann::json(nullptr);
  j["assignments"] = cert.assignments;
  j["block_columns_per_row"] = cert.block_columns_per_row;
  auto& tr = j["trace"] = nlohmann::json::array();
  for (const auto& a : cert.trace)
    tr.push_back({{"channel", a.channel}, {"block_row", a.block_row}, {"start", a.start},
                  {"case", a.extended ? 1 : 2}});
  return j;
}

}  // namespace fbpr
