#pragma once

// Covariance absolute value (CAV) detection from compressed frames with
// structured least-squares recovery of uncompressed off-diagonal entries.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "csfuse/error.hpp"
#include "csfuse/gaussian_model.hpp"
#include "csfuse/linops.hpp"

namespace csfuse {

/// Global 0-based indices into the NL-dimensional uncompressed vector, i < j.
struct IndexPair {
  Index i = 0;
  Index j = 0;
  bool operator==(const IndexPair&) const = default;
};

enum class LsMode {
  exact,  // full normal equations of the Frobenius objective
  paper   // B[m,r] = (a_{j_r}^T a_{j_m})(a_{i_m}^T a_{i_r}), b[m] = a_{j_m}^T C^T a_{i_m}
};

enum class TieMode {
  none,           // one unknown per pair
  shared,         // one unknown for all pairs
  per_block_pair  // one unknown per (sensor j, sensor k) block
};

inline LsMode parse_ls_mode(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "exact") return LsMode::exact;
  if (s == "paper") return LsMode::paper;
  throw ConfigurationError("unknown least-squares mode '" + s + "' (expected exact or paper)");
}

inline TieMode parse_tie_mode(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "none") return TieMode::none;
  if (s == "shared") return TieMode::shared;
  if (s == "per_block_pair") return TieMode::per_block_pair;
  throw ConfigurationError("unknown tie mode '" + s + "' (expected none, shared or per_block_pair)");
}

inline std::string to_string(LsMode m) { return m == LsMode::exact ? "exact" : "paper"; }
inline std::string to_string(TieMode t) {
  return t == TieMode::none ? "none" : (t == TieMode::shared ? "shared" : "per_block_pair");
}

struct OffDiagEstimate {
  std::vector<IndexPair> pairs;
  VectorXd d_hat;                 // one value per group
  std::vector<Index> group_of;    // group index of each pair
  std::vector<Index> group_size;  // number of pairs per group
  double eta = 0.0;               // (N/M) tr(C)
  double lambda_cov = 1.0;
  LsMode mode = LsMode::exact;
  TieMode tie = TieMode::shared;

  /// d_hat expanded to one entry per pair.
  VectorXd per_pair() const {
    VectorXd out(static_cast<Index>(pairs.size()));
    for (std::size_t m = 0; m < pairs.size(); ++m) out(static_cast<Index>(m)) = d_hat(group_of[m]);
    return out;
  }
  double l1_norm() const {
    double s = 0.0;
    for (Index g = 0; g < d_hat.size(); ++g) s += static_cast<double>(group_size[static_cast<std::size_t>(g)]) * std::abs(d_hat(g));
    return s;
  }
};

/// Pairs (jN + t, kN + t) for t = 0..N-1 and each listed sensor pair j < k.
inline std::vector<IndexPair> same_index_pairs(Index n, const std::vector<std::pair<Index, Index>>& sensor_pairs) {
  std::vector<IndexPair> out;
  for (auto [j, k] : sensor_pairs) {
    if (j == k) throw ConfigurationError("same_index_pairs: sensor pair must join two distinct sensors");
    const Index a = std::min(j, k), b = std::max(j, k);
    for (Index t = 0; t < n; ++t) out.push_back({a * n + t, b * n + t});
  }
  return out;
}

/// Same-time pairs between every two distinct sensors.
inline std::vector<IndexPair> all_cross_pairs(Index n, Index l) {
  std::vector<std::pair<Index, Index>> sp;
  for (Index j = 0; j < l; ++j)
    for (Index k = j + 1; k < l; ++k) sp.emplace_back(j, k);
  return same_index_pairs(n, sp);
}

namespace detail {

// Column i of the block operator, as (block, local column).
inline std::pair<Index, Index> locate(const BlockProjection& bp, Index i) { return {i / bp.n(), i % bp.n()}; }

inline MatrixXd embed_columns(const BlockProjection& bp, const std::vector<IndexPair>& pairs, bool second) {
  const Index m = bp.m();
  MatrixXd out = MatrixXd::Zero(bp.rows(), static_cast<Index>(pairs.size()));
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    auto [blk, col] = locate(bp, second ? pairs[c].j : pairs[c].i);
    out.block(blk * m, static_cast<Index>(c), m, 1) = bp.block(blk).entries().col(col);
  }
  return out;
}

}  // namespace detail

/// Least-squares estimate of the uncompressed off-diagonal entries listed in
/// pairs from a compressed covariance c_tilde, plus eta = (N/M) tr(c_tilde).
inline OffDiagEstimate ls_offdiag(const Eigen::Ref<const MatrixXd>& c_tilde, const BlockProjection& bp,
                                  const std::vector<IndexPair>& pairs, LsMode mode = LsMode::exact,
                                  TieMode tie = TieMode::shared) {
  const Index ml = bp.rows(), nl = bp.cols(), m = bp.m(), n = bp.n();
  if (c_tilde.rows() != ml || c_tilde.cols() != ml)
    throw InvalidDimensionError("ls_offdiag: covariance must be ML x ML");
  if (pairs.empty()) throw ConfigurationError("ls_offdiag: index set is empty");
  for (const auto& p : pairs)
    if (p.i < 0 || p.j >= nl || p.i >= p.j)
      throw ConfigurationError("ls_offdiag: pair (" + std::to_string(p.i) + ", " + std::to_string(p.j) +
                               ") invalid; need 0 <= i < j < NL");

  OffDiagEstimate est;
  est.pairs = pairs;
  est.mode = mode;
  est.tie = tie;
  est.eta = static_cast<double>(n) / static_cast<double>(m) * c_tilde.trace();
  const MatrixXd c_sym = 0.5 * (c_tilde + c_tilde.transpose());

  // Group assignment.
  est.group_of.resize(pairs.size());
  if (tie == TieMode::none) {
    for (std::size_t k = 0; k < pairs.size(); ++k) est.group_of[k] = static_cast<Index>(k);
    est.group_size.assign(pairs.size(), 1);
  } else if (tie == TieMode::shared) {
    std::fill(est.group_of.begin(), est.group_of.end(), 0);
    est.group_size.assign(1, static_cast<Index>(pairs.size()));
  } else {
    std::map<std::pair<Index, Index>, Index> ids;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto key = std::make_pair(pairs[k].i / n, pairs[k].j / n);
      auto it = ids.find(key);
      if (it == ids.end()) {
        it = ids.emplace(key, static_cast<Index>(ids.size())).first;
        est.group_size.push_back(0);
      }
      est.group_of[k] = it->second;
      ++est.group_size[static_cast<std::size_t>(it->second)];
    }
  }

  if (tie == TieMode::none) {
    const MatrixXd p = detail::embed_columns(bp, pairs, false);
    const MatrixXd q = detail::embed_columns(bp, pairs, true);
    const MatrixXd ptp = p.transpose() * p, qtq = q.transpose() * q;
    MatrixXd b_mat;
    VectorXd b_vec;
    if (mode == LsMode::exact) {
      const MatrixXd ptq = p.transpose() * q;
      b_mat = 2.0 * (ptp.cwiseProduct(qtq) + ptq.cwiseProduct(ptq.transpose()));
      b_vec = 2.0 * (p.transpose() * c_sym).cwiseProduct(q.transpose()).rowwise().sum();
    } else {
      b_mat = qtq.cwiseProduct(ptp);
      b_vec = (p.transpose() * c_tilde).cwiseProduct(q.transpose()).rowwise().sum();
    }
    Eigen::LLT<MatrixXd> llt(b_mat);
    const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
    if (!(rcond > 1e-12)) {
      throw LeastSquaresError("ls_offdiag: normal matrix is singular (condition estimate " +
                                  std::to_string(rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity()) +
                                  "); reduce the index set or increase M",
                              rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
    }
    est.d_hat = llt.solve(b_vec);
  } else {
    // Tied groups decouple: cross-group Gram entries vanish because every
    // term pairs columns from the same (sensor j, sensor k) block.
    const Index groups = static_cast<Index>(est.group_size.size());
    VectorXd num = VectorXd::Zero(groups), den = VectorXd::Zero(groups);
    // Per (group, block pair): gather columns and form K_jk = A_j[:, I] A_k[:, J]^T.
    std::map<std::tuple<Index, Index, Index>, std::pair<std::vector<Index>, std::vector<Index>>> cols;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      auto [bi, ci] = detail::locate(bp, pairs[k].i);
      auto [bj, cj] = detail::locate(bp, pairs[k].j);
      auto& entry = cols[{est.group_of[k], bi, bj}];
      entry.first.push_back(ci);
      entry.second.push_back(cj);
    }
    for (const auto& [key, idx] : cols) {
      const auto [g, bi, bj] = key;
      const Index cnt = static_cast<Index>(idx.first.size());
      MatrixXd left(m, cnt), right(m, cnt);
      for (Index c = 0; c < cnt; ++c) {
        left.col(c) = bp.block(bi).entries().col(idx.first[static_cast<std::size_t>(c)]);
        right.col(c) = bp.block(bj).entries().col(idx.second[static_cast<std::size_t>(c)]);
      }
      const MatrixXd kmat = left * right.transpose();
      const double k2 = kmat.squaredNorm();
      if (mode == LsMode::exact) {
        // ||K + K^T||_F^2 = 2||K||^2 + 2 tr(KK); tr(KK) survives only on diagonal blocks.
        const double trkk = bi == bj ? (kmat.cwiseProduct(kmat.transpose())).sum() : 0.0;
        num(g) += 2.0 * c_sym.block(bi * m, bj * m, m, m).cwiseProduct(kmat).sum();
        den(g) += 2.0 * k2 + 2.0 * trkk;
      } else {
        num(g) += c_tilde.block(bi * m, bj * m, m, m).cwiseProduct(kmat).sum();
        den(g) += k2;
      }
    }
    est.d_hat.resize(groups);
    for (Index g = 0; g < groups; ++g) {
      if (!(den(g) > 1e-14)) {
        throw LeastSquaresError("ls_offdiag: tied normal equation is singular (Gram value " +
                                    std::to_string(den(g)) + "); reduce the index set or increase M",
                                den(g) > 0.0 ? 1.0 / den(g) : std::numeric_limits<double>::infinity());
      }
      est.d_hat(g) = num(g) / den(g);
    }
  }
  est.lambda_cov = est.eta > 0.0 ? (est.eta + 2.0 * est.l1_norm()) / est.eta : std::numeric_limits<double>::quiet_NaN();
  return est;
}

/// (eta + 2 ||d_hat||_1) / eta.
inline DetectorScore cav_stat(const OffDiagEstimate& est) {
  if (!(est.eta > 0.0)) throw DegenerateDataError("cav_stat: eta must be > 0 (got " + std::to_string(est.eta) + ")");
  DetectorScore s;
  s.value = (est.eta + 2.0 * est.l1_norm()) / est.eta;
  return s;
}

}  // namespace csfuse
