#pragma once

// Random orthoprojectors and block compression operators.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "csfuse/error.hpp"
#include "csfuse/rng.hpp"

namespace csfuse {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Wide M x N matrix with orthonormal rows (A A^T = I_M).
///
/// Immutable after construction; regenerate from (m, n, seed) instead of
/// storing the entries.
class Projection {
 public:
  Projection() = default;

  Index m() const noexcept { return entries_.rows(); }
  Index n() const noexcept { return entries_.cols(); }
  std::uint64_t seed() const noexcept { return seed_; }
  const MatrixXd& entries() const noexcept { return entries_; }

  /// Wraps an existing row-orthonormal matrix. The caller vouches for
  /// orthonormality; used for identity projections and tests.
  static Projection from_matrix(MatrixXd entries, std::uint64_t seed = 0) {
    Projection p;
    p.entries_ = std::move(entries);
    p.seed_ = seed;
    return p;
  }

 private:
  friend Projection make_orthoprojector(Index m, Index n, std::uint64_t seed);
  MatrixXd entries_;
  std::uint64_t seed_ = 0;
};

/// Gaussian ensemble followed by Householder QR of the transpose. Rows are
/// sign-normalized so the result equals Gram-Schmidt applied to the draws.
inline Projection make_orthoprojector(Index m, Index n, std::uint64_t seed) {
  if (m < 1 || n < 1 || m > n) {
    throw InvalidDimensionError("make_orthoprojector: need 1 <= m <= n, got m=" +
                                std::to_string(m) + " n=" + std::to_string(n));
  }
  constexpr int kMaxRetries = 3;
  std::uint64_t draw_seed = seed;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    Rng rng(draw_seed);
    std::normal_distribution<double> normal;
    // Column j of g is row j of the raw Gaussian matrix.
    MatrixXd g(n, m);
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < n; ++i) g(i, j) = normal(rng);

    Eigen::HouseholderQR<MatrixXd> qr(g);
    const auto& packed = qr.matrixQR();
    double max_diag = 0.0;
    for (Index j = 0; j < m; ++j) max_diag = std::max(max_diag, std::abs(packed(j, j)));
    bool full_rank = max_diag > 0.0;
    for (Index j = 0; j < m && full_rank; ++j)
      full_rank = std::abs(packed(j, j)) > 1e-10 * max_diag;
    if (!full_rank) {
      draw_seed = derive_seed(seed, {seed_tag::kRetry, static_cast<std::uint64_t>(attempt)});
      continue;
    }

    MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, m);
    Projection p;
    p.entries_ = q.transpose();
    for (Index j = 0; j < m; ++j)
      if (packed(j, j) < 0.0) p.entries_.row(j) *= -1.0;
    p.seed_ = seed;
    return p;
  }
  throw NumericalError("make_orthoprojector: rank-deficient Gaussian draw after " +
                       std::to_string(kMaxRetries) + " retries (seed " +
                       std::to_string(seed) + ")");
}

/// y = A x.
inline VectorXd compress(const Projection& p, const Eigen::Ref<const VectorXd>& x) {
  if (x.size() != p.n()) {
    throw InvalidDimensionError("compress: input length " + std::to_string(x.size()) +
                                " != projection columns " + std::to_string(p.n()));
  }
  return p.entries() * x;
}

/// Block-diagonal ML x NL operator built from L per-sensor projections.
/// Off-block entries are implicitly zero and never stored.
class BlockProjection {
 public:
  BlockProjection() = default;
  explicit BlockProjection(std::vector<Projection> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw InvalidDimensionError("BlockProjection: no blocks");
    for (const auto& b : blocks_) {
      if (b.m() != blocks_.front().m() || b.n() != blocks_.front().n())
        throw InvalidDimensionError("BlockProjection: blocks must share (M, N)");
    }
  }

  Index l() const noexcept { return static_cast<Index>(blocks_.size()); }
  Index m() const noexcept { return blocks_.empty() ? 0 : blocks_.front().m(); }
  Index n() const noexcept { return blocks_.empty() ? 0 : blocks_.front().n(); }
  Index rows() const noexcept { return m() * l(); }
  Index cols() const noexcept { return n() * l(); }
  const Projection& block(Index j) const { return blocks_.at(static_cast<std::size_t>(j)); }
  const std::vector<Projection>& blocks() const noexcept { return blocks_; }

 private:
  std::vector<Projection> blocks_;
};

/// L independent orthoprojectors; block j uses derive_seed(seed, {j}).
inline BlockProjection make_block_projection(Index l, Index m, Index n, std::uint64_t seed) {
  if (l < 1) throw InvalidDimensionError("make_block_projection: need at least one block");
  std::vector<Projection> blocks;
  blocks.reserve(static_cast<std::size_t>(l));
  for (Index j = 0; j < l; ++j)
    blocks.push_back(make_orthoprojector(m, n, derive_seed(seed, {static_cast<std::uint64_t>(j)})));
  return BlockProjection(std::move(blocks));
}

inline BlockProjection identity_block_projection(Index l, Index n) {
  std::vector<Projection> blocks(static_cast<std::size_t>(l),
                                 Projection::from_matrix(MatrixXd::Identity(n, n)));
  return BlockProjection(std::move(blocks));
}

/// Applies block j to segment j of x; x has length N*L.
inline VectorXd block_compress(const BlockProjection& bp, const Eigen::Ref<const VectorXd>& x) {
  if (x.size() != bp.cols()) {
    throw InvalidDimensionError("block_compress: input length " + std::to_string(x.size()) +
                                " != N*L = " + std::to_string(bp.cols()));
  }
  const Index m = bp.m(), n = bp.n();
  VectorXd y(bp.rows());
  for (Index j = 0; j < bp.l(); ++j)
    y.segment(j * m, m).noalias() = bp.block(j).entries() * x.segment(j * n, n);
  return y;
}

/// Column-wise block_compress of a matrix whose columns are frames.
inline MatrixXd block_compress_frames(const BlockProjection& bp, const Eigen::Ref<const MatrixXd>& x) {
  if (x.rows() != bp.cols())
    throw InvalidDimensionError("block_compress_frames: frame length != N*L");
  const Index m = bp.m(), n = bp.n();
  MatrixXd y(bp.rows(), x.cols());
  for (Index j = 0; j < bp.l(); ++j)
    y.middleRows(j * m, m).noalias() = bp.block(j).entries() * x.middleRows(j * n, n);
  return y;
}

/// L x L grid of scalars s_jk standing for the NL x NL matrix whose (j,k)
/// block is s_jk * I_N.
struct ScalarBlockMatrix {
  MatrixXd scalars;

  Index l() const noexcept { return scalars.rows(); }
  MatrixXd dense(Index n) const {
    MatrixXd d = MatrixXd::Zero(n * l(), n * l());
    for (Index j = 0; j < l(); ++j)
      for (Index k = 0; k < l(); ++k)
        if (scalars(j, k) != 0.0) d.block(j * n, k * n, n, n).diagonal().setConstant(scalars(j, k));
    return d;
  }
};

/// Length-NL vector that is constant (value v_j) on each sensor segment.
inline VectorXd expand_block_constant(const VectorXd& per_block, Index n) {
  VectorXd out(per_block.size() * n);
  for (Index j = 0; j < per_block.size(); ++j) out.segment(j * n, n).setConstant(per_block(j));
  return out;
}

struct CompressedStats {
  VectorXd mu;
  MatrixXd c;
};

inline void symmetrize(MatrixXd& c) { c = 0.5 * (c + c.transpose()).eval(); }

/// mu = A beta and C = A D A^T computed blockwise, then symmetrized.
inline CompressedStats compress_stats(const BlockProjection& bp, const Eigen::Ref<const VectorXd>& beta,
                                      const Eigen::Ref<const MatrixXd>& d) {
  const Index nl = bp.cols();
  if (beta.size() != nl || d.rows() != nl || d.cols() != nl)
    throw InvalidDimensionError("compress_stats: expected mean of length N*L and NL x NL covariance");
  const double asym = (d - d.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9)
    throw InvalidCovarianceError("compress_stats: covariance not symmetric (max asymmetry " +
                                 std::to_string(asym) + ")");
  const Index m = bp.m(), n = bp.n(), l = bp.l();
  CompressedStats out;
  out.mu = block_compress(bp, beta);
  out.c.resize(m * l, m * l);
  for (Index j = 0; j < l; ++j) {
    for (Index k = j; k < l; ++k) {
      MatrixXd blk = bp.block(j).entries() * d.block(j * n, k * n, n, n) * bp.block(k).entries().transpose();
      out.c.block(j * m, k * m, m, m) = blk;
      if (k != j) out.c.block(k * m, j * m, m, m) = blk.transpose();
    }
  }
  symmetrize(out.c);
  return out;
}

/// Structured overload for block-constant means and scalar-diagonal blocks.
/// Diagonal blocks use A_j A_j^T = I_M (exact to 1e-10 by construction).
inline CompressedStats compress_stats(const BlockProjection& bp, const VectorXd& block_means,
                                      const ScalarBlockMatrix& d) {
  const Index m = bp.m(), l = bp.l();
  if (block_means.size() != l || d.l() != l)
    throw InvalidDimensionError("compress_stats: expected L block means and an L x L scalar grid");
  if ((d.scalars - d.scalars.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw InvalidCovarianceError("compress_stats: scalar block grid not symmetric");
  CompressedStats out;
  out.mu.resize(m * l);
  for (Index j = 0; j < l; ++j)
    out.mu.segment(j * m, m) = block_means(j) * bp.block(j).entries().rowwise().sum();
  out.c = MatrixXd::Zero(m * l, m * l);
  for (Index j = 0; j < l; ++j) {
    out.c.block(j * m, j * m, m, m).diagonal().setConstant(d.scalars(j, j));
    for (Index k = j + 1; k < l; ++k) {
      if (d.scalars(j, k) == 0.0) continue;
      MatrixXd blk = d.scalars(j, k) * (bp.block(j).entries() * bp.block(k).entries().transpose());
      out.c.block(j * m, k * m, m, m) = blk;
      out.c.block(k * m, j * m, m, m) = blk.transpose();
    }
  }
  return out;
}

}  // namespace csfuse
