#pragma once

// Compressed-domain Gaussian approximation and its log-likelihood ratio.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "csfuse/error.hpp"
#include "csfuse/linops.hpp"
#include "csfuse/scenarios.hpp"

namespace csfuse {

/// Score of one decision statistic evaluation.
struct DetectorScore {
  double value = 0.0;
  long clamped = 0;               // copula arguments clamped into [1e-12, 1 - 1e-12]
  bool zero_h0_density = false;   // some observation had zero density under H0
};

struct InverseResult {
  MatrixXd inverse;
  double logdet = 0.0;
};

/// Inverse and log-determinant of a symmetric positive definite matrix made of
/// L x L blocks of size block. Recurses on the leading (L-1) blocks and
/// closes with the Schur complement of the last block row, so only one
/// block-size factorization happens per level.
inline InverseResult nested_block_inverse(const Eigen::Ref<const MatrixXd>& c, Index block) {
  const Index dim = c.rows();
  if (c.cols() != dim || block < 1 || dim % block != 0)
    throw InvalidDimensionError("nested_block_inverse: matrix must be square with size a multiple of the block");
  if (dim == block) {
    Eigen::LLT<MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) throw NumericalError("nested_block_inverse: block not positive definite");
    InverseResult r;
    r.inverse = llt.solve(MatrixXd::Identity(dim, dim));
    r.logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return r;
  }
  const Index lead = dim - block;
  InverseResult p = nested_block_inverse(c.topLeftCorner(lead, lead), block);
  const auto q = c.topRightCorner(lead, block);
  const MatrixXd w = p.inverse * q;
  MatrixXd s = c.bottomRightCorner(block, block);
  s.noalias() -= q.transpose() * w;
  s = 0.5 * (s + s.transpose()).eval();
  Eigen::LLT<MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) throw NumericalError("nested_block_inverse: Schur complement not positive definite");
  const MatrixXd s_inv = llt.solve(MatrixXd::Identity(block, block));
  const MatrixXd ws = w * s_inv;

  InverseResult r;
  r.inverse.resize(dim, dim);
  r.inverse.topLeftCorner(lead, lead) = p.inverse;
  r.inverse.topLeftCorner(lead, lead).noalias() += ws * w.transpose();
  r.inverse.topRightCorner(lead, block) = -ws;
  r.inverse.bottomLeftCorner(block, lead) = -ws.transpose();
  r.inverse.bottomRightCorner(block, block) = s_inv;
  r.logdet = p.logdet + 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return r;
}

struct ModelMetadata {
  bool ridge0 = false, ridge1 = false;
  double ridge_value0 = 0.0, ridge_value1 = 0.0;
  double min_eigenvalue_bound0 = 0.0, min_eigenvalue_bound1 = 0.0;
  bool rank_deficient_training = false;
};

/// N(mu0, C0) vs N(mu1, C1) in the compressed domain with cached inverses,
/// log-determinants and the LLR constant tau0.
struct GaussianModel {
  Index block = 0;
  VectorXd mu0, mu1;
  MatrixXd c0, c1;
  MatrixXd c0_inv, c1_inv;
  double logdet0 = 0.0, logdet1 = 0.0;
  double tau0 = 0.0;
  MatrixXd quad;   // (C0^-1 - C1^-1) / 2
  VectorXd lin;    // C1^-1 mu1 - C0^-1 mu0
  ModelMetadata meta;

  Index dim() const noexcept { return mu0.size(); }
};

namespace detail {

inline constexpr double kMinEigenvalue = 1e-12;
inline constexpr double kRidgeScale = 1e-10;

inline bool is_diagonal(const MatrixXd& c) {
  for (Index j = 0; j < c.cols(); ++j)
    for (Index i = 0; i < c.rows(); ++i)
      if (i != j && c(i, j) != 0.0) return false;
  return true;
}

struct Inverted {
  InverseResult inv;
  bool ridge = false;
  double ridge_value = 0.0;
  double min_eig_bound = 0.0;
};

inline double min_eigenvalue(const MatrixXd& c) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(c, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Inverts c, adding 1e-10 tr(c)/dim I when its smallest eigenvalue is below
// 1e-12. lambda_min >= 1/||c^-1||_inf gives a cheap certificate that avoids
// the eigen solve on well-conditioned inputs.
inline Inverted invert_covariance(MatrixXd& c, Index block) {
  Inverted out;
  const Index dim = c.rows();
  if (is_diagonal(c)) {
    const double mn = c.diagonal().minCoeff();
    if (mn < kMinEigenvalue) {
      out.ridge = true;
      out.ridge_value = kRidgeScale * c.trace() / static_cast<double>(dim);
      c.diagonal().array() += out.ridge_value;
    }
    if (!(c.diagonal().minCoeff() > 0.0))
      throw ModelConstructionError("covariance singular after ridge", c.diagonal().minCoeff());
    out.inv.inverse = MatrixXd::Zero(dim, dim);
    out.inv.inverse.diagonal() = c.diagonal().cwiseInverse();
    out.inv.logdet = c.diagonal().array().log().sum();
    out.min_eig_bound = c.diagonal().minCoeff();
    return out;
  }
  bool ok = false;
  try {
    out.inv = nested_block_inverse(c, block);
    const double norm_inf = out.inv.inverse.cwiseAbs().rowwise().sum().maxCoeff();
    out.min_eig_bound = 1.0 / norm_inf;
    ok = out.min_eig_bound >= kMinEigenvalue;
  } catch (const NumericalError&) {
    ok = false;
  }
  if (ok) return out;
  const double lam = min_eigenvalue(c);
  if (lam >= kMinEigenvalue && out.inv.inverse.size() != 0) {
    out.min_eig_bound = lam;
    return out;
  }
  out.ridge = true;
  out.ridge_value = kRidgeScale * c.trace() / static_cast<double>(dim);
  c.diagonal().array() += out.ridge_value;
  // The ridged matrix can have condition ~1e10, where the nested Schur
  // recursion cancels badly; invert through the eigendecomposition instead.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(c);
  const double lam_after = es.eigenvalues().minCoeff();
  if (es.info() != Eigen::Success || !(lam_after > 0.0))
    throw ModelConstructionError("covariance singular after ridge (min eigenvalue " + std::to_string(lam_after) + ")",
                                 lam_after);
  out.inv.inverse = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  out.inv.logdet = es.eigenvalues().array().log().sum();
  out.min_eig_bound = lam_after;
  return out;
}

}  // namespace detail

/// Builds the model from compressed means and covariances. block is the
/// per-sensor compressed dimension M used by the nested inversion.
inline GaussianModel make_gaussian_model(VectorXd mu0, MatrixXd c0, VectorXd mu1, MatrixXd c1, Index block) {
  const Index dim = mu0.size();
  if (mu1.size() != dim || c0.rows() != dim || c0.cols() != dim || c1.rows() != dim || c1.cols() != dim)
    throw InvalidDimensionError("make_gaussian_model: inconsistent dimensions");
  if (block < 1 || dim % block != 0) throw InvalidDimensionError("make_gaussian_model: block must divide dimension");
  GaussianModel g;
  g.block = block;
  symmetrize(c0);
  symmetrize(c1);
  auto inv0 = detail::invert_covariance(c0, block);
  auto inv1 = detail::invert_covariance(c1, block);
  g.mu0 = std::move(mu0);
  g.mu1 = std::move(mu1);
  g.c0 = std::move(c0);
  g.c1 = std::move(c1);
  g.c0_inv = std::move(inv0.inv.inverse);
  g.c1_inv = std::move(inv1.inv.inverse);
  g.logdet0 = inv0.inv.logdet;
  g.logdet1 = inv1.inv.logdet;
  g.meta.ridge0 = inv0.ridge;
  g.meta.ridge1 = inv1.ridge;
  g.meta.ridge_value0 = inv0.ridge_value;
  g.meta.ridge_value1 = inv1.ridge_value;
  g.meta.min_eigenvalue_bound0 = inv0.min_eig_bound;
  g.meta.min_eigenvalue_bound1 = inv1.min_eig_bound;

  const VectorXd a0 = g.c0_inv * g.mu0;
  const VectorXd a1 = g.c1_inv * g.mu1;
  g.quad = 0.5 * (g.c0_inv - g.c1_inv);
  g.lin = a1 - a0;
  g.tau0 = 0.5 * (g.logdet0 - g.logdet1 + g.mu0.dot(a0) - g.mu1.dot(a1));
  return g;
}

/// Compresses closed-form statistics with bp and builds the model.
inline GaussianModel build_gaussian_model(const HypothesisStats& stats, const BlockProjection& bp) {
  if (stats.l() != bp.l() || stats.n != bp.n())
    throw InvalidDimensionError("build_gaussian_model: statistics and projection disagree on (N, L)");
  for (Index j = 0; j < stats.l(); ++j) {
    if (stats.d0.scalars(j, j) < 0.0 || stats.d1.scalars(j, j) < 0.0)
      throw InvalidCovarianceError("build_gaussian_model: negative variance");
  }
  auto s0 = compress_stats(bp, stats.beta0, stats.d0);
  auto s1 = compress_stats(bp, stats.beta1, stats.d1);
  return make_gaussian_model(std::move(s0.mu), std::move(s0.c), std::move(s1.mu), std::move(s1.c), bp.m());
}

/// 1/2 y^T (C0^-1 - C1^-1) y + (mu1^T C1^-1 - mu0^T C0^-1) y + tau0.
inline DetectorScore llr_ga(const Eigen::Ref<const VectorXd>& y, const GaussianModel& g) {
  if (y.size() != g.dim())
    throw InvalidDimensionError("llr_ga: observation length " + std::to_string(y.size()) +
                                " != model dimension " + std::to_string(g.dim()));
  DetectorScore s;
  s.value = y.dot(g.quad * y) + g.lin.dot(y) + g.tau0;
  return s;
}

/// Sum of llr_ga over the columns of a frame matrix.
inline DetectorScore llr_ga_frames(const Eigen::Ref<const MatrixXd>& y, const GaussianModel& g) {
  if (y.rows() != g.dim()) throw InvalidDimensionError("llr_ga_frames: frame length != model dimension");
  const MatrixXd qy = g.quad * y;
  DetectorScore s;
  s.value = (y.cwiseProduct(qy)).sum() + (g.lin.transpose() * y).sum() + g.tau0 * static_cast<double>(y.cols());
  return s;
}

}  // namespace csfuse
