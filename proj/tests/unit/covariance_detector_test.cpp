#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "csfuse/covariance_detector.hpp"
#include "csfuse/rng.hpp"

using namespace csfuse;

namespace {

MatrixXd dense_block(const BlockProjection& bp) {
  MatrixXd a = MatrixXd::Zero(bp.rows(), bp.cols());
  for (Index j = 0; j < bp.l(); ++j) a.block(j * bp.m(), j * bp.n(), bp.m(), bp.n()) = bp.block(j).entries();
  return a;
}

MatrixXd random_sym(Index d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g;
  MatrixXd b(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) b(i, j) = g(rng);
  return b * b.transpose() / static_cast<double>(d);
}

// Minimizes ||C - A (sum_g d_g S_g) A^T||_F over the vectorized design, where
// S_g is the symmetric indicator of the pairs in group g.
VectorXd dense_ls(const MatrixXd& c, const MatrixXd& a, const std::vector<IndexPair>& pairs,
                  const std::vector<Index>& group_of, Index groups) {
  const Index ml = a.rows(), nl = a.cols();
  MatrixXd design = MatrixXd::Zero(ml * ml, groups);
  for (Index g = 0; g < groups; ++g) {
    MatrixXd s = MatrixXd::Zero(nl, nl);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (group_of[k] != g) continue;
      s(pairs[k].i, pairs[k].j) = 1.0;
      s(pairs[k].j, pairs[k].i) = 1.0;
    }
    const MatrixXd col = a * s * a.transpose();
    design.col(g) = Eigen::Map<const VectorXd>(col.data(), ml * ml);
  }
  const VectorXd target = Eigen::Map<const VectorXd>(c.data(), ml * ml);
  return design.colPivHouseholderQr().solve(target);
}

}  // namespace

TEST(IndexSets, SameIndexPairs) {
  const auto p = same_index_pairs(3, {{1, 0}});
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[0], (IndexPair{0, 3}));
  EXPECT_EQ(p[2], (IndexPair{2, 5}));
  EXPECT_EQ(all_cross_pairs(2, 3).size(), 6u);
  EXPECT_THROW(same_index_pairs(3, {{1, 1}}), ConfigurationError);
}

TEST(LsOffdiag, ExactModeMatchesDenseOracle) {
  int checked = 0;
  for (std::uint64_t s = 0; s < 60; ++s) {
    Rng rng(s);
    const Index l = 2 + static_cast<Index>(rng() % 2);
    const Index n = 2 + static_cast<Index>(rng() % (64 / l - 1));
    const Index m = std::max<Index>(1, n / 2 + static_cast<Index>(rng() % (n / 2 + 1)));
    if (n * l > 64 || m > n) continue;
    const BlockProjection bp = make_block_projection(l, m, n, s + 1000);
    const MatrixXd c = random_sym(m * l, s + 2000);
    const auto pairs = all_cross_pairs(n, l);
    for (TieMode tie : {TieMode::none, TieMode::shared, TieMode::per_block_pair}) {
      OffDiagEstimate est;
      try {
        est = ls_offdiag(c, bp, pairs, LsMode::exact, tie);
      } catch (const LeastSquaresError&) {
        continue;  // more unknowns than the compressed covariance can pin down
      }
      const VectorXd oracle =
          dense_ls(c, dense_block(bp), pairs, est.group_of, static_cast<Index>(est.group_size.size()));
      EXPECT_LE((est.d_hat - oracle).cwiseAbs().maxCoeff(), 1e-8) << "seed " << s << " tie " << to_string(tie);
      ++checked;
    }
  }
  EXPECT_GT(checked, 60);
}

TEST(LsOffdiag, PaperModeMatchesFormula) {
  const Index l = 2, n = 6, m = 4;
  const BlockProjection bp = make_block_projection(l, m, n, 5);
  const MatrixXd a = dense_block(bp);
  MatrixXd c = random_sym(m * l, 6);
  c(0, 5) += 0.3;  // asymmetric input exercises the C^T in b
  const auto pairs = all_cross_pairs(n, l);
  const Index k = static_cast<Index>(pairs.size());
  MatrixXd b_mat(k, k);
  VectorXd b_vec(k);
  for (Index r = 0; r < k; ++r) {
    const auto& pm = pairs[static_cast<std::size_t>(r)];
    b_vec(r) = a.col(pm.j).dot(c.transpose() * a.col(pm.i));
    for (Index q = 0; q < k; ++q) {
      const auto& pr = pairs[static_cast<std::size_t>(q)];
      b_mat(r, q) = a.col(pr.j).dot(a.col(pm.j)) * a.col(pm.i).dot(a.col(pr.i));
    }
  }
  const VectorXd want = b_mat.ldlt().solve(b_vec);
  const auto est = ls_offdiag(c, bp, pairs, LsMode::paper, TieMode::none);
  EXPECT_LE((est.d_hat - want).cwiseAbs().maxCoeff(), 1e-8);

  // Tied paper mode: one unknown, normal equation summed over all entries.
  const auto tied = ls_offdiag(c, bp, pairs, LsMode::paper, TieMode::shared);
  EXPECT_NEAR(tied.d_hat(0), b_vec.sum() / b_mat.sum(), 1e-10);
}

TEST(LsOffdiag, IdentityProjectionRecoversEntries) {
  const Index n = 4;
  const BlockProjection bp = identity_block_projection(2, n);
  MatrixXd d = MatrixXd::Identity(8, 8) * 3.0;
  const auto pairs = same_index_pairs(n, {{0, 1}});
  for (std::size_t k = 0; k < pairs.size(); ++k) d(pairs[k].i, pairs[k].j) = d(pairs[k].j, pairs[k].i) = 0.1 * (k + 1);
  for (LsMode mode : {LsMode::exact, LsMode::paper}) {
    const auto est = ls_offdiag(d, bp, pairs, mode, TieMode::none);
    for (std::size_t k = 0; k < pairs.size(); ++k)
      EXPECT_NEAR(est.d_hat(static_cast<Index>(k)), 0.1 * (k + 1), 1e-12);
    EXPECT_NEAR(est.eta, 24.0, 1e-12);
    EXPECT_NEAR(est.lambda_cov, (24.0 + 2.0 * 1.0) / 24.0, 1e-12);
  }
}

TEST(LsOffdiag, SingularNormalEquations) {
  const BlockProjection bp = make_block_projection(2, 1, 8, 3);
  const MatrixXd c = MatrixXd::Identity(2, 2);
  EXPECT_THROW(ls_offdiag(c, bp, all_cross_pairs(8, 2), LsMode::exact, TieMode::none), LeastSquaresError);
  EXPECT_NO_THROW(ls_offdiag(c, bp, all_cross_pairs(8, 2), LsMode::exact, TieMode::shared));
}

TEST(LsOffdiag, InputValidation) {
  const BlockProjection bp = make_block_projection(2, 2, 4, 3);
  EXPECT_THROW(ls_offdiag(MatrixXd::Identity(3, 3), bp, all_cross_pairs(4, 2)), InvalidDimensionError);
  EXPECT_THROW(ls_offdiag(MatrixXd::Identity(4, 4), bp, {}), ConfigurationError);
  EXPECT_THROW(ls_offdiag(MatrixXd::Identity(4, 4), bp, {IndexPair{3, 1}}), ConfigurationError);
  EXPECT_THROW(ls_offdiag(MatrixXd::Identity(4, 4), bp, {IndexPair{0, 8}}), ConfigurationError);
}

TEST(Cav, StatisticAndDegenerate) {
  OffDiagEstimate est;
  est.d_hat = VectorXd::Constant(1, -0.5);
  est.group_size = {4};
  est.group_of = {0, 0, 0, 0};
  est.eta = 10.0;
  EXPECT_NEAR(cav_stat(est).value, (10.0 + 2.0 * 2.0) / 10.0, 1e-15);
  est.eta = 0.0;
  EXPECT_THROW(cav_stat(est), DegenerateDataError);
}

TEST(Parsing, Modes) {
  EXPECT_EQ(parse_ls_mode("EXACT"), LsMode::exact);
  EXPECT_EQ(parse_tie_mode("per_block_pair"), TieMode::per_block_pair);
  EXPECT_THROW(parse_tie_mode("all"), ConfigurationError);
}
