#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csfuse/rng.hpp"
#include "csfuse/roc.hpp"

using namespace csfuse;

namespace {

std::vector<double> normals(std::size_t n, double mean, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(mean, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST(Roc, ChanceLine) {
  const RocCurve c = make_roc(normals(1000, 0.0, 1), normals(1000, 0.0, 2));
  EXPECT_NEAR(c.auc, 0.5, 0.05);
}

// AUC of N(0,1) vs N(d,1) scores is Phi(d / sqrt(2)).
TEST(Roc, BinormalAuc) {
  const RocCurve c = make_roc(normals(20000, 0.0, 3), normals(20000, 1.0, 4));
  EXPECT_NEAR(c.auc, 0.7602499389065233, 0.01);
}

TEST(Roc, PerfectSeparation) {
  const RocCurve c = make_roc({0.0, 0.1, 0.2}, {1.0, 1.1, 1.2}, 16);
  EXPECT_DOUBLE_EQ(c.auc, 1.0);
}

TEST(Roc, MonotoneAndBounded) {
  const RocCurve c = make_roc(normals(500, 0.0, 5), normals(500, 0.5, 6));
  ASSERT_EQ(c.points.size(), 512u);
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    EXPECT_GE(c.points[k].threshold, c.points[k - 1].threshold);
    EXPECT_LE(c.points[k].pf, c.points[k - 1].pf);
    EXPECT_LE(c.points[k].pd, c.points[k - 1].pd);
  }
  for (const auto& p : c.points) {
    EXPECT_GE(p.pf, 0.0);
    EXPECT_LE(p.pd, 1.0);
  }
}

TEST(Roc, AucTrapezoid) {
  EXPECT_DOUBLE_EQ(roc_auc({}), 0.5);
  EXPECT_DOUBLE_EQ(roc_auc({{0.0, 0.0, 1.0}}), 1.0);
  EXPECT_DOUBLE_EQ(roc_auc({{0.0, 0.5, 0.5}}), 0.5);
}

TEST(Roc, RejectsBadInput) {
  EXPECT_THROW(roc_points({}, {1.0}), ConfigurationError);
  EXPECT_THROW(roc_points({1.0}, {std::nan("")}), NumericalError);
  EXPECT_THROW(roc_points({1.0}, {2.0}, 1), ConfigurationError);
}

TEST(Calibrate, AlphaOneAlwaysAlarms) {
  const auto scores = normals(100, 0.0, 7);
  const auto c = calibrate_from_scores(scores, 1.0);
  EXPECT_LT(c.threshold, *std::min_element(scores.begin(), scores.end()));
  EXPECT_DOUBLE_EQ(c.achieved_pf, 1.0);
}

TEST(Calibrate, NormalQuantile) {
  const auto c = calibrate_from_scores(normals(100000, 0.0, 8), 0.05);
  EXPECT_NEAR(c.threshold, 1.6448536269514722, 0.03);
  EXPECT_NEAR(c.achieved_pf, 0.05, 1e-3);
  EXPECT_LT(c.ci_low, 0.05);
  EXPECT_GT(c.ci_high, 0.05);
}

TEST(Calibrate, TooFewTrials) {
  EXPECT_THROW(calibrate_from_scores(normals(300, 0.0, 9), 0.05), CalibrationError);
  EXPECT_THROW(calibrate_from_scores(normals(1000, 0.0, 9), 0.0), CalibrationError);
}
