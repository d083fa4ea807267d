#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "csfuse/special.hpp"

using namespace csfuse::special;

TEST(Special, NormalCdfAndQ) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.0) + q_function(1.0), 1.0, 1e-15);
  EXPECT_NEAR(q_function(1.6448536269514722), 0.05, 1e-15);
}

TEST(Special, QuantileRoundTrip) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-13);
  EXPECT_NEAR(q_inverse(0.05), 1.6448536269514722, 1e-13);
  for (double p : {1e-10, 1e-4, 0.01, 0.3, 0.5, 0.9, 0.999999})
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-12 * std::max(1.0, p / 1e-3));
}

TEST(Special, LogPdf) {
  EXPECT_NEAR(normal_log_pdf(0.0), -0.5 * std::log(2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(normal_log_pdf(2.0), -2.0 - 0.5 * std::log(2.0 * std::numbers::pi), 1e-15);
}

TEST(Special, LogCdfDeepTail) {
  // erfc is still representable at these arguments, so it is a direct oracle
  // for the asymptotic branch.
  for (double z : {-5.0, -29.0, -31.0, -35.0}) {
    const double want = std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
    EXPECT_NEAR(normal_log_cdf(z), want, 1e-10 * std::abs(want)) << z;
  }
  EXPECT_TRUE(std::isfinite(normal_log_cdf(-200.0)));
  EXPECT_NEAR(normal_log_cdf(5.0), std::log1p(-0.5 * std::erfc(5.0 / std::numbers::sqrt2)), 1e-15);
}
