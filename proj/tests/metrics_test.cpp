#include "privsub/metrics.hpp"

#include <gtest/gtest.h>

#include "privsub/random.hpp"

namespace privsub {
namespace {

GTEST_TEST(Disagreement, Examples) {
  EXPECT_EQ(disagreement(Eigen::Vector3d(1, 2, 4)), 3.0);
  EXPECT_EQ(disagreement(Eigen::Vector3d(2, 2, 2)), 0.0);
  EXPECT_EQ(disagreement(Eigen::MatrixXd::Constant(1, 2, 5.0)), 0.0);
  Eigen::MatrixXd two(2, 2);
  two << 0, 0, 3, 4;
  EXPECT_EQ(disagreement(two), 5.0);
}

GTEST_TEST(OptimalityGap, Examples) {
  std::vector<ObjectiveSpec> specs;
  for (int c = 1; c <= 5; ++c) specs.push_back(ObjectiveSpec::absolute_deviation(Eigen::VectorXd::Constant(1, c)));
  EXPECT_EQ(optimality_gap(Eigen::VectorXd::Constant(5, 3.0), specs, 6.0), 0.0);
  // f(4) = 3 + 2 + 1 + 0 + 1 = 7.
  EXPECT_EQ(optimality_gap(Eigen::Vector3d(3.5, 4, 4.5), specs, 6.0), 7.0 - 6.0);
}

GTEST_TEST(BoundednessBound, Examples) {
  Eigen::MatrixXd A(2, 2);
  A << .5, .2, .3, .4;
  // ||A||_inf = 0.7, so 2 + (1 + 1) / 0.3.
  EXPECT_NEAR(input_boundedness_bound(Eigen::Vector2d(2, -1), 1.0, 1.0, 1.0, A), 2.0 + 2.0 / 0.3, 1e-12);
  Eigen::MatrixXd ring(2, 2);
  ring << .5, .5, .5, .5;
  EXPECT_THROW(input_boundedness_bound(Eigen::Vector2d(1, 1), 1, 1, 1, ring), BoundInapplicableError);
}

GTEST_TEST(BoundednessBound, MonotoneInEveryArgument) {
  Rng rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::MatrixXd A(3, 3);
    for (auto& v : A.reshaped()) v = uniform(rng, 0, 0.3);
    const Eigen::Vector3d x0(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -2, 2));
    const double u = uniform(rng, 0, 3), a = uniform(rng, 0, 1), L = uniform(rng, 0, 2);
    const double base = input_boundedness_bound(x0, u, a, L, A);
    ASSERT_LE(base, input_boundedness_bound(x0, u + 0.1, a, L, A));
    ASSERT_LE(base, input_boundedness_bound(x0, u, a + 0.1, L, A));
    ASSERT_LE(base, input_boundedness_bound(x0, u, a, L + 0.1, A));
    ASSERT_LE(base, input_boundedness_bound(1.5 * x0, u, a, L, A));
  }
}

GTEST_TEST(Disagreement, PermutationAndTranslationInvariant) {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(uniform_index(rng, 6));
    Eigen::MatrixXd x(n, 2);
    for (auto& v : x.reshaped()) v = uniform(rng, -5, 5);
    const double h = disagreement(x);
    const auto perm = random_permutation(rng, n);
    Eigen::MatrixXd y(n, 2);
    for (int i = 0; i < n; ++i) y.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    ASSERT_EQ(disagreement(y), h);
    const Eigen::RowVector2d shift(uniform(rng, -3, 3), uniform(rng, -3, 3));
    ASSERT_NEAR(disagreement(x.rowwise() + shift), h, 1e-12);
  }
}

GTEST_TEST(Quantile, Interpolates) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({1, 2, 3, 4}), 2.5);
  EXPECT_EQ(quantile({0, 10}, 0.9), 9.0);
  EXPECT_EQ(median({std::nan(""), 5.0}), 5.0);
  EXPECT_TRUE(std::isnan(median({})));
}

}  // namespace
}  // namespace privsub
