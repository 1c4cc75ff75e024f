#include "oracles.hpp"
#include "rbto/truss.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace rbto;
using oracle::deg;

namespace {

double mc_pf(double lambda, double delta, std::size_t N, std::uint64_t seed) {
  const TrussProblem p;
  const std::vector<double> th = {lambda, delta};
  return mc_estimate(p.limit_state(), th, p.random_input(), N, SampleStream(seed)).p_hat;
}

}  // namespace

TEST(Truss, ObjectiveExamples) {
  EXPECT_NEAR(truss_objective(0.3425, deg(43.25)), 0.4702, 5e-5);
  EXPECT_NEAR(truss_objective(0.4651, deg(43.65)), 0.6428, 5e-5);
  EXPECT_NEAR(truss_objective(0.5997, deg(42.88)), 0.8184, 5e-5);
  EXPECT_EQ(truss_objective(0.5, 0.0), 0.5);
  const Vector g = truss_objective_gradient(0.5, 0.0);
  EXPECT_EQ(g[0], 1.0);
  EXPECT_EQ(g[1], 0.0);
}

TEST(Truss, GradientMatchesFiniteDifferences) {
  const double lambda = 0.3;
  const double delta = deg(40.0);
  const Vector g = truss_objective_gradient(lambda, delta);
  const double h = 1e-5;
  const double fd_l = (truss_objective(lambda + h, delta) - truss_objective(lambda - h, delta)) / (2 * h);
  const double fd_d = (truss_objective(lambda, delta + h) - truss_objective(lambda, delta - h)) / (2 * h);
  EXPECT_NEAR(g[0], fd_l, 1e-8 * std::abs(fd_l));
  EXPECT_NEAR(g[1], fd_d, 1e-8 * std::abs(fd_d));
}

TEST(Truss, LimitStateExample) {
  EXPECT_NEAR(truss_limit_state(0.5, std::numbers::pi / 4, 0.0), 100.0 - 4.0 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(truss_limit_state(0.5, std::numbers::pi / 4, 0.0), 94.3431, 5e-5);
}

TEST(Truss, LimitStateIsEvenInLoad) {
  for (double xi : {0.1, 1.3, 4.0, 17.0})
    EXPECT_EQ(truss_limit_state(0.3, deg(40.0), xi), truss_limit_state(0.3, deg(40.0), -xi));
}

TEST(Truss, LimitStateDecreasesInLoadMagnitude) {
  double prev = truss_limit_state(0.3, deg(40.0), 0.0);
  for (double xi = 0.25; xi < 6.0; xi += 0.25) {
    const double g = truss_limit_state(0.3, deg(40.0), xi);
    EXPECT_LT(g, prev);
    prev = g;
  }
}

TEST(Truss, ZeroAreaAlwaysFails) {
  EXPECT_EQ(truss_limit_state(0.0, deg(40.0), 0.0), -std::numeric_limits<double>::infinity());
  const auto e = mc_estimate(TrussProblem().limit_state(), std::vector<double>{0.0, 0.5},
                             RandomInput::standard_normal(1), 100, SampleStream(1));
  EXPECT_EQ(e.p_hat, 1.0);
}

TEST(Truss, ReferenceDesignsSitOnAllowableContours) {
  EXPECT_NEAR(oracle::truss_pf(0.3425, deg(43.25)), 1e-3, 0.02e-3);
  EXPECT_NEAR(oracle::truss_pf(0.4651, deg(43.65)), 1e-4, 0.02e-4);
  EXPECT_NEAR(oracle::truss_pf(0.5997, deg(42.88)), 1e-5, 0.02e-5);
}

TEST(Truss, TenMillionSampleMonteCarloAtReference) {
  const double p = mc_pf(0.3425, deg(43.25), 10000000, 99);
  EXPECT_NEAR(p, 1e-3, 1e-4);
}

TEST(Truss, MonteCarloMatchesClosedForm) {
  const std::size_t N = 400000;
  for (auto [l, d] : {std::pair{0.2, deg(30.0)}, std::pair{0.3, deg(50.0)}, std::pair{0.25, deg(45.0)}}) {
    const double p = oracle::truss_pf(l, d);
    EXPECT_NEAR(mc_pf(l, d, N, 3), p, 4.0 * std::sqrt(p * (1 - p) / N) + 1e-12) << l << " " << d;
  }
}

TEST(Truss, FailureProbabilityDecreasesInArea) {
  double prev = 1.0;
  for (double l = 0.05; l <= 0.6; l += 0.05) {
    const double p = oracle::truss_pf(l, deg(43.0));
    EXPECT_LE(p, prev);
    prev = p;
  }
  EXPECT_GT(mc_pf(0.2, deg(43.0), 100000, 4), mc_pf(0.3, deg(43.0), 100000, 4));
}

TEST(Truss, ProblemInterface) {
  const TrussProblem p;
  EXPECT_EQ(p.dimension(), 2u);
  EXPECT_EQ(p.initial_design(), (Vector{{0.1, std::numbers::pi / 4}}));
  EXPECT_EQ(p.lower_bounds()[0], 0.0);
  EXPECT_EQ(p.upper_bounds()[0], 1.0);
  EXPECT_GT(p.lower_bounds()[1], 0.0);
  EXPECT_LT(p.upper_bounds()[1], std::numbers::pi / 2);
  Vector grad;
  const double xi = 0.7;
  EXPECT_EQ(p.objective_sample(Vector{{0.3, 0.6}}, {&xi, 1}, grad), truss_objective(0.3, 0.6));
  EXPECT_EQ(grad, truss_objective_gradient(0.3, 0.6));
  EXPECT_THROW(TrussProblem(TrussSettings{0.0}), ConfigError);
}
