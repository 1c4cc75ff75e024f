#include "oracles.hpp"
#include "rbto/reliability.hpp"
#include "rbto/truss.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace rbto;

namespace {

const std::vector<double> kNoDesign;

LimitState constant(double v) {
  return LimitState([v](std::span<const double>, std::span<const double>) { return v; });
}

LimitState linear(double b) {
  return LimitState([b](std::span<const double>, std::span<const double> xi) { return b - xi[0]; });
}

LimitState truss_g() {
  return LimitState([](std::span<const double> th, std::span<const double> xi) {
    return truss_limit_state(th[0], th[1], xi[0]);
  });
}

const std::vector<double> kReference = {0.3425, oracle::deg(43.25)};

}  // namespace

TEST(MonteCarlo, AlwaysFailing) {
  const auto e = mc_estimate(constant(-1.0), kNoDesign, RandomInput::standard_normal(1), 100, SampleStream(1));
  EXPECT_EQ(e.p_hat, 1.0);
  EXPECT_EQ(e.n_exact_evals, 100u);
  EXPECT_EQ(e.method, EstimatorMethod::MC);
  EXPECT_EQ(e.levels, 0);
}

TEST(MonteCarlo, NeverFailing) {
  const auto e = mc_estimate(constant(1.0), kNoDesign, RandomInput::standard_normal(1), 100, SampleStream(1));
  EXPECT_EQ(e.p_hat, 0.0);
}

TEST(MonteCarlo, ZeroIsFailure) {
  const auto e = mc_estimate(constant(0.0), kNoDesign, RandomInput::standard_normal(1), 10, SampleStream(1));
  EXPECT_EQ(e.p_hat, 1.0);
}

TEST(MonteCarlo, LinearLimitStateWithinThreeSigma) {
  const std::size_t N = 1000000;
  const auto e = mc_estimate(linear(3.0), kNoDesign, RandomInput::standard_normal(1), N, SampleStream(5));
  const double p = oracle::phi_cdf(-3.0);
  EXPECT_NEAR(p, 1.3499e-3, 1e-7);
  EXPECT_NEAR(e.p_hat, p, 3.0 * std::sqrt(p * (1 - p) / N));
}

TEST(MonteCarlo, RejectsEmptySample) {
  EXPECT_THROW(mc_estimate(linear(3.0), kNoDesign, RandomInput::standard_normal(1), 0, SampleStream(5)),
               ConfigError);
}

TEST(MonteCarlo, CounterIncrementsOncePerEvaluation) {
  const LimitState g = linear(1.0);
  mc_estimate(g, kNoDesign, RandomInput::standard_normal(1), 1234, SampleStream(5));
  EXPECT_EQ(g.evaluations(), 1234u);
  const LimitState copy = g;
  copy(kNoDesign, std::vector<double>{0.0});
  EXPECT_EQ(g.evaluations(), 1235u);
  g.reset_count();
  EXPECT_EQ(g.evaluations(), 0u);
}

TEST(Subset, CalibrationOverFiftyRuns) {
  const SubsetConfig cfg{1000, 0.1, 1.0, 20};
  double sum = 0.0;
  for (int r = 0; r < 50; ++r) {
    const auto e = subset_estimate(linear(3.0), kNoDesign, RandomInput::standard_normal(1), cfg,
                                   SampleStream(1000 + r));
    sum += e.p_hat;
    const double nominal = static_cast<double>(cfg.N + e.levels * cfg.N);
    EXPECT_LE(std::abs(static_cast<double>(e.n_exact_evals) - nominal), 0.1 * nominal);
  }
  const double mean = sum / 50.0;
  EXPECT_GE(mean, 0.9e-3);
  EXPECT_LE(mean, 1.9e-3);
}

TEST(Subset, EstimateIsExactProductFormula) {
  const SubsetConfig cfg{1000, 0.1, 1.0, 20};
  const auto e = subset_estimate(linear(3.0), kNoDesign, RandomInput::standard_normal(1), cfg, SampleStream(3));
  ASSERT_GE(e.levels, 1);
  EXPECT_EQ(e.p_hat, static_cast<double>(e.n_fail) / 1000.0 * std::pow(0.1, e.levels));
  EXPECT_EQ(e.thresholds.size(), static_cast<std::size_t>(e.levels) + 1);
  EXPECT_LE(e.thresholds.back(), 0.0);
  for (std::size_t j = 1; j < e.thresholds.size(); ++j) EXPECT_LT(e.thresholds[j], e.thresholds[j - 1]);
}

TEST(Subset, ExactEvaluationCount) {
  for (const SubsetConfig cfg : {SubsetConfig{1000, 0.1, 1.0, 20}, SubsetConfig{500, 0.2, 1.0, 20},
                                 SubsetConfig{1003, 0.3, 0.8, 20}}) {
    const LimitState g = linear(3.5);
    const auto e = subset_estimate(g, kNoDesign, RandomInput::standard_normal(1), cfg, SampleStream(8));
    const std::size_t nc = cfg.seeds();
    EXPECT_EQ(e.n_exact_evals, cfg.N + static_cast<std::size_t>(e.levels) * (cfg.N - nc));
    EXPECT_EQ(g.evaluations(), e.n_exact_evals);
  }
}

TEST(Subset, AlwaysFailingStopsAtLevelZero) {
  const SubsetConfig cfg{500, 0.1, 1.0, 20};
  const auto e = subset_estimate(constant(-1.0), kNoDesign, RandomInput::standard_normal(1), cfg, SampleStream(1));
  EXPECT_EQ(e.p_hat, 1.0);
  EXPECT_EQ(e.levels, 0);
  EXPECT_EQ(e.n_exact_evals, 500u);
}

TEST(Subset, DegeneratesToMonteCarloWhenFirstThresholdIsNonpositive) {
  const SubsetConfig cfg{2000, 0.1, 1.0, 20};
  const auto in = RandomInput::standard_normal(2);
  const LimitState g([](std::span<const double>, std::span<const double> x) { return 0.8 - x[0] - 0.5 * x[1]; });
  const SampleStream s(44);
  const auto sub = subset_estimate(g, kNoDesign, in, cfg, s);
  const auto mc = mc_estimate(g, kNoDesign, in, cfg.N, s);
  ASSERT_EQ(sub.levels, 0);
  EXPECT_EQ(sub.p_hat, mc.p_hat);
  EXPECT_EQ(sub.n_fail, mc.n_fail);
}

TEST(Subset, ChainsSampleTheConditionalDistribution) {
  // On g = 3 - xi, the population after level j follows N(0,1) truncated to xi >= 3 - b_j.
  const SubsetConfig cfg{1000, 0.1, 1.0, 20};
  const int runs = 60;
  for (std::size_t level : {1u, 2u}) {
    std::vector<double> diffs;
    for (int r = 0; r < runs; ++r) {
      SubsetTrace trace;
      const auto e = subset_estimate(linear(3.0), kNoDesign, RandomInput::standard_normal(1), cfg,
                                     SampleStream(500 + r), &trace);
      ASSERT_EQ(trace.populations.size(), static_cast<std::size_t>(e.levels) + 1);
      if (trace.populations.size() <= level) continue;
      const double a = 3.0 - e.thresholds[level - 1];
      diffs.push_back(trace.populations[level].col(0).mean() - oracle::truncated_normal_mean(a));
    }
    ASSERT_GT(diffs.size(), 30u);
    const double n = static_cast<double>(diffs.size());
    double mean = 0.0;
    for (double d : diffs) mean += d / n;
    double var = 0.0;
    for (double d : diffs) var += (d - mean) * (d - mean) / (n - 1);
    EXPECT_LT(std::abs(mean), 3.0 * std::sqrt(var / n)) << "level " << level;
  }
}

TEST(Subset, TrussReferenceDesignNearAllowable) {
  const SubsetConfig cfg{1000, 0.1, 1.0, 20};
  const auto e = subset_estimate(truss_g(), kReference, RandomInput::standard_normal(1), cfg, SampleStream(2));
  EXPECT_GT(e.p_hat, 0.5e-3);
  EXPECT_LT(e.p_hat, 2e-3);
}

TEST(Subset, LevelCapCarriesPartialEstimate) {
  const SubsetConfig cfg{200, 0.1, 1.0, 3};
  try {
    subset_estimate(constant(1.0), kNoDesign, RandomInput::standard_normal(1), cfg, SampleStream(1));
    FAIL() << "expected LevelCapError";
  } catch (const LevelCapError& e) {
    EXPECT_EQ(e.partial.levels, 3);
    EXPECT_EQ(e.partial.p_hat, 0.0);
    EXPECT_EQ(e.partial.thresholds.size(), 4u);
    EXPECT_EQ(e.partial.n_exact_evals, 200u + 3u * 180u);
  }
}

TEST(Subset, InvalidConfigs) {
  EXPECT_THROW((SubsetConfig{10, 0.1, 1.0, 20}.validate()), ConfigError);
  EXPECT_THROW((SubsetConfig{1000, 0.6, 1.0, 20}.validate()), ConfigError);
  EXPECT_THROW((SubsetConfig{1000, 0.0, 1.0, 20}.validate()), ConfigError);
  EXPECT_THROW((SubsetConfig{1000, 0.1, 0.0, 20}.validate()), ConfigError);
  EXPECT_THROW((SubsetConfig{1000, 0.1, 1.0, 0}.validate()), ConfigError);
  EXPECT_NO_THROW((SubsetConfig{1000, 0.5, 1.0, 20}.validate()));
}

TEST(Subset, Deterministic) {
  const SubsetConfig cfg{1000, 0.1, 1.0, 20};
  const auto a = subset_estimate(linear(3.0), kNoDesign, RandomInput::standard_normal(1), cfg, SampleStream(9));
  const auto b = subset_estimate(linear(3.0), kNoDesign, RandomInput::standard_normal(1), cfg, SampleStream(9));
  EXPECT_EQ(a.p_hat, b.p_hat);
  EXPECT_EQ(a.thresholds, b.thresholds);
}

TEST(Hybrid, InfiniteBandEqualsMonteCarlo) {
  const HybridConfig cfg{std::numeric_limits<double>::infinity(), 100000, 100, 4};
  const auto in = RandomInput::standard_normal(1);
  const SampleStream s(17);
  const auto h = hybrid_estimate(truss_g(), kReference, in, cfg, s);
  const auto mc = mc_estimate(truss_g(), kReference, in, cfg.N, s);
  EXPECT_EQ(h.p_hat, mc.p_hat);
  EXPECT_EQ(h.n_exact_evals, cfg.n_fit + cfg.N);
  EXPECT_EQ(h.n_surrogate_evals, cfg.N);
}

TEST(Hybrid, ExactSurrogateWithEmptyBand) {
  // g is a degree-2 polynomial in u, so the order-4 fit is exact.
  const auto in = RandomInput::standard_normal(2);
  const LimitState g([](std::span<const double>, std::span<const double> u) {
    return 2.0 - u[0] - 0.3 * u[1] * u[1] + 0.2 * u[0] * u[1];
  });
  const HybridConfig cfg{0.0, 200000, 40, 4};
  const SampleStream s(23);
  const auto h = hybrid_estimate(g, kNoDesign, in, cfg, s);
  const auto mc = mc_estimate(g, kNoDesign, in, cfg.N, s);
  EXPECT_EQ(h.n_exact_evals, cfg.n_fit);
  EXPECT_EQ(h.p_hat, mc.p_hat);
  EXPECT_GT(h.p_hat, 0.0);
}

TEST(Hybrid, IndicatorMatchesWhenSurrogateErrorIsInsideBand) {
  // A degree-5 term cannot be represented at order 4; the band absorbs the residual.
  const auto in = RandomInput::standard_normal(1);
  const LimitState g([](std::span<const double>, std::span<const double> u) {
    return 2.5 - u[0] + 0.001 * std::pow(u[0], 5);
  });
  const HybridConfig cfg{1.0, 200000, 100, 4};
  const SampleStream s(29);
  const auto h = hybrid_estimate(g, kNoDesign, in, cfg, s);
  const auto mc = mc_estimate(g, kNoDesign, in, cfg.N, s);
  EXPECT_EQ(h.p_hat, mc.p_hat);
  EXPECT_LT(h.n_exact_evals, cfg.N / 10);
}

TEST(Hybrid, TrussReferenceAgreesWithMonteCarlo) {
  const HybridConfig cfg{2.5, 1000000, 100, 4};
  const auto in = RandomInput::standard_normal(1);
  const SampleStream s(31);
  const auto h = hybrid_estimate(truss_g(), kReference, in, cfg, s);
  const auto mc = mc_estimate(truss_g(), kReference, in, cfg.N, s.child("independent"));
  EXPECT_NEAR(h.p_hat, mc.p_hat, 0.2 * mc.p_hat);
  EXPECT_LT(h.n_exact_evals, cfg.N / 100);
}

TEST(Hybrid, InvalidConfigs) {
  EXPECT_THROW((HybridConfig{-1.0, 1000, 100, 4}.validate(1)), ConfigError);
  EXPECT_THROW((HybridConfig{1.0, 1000, 14, 4}.validate(2)), ConfigError);
  EXPECT_NO_THROW((HybridConfig{1.0, 1000, 15, 4}.validate(2)));
}

TEST(Estimators, ProbabilityStaysInUnitInterval) {
  const auto in = RandomInput::standard_normal(1);
  for (double b : {-5.0, 0.0, 1.0, 3.0}) {
    EstimatorConfig c;
    c.mc_samples = 2000;
    c.subset = {1000, 0.1, 1.0, 20};
    c.hybrid = {2.5, 5000, 20, 4};
    for (auto m : {EstimatorMethod::MC, EstimatorMethod::Subset, EstimatorMethod::Hybrid}) {
      c.method = m;
      const auto e = estimate(linear(b), kNoDesign, in, c, SampleStream(2));
      EXPECT_GE(e.p_hat, 0.0);
      EXPECT_LE(e.p_hat, 1.0);
      EXPECT_EQ(e.method, m);
    }
  }
}

TEST(Estimators, MethodNames) {
  EXPECT_STREQ(to_string(EstimatorMethod::MC), "mc");
  EXPECT_STREQ(to_string(EstimatorMethod::Subset), "subset");
  EXPECT_STREQ(to_string(EstimatorMethod::Hybrid), "hybrid");
}
