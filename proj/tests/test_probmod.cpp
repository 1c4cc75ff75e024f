#include "rbto/probmod.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace rbto;

namespace {

struct Moments {
  double mean;
  double sd;
};

Moments column_moments(const SampleMatrix& m, Eigen::Index col) {
  const double n = static_cast<double>(m.rows());
  const double mean = m.col(col).sum() / n;
  const double var = (m.col(col).array() - mean).square().sum() / (n - 1.0);
  return {mean, std::sqrt(var)};
}

// Lognormal CDF written directly from its definition.
double lognormal_cdf(double x, double mu, double sigma) { return 0.5 * std::erfc(-(std::log(x) - mu) / (sigma * std::sqrt(2.0))); }

}  // namespace

TEST(Probmod, StandardNormalSampleMoments) {
  const RandomInput in = RandomInput::standard_normal(1);
  const SampleMatrix s = in.sample(1000000, SampleStream(42));
  const Moments m = column_moments(s, 0);
  EXPECT_NEAR(m.mean, 0.0, 0.005);
  EXPECT_NEAR(m.sd, 1.0, 0.005);
}

TEST(Probmod, LognormalSampleMomentsWithinThreeStandardErrors) {
  const RandomInput in({RandomVariable::lognormal(1.0, 0.1)});
  const std::size_t n = 1000000;
  const SampleMatrix s = in.sample(n, SampleStream(7).child("lognormal"));
  const Moments m = column_moments(s, 0);
  EXPECT_NEAR(m.mean, 1.0, 0.002);
  EXPECT_NEAR(m.mean, 1.0, 3.0 * 0.1 / std::sqrt(static_cast<double>(n)));
  // Standard error of a sample standard deviation is roughly sd * sqrt((kurtosis - 1) / 4n).
  const double s2 = std::log1p(0.01);
  const double excess = std::exp(4 * s2) + 2 * std::exp(3 * s2) + 3 * std::exp(2 * s2) - 6;
  EXPECT_NEAR(m.sd, 0.1, 3.0 * 0.1 * std::sqrt((excess + 2.0) / (4.0 * n)));
}

TEST(Probmod, SameSeedAndPathAreBitIdentical) {
  const RandomInput in({RandomVariable::normal(2.0, 3.0), RandomVariable::lognormal(1.0, 0.2)});
  const SampleStream a = SampleStream(123).child("batch").child(5);
  const SampleStream b = SampleStream(123).child("batch").child(5);
  EXPECT_EQ(a, b);
  const SampleMatrix x = in.sample(1000, a);
  const SampleMatrix y = in.sample(1000, b);
  EXPECT_EQ(0, std::memcmp(x.data(), y.data(), sizeof(double) * x.size()));
}

TEST(Probmod, DistinctPathsDiffer) {
  const SampleStream root(9);
  EXPECT_NE(root.child("a").key(), root.child("b").key());
  EXPECT_NE(root.child(1).key(), root.child(2).key());
  EXPECT_NE(root.child("1").key(), root.child(1).key());
  EXPECT_NE(root.child("a").child("b").key(), root.child("b").child("a").key());
  EXPECT_NE(SampleStream(1).key(), SampleStream(2).key());
}

TEST(Probmod, SubstreamsAreUncorrelated) {
  const SampleStream root(2024);
  const SampleStream s1 = root.child("left");
  const SampleStream s2 = root.child("right");
  const int n = 100000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s1.normal(i);
    const double y = s2.normal(i);
    sx += x, sy += y, sxx += x * x, syy += y * y, sxy += x * y;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double r = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  EXPECT_LT(std::abs(r), 0.01);
}

TEST(Probmod, UniformStaysInOpenInterval) {
  const SampleStream s(0);
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double u = s.uniform(i);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Probmod, StandardNormalTransformIsIdentity) {
  const RandomVariable v = RandomVariable::standard_normal();
  for (double x : {-3.0, -0.5, 0.0, 1.25, 4.0}) {
    EXPECT_EQ(v.to_u(x), x);
    EXPECT_EQ(v.from_u(x), x);
  }
}

TEST(Probmod, LognormalParametersFromMoments) {
  const RandomVariable v = RandomVariable::lognormal(1.0, 0.1);
  EXPECT_NEAR(v.log_std(), 0.0997513, 5e-8);
  EXPECT_NEAR(v.log_mean(), -0.0049752, 5e-8);
  EXPECT_NEAR(v.from_u(0.0), 0.9950372, 5e-8);
}

TEST(Probmod, RoundTripOnRandomPoints) {
  const RandomInput in({RandomVariable::normal(-1.0, 2.5), RandomVariable::lognormal(3.0, 1.5),
                        RandomVariable::standard_normal()});
  const SampleStream s(77);
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    Vector u(3);
    for (int c = 0; c < 3; ++c) u[c] = 3.0 * s.normal(3 * i + c);
    const Vector x = in.from_u(u);
    const Vector back = in.to_u(x);
    worst = std::max(worst, (back - u).cwiseAbs().maxCoeff());
    const Vector x2 = in.from_u(in.to_u(x));
    worst = std::max(worst, ((x2 - x).array() / x.array().abs().max(1.0)).abs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Probmod, TransformPreservesMarginalCdf) {
  const RandomVariable v = RandomVariable::lognormal(2.0, 0.7);
  for (double x : {0.3, 1.0, 1.9, 2.5, 6.0}) {
    const double expected = lognormal_cdf(x, v.log_mean(), v.log_std());
    EXPECT_NEAR(normal_cdf(v.to_u(x)), expected, 1e-14);
  }
  const RandomVariable n = RandomVariable::normal(5.0, 2.0);
  EXPECT_NEAR(normal_cdf(n.to_u(7.0)), normal_cdf(1.0), 1e-15);
}

TEST(Probmod, LognormalToUOfNonpositiveIsDomainError) {
  const RandomVariable v = RandomVariable::lognormal(1.0, 0.1);
  EXPECT_THROW(v.to_u(0.0), DomainError);
  EXPECT_THROW(v.to_u(-1.0), DomainError);
}

TEST(Probmod, InvalidVariablesAreRejected) {
  EXPECT_THROW(RandomVariable::normal(0.0, 0.0), ConfigError);
  EXPECT_THROW(RandomVariable::normal(0.0, -1.0), ConfigError);
  EXPECT_THROW(RandomVariable::lognormal(0.0, 0.1), ConfigError);
  EXPECT_THROW(RandomVariable::lognormal(1.0, 0.0), ConfigError);
  EXPECT_THROW(RandomInput(std::vector<RandomVariable>{}), ConfigError);
  EXPECT_THROW(RandomInput::standard_normal(1).sample(0, SampleStream(1)), ConfigError);
}

TEST(Probmod, SampleRowsMatchRealizations) {
  const RandomInput in({RandomVariable::lognormal(1.0, 0.1), RandomVariable::standard_normal()});
  const SampleStream s(5);
  const SampleMatrix m = in.sample(10, s);
  double x[2];
  in.realization(s, 7, x);
  EXPECT_EQ(m(7, 0), x[0]);
  EXPECT_EQ(m(7, 1), x[1]);
}

TEST(Probmod, LogPdfExamples) {
  const double zero1[1] = {0.0};
  const double zero2[2] = {0.0, 0.0};
  const double one[1] = {1.0};
  EXPECT_NEAR(log_pdf_u(zero1), -0.9189385, 5e-8);
  EXPECT_NEAR(log_pdf_u(zero2), -1.8378771, 5e-8);
  EXPECT_NEAR(log_pdf_u(one), -1.4189385, 5e-8);
  EXPECT_NEAR(log_pdf_u(one), std::log(std::exp(-0.5) / std::sqrt(2.0 * std::acos(-1.0))), 1e-14);
}
