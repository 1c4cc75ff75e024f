#pragma once
// Random inputs: marginal distributions, iso-probabilistic maps to and from
// standard-normal space, and counter-based sample streams.

#include "rbto/error.hpp"
#include "rbto/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rbto {

namespace detail {

// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// A reproducible source of randomness identified by a root seed and a path of
/// labels. Every draw is a pure function of (seed, path, index), so streams can
/// be consumed out of order or from several threads.
class SampleStream {
 public:
  using Label = std::variant<std::uint64_t, std::string>;

  explicit SampleStream(std::uint64_t seed) : seed_(seed), key_(detail::mix64(seed + detail::kGolden)) {}

  SampleStream child(Label label) const {
    SampleStream s = *this;
    const std::uint64_t tag = std::visit(
        [](const auto& v) -> std::uint64_t {
          if constexpr (std::is_same_v<std::decay_t<decltype(v)>, std::string>)
            return detail::fnv1a(v) ^ 0x5bd1e9955bd1e995ULL;
          else
            return detail::mix64(v + 0x2545f4914f6cdd1dULL);
        },
        label);
    s.key_ = detail::mix64(key_ ^ detail::mix64(tag + detail::kGolden));
    s.path_.push_back(std::move(label));
    return s;
  }
  SampleStream child(const char* label) const { return child(Label{std::string(label)}); }
  SampleStream child(std::string_view label) const { return child(Label{std::string(label)}); }
  template <std::integral I>
  SampleStream child(I label) const {
    return child(Label{static_cast<std::uint64_t>(label)});
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t key() const { return key_; }
  const std::vector<Label>& path() const { return path_; }

  std::string path_string() const {
    std::string out = std::to_string(seed_);
    for (const auto& l : path_) {
      out += '/';
      if (const auto* s = std::get_if<std::string>(&l))
        out += *s;
      else
        out += std::to_string(std::get<std::uint64_t>(l));
    }
    return out;
  }

  /// 64 random bits: the index-th output of SplitMix64 started at key().
  std::uint64_t bits(std::uint64_t index) const {
    return detail::mix64(key_ + (index + 1) * detail::kGolden);
  }

  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t index) const {
    return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on the uniform pair (2 index, 2 index + 1).
  double normal(std::uint64_t index) const {
    const double r = std::sqrt(-2.0 * std::log(uniform(2 * index)));
    return r * std::cos(2.0 * std::numbers::pi * uniform(2 * index + 1));
  }

  friend bool operator==(const SampleStream& a, const SampleStream& b) {
    return a.seed_ == b.seed_ && a.path_ == b.path_;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::vector<Label> path_;
};

/// A scalar random variable. Lognormal parameters are the physical-space mean
/// and standard deviation; the underlying normal moments are derived.
class RandomVariable {
 public:
  enum class Family { StandardNormal, Normal, Lognormal };

  static RandomVariable standard_normal() { return RandomVariable(Family::StandardNormal, 0.0, 1.0); }

  static RandomVariable normal(double mean, double sd) {
    if (!(sd > 0.0) || !std::isfinite(mean) || !std::isfinite(sd))
      throw ConfigError("normal variable requires finite mean and std > 0");
    return RandomVariable(Family::Normal, mean, sd);
  }

  static RandomVariable lognormal(double mean, double sd) {
    if (!(sd > 0.0) || !std::isfinite(sd)) throw ConfigError("lognormal variable requires std > 0");
    if (!(mean > 0.0) || !std::isfinite(mean)) throw ConfigError("lognormal variable requires mean > 0");
    return RandomVariable(Family::Lognormal, mean, sd);
  }

  Family family() const { return family_; }
  double mean() const { return mean_; }
  double stddev() const { return std_; }
  /// Parameters of ln X for lognormal variables.
  double log_mean() const { return log_mean_; }
  double log_std() const { return log_std_; }

  double from_u(double u) const {
    switch (family_) {
      case Family::StandardNormal:
        return u;
      case Family::Normal:
        return mean_ + std_ * u;
      case Family::Lognormal:
        return std::exp(log_mean_ + log_std_ * u);
    }
    return u;
  }

  double to_u(double x) const {
    switch (family_) {
      case Family::StandardNormal:
        return x;
      case Family::Normal:
        return (x - mean_) / std_;
      case Family::Lognormal:
        if (!(x > 0.0)) throw DomainError("lognormal realization must be positive, got " + std::to_string(x));
        return (std::log(x) - log_mean_) / log_std_;
    }
    return x;
  }

  friend bool operator==(const RandomVariable& a, const RandomVariable& b) {
    return a.family_ == b.family_ && a.mean_ == b.mean_ && a.std_ == b.std_;
  }

 private:
  RandomVariable(Family f, double mean, double sd) : family_(f), mean_(mean), std_(sd) {
    if (f == Family::Lognormal) {
      const double cv = sd / mean;
      log_std_ = std::sqrt(std::log1p(cv * cv));
      log_mean_ = std::log(mean) - 0.5 * log_std_ * log_std_;
    }
  }

  Family family_;
  double mean_;
  double std_;
  double log_mean_ = 0.0;
  double log_std_ = 1.0;
};

/// Independent components, in a fixed order shared by sampling, transforms and
/// the chaos basis.
class RandomInput {
 public:
  explicit RandomInput(std::vector<RandomVariable> components) : components_(std::move(components)) {
    if (components_.empty()) throw ConfigError("random input needs at least one component");
  }

  static RandomInput standard_normal(std::size_t dim) {
    return RandomInput(std::vector<RandomVariable>(dim, RandomVariable::standard_normal()));
  }

  std::size_t dimension() const { return components_.size(); }
  const RandomVariable& operator[](std::size_t i) const { return components_[i]; }
  const std::vector<RandomVariable>& components() const { return components_; }

  void from_u(std::span<const double> u, std::span<double> x) const {
    for (std::size_t i = 0; i < components_.size(); ++i) x[i] = components_[i].from_u(u[i]);
  }
  void to_u(std::span<const double> x, std::span<double> u) const {
    for (std::size_t i = 0; i < components_.size(); ++i) u[i] = components_[i].to_u(x[i]);
  }
  Vector from_u(const Vector& u) const {
    Vector x(u.size());
    from_u(as_span(u), {x.data(), static_cast<std::size_t>(x.size())});
    return x;
  }
  Vector to_u(const Vector& x) const {
    Vector u(x.size());
    to_u(as_span(x), {u.data(), static_cast<std::size_t>(u.size())});
    return u;
  }

  /// Standard-normal coordinates of realization `index` of `stream`.
  void realization_u(const SampleStream& stream, std::uint64_t index, std::span<double> u) const {
    const std::uint64_t d = components_.size();
    for (std::uint64_t c = 0; c < d; ++c) u[c] = stream.normal(index * d + c);
  }

  /// Physical realization `index` of `stream`; row `index` of sample(n, stream).
  void realization(const SampleStream& stream, std::uint64_t index, std::span<double> x) const {
    realization_u(stream, index, x);
    for (std::size_t c = 0; c < components_.size(); ++c) x[c] = components_[c].from_u(x[c]);
  }

  SampleMatrix sample_u(std::size_t n, const SampleStream& stream) const {
    SampleMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dimension()));
    for (std::size_t i = 0; i < n; ++i) realization_u(stream, i, {m.row(i).data(), dimension()});
    return m;
  }

  SampleMatrix sample(std::size_t n, const SampleStream& stream) const {
    if (n == 0) throw ConfigError("sample count must be at least 1");
    SampleMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dimension()));
    for (std::size_t i = 0; i < n; ++i) realization(stream, i, {m.row(i).data(), dimension()});
    return m;
  }

  friend bool operator==(const RandomInput&, const RandomInput&) = default;

 private:
  std::vector<RandomVariable> components_;
};

/// Log density of the standard multivariate normal.
inline double log_pdf_u(std::span<const double> u) {
  constexpr double kLogSqrt2Pi = 0.91893853320467274178;
  double s = 0.0;
  for (double v : u) s += -0.5 * v * v - kLogSqrt2Pi;
  return s;
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace rbto
