#pragma once
// Failure-probability estimators: crude Monte Carlo, subset simulation with a
// modified Metropolis kernel, and the surrogate-screened hybrid estimator.
// Failure is g <= 0 throughout.

#include "rbto/error.hpp"
#include "rbto/parallel.hpp"
#include "rbto/pce.hpp"
#include "rbto/probmod.hpp"
#include "rbto/types.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace rbto {

/// g(theta; xi) with a shared counter of exact evaluations. Copies share the counter.
class LimitState {
 public:
  using Fn = std::function<double(std::span<const double> theta, std::span<const double> xi)>;

  explicit LimitState(Fn fn) : fn_(std::move(fn)), count_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
    if (!fn_) throw ConfigError("limit state needs an evaluator");
  }

  double operator()(std::span<const double> theta, std::span<const double> xi) const {
    count_->fetch_add(1, std::memory_order_relaxed);
    return fn_(theta, xi);
  }

  std::uint64_t evaluations() const { return count_->load(); }
  void reset_count() const { count_->store(0); }

 private:
  Fn fn_;
  std::shared_ptr<std::atomic<std::uint64_t>> count_;
};

enum class EstimatorMethod { MC, Subset, Hybrid };

inline const char* to_string(EstimatorMethod m) {
  switch (m) {
    case EstimatorMethod::MC:
      return "mc";
    case EstimatorMethod::Subset:
      return "subset";
    case EstimatorMethod::Hybrid:
      return "hybrid";
  }
  return "?";
}

struct ReliabilityEstimate {
  double p_hat = 0.0;
  EstimatorMethod method = EstimatorMethod::MC;
  int levels = 0;
  std::uint64_t n_exact_evals = 0;
  std::uint64_t n_surrogate_evals = 0;
  /// Subset thresholds b_0, b_1, ..., the last one being the first b_j <= 0.
  std::vector<double> thresholds;
  /// Failed samples in the final population (or among all N for MC and hybrid).
  std::uint64_t n_fail = 0;
  std::uint64_t population = 0;
};

struct SubsetConfig {
  std::size_t N = 1000;
  double p0 = 0.1;
  double proposal_std = 1.0;
  int max_levels = 20;

  /// Chain seeds per level, ceil(N p0).
  std::size_t seeds() const { return static_cast<std::size_t>(std::ceil(static_cast<double>(N) * p0 - 1e-9)); }
  /// Nominal chain length, floor(1 / p0).
  std::size_t chain_length() const { return static_cast<std::size_t>(std::floor(1.0 / p0 + 1e-9)); }

  void validate() const {
    if (!(p0 > 0.0 && p0 < 1.0)) throw ConfigError("subset p0 must lie in (0, 1)");
    if (N < 1) throw ConfigError("subset N must be at least 1");
    if (seeds() < 2) throw ConfigError("subset ceil(N p0) must be at least 2");
    if (chain_length() < 2) throw ConfigError("subset floor(1/p0) must be at least 2");
    if (!(proposal_std > 0.0) || !std::isfinite(proposal_std)) throw ConfigError("subset proposal_std must be > 0");
    if (max_levels < 1) throw ConfigError("subset max_levels must be at least 1");
  }

  friend bool operator==(const SubsetConfig&, const SubsetConfig&) = default;
};

struct HybridConfig {
  double gamma = 2.5;
  std::size_t N = 1000000;
  std::size_t n_fit = 100;
  int pce_order = 4;

  void validate(std::size_t dim) const {
    if (!(gamma >= 0.0)) throw ConfigError("hybrid gamma must be >= 0");
    if (N < 1) throw ConfigError("hybrid N must be at least 1");
    if (pce_order < 0) throw ConfigError("hybrid pce_order must be >= 0");
    const std::size_t terms = multi_indices(dim, pce_order).size();
    if (n_fit < terms)
      throw ConfigError("hybrid n_fit (" + std::to_string(n_fit) + ") is below the basis size (" +
                        std::to_string(terms) + ")");
  }

  friend bool operator==(const HybridConfig&, const HybridConfig&) = default;
};

/// Per-level populations in u-space, recorded on request by subset_estimate.
struct SubsetTrace {
  /// populations[j] holds the N samples of level j, one per row.
  std::vector<SampleMatrix> populations;
};

/// Subset simulation reached max_levels with the threshold still above zero.
struct LevelCapError : NumericalError {
  LevelCapError(const std::string& what, ReliabilityEstimate est) : NumericalError(what), partial(std::move(est)) {}
  ReliabilityEstimate partial;
};

namespace detail {

template <class Fn>
std::uint64_t parallel_count(std::size_t n, Fn&& fails) {
  std::atomic<std::uint64_t> total{0};
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::uint64_t local = 0;
    for (std::size_t i = begin; i < end; ++i) local += fails(i) ? 1 : 0;
    total += local;
  });
  return total.load();
}

}  // namespace detail

/// Crude Monte Carlo. Realization i is input.realization(stream, i).
inline ReliabilityEstimate mc_estimate(const LimitState& g, std::span<const double> theta, const RandomInput& input,
                                       std::size_t N, const SampleStream& stream) {
  if (N < 1) throw ConfigError("Monte Carlo sample count must be at least 1");
  const std::size_t d = input.dimension();
  const std::uint64_t fails = detail::parallel_count(N, [&](std::size_t i) {
    double x[16];
    std::vector<double> heap;
    double* px = d > 16 ? (heap.resize(d), heap.data()) : x;
    input.realization(stream, i, {px, d});
    return g(theta, {px, d}) <= 0.0;
  });
  ReliabilityEstimate est;
  est.method = EstimatorMethod::MC;
  est.p_hat = static_cast<double>(fails) / static_cast<double>(N);
  est.n_exact_evals = N;
  est.n_fail = fails;
  est.population = N;
  return est;
}

/// Subset simulation. Level 0 uses the same realizations as mc_estimate on
/// `stream`; chains draw from stream.child("chain").child(level).child(chain).
/// The ceil(N p0) lowest samples each seed one chain (seed included), and the N
/// population slots are spread over the chains so each has floor(1/p0) or
/// floor(1/p0) + 1 states; when N p0 is an integer every chain has exactly 1/p0.
inline ReliabilityEstimate subset_estimate(const LimitState& g, std::span<const double> theta,
                                           const RandomInput& input, const SubsetConfig& cfg,
                                           const SampleStream& stream, SubsetTrace* trace = nullptr) {
  cfg.validate();
  const std::size_t N = cfg.N;
  const std::size_t d = input.dimension();
  const std::size_t nc = cfg.seeds();
  if (nc > N) throw ConfigError("subset ceil(N p0) exceeds N");

  std::vector<double> u(N * d);
  std::vector<double> gv(N);
  std::atomic<std::uint64_t> evals{0};

  parallel_for(
      N,
      [&](std::size_t begin, std::size_t end) {
        std::vector<double> x(d);
        for (std::size_t i = begin; i < end; ++i) {
          std::span<double> ui(u.data() + i * d, d);
          input.realization_u(stream, i, ui);
          input.from_u(ui, x);
          gv[i] = g(theta, x);
        }
      },
      1024);
  evals += N;

  ReliabilityEstimate est;
  est.method = EstimatorMethod::Subset;
  est.population = N;

  std::vector<std::size_t> order(N);
  auto sort_population = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gv[a] < gv[b]; });
    return gv[order[nc - 1]];
  };
  auto record = [&] {
    if (trace)
      trace->populations.push_back(
          Eigen::Map<const SampleMatrix>(u.data(), static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(d)));
  };
  auto count_fail = [&] {
    return static_cast<std::uint64_t>(std::count_if(gv.begin(), gv.end(), [](double v) { return v <= 0.0; }));
  };

  record();
  double b = sort_population();
  est.thresholds.push_back(b);
  int level = 0;
  const SampleStream chain_root = stream.child("chain");

  while (b > 0.0) {
    if (level == cfg.max_levels) {
      est.levels = level;
      est.n_fail = count_fail();
      est.p_hat = static_cast<double>(est.n_fail) / static_cast<double>(N) * std::pow(cfg.p0, level);
      est.n_exact_evals = evals.load();
      throw LevelCapError("subset simulation reached max_levels = " + std::to_string(cfg.max_levels) +
                              " with threshold " + std::to_string(b) + " > 0",
                          est);
    }

    // Chain c occupies slots [start[c], start[c + 1]) of the next population.
    std::vector<std::size_t> start(nc + 1, 0);
    for (std::size_t c = 0; c < nc; ++c) start[c + 1] = start[c] + N / nc + (c < N % nc ? 1 : 0);

    std::vector<double> u_next(N * d);
    std::vector<double> g_next(N);
    const SampleStream level_stream = chain_root.child(static_cast<std::uint64_t>(level));
    const double threshold = b;

    parallel_for(
        nc,
        [&](std::size_t c_begin, std::size_t c_end) {
          std::vector<double> cand(d);
          std::vector<double> x(d);
          std::uint64_t local_evals = 0;
          for (std::size_t c = c_begin; c < c_end; ++c) {
            const SampleStream cs = level_stream.child(static_cast<std::uint64_t>(c));
            const SampleStream proposal = cs.child("proposal");
            const SampleStream accept = cs.child("accept");
            const std::size_t seed = order[c];
            std::size_t slot = start[c];
            std::copy_n(u.data() + seed * d, d, u_next.data() + slot * d);
            g_next[slot] = gv[seed];
            for (std::size_t t = 1; slot + 1 < start[c + 1]; ++t) {
              const double* cur = u_next.data() + slot * d;
              for (std::size_t k = 0; k < d; ++k) {
                const std::uint64_t idx = t * d + k;
                const double prop = cur[k] + cfg.proposal_std * proposal.normal(idx);
                const double log_ratio = 0.5 * (cur[k] * cur[k] - prop * prop);
                cand[k] = std::log(accept.uniform(idx)) < log_ratio ? prop : cur[k];
              }
              input.from_u(cand, x);
              const double gc = g(theta, x);
              ++local_evals;
              ++slot;
              if (gc <= threshold) {
                std::copy(cand.begin(), cand.end(), u_next.begin() + static_cast<std::ptrdiff_t>(slot * d));
                g_next[slot] = gc;
              } else {
                std::copy_n(u_next.data() + (slot - 1) * d, d, u_next.data() + slot * d);
                g_next[slot] = g_next[slot - 1];
              }
            }
          }
          evals += local_evals;
        },
        1);

    u.swap(u_next);
    gv.swap(g_next);
    ++level;
    record();
    b = sort_population();
    est.thresholds.push_back(b);
  }

  est.levels = level;
  est.n_fail = count_fail();
  est.p_hat = static_cast<double>(est.n_fail) / static_cast<double>(N) * std::pow(cfg.p0, level);
  est.n_exact_evals = evals.load();
  return est;
}

/// Hybrid estimator: fit a chaos surrogate on cfg.n_fit exact evaluations
/// drawn from stream.child("pce-fit"), screen N realizations (the same ones
/// mc_estimate would use on `stream`), and call g only inside |g_hat| <= gamma.
inline ReliabilityEstimate hybrid_estimate(const LimitState& g, std::span<const double> theta,
                                           const RandomInput& input, const HybridConfig& cfg,
                                           const SampleStream& stream) {
  const std::size_t d = input.dimension();
  cfg.validate(d);
  const MultiIndexSet indices = multi_indices(d, cfg.pce_order);

  const SampleMatrix fit_u = input.sample_u(cfg.n_fit, stream.child("pce-fit"));
  std::vector<double> fit_values(cfg.n_fit);
  {
    std::vector<double> x(d);
    for (std::size_t i = 0; i < cfg.n_fit; ++i) {
      input.from_u(row_span(fit_u, static_cast<Eigen::Index>(i)), x);
      fit_values[i] = g(theta, x);
    }
  }
  const PceModel model = fit_least_squares(fit_u, fit_values, indices, input);

  std::atomic<std::uint64_t> band{0};
  const std::uint64_t fails = detail::parallel_count(cfg.N, [&](std::size_t i) {
    double ub[16];
    double xb[16];
    std::vector<double> heap;
    double* pu = ub;
    double* px = xb;
    if (d > 16) {
      heap.resize(2 * d);
      pu = heap.data();
      px = heap.data() + d;
    }
    input.realization_u(stream, i, {pu, d});
    const double gh = model.evaluate_u({pu, d});
    if (gh < -cfg.gamma) return true;
    if (std::abs(gh) <= cfg.gamma) {
      band.fetch_add(1, std::memory_order_relaxed);
      input.from_u({pu, d}, {px, d});
      return g(theta, {px, d}) <= 0.0;
    }
    return false;
  });

  ReliabilityEstimate est;
  est.method = EstimatorMethod::Hybrid;
  est.p_hat = static_cast<double>(fails) / static_cast<double>(cfg.N);
  est.n_exact_evals = cfg.n_fit + band.load();
  est.n_surrogate_evals = cfg.N;
  est.n_fail = fails;
  est.population = cfg.N;
  return est;
}

struct EstimatorConfig {
  EstimatorMethod method = EstimatorMethod::Hybrid;
  std::size_t mc_samples = 1000000;
  SubsetConfig subset;
  HybridConfig hybrid;

  friend bool operator==(const EstimatorConfig&, const EstimatorConfig&) = default;
};

inline ReliabilityEstimate estimate(const LimitState& g, std::span<const double> theta, const RandomInput& input,
                                    const EstimatorConfig& cfg, const SampleStream& stream) {
  switch (cfg.method) {
    case EstimatorMethod::MC:
      return mc_estimate(g, theta, input, cfg.mc_samples, stream);
    case EstimatorMethod::Subset:
      return subset_estimate(g, theta, input, cfg.subset, stream);
    case EstimatorMethod::Hybrid:
      return hybrid_estimate(g, theta, input, cfg.hybrid, stream);
  }
  throw ConfigError("unknown estimator method");
}

}  // namespace rbto
