#pragma once
// Polynomial chaos surrogates in standard-normal space: orthonormal
// probabilists' Hermite basis, total-degree index sets, least-squares fits.

#include "rbto/error.hpp"
#include "rbto/probmod.hpp"
#include "rbto/types.hpp"

#include <Eigen/QR>

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

namespace rbto {

/// Total-degree multi-index set in graded-lexicographic order: grouped by total
/// degree, and within a degree ordered lexicographically with the first
/// component largest first. The zero tuple comes first.
class MultiIndexSet {
 public:
  MultiIndexSet(std::size_t dim, int order) : dim_(dim), order_(order) {
    if (dim == 0) throw ConfigError("multi-index dimension must be at least 1");
    if (order < 0) throw ConfigError("multi-index order must be nonnegative");
    std::vector<int> current(dim, 0);
    for (int degree = 0; degree <= order; ++degree) append_degree(current, 0, degree);
  }

  std::size_t dimension() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return flat_.size() / dim_; }

  std::span<const int> operator[](std::size_t i) const { return {flat_.data() + i * dim_, dim_}; }

  friend bool operator==(const MultiIndexSet&, const MultiIndexSet&) = default;

 private:
  void append_degree(std::vector<int>& current, std::size_t pos, int remaining) {
    if (pos + 1 == dim_) {
      current[pos] = remaining;
      flat_.insert(flat_.end(), current.begin(), current.end());
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      current[pos] = k;
      append_degree(current, pos + 1, remaining - k);
    }
  }

  std::size_t dim_;
  int order_;
  std::vector<int> flat_;
};

inline MultiIndexSet multi_indices(std::size_t dim, int order) { return MultiIndexSet(dim, order); }

/// Normalized probabilists' Hermite polynomial He_n(x)/sqrt(n!).
inline double hermite(int n, double x) {
  if (n < 0) throw ConfigError("hermite order must be nonnegative");
  double prev = 0.0;
  double cur = 1.0;
  for (int k = 0; k < n; ++k) {
    const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace detail {

// values[c * (order + 1) + k] = hermite(k, u[c])
inline void hermite_table(std::span<const double> u, int order, std::span<double> values) {
  const std::size_t stride = static_cast<std::size_t>(order) + 1;
  for (std::size_t c = 0; c < u.size(); ++c) {
    double* v = values.data() + c * stride;
    v[0] = 1.0;
    if (order >= 1) v[1] = u[c];
    for (int k = 1; k < order; ++k)
      v[k + 1] = (u[c] * v[k] - std::sqrt(static_cast<double>(k)) * v[k - 1]) / std::sqrt(k + 1.0);
  }
}

inline void basis_row(const MultiIndexSet& set, std::span<const double> u, std::span<double> table,
                      std::span<double> row) {
  hermite_table(u, set.order(), table);
  const std::size_t stride = static_cast<std::size_t>(set.order()) + 1;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto alpha = set[i];
    double p = 1.0;
    for (std::size_t c = 0; c < alpha.size(); ++c) p *= table[c * stride + alpha[c]];
    row[i] = p;
  }
}

}  // namespace detail

/// Basis matrix: one row per sample in u-space, one column per multi-index.
inline Eigen::MatrixXd basis_matrix(const MultiIndexSet& set, const SampleMatrix& u) {
  if (static_cast<std::size_t>(u.cols()) != set.dimension()) throw ConfigError("sample dimension does not match basis");
  Eigen::MatrixXd a(u.rows(), static_cast<Eigen::Index>(set.size()));
  std::vector<double> table(set.dimension() * (set.order() + 1));
  std::vector<double> row(set.size());
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    detail::basis_row(set, row_span(u, r), table, row);
    for (std::size_t j = 0; j < row.size(); ++j) a(r, static_cast<Eigen::Index>(j)) = row[j];
  }
  return a;
}

class PceModel {
 public:
  PceModel(MultiIndexSet indices, Vector coefficients, RandomInput input)
      : indices_(std::move(indices)), coefficients_(std::move(coefficients)), input_(std::move(input)) {
    if (static_cast<std::size_t>(coefficients_.size()) != indices_.size())
      throw ConfigError("coefficient count does not match the index set");
    if (input_.dimension() != indices_.dimension()) throw ConfigError("random input dimension does not match basis");
    if (!coefficients_.allFinite()) throw NumericalError("non-finite chaos coefficient");
  }

  const MultiIndexSet& indices() const { return indices_; }
  const Vector& coefficients() const { return coefficients_; }
  const RandomInput& input() const { return input_; }

  /// Evaluate at a point already in standard-normal coordinates.
  double evaluate_u(std::span<const double> u) const {
    const std::size_t d = indices_.dimension();
    const int p = indices_.order();
    const std::size_t stride = static_cast<std::size_t>(p) + 1;
    // Small fixed buffer covers every practical case; fall back to the heap.
    double stack_table[64];
    std::vector<double> heap_table;
    double* table = stack_table;
    if (d * stride > 64) {
      heap_table.resize(d * stride);
      table = heap_table.data();
    }
    detail::hermite_table(u, p, {table, d * stride});
    double sum = 0.0;
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      const auto alpha = indices_[i];
      double term = coefficients_[static_cast<Eigen::Index>(i)];
      for (std::size_t c = 0; c < d; ++c) term *= table[c * stride + alpha[c]];
      sum += term;
    }
    return sum;
  }

  /// Evaluate at a physical realization (transformed to u-space first).
  double evaluate(std::span<const double> physical) const {
    const std::size_t d = indices_.dimension();
    double stack_u[16];
    std::vector<double> heap_u;
    double* u = stack_u;
    if (d > 16) {
      heap_u.resize(d);
      u = heap_u.data();
    }
    input_.to_u(physical, {u, d});
    return evaluate_u({u, d});
  }

 private:
  MultiIndexSet indices_;
  Vector coefficients_;
  RandomInput input_;
};

/// Least-squares chaos coefficients via column-pivoted Householder QR.
/// Throws FitError when the basis matrix is numerically rank deficient.
inline PceModel fit_least_squares(const SampleMatrix& u_samples, std::span<const double> values,
                                  const MultiIndexSet& indices, const RandomInput& input) {
  const auto n = static_cast<std::size_t>(u_samples.rows());
  if (values.size() != n) throw ConfigError("value count does not match sample count");
  if (n < indices.size()) {
    std::ostringstream os;
    os << "least-squares fit needs at least " << indices.size() << " samples, got " << n;
    throw FitError(os.str(), std::numeric_limits<double>::infinity());
  }
  for (double v : values)
    if (!std::isfinite(v)) throw FitError("non-finite limit-state value in fit data", std::numeric_limits<double>::quiet_NaN());

  const Eigen::MatrixXd a = basis_matrix(indices, u_samples);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  const auto diag = qr.matrixR().diagonal().cwiseAbs();
  const double rmax = diag.maxCoeff();
  const double rmin = diag.minCoeff();
  const double condition = rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
  if (qr.rank() < a.cols()) {
    std::ostringstream os;
    os << "rank-deficient chaos basis matrix (rank " << qr.rank() << " of " << a.cols()
       << ", condition estimate " << condition << ")";
    throw FitError(os.str(), condition);
  }
  const Eigen::Map<const Eigen::VectorXd> y(values.data(), static_cast<Eigen::Index>(n));
  Vector coeffs = qr.solve(y);
  return PceModel(indices, std::move(coeffs), input);
}

inline PceModel fit_least_squares(const SampleMatrix& u_samples, std::span<const double> values,
                                  const MultiIndexSet& indices) {
  return fit_least_squares(u_samples, values, indices, RandomInput::standard_normal(indices.dimension()));
}

}  // namespace rbto
