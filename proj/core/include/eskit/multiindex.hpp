#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eskit {

/// n-tuple of nonnegative integers indexing mixed partial derivatives and
/// monomial powers. Immutable after construction.
class MultiIndex {
public:
  explicit MultiIndex(std::vector<int> entries);

  int dimension() const { return static_cast<int>(entries_.size()); }
  int order() const { return order_; }          // |alpha|
  double factorial() const;                     // alpha! = prod alpha_i!
  int operator[](int i) const { return entries_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& entries() const { return entries_; }

  MultiIndex operator+(const MultiIndex& other) const;
  bool operator==(const MultiIndex& other) const { return entries_ == other.entries_; }

  std::string to_string() const;  // e.g. "(1,0,2)"

private:
  std::vector<int> entries_;
  int order_ = 0;
};

/// Number of distinct multi-indices of order k in n variables:
/// binom(n + k - 1, k).
std::int64_t count_derivatives(int n, int k);

/// x^alpha = prod x_i^{alpha_i}, with 0^0 == 1.
double monomial_power(std::span<const double> x, const MultiIndex& alpha);
double monomial_power(const Eigen::VectorXd& x, const MultiIndex& alpha);

/// The ordered set of all multi-indices with min_order <= |alpha| <= max_order
/// in graded-lexicographic order: ascending |alpha|, and within one order the
/// leading entries carry the highest powers first, e.g. for n = 2, orders
/// 1..2: (1,0), (0,1), (2,0), (1,1), (0,2). The ordering is fixed so matrix
/// layouts are reproducible across runs.
class DerivativeBasis {
public:
  DerivativeBasis(int dimension, int min_order, int max_order);

  int dimension() const { return dimension_; }
  int min_order() const { return min_order_; }
  int max_order() const { return max_order_; }
  int size() const { return static_cast<int>(indices_.size()); }  // o

  const MultiIndex& operator[](int i) const { return indices_[static_cast<std::size_t>(i)]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  /// Position of alpha in the basis, if present.
  std::optional<int> find(const MultiIndex& alpha) const;

private:
  int dimension_;
  int min_order_;
  int max_order_;
  std::vector<MultiIndex> indices_;
};

DerivativeBasis enumerate_basis(int dimension, int min_order, int max_order);

}  // namespace eskit
