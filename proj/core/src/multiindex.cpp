#include "eskit/multiindex.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace eskit {

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("MultiIndex: empty tuple");
  for (int e : entries_) {
    if (e < 0) throw std::invalid_argument("MultiIndex: negative entry");
    order_ += e;
  }
}

double MultiIndex::factorial() const {
  double f = 1.0;
  for (int e : entries_)
    for (int k = 2; k <= e; ++k) f *= k;
  return f;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (dimension() != other.dimension())
    throw std::invalid_argument("MultiIndex: dimension mismatch in +");
  std::vector<int> sum(entries_);
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += other.entries_[i];
  return MultiIndex(std::move(sum));
}

std::string MultiIndex::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(entries_[i]);
  }
  return s + ")";
}

std::int64_t count_derivatives(int n, int k) {
  if (n < 1) throw std::invalid_argument("count_derivatives: n must be >= 1");
  if (k < 0) throw std::invalid_argument("count_derivatives: k must be >= 0");
  // binom(n + k - 1, k), multiplicative form
  std::int64_t result = 1;
  for (int i = 1; i <= k; ++i) result = result * (n - 1 + i) / i;
  return result;
}

double monomial_power(std::span<const double> x, const MultiIndex& alpha) {
  if (static_cast<int>(x.size()) != alpha.dimension())
    throw std::invalid_argument("monomial_power: dimension mismatch");
  double prod = 1.0;
  for (int i = 0; i < alpha.dimension(); ++i) {
    const int a = alpha[i];
    if (a == 0) continue;  // 0^0 == 1
    double p = x[static_cast<std::size_t>(i)];
    for (int k = 0; k < a; ++k) prod *= p;
  }
  return prod;
}

double monomial_power(const Eigen::VectorXd& x, const MultiIndex& alpha) {
  return monomial_power(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                        alpha);
}

namespace {

// Enumerate all tuples of given order, leading entry descending, recursing on
// the tail. This yields the graded-lex order documented in the header.
void enumerate_order(int dim, int order, std::vector<int>& prefix,
                     std::vector<MultiIndex>& out) {
  if (dim == 1) {
    prefix.push_back(order);
    out.emplace_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int lead = order; lead >= 0; --lead) {
    prefix.push_back(lead);
    enumerate_order(dim - 1, order - lead, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

DerivativeBasis::DerivativeBasis(int dimension, int min_order, int max_order)
    : dimension_(dimension), min_order_(min_order), max_order_(max_order) {
  if (dimension < 1) throw std::invalid_argument("DerivativeBasis: dimension must be >= 1");
  if (min_order < 0 || min_order > max_order)
    throw std::invalid_argument("DerivativeBasis: need 0 <= min_order <= max_order");
  std::vector<int> prefix;
  for (int k = min_order; k <= max_order; ++k)
    enumerate_order(dimension, k, prefix, indices_);
}

std::optional<int> DerivativeBasis::find(const MultiIndex& alpha) const {
  for (std::size_t i = 0; i < indices_.size(); ++i)
    if (indices_[i] == alpha) return static_cast<int>(i);
  return std::nullopt;
}

DerivativeBasis enumerate_basis(int dimension, int min_order, int max_order) {
  return DerivativeBasis(dimension, min_order, max_order);
}

}  // namespace eskit
