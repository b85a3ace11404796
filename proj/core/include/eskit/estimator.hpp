#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "eskit/demod.hpp"
#include "eskit/multiindex.hpp"

namespace eskit {

/// A scalar cost map J(theta) with an optional analytic mixed-partial
/// evaluator used as ground truth in sweeps and oracle tests. When no
/// analytic derivatives are attached, truth falls back to nested central
/// finite differences.
class CostMap {
public:
  using Evaluator = std::function<double(const Eigen::VectorXd&)>;
  using DerivativeEvaluator = std::function<double(const MultiIndex&, const Eigen::VectorXd&)>;

  static CostMap from_function(int dimension, Evaluator j, int smoothness_order = -1);

  CostMap with_analytic_derivatives(DerivativeEvaluator d) const;

  int dimension() const { return dimension_; }
  /// Claimed C^m class; -1 means smooth (C^infinity).
  int smoothness() const { return smoothness_; }
  double operator()(const Eigen::VectorXd& theta) const { return j_(theta); }

  bool has_analytic_derivatives() const { return static_cast<bool>(deriv_); }
  /// Analytic derivative if available. Throws CapabilityError otherwise.
  double analytic_derivative(const MultiIndex& alpha, const Eigen::VectorXd& theta) const;
  /// Analytic derivative when available, nested central differences otherwise.
  double derivative(const MultiIndex& alpha, const Eigen::VectorXd& theta) const;

private:
  int dimension_ = 0;
  int smoothness_ = -1;
  Evaluator j_;
  DerivativeEvaluator deriv_;
};

/// Named cost maps used by the command line (quadratic bowls, the |x|^{5/2}
/// map with exact sign-aware derivatives, exp, x^4/12, ...).
const CostMap& builtin_cost_map(const std::string& name);
std::vector<std::string> builtin_cost_map_names();

/// xi^_i(t) = h_i(t, a) * J(theta + a p(t)). The caller applies any omega
/// time dilation to t.
Eigen::VectorXd pointwise_estimate(const DemodSpec& demod, const CostMap& j,
                                   const Eigen::VectorXd& theta, double t, double amplitude);

/// Long-run mean of the pointwise estimate. Equals the true derivative tuple
/// for polynomials of degree <= max basis order (at any amplitude).
Eigen::VectorXd averaged_estimate(const DemodSpec& demod, const CostMap& j,
                                  const Eigen::VectorXd& theta, double amplitude, double tol);

/// Truncated Taylor expansion P_m(delta) = sum_{|alpha| <= m}
/// D^alpha J(theta0) / alpha! * delta^alpha. Requires analytic derivatives.
class TaylorPolynomial {
public:
  TaylorPolynomial(const CostMap& j, const Eigen::VectorXd& theta0, int order);

  double operator()(const Eigen::VectorXd& delta) const;
  int order() const { return order_; }
  const Eigen::VectorXd& center() const { return theta0_; }

  /// The polynomial as a cost map theta -> P_m(theta - theta0), with exact
  /// analytic derivatives.
  CostMap as_cost_map() const;

private:
  Eigen::VectorXd theta0_;
  int order_;
  DerivativeBasis basis_;         // orders 0..m
  std::vector<double> coeffs_;    // D^alpha J(theta0) / alpha!
};

struct SweepRow {
  double amplitude = 0.0;
  Eigen::VectorXd estimate;
  Eigen::VectorXd truth;
  double error_norm = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points_used = 0;
  bool exact = false;  // every error sat below the exactness floor
};

/// Amplitude sweep of averaged estimates against ground truth.
struct EstimateSweep {
  DerivativeBasis basis{1, 0, 0};
  std::vector<SweepRow> rows;

  /// Least-squares log-log slope of the error for one component
  /// (component == -1 fits the error norm), excluding points below `floor`.
  SlopeFit fit_slope(int component = -1, double floor = 0.0) const;

  /// CSV columns: a, component, estimate, truth, abs_error.
  void write_csv(const std::filesystem::path& file) const;
};

/// Runs averaged estimates over strictly decreasing amplitudes in (0, 1).
EstimateSweep convergence_sweep(const DemodSpec& demod, const CostMap& j,
                                const Eigen::VectorXd& theta, std::vector<double> amplitudes,
                                double tol);

}  // namespace eskit
