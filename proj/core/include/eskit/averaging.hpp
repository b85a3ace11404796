#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "eskit/dither.hpp"
#include "eskit/periodicity.hpp"

namespace eskit {

/// Result of a long-run time average lim (1/T) int_0^T f.
struct AverageReport {
  Eigen::MatrixXd value;
  double horizon = 0.0;          // averaging horizon actually used
  double estimated_error = 0.0;  // last refinement / horizon-doubling residual
  bool converged = false;

  double scalar() const { return value(0, 0); }
};

/// Kink locations of an integrand: offsets repeated every `period`
/// (period == 0 means the offsets are literal positions).
struct BreakpointPattern {
  double period = 0.0;
  std::vector<double> offsets;
};

struct AveragingOptions {
  double tol = 1e-10;
  double feature_hint = 0.0;  // shortest feature time scale; 0 = span/16
  std::vector<BreakpointPattern> breakpoints;
  int max_horizon_doublings = 20;   // almost-periodic horizon cap 2^20 * T0
  long long max_points = 1 << 25;   // refinement budget per evaluation
};

/// Long-run mean of a matrix-valued signal. Periodic signals are averaged
/// exactly over one period with breakpoint-split composite Simpson panels,
/// refined until two successive refinements differ by less than tol.
/// Almost-periodic signals are averaged over doubling horizons 2^k * T0 with
/// a Cauchy stopping rule. On hitting a cap the report carries the best value
/// with converged == false; the caller decides whether that is an error.
AverageReport time_average(const std::function<Eigen::MatrixXd(double)>& f, int rows, int cols,
                           const Periodicity& periodicity, const AveragingOptions& options = {});

AverageReport time_average(const std::function<double(double)>& f,
                           const Periodicity& periodicity, const AveragingOptions& options = {});

/// Options pre-filled with a dither's breakpoints and resolution hint.
AveragingOptions averaging_options_for(const ExtendedDither& ext, double tol);

/// rho_bar: componentwise long-run mean of the extended dither.
/// Throws AveragingError if the mean does not settle.
Eigen::VectorXd mean_rho(const ExtendedDither& ext, double tol = 1e-10);

/// Q: long-run mean of rho rho^T (or of the centered rho~ rho~^T).
/// Symmetric positive semidefinite by construction.
Eigen::MatrixXd covariance(const ExtendedDither& ext, bool centered, double tol = 1e-10);

/// R: long-run mean of r(t) rho(t)^T (rho~ if centered). Rows follow r,
/// columns follow the basis. r must have as many channels as the basis has
/// components for R to be invertible.
Eigen::MatrixXd cross_variance(const AuxSignals& r, const ExtendedDither& ext, bool centered,
                               double tol = 1e-10);

}  // namespace eskit
