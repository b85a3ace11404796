#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <vector>

#include "eskit/multiindex.hpp"
#include "eskit/periodicity.hpp"
#include "eskit/waveform.hpp"

namespace eskit {

/// Triangle wave on [-pi/2, pi/2] with period 2 and slope +-pi; the servo arm
/// angle. arm_angle(0) = -pi/2, arm_angle(0.5) = 0, arm_angle(1) = pi/2.
double arm_angle(double t);
/// Right-sided slope of arm_angle (+-pi; the wave has kinks at integers).
double arm_angle_rate(double t);

/// Continuous periodic or almost-periodic perturbation waveform p(t) with
/// sup-norm 1 (constructors rescale and report the applied scale). Any time
/// dilation p(omega*t) is applied by callers.
class DitherSpec {
public:
  DitherSpec() = default;  // empty (dimension 0); factories build usable specs

  /// p_i(t) = d_i sin(r_i t), rescaled to unit sup norm. Commensurate rates
  /// give a periodic spec, otherwise almost-periodic.
  static DitherSpec sinusoidal(std::vector<double> amplitudes, std::vector<double> rates);

  /// p(t) = (cos(arm_angle(t)), sin(arm_angle(t))): the unit-circle arc swept
  /// by the rotating sensor arm. Period 2, exact unit norm.
  static DitherSpec triangle_arm();

  /// User waveform from a breakpointed piecewise-cubic table (rescaled to
  /// unit sup norm).
  static DitherSpec from_table(WaveformTable table);

  int dimension() const { return dimension_; }
  const Periodicity& periodicity() const { return periodicity_; }
  /// Factor the raw waveform was divided by to reach unit sup norm.
  double normalization_scale() const { return scale_; }
  /// Breakpoints strictly inside (0, span) where the waveform is not smooth.
  const std::vector<double>& interior_breakpoints() const { return breakpoints_; }
  /// Shortest feature time scale, used to seed quadrature resolution.
  double resolution_hint() const { return feature_; }

  Eigen::VectorXd value(double t) const;
  Eigen::VectorXd derivative(double t) const;

private:
  enum class Kind { Sinusoidal, TriangleArm, Table };
  Kind kind_ = Kind::Sinusoidal;
  int dimension_ = 0;
  Periodicity periodicity_{};
  double scale_ = 1.0;
  double feature_ = 1.0;
  std::vector<double> breakpoints_;
  std::vector<double> amplitudes_;  // sinusoidal, post-normalization
  std::vector<double> rates_;
  std::shared_ptr<const WaveformTable> table_;
};

/// The vector of basis monomials of the dither, rho_i(t) = p(t)^{alpha_i}.
/// Linear independence of these signals decides estimability.
class ExtendedDither {
public:
  ExtendedDither(DitherSpec dither, DerivativeBasis basis);

  const DitherSpec& dither() const { return dither_; }
  const DerivativeBasis& basis() const { return basis_; }
  int size() const { return basis_.size(); }  // o

  Eigen::VectorXd rho(double t) const;
  Eigen::VectorXd rho_derivative(double t) const;

private:
  DitherSpec dither_;
  DerivativeBasis basis_;
};

/// Auxiliary demodulation carrier r(t) for the cross-variance route:
/// continuous, bounded, (almost) periodic signals chosen independently of the
/// dither.
class AuxSignals {
public:
  static AuxSignals from_function(int dimension, Periodicity periodicity,
                                  std::vector<double> interior_breakpoints, double feature,
                                  std::function<Eigen::VectorXd(double)> value,
                                  std::function<Eigen::VectorXd(double)> derivative = {});
  static AuxSignals from_table(WaveformTable table);

  /// (-cos(2 pi t), -cos(pi t)): the smooth companion pair for the rotating
  /// arm's gradient block (period 2).
  static AuxSignals arm_cosines();

  int dimension() const { return dimension_; }
  const Periodicity& periodicity() const { return periodicity_; }
  const std::vector<double>& interior_breakpoints() const { return breakpoints_; }
  double resolution_hint() const { return feature_; }

  Eigen::VectorXd value(double t) const { return value_(t); }
  bool has_derivative() const { return static_cast<bool>(derivative_); }
  Eigen::VectorXd derivative(double t) const;

private:
  int dimension_ = 0;
  Periodicity periodicity_{};
  std::vector<double> breakpoints_;
  double feature_ = 1.0;
  std::function<Eigen::VectorXd(double)> value_;
  std::function<Eigen::VectorXd(double)> derivative_;
};

}  // namespace eskit
