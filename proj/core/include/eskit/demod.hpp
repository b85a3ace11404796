#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <vector>

#include "eskit/averaging.hpp"
#include "eskit/dither.hpp"
#include "eskit/multiindex.hpp"

namespace eskit {

/// Diagonal scaling A with entries a^{|alpha_i|} / alpha_i! over a derivative
/// basis. Requires a in (0, 1) so the smallest diagonal entry is a^m / m!.
class AmplitudeMatrix {
public:
  AmplitudeMatrix(const DerivativeBasis& basis, double amplitude);

  double amplitude() const { return amplitude_; }
  const Eigen::VectorXd& diagonal() const { return diag_; }
  Eigen::VectorXd inverse_diagonal() const { return diag_.cwiseInverse(); }

private:
  double amplitude_;
  Eigen::VectorXd diag_;
};

/// Diagonal of A for an arbitrary amplitude over the same basis.
Eigen::VectorXd amplitude_diagonal(const DerivativeBasis& basis, double amplitude);

/// Outcome of the covariance-invertibility test. `estimable` means the
/// extended dither components are numerically linearly independent
/// (sigma_min / sigma_max above rank_tol).
struct ExistenceVerdict {
  bool estimable = false;
  int rank = 0;
  int size = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  std::vector<Eigen::VectorXd> null_basis;  // up to 3 unit null directions
};

ExistenceVerdict check_existence(const ExtendedDither& ext, bool centered, double tol,
                                 double rank_tol = 1e-8);
/// Same test applied to a precomputed symmetric averaging matrix. Singular
/// values are zeroed below rank_tol * sigma_max and below the absolute
/// quadrature noise floor.
ExistenceVerdict rank_verdict(const Eigen::MatrixXd& q, double rank_tol = 1e-8,
                              double noise_floor = 0.0);

enum class DemodVariant {
  Covariance,     // h = A^-1 Q^-1 rho,      Q from raw rho
  ZeroMean,       // h = A^-1 Q~^-1 rho~,    Q~ and rho~ centered
  CrossVariance,  // h = A^-1 R^-1 r,        R = avg r rho~^T
  Verbatim,       // h = A^-1 Q~^-1 rho: centered matrix, raw signal
};

/// A synthesized demodulation signal vector h(t, a). Multiplying the measured
/// cost by h and averaging yields the derivative estimates: the defining
/// condition avg h(t,a) rho^(t)^T == A^-1 holds (rho^ is rho or rho~ per
/// variant). Immutable and reentrant after synthesis; evaluation is
/// O(o^2) per time sample.
class DemodSpec {
public:
  const DerivativeBasis& basis() const { return basis_; }
  const DitherSpec& dither() const { return dither_; }
  DemodVariant variant() const { return variant_; }
  double default_amplitude() const { return amplitude_; }
  int size() const { return basis_.size(); }

  /// Q or R, and the mean used for centering (zero when uncentered).
  const Eigen::MatrixXd& averaging_matrix() const { return avg_matrix_; }
  /// The factored inverse of the averaging matrix.
  const Eigen::MatrixXd& demodulation_matrix() const { return demod_matrix_; }
  const Eigen::VectorXd& rho_mean() const { return rho_mean_; }
  const ExistenceVerdict& verdict() const { return verdict_; }

  Eigen::VectorXd h(double t) const { return h(t, amplitude_); }
  Eigen::VectorXd h(double t, double amplitude) const;
  Eigen::VectorXd h_derivative(double t, double amplitude) const;

  /// Time structure of h paired with the dither (for averaging estimates).
  const Periodicity& periodicity() const { return periodicity_; }
  const std::vector<BreakpointPattern>& breakpoints() const { return breakpoints_; }
  double resolution_hint() const { return feature_; }

  /// The signal evaluated inside h (rho, rho~, or r at time t).
  Eigen::VectorXd carrier(double t) const;

  /// The signal the defining condition holds against: rho for the raw
  /// covariance variant, rho~ for the zero-mean, verbatim, and centered
  /// cross-variance variants.
  Eigen::VectorXd reference_signal(double t) const;

  /// Sampled export in the waveform-table schema (periodic h only).
  WaveformTable export_table(int samples_per_span = 256) const;

  friend DemodSpec synthesize_covariance_h(const ExtendedDither&, const AmplitudeMatrix&, bool,
                                           double);
  friend DemodSpec synthesize_verbatim_h(const ExtendedDither&, const AmplitudeMatrix&, double);
  friend DemodSpec synthesize_crossvariance_h(const AuxSignals&, const ExtendedDither&,
                                              const AmplitudeMatrix&, bool, double);

private:
  DemodSpec() = default;

  DerivativeBasis basis_{1, 0, 0};
  DitherSpec dither_;
  DemodVariant variant_ = DemodVariant::Covariance;
  double amplitude_ = 0.0;
  Eigen::MatrixXd avg_matrix_;    // Q or R
  Eigen::MatrixXd demod_matrix_;  // Q^-1 or R^-1, factored once
  Eigen::MatrixXd demod_scaled_;  // A^-1 * demod_matrix_ at the default amplitude
  Eigen::VectorXd rho_mean_;
  bool center_signal_ = false;     // subtract the mean inside h
  bool center_reference_ = false;  // defining condition holds against rho~
  std::shared_ptr<const AuxSignals> aux_;
  ExistenceVerdict verdict_;
  Periodicity periodicity_{};
  std::vector<BreakpointPattern> breakpoints_;
  double feature_ = 1.0;
};

/// h(t,a) = A^-1 Q^-1 rho(t) (centered variant uses Q~ and rho~).
/// Throws ExistenceError when Q is numerically singular.
DemodSpec synthesize_covariance_h(const ExtendedDither& ext, const AmplitudeMatrix& a,
                                  bool centered, double tol);

/// Centered covariance matrix with the raw (uncentered) signal in the
/// evaluator. Estimates derivative orders >= 1 up to a bias proportional to
/// the cost value itself; kept for reproducing published trajectories.
DemodSpec synthesize_verbatim_h(const ExtendedDither& ext, const AmplitudeMatrix& a, double tol);

/// h'(t,a) = A^-1 R^-1 r(t) with R = avg r rho^T (rho~ if centered).
/// Throws ExistenceError when R is singular for this rho (r unsuitable).
DemodSpec synthesize_crossvariance_h(const AuxSignals& r, const ExtendedDither& ext,
                                     const AmplitudeMatrix& a, bool centered, double tol);

/// Closed-form demodulator for the m-th derivative of a scalar map under
/// p(t) = sin(t):
///   h_m(tau, a) = (2^m m!/a^m) * (-1)^{(m-1)/2} sin(m tau)   (m odd)
///   h_m(tau, a) = (2^m m!/a^m) * (-1)^{m/2}    cos(m tau)    (m even)
/// m = 0 yields the constant 1.
std::function<double(double)> closed_form_sinusoidal_h(int m, double amplitude);

/// Expansion of the powers sin^i(t), i = 0..m, over the orthogonal signals
/// {1, sin t, cos 2t, sin 3t, ...}: sin^i = sum_k E(i,k) * orth_k. Lower
/// triangular; exact (recurrence via product-to-sum identities).
Eigen::MatrixXd sin_power_expansion(int m);

/// G with orth = G * rho (G = E^-1): lower triangular, diagonal
/// 2^{i-1} (-1)^{(i-1)/2} for odd i, 2^{i-1} (-1)^{i/2} for even i >= 2.
Eigen::MatrixXd sin_power_orthogonalizer(int m);

struct AppendixOrderCheck {
  int order = 0;
  double sup_gap = 0.0;  // max |h_numeric - h_closed_form| over one period
  double worst_t = 0.0;
  bool pass = false;
};

struct AppendixReport {
  std::vector<AppendixOrderCheck> orders;
  double q_inverse_gap = 0.0;  // max |Q^-1 - G^T Qperp^-1 G|
  bool pass = false;
};

/// Cross-checks numerically synthesized sinusoidal demodulators against the
/// closed forms for every order 1..m_max, and the identity
/// Q^-1 == G^T Qperp^-1 G with Qperp = diag(1, 1/2, ..., 1/2).
AppendixReport verify_appendix_equivalence(int m_max, double amplitude, double tol);

}  // namespace eskit
