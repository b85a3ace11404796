#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <vector>

#include "eskit/demod.hpp"
#include "eskit/estimator.hpp"

namespace eskit {

/// Half-vectorization machinery for symmetric matrices: vech stacks the
/// lower triangle column by column; D_n (duplication) and L_n (elimination)
/// satisfy D_n vech(S) = vec(S) and L_n vec(S) = vech(S) for symmetric S.
class VechToolkit {
public:
  explicit VechToolkit(int n);

  int dimension() const { return n_; }
  int vech_size() const { return n_ * (n_ + 1) / 2; }
  const Eigen::MatrixXd& duplication() const { return dup_; }
  const Eigen::MatrixXd& elimination() const { return elim_; }

  Eigen::VectorXd vech(const Eigen::MatrixXd& symmetric) const;
  Eigen::MatrixXd unvech(const Eigen::VectorXd& v) const;

private:
  int n_;
  Eigen::MatrixXd dup_;
  Eigen::MatrixXd elim_;
};

/// Supplier of derivative estimates xi^(t, theta) over a derivative basis.
class EstimateSource {
public:
  virtual ~EstimateSource() = default;
  virtual const DerivativeBasis& basis() const = 0;
  virtual Eigen::VectorXd estimate(double t, const Eigen::VectorXd& theta) const = 0;
  int parameter_dim() const { return basis().dimension(); }
  int output_dim() const { return basis().size(); }
};

/// Perturbation-based estimates xi^_i(t) = h_i(omega t, a) J(theta + a p(omega t)).
class DemodEstimateSource final : public EstimateSource {
public:
  DemodEstimateSource(DemodSpec demod, CostMap cost, double amplitude, double omega);

  const DerivativeBasis& basis() const override { return demod_.basis(); }
  Eigen::VectorXd estimate(double t, const Eigen::VectorXd& theta) const override;

  const DemodSpec& demod() const { return demod_; }
  double amplitude() const { return amplitude_; }
  double omega() const { return omega_; }

private:
  DemodSpec demod_;
  CostMap cost_;
  double amplitude_;
  double omega_;
};

/// Model-based reference: exact derivatives of the cost map, no perturbation.
class ExactEstimateSource final : public EstimateSource {
public:
  ExactEstimateSource(CostMap cost, DerivativeBasis basis);

  const DerivativeBasis& basis() const override { return basis_; }
  Eigen::VectorXd estimate(double t, const Eigen::VectorXd& theta) const override;

private:
  CostMap cost_;
  DerivativeBasis basis_;
};

struct GainRecord {
  double k = 0.0;
  double beta = 0.0;     // heavy-ball damping
  double omega_l = 0.0;  // Riccati gain
};

/// Parameter-update dynamics affine in the derivative estimates:
/// d/dt x^ = f0(x^) + f1(x^) xi^(t, theta^).
class AffineEsc {
public:
  using Drift = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using InputMap = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  AffineEsc(int state_dim, int parameter_dim, Drift f0, InputMap f1,
            std::shared_ptr<const EstimateSource> source, GainRecord gains,
            std::string name);

  int state_dim() const { return state_dim_; }
  int parameter_dim() const { return parameter_dim_; }
  const std::string& name() const { return name_; }
  const GainRecord& gains() const { return gains_; }
  const EstimateSource& estimator() const { return *source_; }

  /// theta^ occupies the leading parameter_dim entries of the state.
  Eigen::VectorXd parameters_of(const Eigen::VectorXd& state) const;

  Eigen::VectorXd drift(const Eigen::VectorXd& state) const { return f0_(state); }
  Eigen::MatrixXd input_map(const Eigen::VectorXd& state) const { return f1_(state); }
  Eigen::VectorXd rhs(double t, const Eigen::VectorXd& state) const;

private:
  int state_dim_;
  int parameter_dim_;
  Drift f0_;
  InputMap f1_;
  std::shared_ptr<const EstimateSource> source_;
  GainRecord gains_;
  std::string name_;
};

/// d/dt theta^ = -k g^. Requires the full order-1 block in the source basis.
AffineEsc gradient_esc(double k, std::shared_ptr<const EstimateSource> source);

/// d/dt theta^ = phi, d/dt phi = -beta phi - k g^, beta > 0.
AffineEsc heavy_ball_esc(double k, double beta, std::shared_ptr<const EstimateSource> source);

/// d/dt theta^ = -k Gamma^ g^, d/dt Gamma^ = omega_l (Gamma^ - Gamma^ H^ Gamma^),
/// carried as (theta^, vech Gamma^) with the Riccati block written through
/// L_n (Gamma^ x Gamma^) D_n. Gamma0 must be symmetric and nonsingular.
/// Requires full order-1 and order-2 blocks in the source basis.
AffineEsc newton_esc(double k, double omega_l, const Eigen::MatrixXd& gamma0,
                     std::shared_ptr<const EstimateSource> source);

/// Initial state helpers.
Eigen::VectorXd gradient_esc_state(const Eigen::VectorXd& theta0);
Eigen::VectorXd heavy_ball_esc_state(const Eigen::VectorXd& theta0);
Eigen::VectorXd newton_esc_state(const Eigen::VectorXd& theta0, const Eigen::MatrixXd& gamma0);

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;

  const Eigen::VectorXd& final_state() const { return states.back(); }
};

/// Classical fixed-step RK4. Deterministic for fixed (x0, dt). Throws
/// DivergenceError at the first non-finite state, carrying the last finite
/// time and state.
Trajectory integrate_ode(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& x0, double horizon, double dt);

Trajectory integrate(const AffineEsc& esc, const Eigen::VectorXd& x0, double horizon, double dt);

}  // namespace eskit
