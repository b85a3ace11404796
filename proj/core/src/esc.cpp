#include "eskit/esc.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <stdexcept>

#include "eskit/errors.hpp"

namespace eskit {

VechToolkit::VechToolkit(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("VechToolkit: n must be >= 1");
  const int v = vech_size();
  dup_ = Eigen::MatrixXd::Zero(n * n, v);
  elim_ = Eigen::MatrixXd::Zero(v, n * n);
  int col = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      dup_(i + j * n, col) = 1.0;           // vec index (i, j)
      if (i != j) dup_(j + i * n, col) = 1.0;  // mirrored (j, i)
      elim_(col, i + j * n) = 1.0;
      ++col;
    }
  }
}

Eigen::VectorXd VechToolkit::vech(const Eigen::MatrixXd& s) const {
  if (s.rows() != n_ || s.cols() != n_)
    throw std::invalid_argument("VechToolkit::vech: size mismatch");
  Eigen::VectorXd v(vech_size());
  int idx = 0;
  for (int j = 0; j < n_; ++j)
    for (int i = j; i < n_; ++i) v[idx++] = s(i, j);
  return v;
}

Eigen::MatrixXd VechToolkit::unvech(const Eigen::VectorXd& v) const {
  if (v.size() != vech_size())
    throw std::invalid_argument("VechToolkit::unvech: size mismatch");
  Eigen::MatrixXd s(n_, n_);
  int idx = 0;
  for (int j = 0; j < n_; ++j)
    for (int i = j; i < n_; ++i) {
      s(i, j) = v[idx];
      s(j, i) = v[idx];
      ++idx;
    }
  return s;
}

DemodEstimateSource::DemodEstimateSource(DemodSpec demod, CostMap cost, double amplitude,
                                         double omega)
    : demod_(std::move(demod)), cost_(std::move(cost)), amplitude_(amplitude), omega_(omega) {
  if (cost_.dimension() != demod_.basis().dimension())
    throw std::invalid_argument("DemodEstimateSource: cost/basis dimension mismatch");
  if (omega_ <= 0) throw std::invalid_argument("DemodEstimateSource: omega must be > 0");
}

Eigen::VectorXd DemodEstimateSource::estimate(double t, const Eigen::VectorXd& theta) const {
  return pointwise_estimate(demod_, cost_, theta, omega_ * t, amplitude_);
}

ExactEstimateSource::ExactEstimateSource(CostMap cost, DerivativeBasis basis)
    : cost_(std::move(cost)), basis_(std::move(basis)) {
  if (cost_.dimension() != basis_.dimension())
    throw std::invalid_argument("ExactEstimateSource: cost/basis dimension mismatch");
}

Eigen::VectorXd ExactEstimateSource::estimate(double, const Eigen::VectorXd& theta) const {
  Eigen::VectorXd xi(basis_.size());
  for (int i = 0; i < basis_.size(); ++i) xi[i] = cost_.derivative(basis_[i], theta);
  return xi;
}

AffineEsc::AffineEsc(int state_dim, int parameter_dim, Drift f0, InputMap f1,
                     std::shared_ptr<const EstimateSource> source, GainRecord gains,
                     std::string name)
    : state_dim_(state_dim), parameter_dim_(parameter_dim), f0_(std::move(f0)),
      f1_(std::move(f1)), source_(std::move(source)), gains_(gains), name_(std::move(name)) {}

Eigen::VectorXd AffineEsc::parameters_of(const Eigen::VectorXd& state) const {
  return state.head(parameter_dim_);
}

Eigen::VectorXd AffineEsc::rhs(double t, const Eigen::VectorXd& state) const {
  const Eigen::VectorXd xi = source_->estimate(t, parameters_of(state));
  return f0_(state) + f1_(state) * xi;
}

namespace {

// Selector picking the order-1 components e_1..e_n out of the basis, in
// coordinate order. Throws when the block is incomplete.
Eigen::MatrixXd gradient_selector(const DerivativeBasis& basis) {
  const int n = basis.dimension();
  Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(n, basis.size());
  for (int i = 0; i < n; ++i) {
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    e[static_cast<std::size_t>(i)] = 1;
    const auto pos = basis.find(MultiIndex(e));
    if (!pos)
      throw std::invalid_argument("estimator basis lacks the order-1 (gradient) block");
    sel(i, *pos) = 1.0;
  }
  return sel;
}

// Selector mapping the order-2 components onto vech(H) (column-major lower
// triangle), using D^{e_i+e_j} J = H_ij.
Eigen::MatrixXd hessian_selector(const DerivativeBasis& basis) {
  const int n = basis.dimension();
  Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(n * (n + 1) / 2, basis.size());
  int row = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) {
      std::vector<int> e(static_cast<std::size_t>(n), 0);
      ++e[static_cast<std::size_t>(i)];
      ++e[static_cast<std::size_t>(j)];
      const auto pos = basis.find(MultiIndex(e));
      if (!pos)
        throw std::invalid_argument("estimator basis lacks the order-2 (Hessian) block");
      sel(row++, *pos) = 1.0;
    }
  return sel;
}

}  // namespace

AffineEsc gradient_esc(double k, std::shared_ptr<const EstimateSource> source) {
  const int n = source->parameter_dim();
  const Eigen::MatrixXd sel = gradient_selector(source->basis());
  GainRecord gains;
  gains.k = k;
  return AffineEsc(
      n, n, [n](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(n).eval(); },
      [k, sel](const Eigen::VectorXd&) { return Eigen::MatrixXd(-k * sel); }, std::move(source),
      gains, "gradient");
}

AffineEsc heavy_ball_esc(double k, double beta, std::shared_ptr<const EstimateSource> source) {
  if (beta <= 0)
    throw std::invalid_argument("heavy_ball_esc: damping beta must be > 0");
  const int n = source->parameter_dim();
  const Eigen::MatrixXd sel = gradient_selector(source->basis());
  GainRecord gains;
  gains.k = k;
  gains.beta = beta;
  auto f0 = [n, beta](const Eigen::VectorXd& x) {
    Eigen::VectorXd out(2 * n);
    out.head(n) = x.tail(n);          // d theta^ = phi
    out.tail(n) = -beta * x.tail(n);  // d phi = -beta phi ...
    return out;
  };
  auto f1 = [n, k, sel](const Eigen::VectorXd&) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, sel.cols());
    m.bottomRows(n) = -k * sel;  // ... - k g^
    return m;
  };
  return AffineEsc(2 * n, n, std::move(f0), std::move(f1), std::move(source), gains,
                   "heavy-ball");
}

AffineEsc newton_esc(double k, double omega_l, const Eigen::MatrixXd& gamma0,
                     std::shared_ptr<const EstimateSource> source) {
  const int n = source->parameter_dim();
  if (gamma0.rows() != n || gamma0.cols() != n)
    throw std::invalid_argument("newton_esc: Gamma0 size mismatch");
  if ((gamma0 - gamma0.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("newton_esc: Gamma0 must be symmetric");
  if (std::abs(gamma0.determinant()) < 1e-12)
    throw std::invalid_argument("newton_esc: Gamma0 must be nonsingular");

  const Eigen::MatrixXd sel_g = gradient_selector(source->basis());
  const Eigen::MatrixXd sel_h = hessian_selector(source->basis());
  const auto vech = std::make_shared<VechToolkit>(n);
  const int nv = vech->vech_size();

  GainRecord gains;
  gains.k = k;
  gains.omega_l = omega_l;

  auto f0 = [n, nv, omega_l](const Eigen::VectorXd& x) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n + nv);
    out.tail(nv) = omega_l * x.tail(nv);  // omega_l vech(Gamma^)
    return out;
  };
  auto f1 = [n, nv, k, omega_l, sel_g, sel_h, vech](const Eigen::VectorXd& x) {
    const Eigen::MatrixXd gamma = vech->unvech(x.tail(nv));
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + nv, sel_g.cols());
    m.topRows(n) = -k * gamma * sel_g;
    const Eigen::MatrixXd kron = Eigen::kroneckerProduct(gamma, gamma);
    m.bottomRows(nv) =
        -omega_l * vech->elimination() * kron * vech->duplication() * sel_h;
    return m;
  };
  return AffineEsc(n + nv, n, std::move(f0), std::move(f1), std::move(source), gains, "newton");
}

Eigen::VectorXd gradient_esc_state(const Eigen::VectorXd& theta0) { return theta0; }

Eigen::VectorXd heavy_ball_esc_state(const Eigen::VectorXd& theta0) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * theta0.size());
  x.head(theta0.size()) = theta0;
  return x;
}

Eigen::VectorXd newton_esc_state(const Eigen::VectorXd& theta0, const Eigen::MatrixXd& gamma0) {
  const VechToolkit vech(static_cast<int>(theta0.size()));
  Eigen::VectorXd x(theta0.size() + vech.vech_size());
  x.head(theta0.size()) = theta0;
  x.tail(vech.vech_size()) = vech.vech(gamma0);
  return x;
}

Trajectory integrate_ode(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& x0, double horizon, double dt) {
  if (dt <= 0) throw std::invalid_argument("integrate_ode: dt must be > 0");
  if (horizon < 0) throw std::invalid_argument("integrate_ode: horizon must be >= 0");
  const long long steps = static_cast<long long>(std::ceil(horizon / dt - 1e-12));
  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(steps) + 1);
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);
  double t = 0.0;
  Eigen::VectorXd x = x0;
  traj.times.push_back(t);
  traj.states.push_back(x);
  for (long long i = 0; i < steps; ++i) {
    const double h = std::min(dt, horizon - t);
    const Eigen::VectorXd k1 = f(t, x);
    const Eigen::VectorXd k2 = f(t + h / 2, x + (h / 2) * k1);
    const Eigen::VectorXd k3 = f(t + h / 2, x + (h / 2) * k2);
    const Eigen::VectorXd k4 = f(t + h, x + h * k3);
    x += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
    if (!x.allFinite()) {
      DivergenceError err("trajectory diverged at t = " + std::to_string(t),
                          traj.times.back(), traj.states.back());
      throw err;
    }
    traj.times.push_back(t);
    traj.states.push_back(x);
  }
  return traj;
}

Trajectory integrate(const AffineEsc& esc, const Eigen::VectorXd& x0, double horizon, double dt) {
  if (x0.size() != esc.state_dim())
    throw std::invalid_argument("integrate: state size mismatch");
  return integrate_ode(
      [&esc](double t, const Eigen::VectorXd& x) { return esc.rhs(t, x); }, x0, horizon, dt);
}

}  // namespace eskit
