#include "eskit/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "eskit/csv.hpp"
#include "eskit/errors.hpp"

namespace eskit {

CostMap CostMap::from_function(int dimension, Evaluator j, int smoothness_order) {
  if (dimension < 1) throw std::invalid_argument("CostMap: dimension must be >= 1");
  if (!j) throw std::invalid_argument("CostMap: missing evaluator");
  CostMap m;
  m.dimension_ = dimension;
  m.j_ = std::move(j);
  m.smoothness_ = smoothness_order;
  return m;
}

CostMap CostMap::with_analytic_derivatives(DerivativeEvaluator d) const {
  CostMap m = *this;
  m.deriv_ = std::move(d);
  return m;
}

double CostMap::analytic_derivative(const MultiIndex& alpha, const Eigen::VectorXd& theta) const {
  if (!deriv_) throw CapabilityError("CostMap: no analytic derivative evaluator attached");
  if (alpha.dimension() != dimension_)
    throw std::invalid_argument("CostMap: multi-index dimension mismatch");
  if (alpha.order() == 0) return j_(theta);
  return deriv_(alpha, theta);
}

namespace {

// Nested central differences: one difference level per unit of |alpha|.
double central_difference(const CostMap& j, std::vector<int> alpha, Eigen::VectorXd theta,
                          double step) {
  for (int i = 0; i < static_cast<int>(alpha.size()); ++i) {
    if (alpha[static_cast<std::size_t>(i)] == 0) continue;
    --alpha[static_cast<std::size_t>(i)];
    Eigen::VectorXd up = theta, dn = theta;
    up[i] += step;
    dn[i] -= step;
    const double f_up = central_difference(j, alpha, up, step);
    const double f_dn = central_difference(j, alpha, dn, step);
    return (f_up - f_dn) / (2 * step);
  }
  return j(theta);
}

}  // namespace

double CostMap::derivative(const MultiIndex& alpha, const Eigen::VectorXd& theta) const {
  if (alpha.order() == 0) return j_(theta);
  if (deriv_) return analytic_derivative(alpha, theta);
  const double step =
      std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, theta.cwiseAbs().maxCoeff());
  return central_difference(*this, alpha.entries(), theta, step);
}

namespace {

std::map<std::string, CostMap> make_builtins() {
  std::map<std::string, CostMap> maps;

  // 1D quadratic x^2 about 0
  maps.emplace("quadratic1d",
               CostMap::from_function(1, [](const Eigen::VectorXd& x) { return x[0] * x[0]; })
                   .with_analytic_derivatives([](const MultiIndex& a, const Eigen::VectorXd& x) {
                     switch (a.order()) {
                       case 1: return 2 * x[0];
                       case 2: return 2.0;
                       default: return 0.0;
                     }
                   }));

  // 2D bowl 0.5 * ((x-1)^2 * 2 + (y+0.5)^2 * 8)
  maps.emplace("bowl2d", CostMap::from_function(2, [](const Eigen::VectorXd& x) {
                 const double dx = x[0] - 1.0, dy = x[1] + 0.5;
                 return 0.5 * (2.0 * dx * dx + 8.0 * dy * dy);
               }).with_analytic_derivatives([](const MultiIndex& a, const Eigen::VectorXd& x) {
                 const double dx = x[0] - 1.0, dy = x[1] + 0.5;
                 if (a.order() == 1) return a[0] == 1 ? 2.0 * dx : 8.0 * dy;
                 if (a.order() == 2) {
                   if (a[0] == 2) return 2.0;
                   if (a[1] == 2) return 8.0;
                   return 0.0;
                 }
                 return 0.0;
               }));

  // (4/15)|x|^{5/2}: C^2 with Hessian sqrt(|x|), slower-than-linear local rate
  maps.emplace("halfpow52",
               CostMap::from_function(
                   1, [](const Eigen::VectorXd& x) { return 4.0 / 15.0 * std::pow(std::abs(x[0]), 2.5); },
                   2)
                   .with_analytic_derivatives([](const MultiIndex& a, const Eigen::VectorXd& x) {
                     const double t = x[0];
                     const double sign = t >= 0 ? 1.0 : -1.0;
                     switch (a.order()) {
                       case 1: return sign * (2.0 / 3.0) * std::pow(std::abs(t), 1.5);
                       case 2: return std::sqrt(std::abs(t));
                       default:
                         throw CapabilityError("halfpow52: derivatives beyond order 2 undefined at 0");
                     }
                   }));

  // x^4 / 12: C^infinity control map with quadratic local rate at 0
  maps.emplace("quartic",
               CostMap::from_function(
                   1, [](const Eigen::VectorXd& x) { return std::pow(x[0], 4) / 12.0; })
                   .with_analytic_derivatives([](const MultiIndex& a, const Eigen::VectorXd& x) {
                     const double t = x[0];
                     switch (a.order()) {
                       case 1: return t * t * t / 3.0;
                       case 2: return t * t;
                       case 3: return 2.0 * t;
                       case 4: return 2.0;
                       default: return 0.0;
                     }
                   }));

  // exp(x1 + ... + xn) in 2D
  maps.emplace("expsum2d",
               CostMap::from_function(
                   2, [](const Eigen::VectorXd& x) { return std::exp(x.sum()); })
                   .with_analytic_derivatives([](const MultiIndex&, const Eigen::VectorXd& x) {
                     return std::exp(x.sum());
                   }));

  return maps;
}

const std::map<std::string, CostMap>& builtins() {
  static const std::map<std::string, CostMap> maps = make_builtins();
  return maps;
}

}  // namespace

const CostMap& builtin_cost_map(const std::string& name) {
  const auto& maps = builtins();
  const auto it = maps.find(name);
  if (it == maps.end()) {
    std::string msg = "unknown cost map '" + name + "'; available:";
    for (const auto& [k, v] : maps) msg += " " + k;
    throw ConfigError(msg);
  }
  return it->second;
}

std::vector<std::string> builtin_cost_map_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : builtins()) names.push_back(k);
  return names;
}

Eigen::VectorXd pointwise_estimate(const DemodSpec& demod, const CostMap& j,
                                   const Eigen::VectorXd& theta, double t, double amplitude) {
  if (j.dimension() != demod.basis().dimension())
    throw std::invalid_argument("pointwise_estimate: cost map dimension mismatch");
  const double cost = j(theta + amplitude * demod.dither().value(t));
  return demod.h(t, amplitude) * cost;
}

Eigen::VectorXd averaged_estimate(const DemodSpec& demod, const CostMap& j,
                                  const Eigen::VectorXd& theta, double amplitude, double tol) {
  const int o = demod.size();
  AveragingOptions opt;
  opt.tol = tol;
  opt.feature_hint = demod.resolution_hint();
  opt.breakpoints = demod.breakpoints();
  auto f = [&](double t) {
    Eigen::MatrixXd m(o, 1);
    m.col(0) = pointwise_estimate(demod, j, theta, t, amplitude);
    return m;
  };
  const auto rep = time_average(f, o, 1, demod.periodicity(), opt);
  if (!rep.converged)
    throw AveragingError("averaged_estimate did not settle", rep.value, rep.horizon,
                         rep.estimated_error);
  return rep.value.col(0);
}

TaylorPolynomial::TaylorPolynomial(const CostMap& j, const Eigen::VectorXd& theta0, int order)
    : theta0_(theta0), order_(order), basis_(j.dimension(), 0, order) {
  if (order < 0) throw std::invalid_argument("TaylorPolynomial: order must be >= 0");
  if (!j.has_analytic_derivatives() && order > 0)
    throw CapabilityError("TaylorPolynomial: cost map lacks analytic derivatives");
  coeffs_.reserve(static_cast<std::size_t>(basis_.size()));
  for (int i = 0; i < basis_.size(); ++i) {
    const MultiIndex& a = basis_[i];
    const double d = a.order() == 0 ? j(theta0) : j.analytic_derivative(a, theta0);
    coeffs_.push_back(d / a.factorial());
  }
}

double TaylorPolynomial::operator()(const Eigen::VectorXd& delta) const {
  double sum = 0.0;
  for (int i = 0; i < basis_.size(); ++i)
    sum += coeffs_[static_cast<std::size_t>(i)] * monomial_power(delta, basis_[i]);
  return sum;
}

CostMap TaylorPolynomial::as_cost_map() const {
  // D^beta of sum c_alpha delta^alpha = sum over alpha >= beta of
  // c_alpha * alpha!/(alpha-beta)! * delta^{alpha-beta}
  auto self = *this;
  auto j = CostMap::from_function(theta0_.size(), [self](const Eigen::VectorXd& theta) {
    return self(theta - self.theta0_);
  });
  return j.with_analytic_derivatives(
      [self](const MultiIndex& beta, const Eigen::VectorXd& theta) {
        const Eigen::VectorXd delta = theta - self.theta0_;
        double sum = 0.0;
        for (int i = 0; i < self.basis_.size(); ++i) {
          const MultiIndex& a = self.basis_[i];
          std::vector<int> rem(static_cast<std::size_t>(a.dimension()));
          double fall = 1.0;
          bool ok = true;
          for (int k = 0; k < a.dimension(); ++k) {
            const int r = a[k] - beta[k];
            if (r < 0) { ok = false; break; }
            rem[static_cast<std::size_t>(k)] = r;
            for (int q = r + 1; q <= a[k]; ++q) fall *= q;  // alpha_k!/(alpha_k-beta_k)!
          }
          if (!ok) continue;
          sum += self.coeffs_[static_cast<std::size_t>(i)] * fall *
                 monomial_power(delta, MultiIndex(rem));
        }
        return sum;
      });
}

SlopeFit EstimateSweep::fit_slope(int component, double floor) const {
  SlopeFit fit;
  std::vector<std::pair<double, double>> pts;  // (log a, log err)
  bool all_below = !rows.empty();
  for (const auto& row : rows) {
    const double err = component < 0 ? row.error_norm
                                     : std::abs(row.estimate[component] - row.truth[component]);
    if (err > floor) all_below = false;
    if (err > floor && err > 0.0 && row.amplitude > 0.0)
      pts.emplace_back(std::log(row.amplitude), std::log(err));
  }
  fit.exact = all_below;
  fit.points_used = static_cast<int>(pts.size());
  if (pts.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

void EstimateSweep::write_csv(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write sweep CSV", file.string());
  out << "a,component,estimate,truth,abs_error\n";
  for (const auto& row : rows)
    for (int i = 0; i < row.estimate.size(); ++i)
      out << csv_number(row.amplitude) << "," << i << "," << csv_number(row.estimate[i]) << ","
          << csv_number(row.truth[i]) << ","
          << csv_number(std::abs(row.estimate[i] - row.truth[i])) << "\n";
}

EstimateSweep convergence_sweep(const DemodSpec& demod, const CostMap& j,
                                const Eigen::VectorXd& theta, std::vector<double> amplitudes,
                                double tol) {
  if (amplitudes.empty()) throw std::invalid_argument("convergence_sweep: empty amplitude list");
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    if (!(amplitudes[i] > 0.0 && amplitudes[i] < 1.0))
      throw std::invalid_argument("convergence_sweep: amplitudes must lie in (0, 1)");
    if (i > 0 && amplitudes[i] >= amplitudes[i - 1])
      throw std::invalid_argument("convergence_sweep: amplitudes must be strictly decreasing");
  }
  EstimateSweep sweep;
  sweep.basis = demod.basis();
  for (double a : amplitudes) {
    SweepRow row;
    row.amplitude = a;
    row.estimate = averaged_estimate(demod, j, theta, a, tol);
    row.truth.resize(demod.size());
    for (int i = 0; i < demod.size(); ++i) row.truth[i] = j.derivative(demod.basis()[i], theta);
    row.error_norm = (row.estimate - row.truth).norm();
    if (!std::isfinite(row.error_norm))
      throw std::runtime_error("convergence_sweep: non-finite estimate error");
    sweep.rows.push_back(std::move(row));
  }
  return sweep;
}

}  // namespace eskit
