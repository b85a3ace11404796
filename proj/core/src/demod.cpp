#include "eskit/demod.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "eskit/errors.hpp"

namespace eskit {

namespace {
constexpr double kPi = std::numbers::pi;
}

AmplitudeMatrix::AmplitudeMatrix(const DerivativeBasis& basis, double amplitude)
    : amplitude_(amplitude), diag_(amplitude_diagonal(basis, amplitude)) {}

Eigen::VectorXd amplitude_diagonal(const DerivativeBasis& basis, double amplitude) {
  if (!(amplitude > 0.0 && amplitude < 1.0))
    throw std::invalid_argument("amplitude must lie in (0, 1)");
  Eigen::VectorXd d(basis.size());
  for (int i = 0; i < basis.size(); ++i)
    d[i] = std::pow(amplitude, basis[i].order()) / basis[i].factorial();
  return d;
}

ExistenceVerdict rank_verdict(const Eigen::MatrixXd& q, double rank_tol, double noise_floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
  const Eigen::VectorXd ev = eig.eigenvalues().cwiseAbs();  // PSD up to quadrature noise
  ExistenceVerdict v;
  v.size = static_cast<int>(q.rows());
  v.sigma_max = ev.maxCoeff();
  v.sigma_min = ev.minCoeff();
  const double cut = std::max(rank_tol * v.sigma_max, noise_floor);
  std::vector<std::pair<double, int>> order;  // (|lambda|, column)
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] > cut) ++v.rank;
    order.emplace_back(ev[i], i);
  }
  v.estimable = (v.sigma_max > 0.0) && (v.rank == v.size);
  if (!v.estimable) {
    std::sort(order.begin(), order.end());
    const int count = std::min(3, v.size - v.rank);
    for (int i = 0; i < count; ++i)
      v.null_basis.push_back(eig.eigenvectors().col(order[static_cast<std::size_t>(i)].second));
  }
  return v;
}

ExistenceVerdict check_existence(const ExtendedDither& ext, bool centered, double tol,
                                 double rank_tol) {
  return rank_verdict(covariance(ext, centered, tol), rank_tol, 100 * tol);
}

Eigen::VectorXd DemodSpec::carrier(double t) const {
  if (variant_ == DemodVariant::CrossVariance) return aux_->value(t);
  const Eigen::VectorXd p = dither_.value(t);
  Eigen::VectorXd rho(basis_.size());
  for (int i = 0; i < basis_.size(); ++i) rho[i] = monomial_power(p, basis_[i]);
  if (center_signal_) rho -= rho_mean_;
  return rho;
}

Eigen::VectorXd DemodSpec::reference_signal(double t) const {
  const Eigen::VectorXd p = dither_.value(t);
  Eigen::VectorXd rho(basis_.size());
  for (int i = 0; i < basis_.size(); ++i) rho[i] = monomial_power(p, basis_[i]);
  if (center_reference_) rho -= rho_mean_;
  return rho;
}

Eigen::VectorXd DemodSpec::h(double t, double amplitude) const {
  if (amplitude == amplitude_) return demod_scaled_ * carrier(t);
  const Eigen::VectorXd ainv = amplitude_diagonal(basis_, amplitude).cwiseInverse();
  return ainv.asDiagonal() * (demod_matrix_ * carrier(t));
}

Eigen::VectorXd DemodSpec::h_derivative(double t, double amplitude) const {
  Eigen::VectorXd dc;
  if (variant_ == DemodVariant::CrossVariance) {
    dc = aux_->derivative(t);
  } else {
    dc = ExtendedDither(dither_, basis_).rho_derivative(t);  // centering shift is constant
  }
  const Eigen::VectorXd ainv = amplitude_diagonal(basis_, amplitude).cwiseInverse();
  return ainv.asDiagonal() * (demod_matrix_ * dc);
}

WaveformTable DemodSpec::export_table(int samples_per_span) const {
  if (!periodicity_.periodic)
    throw CapabilityError("export_table: only periodic demodulation signals can be sampled");
  const double T = periodicity_.span;
  std::vector<double> grid;
  for (int i = 0; i <= samples_per_span; ++i) grid.push_back(T * i / samples_per_span);
  for (const auto& pat : breakpoints_) {
    const double period = pat.period > 0 ? pat.period : T;
    for (double b : pat.offsets) {
      double start = b - period * std::floor(b / period);
      for (double t = start; t < T; t += period)
        if (t > 0 && t < T) grid.push_back(t);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [T](double a, double b) { return b - a < 1e-12 * T; }),
             grid.end());
  grid.back() = T;

  std::vector<Eigen::VectorXd> values, derivs;
  values.reserve(grid.size());
  for (double t : grid) {
    values.push_back(h(t));
    derivs.push_back(h_derivative(t, amplitude_));
  }
  values.back() = values.front();  // close the period exactly
  derivs.back() = derivs.front();
  return WaveformTable(std::move(grid), std::move(values), std::move(derivs));
}

namespace {

Eigen::MatrixXd symmetric_inverse(const Eigen::MatrixXd& q) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
  return eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

Eigen::MatrixXd inverse_or_throw(const Eigen::MatrixXd& m, double rank_tol, double noise_floor,
                                 const char* what) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = std::max(s.size() ? rank_tol * s.maxCoeff() : 0.0, noise_floor);
  if (s.size() == 0 || s.minCoeff() <= cut) {
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
      if (s[i] > cut) ++rank;
    std::vector<Eigen::VectorXd> null_basis;
    for (int i = static_cast<int>(s.size()) - 1;
         i >= 0 && static_cast<int>(null_basis.size()) < 3; --i)
      if (s[i] <= cut) null_basis.push_back(svd.matrixV().col(i));
    throw ExistenceError(std::string(what) + " (rank " + std::to_string(rank) + " of " +
                             std::to_string(m.rows()) + ")",
                         rank, static_cast<int>(m.rows()), std::move(null_basis));
  }
  return svd.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

}  // namespace

DemodSpec synthesize_covariance_h(const ExtendedDither& ext, const AmplitudeMatrix& a,
                                  bool centered, double tol) {
  DemodSpec d;
  d.basis_ = ext.basis();
  d.dither_ = ext.dither();
  d.variant_ = centered ? DemodVariant::ZeroMean : DemodVariant::Covariance;
  d.amplitude_ = a.amplitude();
  d.rho_mean_ = Eigen::VectorXd::Zero(ext.size());
  if (centered) d.rho_mean_ = mean_rho(ext, tol);
  d.center_signal_ = centered;
  d.center_reference_ = centered;
  d.avg_matrix_ = covariance(ext, centered, tol);
  d.verdict_ = rank_verdict(d.avg_matrix_, 1e-8, 100 * tol);
  if (!d.verdict_.estimable)
    throw ExistenceError("covariance matrix singular: extended dither components are linearly "
                         "dependent (rank " + std::to_string(d.verdict_.rank) + " of " +
                             std::to_string(d.verdict_.size) + ")",
                         d.verdict_.rank, d.verdict_.size, d.verdict_.null_basis);
  d.demod_matrix_ = symmetric_inverse(d.avg_matrix_);
  d.demod_scaled_ = a.inverse_diagonal().asDiagonal() * d.demod_matrix_;
  d.periodicity_ = ext.dither().periodicity();
  if (!ext.dither().interior_breakpoints().empty())
    d.breakpoints_.push_back({d.periodicity_.span, ext.dither().interior_breakpoints()});
  d.feature_ = ext.dither().resolution_hint();
  return d;
}

DemodSpec synthesize_verbatim_h(const ExtendedDither& ext, const AmplitudeMatrix& a, double tol) {
  DemodSpec d = synthesize_covariance_h(ext, a, /*centered=*/true, tol);
  d.variant_ = DemodVariant::Verbatim;
  d.center_signal_ = false;
  return d;
}

DemodSpec synthesize_crossvariance_h(const AuxSignals& r, const ExtendedDither& ext,
                                     const AmplitudeMatrix& a, bool centered, double tol) {
  if (r.dimension() != ext.size())
    throw std::invalid_argument(
        "synthesize_crossvariance_h: r must have one channel per basis component");
  DemodSpec d;
  d.basis_ = ext.basis();
  d.dither_ = ext.dither();
  d.variant_ = DemodVariant::CrossVariance;
  d.amplitude_ = a.amplitude();
  d.rho_mean_ = Eigen::VectorXd::Zero(ext.size());
  if (centered) d.rho_mean_ = mean_rho(ext, tol);
  d.center_signal_ = centered;
  d.center_reference_ = centered;
  d.aux_ = std::make_shared<AuxSignals>(r);
  d.avg_matrix_ = cross_variance(r, ext, centered, tol);
  d.demod_matrix_ = inverse_or_throw(d.avg_matrix_, 1e-8, 100 * tol,
                                     "cross-variance matrix singular: r unsuitable for this "
                                     "dither");
  d.demod_scaled_ = a.inverse_diagonal().asDiagonal() * d.demod_matrix_;
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d.avg_matrix_);
    d.verdict_.estimable = true;
    d.verdict_.size = ext.size();
    d.verdict_.rank = ext.size();
    d.verdict_.sigma_max = svd.singularValues().maxCoeff();
    d.verdict_.sigma_min = svd.singularValues().minCoeff();
  }
  d.periodicity_ = combine(r.periodicity(), ext.dither().periodicity());
  if (!ext.dither().interior_breakpoints().empty())
    d.breakpoints_.push_back({ext.dither().periodicity().span,
                              ext.dither().interior_breakpoints()});
  if (!r.interior_breakpoints().empty())
    d.breakpoints_.push_back({r.periodicity().span, r.interior_breakpoints()});
  d.feature_ = std::min(ext.dither().resolution_hint(), r.resolution_hint());
  return d;
}

std::function<double(double)> closed_form_sinusoidal_h(int m, double amplitude) {
  if (m < 0) throw std::invalid_argument("closed_form_sinusoidal_h: m must be >= 0");
  if (!(amplitude > 0.0 && amplitude < 1.0))
    throw std::invalid_argument("closed_form_sinusoidal_h: amplitude must lie in (0, 1)");
  if (m == 0) return [](double) { return 1.0; };
  double coef = 1.0;
  for (int k = 2; k <= m; ++k) coef *= k;             // m!
  coef *= std::pow(2.0, m) / std::pow(amplitude, m);  // 2^m m! / a^m
  if (m % 2 == 1) {
    const double sign = ((m - 1) / 2) % 2 ? -1.0 : 1.0;
    return [coef, sign, m](double tau) { return coef * sign * std::sin(m * tau); };
  }
  const double sign = (m / 2) % 2 ? -1.0 : 1.0;
  return [coef, sign, m](double tau) { return coef * sign * std::cos(m * tau); };
}

Eigen::MatrixXd sin_power_expansion(int m) {
  if (m < 0) throw std::invalid_argument("sin_power_expansion: m must be >= 0");
  // Harmonic coefficients of sin^i over {sin kt} and {cos kt}, built by
  // repeated multiplication with sin(t) via product-to-sum identities.
  const int nh = m + 1;
  Eigen::MatrixXd sinc = Eigen::MatrixXd::Zero(m + 1, nh);
  Eigen::MatrixXd cosc = Eigen::MatrixXd::Zero(m + 1, nh);
  cosc(0, 0) = 1.0;  // sin^0 = 1
  for (int i = 1; i <= m; ++i) {
    for (int k = 0; k < nh; ++k) {
      const double s = sinc(i - 1, k), c = cosc(i - 1, k);
      if (s != 0.0) {
        // sin(kt) sin(t) = [cos((k-1)t) - cos((k+1)t)] / 2
        cosc(i, std::abs(k - 1)) += s / 2;
        if (k + 1 < nh) cosc(i, k + 1) -= s / 2;
      }
      if (c != 0.0) {
        // cos(kt) sin(t) = [sin((k+1)t) - sin((k-1)t)] / 2; sin(0t) drops,
        // sin(-t) = -sin(t)
        if (k + 1 < nh) sinc(i, k + 1) += c / 2;
        if (k >= 2) sinc(i, k - 1) -= c / 2;
        else if (k == 0 && nh > 1) sinc(i, 1) += c / 2;
      }
    }
  }
  // Project onto the alternating orthogonal family {1, sin t, cos 2t, ...}:
  // parity guarantees the dropped combinations are zero.
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(m + 1, m + 1);
  for (int i = 0; i <= m; ++i) {
    e(i, 0) = cosc(i, 0);
    for (int k = 1; k <= m; ++k) e(i, k) = (k % 2 == 1) ? sinc(i, k) : cosc(i, k);
  }
  return e;
}

Eigen::MatrixXd sin_power_orthogonalizer(int m) {
  const Eigen::MatrixXd e = sin_power_expansion(m);
  return e.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(m + 1, m + 1));
}

AppendixReport verify_appendix_equivalence(int m_max, double amplitude, double tol) {
  if (m_max < 0 || m_max > 8)
    throw std::invalid_argument("verify_appendix_equivalence: m_max must be in [0, 8]");
  AppendixReport report;
  report.pass = true;
  const DitherSpec p = DitherSpec::sinusoidal({1.0}, {1.0});
  const double qtol = std::min(tol * 1e-4, 1e-12);

  for (int m = 1; m <= m_max; ++m) {
    const ExtendedDither ext(p, DerivativeBasis(1, 0, m));
    const AmplitudeMatrix a(ext.basis(), amplitude);
    const DemodSpec spec = synthesize_covariance_h(ext, a, /*centered=*/false, qtol);
    const auto closed = closed_form_sinusoidal_h(m, amplitude);
    AppendixOrderCheck check;
    check.order = m;
    const int grid = 4096;
    for (int i = 0; i <= grid; ++i) {
      const double t = 2 * kPi * i / grid;
      const double gap = std::abs(spec.h(t)[m] - closed(t));
      if (gap > check.sup_gap) {
        check.sup_gap = gap;
        check.worst_t = t;
      }
    }
    check.pass = check.sup_gap < tol;
    report.pass = report.pass && check.pass;
    report.orders.push_back(check);
  }

  {
    const ExtendedDither ext(p, DerivativeBasis(1, 0, m_max));
    const Eigen::MatrixXd q = covariance(ext, /*centered=*/false, qtol);
    const Eigen::MatrixXd g = sin_power_orthogonalizer(m_max);
    Eigen::VectorXd qperp_inv(m_max + 1);
    qperp_inv[0] = 1.0;
    for (int i = 1; i <= m_max; ++i) qperp_inv[i] = 2.0;
    const Eigen::MatrixXd rhs = g.transpose() * qperp_inv.asDiagonal() * g;
    report.q_inverse_gap = (symmetric_inverse(q) - rhs).cwiseAbs().maxCoeff();
    report.pass = report.pass && (report.q_inverse_gap < 1e-8);
  }
  return report;
}

}  // namespace eskit
