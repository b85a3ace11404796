#include "eskit/dither.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "eskit/errors.hpp"

namespace eskit {

namespace {
constexpr double kPi = std::numbers::pi;

// Dense scan plus local golden-section polish of max_t ||p(t)||_2 over [0, span].
double sup_norm(const std::function<Eigen::VectorXd(double)>& p, double span, int samples) {
  double best = 0.0, tbest = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double t = span * i / samples;
    const double v = p(t).norm();
    if (v > best) { best = v; tbest = t; }
  }
  const double h = span / samples;
  double lo = std::max(0.0, tbest - h), hi = std::min(span, tbest + h);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  double fc = p(c).norm(), fd = p(d).norm();
  for (int it = 0; it < 80; ++it) {
    if (fc > fd) { hi = d; d = c; fd = fc; c = hi - gr * (hi - lo); fc = p(c).norm(); }
    else         { lo = c; c = d; fc = fd; d = lo + gr * (hi - lo); fd = p(d).norm(); }
  }
  return std::max(best, std::max(fc, fd));
}

}  // namespace

double arm_angle(double t) {
  double u = std::fmod(t, 2.0);
  if (u < 0) u += 2.0;
  if (u < 1.0) return -kPi / 2 + kPi * u;
  return kPi / 2 - kPi * (u - 1.0);
}

double arm_angle_rate(double t) {
  double u = std::fmod(t, 2.0);
  if (u < 0) u += 2.0;
  return u < 1.0 ? kPi : -kPi;
}

DitherSpec DitherSpec::sinusoidal(std::vector<double> amplitudes, std::vector<double> rates) {
  if (amplitudes.empty() || amplitudes.size() != rates.size())
    throw std::invalid_argument("DitherSpec::sinusoidal: amplitude/rate size mismatch");
  for (double d : amplitudes)
    if (d <= 0.0) throw std::invalid_argument("DitherSpec::sinusoidal: amplitudes must be > 0");
  for (double r : rates)
    if (r <= 0.0) throw std::invalid_argument("DitherSpec::sinusoidal: rates must be > 0");

  DitherSpec s;
  s.kind_ = Kind::Sinusoidal;
  s.dimension_ = static_cast<int>(amplitudes.size());
  s.amplitudes_ = std::move(amplitudes);
  s.rates_ = std::move(rates);

  const double rmax = *std::max_element(s.rates_.begin(), s.rates_.end());
  const double rmin = *std::min_element(s.rates_.begin(), s.rates_.end());
  s.feature_ = 2 * kPi / rmax / 8.0;

  // commensurability: r_i / r_0 all rational with modest denominators
  bool commensurate = true;
  long long den_lcm = 1;
  for (double r : s.rates_) {
    const auto pq = rational_approx(r / s.rates_[0], 1e-9, 10'000);
    if (!pq) { commensurate = false; break; }
    den_lcm = std::lcm(den_lcm, pq->second);
    if (den_lcm > 1'000'000) { commensurate = false; break; }
  }
  if (commensurate) {
    s.periodicity_ = Periodicity::make_periodic(2 * kPi * static_cast<double>(den_lcm) /
                                                s.rates_[0]);
  } else {
    s.periodicity_ = Periodicity::almost_periodic(2 * kPi / rmin);
  }

  auto raw = [amp = s.amplitudes_, rate = s.rates_](double t) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(amp.size()));
    for (std::size_t i = 0; i < amp.size(); ++i) v[static_cast<Eigen::Index>(i)] =
        amp[i] * std::sin(rate[i] * t);
    return v;
  };
  double sup;
  if (s.periodicity_.periodic) {
    const int n = std::max(8192, static_cast<int>(s.periodicity_.span / s.feature_) * 16);
    sup = sup_norm(raw, s.periodicity_.span, std::min(n, 1 << 20));
  } else {
    // rationally independent channels come arbitrarily close to peaking together
    double ss = 0.0;
    for (double d : s.amplitudes_) ss += d * d;
    sup = std::sqrt(ss);
  }
  s.scale_ = sup;
  for (double& d : s.amplitudes_) d /= sup;
  return s;
}

DitherSpec DitherSpec::triangle_arm() {
  DitherSpec s;
  s.kind_ = Kind::TriangleArm;
  s.dimension_ = 2;
  s.periodicity_ = Periodicity::make_periodic(2.0);
  s.scale_ = 1.0;  // ||p||_2 == 1 pointwise
  s.breakpoints_ = {1.0};
  s.feature_ = 0.25;
  return s;
}

DitherSpec DitherSpec::from_table(WaveformTable table) {
  DitherSpec s;
  s.kind_ = Kind::Table;
  s.dimension_ = table.channels();
  s.periodicity_ = Periodicity::make_periodic(table.period());
  const auto& bp = table.breakpoints();
  for (std::size_t i = 1; i + 1 < bp.size(); ++i) s.breakpoints_.push_back(bp[i]);
  double gap = table.period();
  for (std::size_t i = 1; i < bp.size(); ++i) gap = std::min(gap, bp[i] - bp[i - 1]);
  s.feature_ = gap;

  auto tbl = std::make_shared<WaveformTable>(std::move(table));
  const double sup = sup_norm([&](double t) { return tbl->value(t); }, tbl->period(),
                              std::max(8192, static_cast<int>(bp.size()) * 64));
  if (sup <= 0.0) throw ConfigError("dither table is identically zero");
  tbl->scale(1.0 / sup);
  s.scale_ = sup;
  s.table_ = std::move(tbl);
  return s;
}

Eigen::VectorXd DitherSpec::value(double t) const {
  switch (kind_) {
    case Kind::Sinusoidal: {
      Eigen::VectorXd v(dimension_);
      for (int i = 0; i < dimension_; ++i)
        v[i] = amplitudes_[static_cast<std::size_t>(i)] *
               std::sin(rates_[static_cast<std::size_t>(i)] * t);
      return v;
    }
    case Kind::TriangleArm: {
      const double phi = arm_angle(t);
      return Eigen::Vector2d(std::cos(phi), std::sin(phi));
    }
    case Kind::Table:
      return table_->value(t);
  }
  return {};
}

Eigen::VectorXd DitherSpec::derivative(double t) const {
  switch (kind_) {
    case Kind::Sinusoidal: {
      Eigen::VectorXd v(dimension_);
      for (int i = 0; i < dimension_; ++i)
        v[i] = amplitudes_[static_cast<std::size_t>(i)] *
               rates_[static_cast<std::size_t>(i)] *
               std::cos(rates_[static_cast<std::size_t>(i)] * t);
      return v;
    }
    case Kind::TriangleArm: {
      const double phi = arm_angle(t);
      const double rate = arm_angle_rate(t);
      return Eigen::Vector2d(-std::sin(phi) * rate, std::cos(phi) * rate);
    }
    case Kind::Table:
      return table_->derivative(t);
  }
  return {};
}

ExtendedDither::ExtendedDither(DitherSpec dither, DerivativeBasis basis)
    : dither_(std::move(dither)), basis_(std::move(basis)) {
  if (dither_.dimension() != basis_.dimension())
    throw std::invalid_argument("ExtendedDither: dither/basis dimension mismatch");
}

Eigen::VectorXd ExtendedDither::rho(double t) const {
  const Eigen::VectorXd p = dither_.value(t);
  Eigen::VectorXd out(basis_.size());
  for (int i = 0; i < basis_.size(); ++i) out[i] = monomial_power(p, basis_[i]);
  return out;
}

Eigen::VectorXd ExtendedDither::rho_derivative(double t) const {
  const Eigen::VectorXd p = dither_.value(t);
  const Eigen::VectorXd dp = dither_.derivative(t);
  const int n = dither_.dimension();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis_.size());
  for (int i = 0; i < basis_.size(); ++i) {
    const MultiIndex& a = basis_[i];
    for (int j = 0; j < n; ++j) {
      if (a[j] == 0) continue;
      double term = a[j] * dp[j];
      for (int k = 0; k < n; ++k) {
        const int pow = (k == j) ? a[k] - 1 : a[k];
        for (int q = 0; q < pow; ++q) term *= p[k];
      }
      out[i] += term;
    }
  }
  return out;
}

AuxSignals AuxSignals::from_function(int dimension, Periodicity periodicity,
                                     std::vector<double> interior_breakpoints, double feature,
                                     std::function<Eigen::VectorXd(double)> value,
                                     std::function<Eigen::VectorXd(double)> derivative) {
  if (dimension < 1) throw std::invalid_argument("AuxSignals: dimension must be >= 1");
  if (!value) throw std::invalid_argument("AuxSignals: missing evaluator");
  AuxSignals r;
  r.dimension_ = dimension;
  r.periodicity_ = periodicity;
  r.breakpoints_ = std::move(interior_breakpoints);
  r.feature_ = feature;
  r.value_ = std::move(value);
  r.derivative_ = std::move(derivative);
  return r;
}

AuxSignals AuxSignals::from_table(WaveformTable table) {
  auto tbl = std::make_shared<WaveformTable>(std::move(table));
  std::vector<double> interior;
  const auto& bp = tbl->breakpoints();
  for (std::size_t i = 1; i + 1 < bp.size(); ++i) interior.push_back(bp[i]);
  double gap = tbl->period();
  for (std::size_t i = 1; i < bp.size(); ++i) gap = std::min(gap, bp[i] - bp[i - 1]);
  return from_function(tbl->channels(), Periodicity::make_periodic(tbl->period()),
                       std::move(interior), gap,
                       [tbl](double t) { return tbl->value(t); },
                       [tbl](double t) { return tbl->derivative(t); });
}

AuxSignals AuxSignals::arm_cosines() {
  return from_function(
      2, Periodicity::make_periodic(2.0), {}, 0.125,
      [](double t) {
        return Eigen::VectorXd(Eigen::Vector2d(-std::cos(2 * kPi * t), -std::cos(kPi * t)));
      },
      [](double t) {
        return Eigen::VectorXd(
            Eigen::Vector2d(2 * kPi * std::sin(2 * kPi * t), kPi * std::sin(kPi * t)));
      });
}

Eigen::VectorXd AuxSignals::derivative(double t) const {
  if (!derivative_) throw CapabilityError("AuxSignals: no derivative evaluator");
  return derivative_(t);
}

}  // namespace eskit
