#include "eskit/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "eskit/errors.hpp"

namespace eskit {

namespace {

// Panel boundaries in [0, span]: endpoints plus every pattern offset
// replicated at its own period.
std::vector<double> panel_boundaries(double span, const std::vector<BreakpointPattern>& patterns) {
  std::vector<double> cuts{0.0, span};
  for (const auto& pat : patterns) {
    if (pat.period <= 0.0) {
      for (double b : pat.offsets)
        if (b > 0.0 && b < span) cuts.push_back(b);
      continue;
    }
    for (double b : pat.offsets) {
      double start = b - pat.period * std::floor(b / pat.period);  // into [0, period)
      for (double t = start; t < span; t += pat.period)
        if (t > 0.0) cuts.push_back(t);
    }
    // period multiples themselves are panel edges too (wrap points)
    for (double t = pat.period; t < span; t += pat.period) cuts.push_back(t);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> uniq;
  for (double c : cuts)
    if (uniq.empty() || c - uniq.back() > 1e-12 * std::max(1.0, span)) uniq.push_back(c);
  if (uniq.back() != span) uniq.back() = span;
  return uniq;
}

struct Quadrature {
  const std::function<Eigen::MatrixXd(double)>& f;
  int rows, cols;
  long long points_used = 0;

  // composite Simpson over [a, b] with step <= h_target
  Eigen::MatrixXd panel(double a, double b, double h_target) {
    const double len = b - a;
    int n = static_cast<int>(std::ceil(len / h_target));
    n = std::max(n, 2);
    if (n % 2) ++n;
    const double h = len / n;
    Eigen::MatrixXd acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    points_used += n + 1;
    return acc * (h / 3.0);
  }

  Eigen::MatrixXd integral(const std::vector<double>& cuts, double h_target) {
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(rows, cols);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      total += panel(cuts[i], cuts[i + 1], h_target);
    return total;
  }
};

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Refine the step until two successive composite means agree within tol.
// Returns {mean, last_diff, refined_ok}.
struct RefineResult {
  Eigen::MatrixXd mean;
  double diff;
  bool ok;
};

RefineResult refined_mean(Quadrature& q, const std::vector<double>& cuts, double span,
                          double h0, double tol, long long max_points) {
  Eigen::MatrixXd prev = q.integral(cuts, h0) / span;
  double h = h0 / 2;
  double diff = std::numeric_limits<double>::infinity();
  for (int level = 0; level < 24; ++level) {
    const Eigen::MatrixXd cur = q.integral(cuts, h) / span;
    diff = max_abs_diff(cur, prev);
    prev = cur;
    if (diff < tol) return {prev, diff, true};
    if (q.points_used > max_points) break;
    h /= 2;
  }
  return {prev, diff, false};
}

}  // namespace

AverageReport time_average(const std::function<Eigen::MatrixXd(double)>& f, int rows, int cols,
                           const Periodicity& periodicity, const AveragingOptions& options) {
  if (options.tol <= 0) throw std::invalid_argument("time_average: tol must be > 0");
  if (periodicity.span <= 0) throw std::invalid_argument("time_average: nonpositive span");
  Quadrature q{f, rows, cols};

  if (periodicity.periodic) {
    const double T = periodicity.span;
    const double h0 = options.feature_hint > 0 ? options.feature_hint : T / 16;
    const auto cuts = panel_boundaries(T, options.breakpoints);
    const auto r = refined_mean(q, cuts, T, h0, options.tol, options.max_points);
    return {r.mean, T, r.diff, r.ok};
  }

  // almost-periodic: doubling horizons with Cauchy stopping
  const double T0 = periodicity.span;
  const double h0 = options.feature_hint > 0 ? options.feature_hint : T0 / 16;
  Eigen::MatrixXd prev;
  double diff = std::numeric_limits<double>::infinity();
  double horizon = T0;
  bool have_prev = false;
  for (int k = 0; k <= options.max_horizon_doublings; ++k) {
    horizon = std::ldexp(T0, k);
    const auto cuts = panel_boundaries(horizon, options.breakpoints);
    const auto r = refined_mean(q, cuts, horizon, h0, options.tol / 4, options.max_points);
    if (have_prev) {
      diff = max_abs_diff(r.mean, prev);
      if (diff < options.tol) return {r.mean, horizon, diff, true};
    }
    prev = r.mean;
    have_prev = true;
    if (q.points_used > options.max_points) break;
  }
  return {prev, horizon, diff, false};
}

AverageReport time_average(const std::function<double(double)>& f,
                           const Periodicity& periodicity, const AveragingOptions& options) {
  auto wrap = [&f](double t) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = f(t);
    return m;
  };
  return time_average(wrap, 1, 1, periodicity, options);
}

AveragingOptions averaging_options_for(const ExtendedDither& ext, double tol) {
  AveragingOptions opt;
  opt.tol = tol;
  opt.feature_hint = ext.dither().resolution_hint();
  if (!ext.dither().interior_breakpoints().empty())
    opt.breakpoints.push_back({ext.dither().periodicity().span,
                               ext.dither().interior_breakpoints()});
  return opt;
}

namespace {

Eigen::MatrixXd require_converged(const AverageReport& rep, const char* what) {
  if (!rep.converged)
    throw AveragingError(std::string(what) + ": time average did not settle (residual " +
                             std::to_string(rep.estimated_error) + " at horizon " +
                             std::to_string(rep.horizon) + ")",
                         rep.value, rep.horizon, rep.estimated_error);
  return rep.value;
}

}  // namespace

Eigen::VectorXd mean_rho(const ExtendedDither& ext, double tol) {
  const int o = ext.size();
  auto f = [&ext, o](double t) {
    Eigen::MatrixXd m(o, 1);
    m.col(0) = ext.rho(t);
    return m;
  };
  const auto rep = time_average(f, o, 1, ext.dither().periodicity(),
                                averaging_options_for(ext, tol));
  return require_converged(rep, "mean_rho");
}

Eigen::MatrixXd covariance(const ExtendedDither& ext, bool centered, double tol) {
  const int o = ext.size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(o);
  if (centered) mean = mean_rho(ext, tol);
  auto f = [&ext, &mean](double t) {
    const Eigen::VectorXd r = ext.rho(t) - mean;
    return Eigen::MatrixXd(r * r.transpose());
  };
  const auto rep = time_average(f, o, o, ext.dither().periodicity(),
                                averaging_options_for(ext, tol));
  Eigen::MatrixXd q = require_converged(rep, "covariance");
  return ((q + q.transpose()) / 2).eval();
}

Eigen::MatrixXd cross_variance(const AuxSignals& r, const ExtendedDither& ext, bool centered,
                               double tol) {
  const int o = ext.size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(o);
  if (centered) mean = mean_rho(ext, tol);

  AveragingOptions opt;
  opt.tol = tol;
  opt.feature_hint = std::min(ext.dither().resolution_hint(), r.resolution_hint());
  if (!ext.dither().interior_breakpoints().empty())
    opt.breakpoints.push_back({ext.dither().periodicity().span,
                               ext.dither().interior_breakpoints()});
  if (!r.interior_breakpoints().empty())
    opt.breakpoints.push_back({r.periodicity().span, r.interior_breakpoints()});

  const Periodicity per = combine(r.periodicity(), ext.dither().periodicity());
  auto f = [&](double t) {
    return Eigen::MatrixXd(r.value(t) * (ext.rho(t) - mean).transpose());
  };
  const auto rep = time_average(f, r.dimension(), o, per, opt);
  return require_converged(rep, "cross_variance");
}

}  // namespace eskit
