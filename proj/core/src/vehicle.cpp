#include "eskit/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "eskit/csv.hpp"
#include "eskit/errors.hpp"
#include "eskit/esc.hpp"

namespace eskit::vehicle {

namespace {
constexpr double kPi = std::numbers::pi;

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w <= -180.0) w += 360.0;
  if (w > 180.0) w -= 360.0;
  return w;
}

}  // namespace

Eigen::Vector2d sensor_position(const VehicleState& state, double t, double arm_length,
                                double omega) {
  const double phi = arm_angle(omega * t);
  const double dir = state.heading + phi;
  return {state.x + arm_length * std::cos(dir), state.y + arm_length * std::sin(dir)};
}

CostField CostField::acoustic(const Eigen::Vector2d& source, double clamp_radius,
                              double pin_distance, double pin_level_db) {
  if (clamp_radius <= 0) throw std::invalid_argument("acoustic field: clamp radius must be > 0");
  CostField f;
  f.kind_ = Kind::Acoustic;
  f.source_ = source;
  f.clamp_radius_ = clamp_radius;
  // J(pin_distance) = pin_level_db fixes the 20 log10(S/p_ref) offset
  f.offset_db_ = pin_level_db + 20.0 * std::log10(pin_distance);
  f.orientation_sensitive_ = false;
  return f;
}

CostField CostField::photoresistor(const Eigen::Vector2d& source, const PhotoWeights& weights,
                                   bool orientation_sensitive) {
  CostField f;
  f.kind_ = Kind::Photoresistor;
  f.source_ = source;
  f.weights_ = weights;
  f.orientation_sensitive_ = orientation_sensitive;
  return f;
}

CostField CostField::quadratic(const Eigen::Vector2d& source, double c2, double c1, double c0) {
  CostField f;
  f.kind_ = Kind::Quadratic;
  f.source_ = source;
  f.c2_ = c2;
  f.c1_ = c1;
  f.c0_ = c0;
  f.orientation_sensitive_ = false;
  return f;
}

double CostField::evaluate(const Eigen::Vector2d& sensor, double orientation_deg) const {
  const double d = (sensor - source_).norm();
  switch (kind_) {
    case Kind::Acoustic:
      return -20.0 * std::log10(std::max(d, clamp_radius_)) + offset_db_;
    case Kind::Photoresistor: {
      const double b = orientation_sensitive_ ? orientation_deg : 0.0;
      return weights_[0] * d * d + weights_[1] * b * b + weights_[2] * d * b + weights_[3] * d +
             weights_[4] * b + weights_[5];
    }
    case Kind::Quadratic:
      return c2_ * d * d + c1_ * d + c0_;
  }
  return 0.0;
}

double sensor_orientation_angle(const VehicleState& state, double t, double omega,
                                double arm_length, const Eigen::Vector2d& source) {
  const Eigen::Vector2d rs = sensor_position(state, t, arm_length, omega);
  const Eigen::Vector2d to_source = source - rs;
  if (to_source.norm() == 0.0)
    throw std::domain_error("sensor_orientation_angle: sensor coincides with the source");
  const double arm_dir = state.heading + arm_angle(omega * t);
  const double bearing = std::atan2(to_source.y(), to_source.x());
  return wrap_degrees((arm_dir - bearing) * 180.0 / kPi);
}

DemodSpec scenario_demod(const ScenarioConfig& cfg) {
  const ExtendedDither ext(DitherSpec::triangle_arm(), DerivativeBasis(2, 1, 1));
  const AmplitudeMatrix amp(ext.basis(), cfg.arm_length);
  constexpr double tol = 1e-10;
  switch (cfg.demod) {
    case DemodChoice::HqVerbatim:
      return synthesize_verbatim_h(ext, amp, tol);
    case DemodChoice::HqCentered:
      return synthesize_covariance_h(ext, amp, /*centered=*/true, tol);
    case DemodChoice::Hr:
      return synthesize_crossvariance_h(AuxSignals::arm_cosines(), ext, amp,
                                        /*centered=*/true, tol);
  }
  throw std::logic_error("scenario_demod: bad demod choice");
}

std::pair<double, double> control_law(const DemodSpec& demod, const CostField& field,
                                      const VehicleState& state, double t, const Gains& gains,
                                      double arm_length, double omega, double cost_scale) {
  const Eigen::Vector2d rs = sensor_position(state, t, arm_length, omega);
  double beta_deg = 0.0;
  if (field.orientation_sensitive())
    beta_deg = sensor_orientation_angle(state, t, omega, arm_length, field.source());
  const double j = cost_scale * field.evaluate(rs, beta_deg);
  const Eigen::VectorXd h = demod.h(omega * t, arm_length);
  return {gains.kv * h[0] * j, gains.komega * h[1] * j};
}

ScenarioConfig scenario_from_config(const ConfigFile& cfg) {
  ScenarioConfig sc;
  sc.start.x = cfg.number("scenario", "x0");
  sc.start.y = cfg.number("scenario", "y0");
  sc.start.heading = cfg.angle("scenario", "theta0");
  sc.gains.kv = cfg.number("scenario", "kv");
  sc.gains.komega = cfg.number("scenario", "komega");
  sc.omega = cfg.rate("scenario", "omega");
  sc.arm_length = cfg.number("scenario", "arm_length");
  sc.horizon = cfg.number("scenario", "horizon");
  sc.dt = cfg.number("scenario", "dt");
  sc.reach_radius = cfg.number_or("scenario", "reach_radius", 0.5);
  sc.cost_scale = cfg.number_or("scenario", "cost_scale", 1.0);
  sc.log_stride = static_cast<int>(cfg.number_or("scenario", "log_stride", 1));

  const std::string demod = cfg.get_or("scenario", "demod", "hq-centered");
  if (demod == "hq-paper-verbatim") sc.demod = DemodChoice::HqVerbatim;
  else if (demod == "hq-centered") sc.demod = DemodChoice::HqCentered;
  else if (demod == "hr") sc.demod = DemodChoice::Hr;
  else
    throw ConfigError("unknown demod '" + demod +
                          "' (expected hq-paper-verbatim | hq-centered | hr)",
                      cfg.name());

  const Eigen::Vector2d source(cfg.number("field", "source_x"), cfg.number("field", "source_y"));
  const std::string kind = cfg.get("field", "kind");
  if (kind == "acoustic") {
    sc.field = CostField::acoustic(source, cfg.number_or("field", "r0", kDefaultClampRadius),
                                   cfg.number_or("field", "pin_distance", 1.0),
                                   cfg.number_or("field", "pin_level_db", 80.0));
  } else if (kind == "photoresistor") {
    PhotoWeights w = kPhotoresistorWeights;
    const std::array<const char*, 6> names{"w1", "w2", "w3", "w4", "w5", "w6"};
    for (std::size_t i = 0; i < names.size(); ++i)
      w[i] = cfg.number_or("field", names[i], w[i]);
    const std::string orient = cfg.get_or("field", "orientation", "on");
    if (orient != "on" && orient != "off")
      throw ConfigError("field orientation must be 'on' or 'off'", cfg.name());
    sc.field = CostField::photoresistor(source, w, orient == "on");
  } else if (kind == "quadratic") {
    sc.field = CostField::quadratic(source, cfg.number("field", "c2"),
                                    cfg.number_or("field", "c1", 0.0),
                                    cfg.number_or("field", "c0", 0.0));
  } else {
    throw ConfigError("unknown field kind '" + kind +
                          "' (expected acoustic | photoresistor | quadratic)",
                      cfg.name());
  }

  if (sc.omega <= 0) throw ConfigError("omega must be > 0", cfg.name());
  if (!(sc.arm_length > 0 && sc.arm_length < 1))
    throw ConfigError("arm_length must lie in (0, 1)", cfg.name());
  if (sc.dt <= 0 || sc.horizon <= 0) throw ConfigError("dt and horizon must be > 0", cfg.name());
  if (sc.log_stride < 1) throw ConfigError("log_stride must be >= 1", cfg.name());
  if (sc.reach_radius <= 0) throw ConfigError("reach_radius must be > 0", cfg.name());
  return sc;
}

ScenarioConfig load_scenario(const std::filesystem::path& file) {
  return scenario_from_config(ConfigFile::load(file));
}

namespace {

// Allocation-free closed-loop evaluator; mirrors control_law exactly for the
// three scenario demodulation choices (o == 2 throughout).
struct LoopEvaluator {
  Eigen::Matrix2d demod_matrix;  // A^-1 Q^-1 or A^-1 R^-1
  Eigen::Vector2d mean;          // subtracted from the carrier (zero if raw)
  bool cross = false;            // carrier is the cosine pair, not the arm
  const CostField* field = nullptr;
  Gains gains;
  double arm_length = 0.0, omega = 0.0, cost_scale = 1.0;

  std::pair<double, double> command(double t, const Eigen::Vector3d& s) const {
    const double tau = omega * t;
    const double phi = arm_angle(tau);
    const double dir = s[2] + phi;
    const Eigen::Vector2d rs(s[0] + arm_length * std::cos(dir),
                             s[1] + arm_length * std::sin(dir));
    double beta_deg = 0.0;
    if (field->orientation_sensitive()) {
      const Eigen::Vector2d to_source = field->source() - rs;
      if (to_source.norm() == 0.0)
        throw std::domain_error("sensor_orientation_angle: sensor coincides with the source");
      beta_deg = wrap_degrees((dir - std::atan2(to_source.y(), to_source.x())) * 180.0 / kPi);
    }
    const double j = cost_scale * field->evaluate(rs, beta_deg);
    Eigen::Vector2d carrier;
    if (cross)
      carrier = Eigen::Vector2d(-std::cos(2 * kPi * tau), -std::cos(kPi * tau));
    else
      carrier = Eigen::Vector2d(std::cos(phi), std::sin(phi)) - mean;
    const Eigen::Vector2d h = demod_matrix * carrier;
    return {gains.kv * h[0] * j, gains.komega * h[1] * j};
  }
};

LoopEvaluator make_loop(const ScenarioConfig& cfg, const DemodSpec& demod) {
  LoopEvaluator loop;
  const Eigen::VectorXd ainv = amplitude_diagonal(demod.basis(), cfg.arm_length).cwiseInverse();
  loop.demod_matrix =
      (ainv.asDiagonal() * Eigen::MatrixXd(demod.averaging_matrix().inverse())).eval();
  loop.mean = Eigen::Vector2d::Zero();
  if (cfg.demod == DemodChoice::HqCentered) loop.mean = demod.rho_mean();
  loop.cross = cfg.demod == DemodChoice::Hr;
  loop.field = &cfg.field;
  loop.gains = cfg.gains;
  loop.arm_length = cfg.arm_length;
  loop.omega = cfg.omega;
  loop.cost_scale = cfg.cost_scale;
  return loop;
}

}  // namespace

SimResult simulate_scenario(const ScenarioConfig& cfg) {
  const DemodSpec demod = scenario_demod(cfg);
  const Eigen::Vector2d source = cfg.field.source();
  const LoopEvaluator loop = make_loop(cfg, demod);

  auto rhs = [&](double t, const Eigen::Vector3d& s) {
    const auto [v, w] = loop.command(t, s);
    return Eigen::Vector3d(v * std::cos(s[2]), v * std::sin(s[2]), w);
  };

  const long long steps = static_cast<long long>(std::ceil(cfg.horizon / cfg.dt - 1e-12));
  const long long tail_start = steps - steps / 5;  // last 20% of the horizon
  const double arm_period = 2.0 / cfg.omega;       // arm waveform spans 2 in omega*t

  SimResult result;
  result.samples.reserve(static_cast<std::size_t>(steps / cfg.log_stride) + 2);

  Eigen::Vector3d s(cfg.start.x, cfg.start.y, cfg.start.heading);
  double t = 0.0;
  double path = 0.0;
  double tail_sum = 0.0;
  long long tail_count = 0;
  std::optional<double> reach;
  double min_dist = (Eigen::Vector2d(s[0], s[1]) - source).norm();
  long long next_period_mark = 0;

  auto log_sample = [&](long long step) {
    if (step % cfg.log_stride != 0 && step != steps) return;
    const VehicleState st{s[0], s[1], s[2]};
    const Eigen::Vector2d rs = sensor_position(st, t, cfg.arm_length, cfg.omega);
    double beta_deg = 0.0;
    if (cfg.field.orientation_sensitive())
      beta_deg = sensor_orientation_angle(st, t, cfg.omega, cfg.arm_length, source);
    const auto [v, w] = control_law(demod, cfg.field, st, t, cfg.gains, cfg.arm_length,
                                    cfg.omega, cfg.cost_scale);
    TrajectorySample row;
    row.t = t;
    row.x = s[0];
    row.y = s[1];
    row.heading = s[2];
    row.phi = arm_angle(cfg.omega * t);
    row.xs = rs.x();
    row.ys = rs.y();
    row.j = cfg.cost_scale * cfg.field.evaluate(rs, beta_deg);
    row.v = v;
    row.omega_c = w;
    row.dist = (Eigen::Vector2d(s[0], s[1]) - source).norm();
    result.samples.push_back(row);
  };

  log_sample(0);
  result.period_distances.push_back(min_dist);

  for (long long i = 0; i < steps; ++i) {
    const double h = std::min(cfg.dt, cfg.horizon - t);
    const Eigen::Vector3d prev = s;
    const Eigen::Vector3d k1 = rhs(t, s);
    const Eigen::Vector3d k2 = rhs(t + h / 2, s + (h / 2) * k1);
    const Eigen::Vector3d k3 = rhs(t + h / 2, s + (h / 2) * k2);
    const Eigen::Vector3d k4 = rhs(t + h, s + h * k3);
    s += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;

    if (!s.allFinite()) {
      result.metrics.reach_time = reach;
      result.metrics.path_length = path;
      result.metrics.min_distance = min_dist;
      result.metrics.terminal_mean_distance =
          tail_count > 0 ? tail_sum / static_cast<double>(tail_count) : min_dist;
      throw DivergenceError("vehicle trajectory diverged at t = " + std::to_string(t),
                            t - h, Eigen::VectorXd(prev));
    }

    path += (s.head<2>() - prev.head<2>()).norm();
    const double dist = (Eigen::Vector2d(s[0], s[1]) - source).norm();
    min_dist = std::min(min_dist, dist);
    if (!reach && dist < cfg.reach_radius) reach = t;
    if (i + 1 >= tail_start) {
      tail_sum += dist;
      ++tail_count;
    }
    if (t >= arm_period * static_cast<double>(next_period_mark + 1) - 1e-12) {
      result.period_distances.push_back(dist);
      ++next_period_mark;
    }
    log_sample(i + 1);
  }

  result.metrics.reach_time = reach;
  result.metrics.path_length = path;
  result.metrics.min_distance = min_dist;
  result.metrics.terminal_mean_distance =
      tail_count > 0 ? tail_sum / static_cast<double>(tail_count) : min_dist;
  return result;
}

void write_trajectory_csv(const std::filesystem::path& file, const SimResult& result) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write trajectory CSV", file.string());
  out << "t,x_c,y_c,theta,phi,x_s,y_s,J,v_c,omega_c,dist_to_source\n";
  for (const auto& r : result.samples) {
    out << csv_number(r.t) << "," << csv_number(r.x) << "," << csv_number(r.y) << ","
        << csv_number(r.heading) << "," << csv_number(r.phi) << "," << csv_number(r.xs) << ","
        << csv_number(r.ys) << "," << csv_number(r.j) << "," << csv_number(r.v) << ","
        << csv_number(r.omega_c) << "," << csv_number(r.dist) << "\n";
  }
}

}  // namespace eskit::vehicle
