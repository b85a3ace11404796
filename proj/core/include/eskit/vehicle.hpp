#pragma once

#include <Eigen/Core>
#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eskit/config.hpp"
#include "eskit/demod.hpp"

namespace eskit::vehicle {

/// Planar unicycle pose. Kinematics: x' = v cos(heading), y' = v sin(heading),
/// heading' = omega_c.
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // rad
};

/// Sensor position r_s = r_c + a * Rot(heading) * p(omega t), where p is the
/// rotating-arm dither (cos phi, sin phi). ||r_s - r_c|| == a exactly.
Eigen::Vector2d sensor_position(const VehicleState& state, double t, double arm_length,
                                double omega);

/// Default clamp radius guarding the log singularity of the acoustic field.
inline constexpr double kDefaultClampRadius = 1e-3;

/// Table-fit weights of the photoresistor resistance surface.
using PhotoWeights = std::array<double, 6>;
inline constexpr PhotoWeights kPhotoresistorWeights{8.28082113e3, 7.90425287, 4.42130406e2,
                                                    5.36416164e-13, 1.68542637e-16,
                                                    2.18515692e-18};

/// Scalar field measured by the sensor. Acoustic sound-pressure-level fields
/// are maximized; photoresistor resistance fields are minimized (handled by
/// gain signs, not a mode flag).
class CostField {
public:
  /// J = -20 log10(max(||r - source||, clamp)) + 20 log10(S / p_ref), pinned
  /// to `pin_level_db` at `pin_distance` meters (p_ref = 20 uPa).
  static CostField acoustic(const Eigen::Vector2d& source,
                            double clamp_radius = kDefaultClampRadius,
                            double pin_distance = 1.0, double pin_level_db = 80.0);

  /// J = w1 d^2 + w2 b^2 + w3 d b + w4 d + w5 b + w6 with d = ||r - source||
  /// and b the sensor orientation angle in degrees. With
  /// orientation_sensitive == false the angle terms are dropped (ideal
  /// photoresistor).
  static CostField photoresistor(const Eigen::Vector2d& source,
                                 const PhotoWeights& weights = kPhotoresistorWeights,
                                 bool orientation_sensitive = true);

  /// Radial polynomial c2 d^2 + c1 d + c0 for user-configured runs.
  static CostField quadratic(const Eigen::Vector2d& source, double c2, double c1, double c0);

  double evaluate(const Eigen::Vector2d& sensor, double orientation_deg) const;
  bool orientation_sensitive() const { return orientation_sensitive_; }
  const Eigen::Vector2d& source() const { return source_; }

private:
  enum class Kind { Acoustic, Photoresistor, Quadratic };
  Kind kind_ = Kind::Acoustic;
  Eigen::Vector2d source_ = Eigen::Vector2d::Zero();
  bool orientation_sensitive_ = false;
  double clamp_radius_ = kDefaultClampRadius;
  double offset_db_ = 0.0;  // 20 log10(S / p_ref)
  PhotoWeights weights_{};
  double c2_ = 0.0, c1_ = 0.0, c0_ = 0.0;
};

/// Signed angle (degrees, in (-180, 180]) between the sensor arm direction
/// (heading + phi) and the bearing from the sensor to the source. Negative
/// when the source lies clockwise of the arm axis. Throws when the sensor
/// sits on the source (undefined bearing).
double sensor_orientation_angle(const VehicleState& state, double t, double omega,
                                double arm_length, const Eigen::Vector2d& source);

enum class DemodChoice {
  HqVerbatim,  // covariance route, published uncentered forward channel
  HqCentered,  // covariance route, zero-mean channels
  Hr,          // cross-variance route with the (-cos 2 pi t, -cos pi t) pair
};

struct Gains {
  double kv = 0.0;      // forward gain
  double komega = 0.0;  // turn gain
};

/// (v_c, omega_c) = diag(kv, komega) * h(omega t, a) * J(r_s): forward speed
/// from the x_r channel, turn rate from the y_r channel.
std::pair<double, double> control_law(const DemodSpec& demod, const CostField& field,
                                      const VehicleState& state, double t, const Gains& gains,
                                      double arm_length, double omega, double cost_scale = 1.0);

struct ScenarioConfig {
  VehicleState start;
  Gains gains;
  double omega = 0.0;       // dither rate, rad/s
  double arm_length = 0.0;  // a, meters
  DemodChoice demod = DemodChoice::HqCentered;
  CostField field = CostField::acoustic(Eigen::Vector2d(0, 0));
  double horizon = 0.0;     // seconds
  double dt = 0.0;
  double reach_radius = 0.5;
  /// Measurement scale applied to J inside the control loop (field units are
  /// preserved; this sets the units the loop sees).
  double cost_scale = 1.0;
  /// Keep every k-th integration step in the logged series.
  int log_stride = 1;
};

/// Reads the scenario schema ([scenario] pose/gains/rates, [field] kind and
/// parameters); angles in degrees, rates rad/s unless suffixed "rpm".
ScenarioConfig load_scenario(const std::filesystem::path& file);
ScenarioConfig scenario_from_config(const ConfigFile& cfg);

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0, y = 0.0, heading = 0.0;
  double phi = 0.0;          // arm angle at omega t
  double xs = 0.0, ys = 0.0; // sensor position
  double j = 0.0;            // measured cost seen by the loop
  double v = 0.0, omega_c = 0.0;
  double dist = 0.0;         // ||r_c - source||
};

struct Metrics {
  std::optional<double> reach_time;     // first ||r_c - source|| < reach_radius
  double terminal_mean_distance = 0.0;  // mean over the last 20% of the horizon
  double path_length = 0.0;
  double min_distance = 0.0;
};

struct SimResult {
  std::vector<TrajectorySample> samples;
  Metrics metrics;
  /// Distance to source at every dither-period boundary (transit diagnostics).
  std::vector<double> period_distances;
};

/// Deterministic fixed-step (RK4) closed-loop run. Integrator divergence is
/// reported via DivergenceError after preserving the partial series in the
/// exception message; callers keep previously written outputs.
SimResult simulate_scenario(const ScenarioConfig& cfg);

/// CSV columns: t,x_c,y_c,theta,phi,x_s,y_s,J,v_c,omega_c,dist_to_source.
void write_trajectory_csv(const std::filesystem::path& file, const SimResult& result);

/// The demodulation spec a scenario runs with (exposed for inspection/tests).
DemodSpec scenario_demod(const ScenarioConfig& cfg);

}  // namespace eskit::vehicle
