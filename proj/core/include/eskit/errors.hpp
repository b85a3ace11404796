#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace eskit {

/// Malformed or inconsistent configuration / input file. Carries a
/// human-readable location ("file:line") when one is known.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::string message, std::string location = {})
      : std::runtime_error(location.empty() ? message : location + ": " + message),
        location_(std::move(location)) {}
  const std::string& location() const { return location_; }

private:
  std::string location_;
};

/// A time average did not converge; the best value obtained so far is kept.
class AveragingError : public std::runtime_error {
public:
  AveragingError(std::string message, Eigen::MatrixXd best, double horizon, double residual)
      : std::runtime_error(std::move(message)),
        best_(std::move(best)), horizon_(horizon), residual_(residual) {}
  const Eigen::MatrixXd& best() const { return best_; }
  double horizon() const { return horizon_; }
  double residual() const { return residual_; }

private:
  Eigen::MatrixXd best_;
  double horizon_;
  double residual_;
};

/// The averaging matrix (Q or R) is numerically singular, so no demodulation
/// signal exists for the requested basis. Carries the numerical rank and up
/// to three unit null directions for diagnosis.
class ExistenceError : public std::runtime_error {
public:
  ExistenceError(std::string message, int rank, int size,
                 std::vector<Eigen::VectorXd> null_basis)
      : std::runtime_error(std::move(message)),
        rank_(rank), size_(size), null_basis_(std::move(null_basis)) {}
  int rank() const { return rank_; }
  int size() const { return size_; }
  const std::vector<Eigen::VectorXd>& null_basis() const { return null_basis_; }

private:
  int rank_;
  int size_;
  std::vector<Eigen::VectorXd> null_basis_;
};

/// Requested feature needs capabilities the object does not have
/// (e.g. analytic derivatives of a cost map).
class CapabilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Trajectory integration produced a non-finite state. The last finite
/// state/time and the partial trajectory are preserved by the thrower.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(std::string message, double last_time, Eigen::VectorXd last_state)
      : std::runtime_error(std::move(message)),
        last_time_(last_time), last_state_(std::move(last_state)) {}
  double last_time() const { return last_time_; }
  const Eigen::VectorXd& last_state() const { return last_state_; }

private:
  double last_time_;
  Eigen::VectorXd last_state_;
};

}  // namespace eskit
