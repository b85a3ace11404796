#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace eskit {

/// Breakpointed piecewise-cubic (Hermite) waveform table with one value and
/// one derivative per channel at each breakpoint. Periodic over [0, period].
///
/// Text schema (whitespace separated, '#' comments):
///   waveform 1
///   channels <c>
///   period <T>
///   samples <k>
///   <t> <v_1> <d_1> ... <v_c> <d_c>     (k rows, ascending t, t0 = 0, t_{k-1} = T)
class WaveformTable {
public:
  WaveformTable(std::vector<double> times, std::vector<Eigen::VectorXd> values,
                std::vector<Eigen::VectorXd> derivatives);

  static WaveformTable load(const std::filesystem::path& file);
  static WaveformTable parse(std::istream& in, const std::string& name);
  void save(const std::filesystem::path& file) const;
  void write(std::ostream& out) const;

  int channels() const { return static_cast<int>(values_.front().size()); }
  double period() const { return times_.back(); }
  const std::vector<double>& breakpoints() const { return times_; }

  Eigen::VectorXd value(double t) const;
  Eigen::VectorXd derivative(double t) const;

  /// In-place uniform scaling of values and derivatives.
  void scale(double factor);

private:
  std::size_t interval(double u) const;

  std::vector<double> times_;
  std::vector<Eigen::VectorXd> values_;
  std::vector<Eigen::VectorXd> derivatives_;
};

}  // namespace eskit
