#include "eskit/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "eskit/errors.hpp"

namespace eskit {

WaveformTable::WaveformTable(std::vector<double> times, std::vector<Eigen::VectorXd> values,
                             std::vector<Eigen::VectorXd> derivatives)
    : times_(std::move(times)), values_(std::move(values)), derivatives_(std::move(derivatives)) {
  if (times_.size() < 2) throw ConfigError("waveform table needs at least two breakpoints");
  if (values_.size() != times_.size() || derivatives_.size() != times_.size())
    throw ConfigError("waveform table: row count mismatch");
  if (times_.front() != 0.0) throw ConfigError("waveform table must start at t = 0");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (times_[i] <= times_[i - 1]) throw ConfigError("waveform table: breakpoints not ascending");
  const auto c = values_.front().size();
  for (std::size_t i = 0; i < times_.size(); ++i)
    if (values_[i].size() != c || derivatives_[i].size() != c)
      throw ConfigError("waveform table: inconsistent channel count");
  // periodic closure: endpoint values must match
  if ((values_.front() - values_.back()).cwiseAbs().maxCoeff() > 1e-9)
    throw ConfigError("waveform table: values at t = 0 and t = period differ (not periodic)");
}

std::size_t WaveformTable::interval(double u) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), u);
  std::size_t idx = static_cast<std::size_t>(it - times_.begin());
  if (idx == 0) return 0;
  if (idx >= times_.size()) return times_.size() - 2;
  return idx - 1;
}

Eigen::VectorXd WaveformTable::value(double t) const {
  const double T = period();
  double u = std::fmod(t, T);
  if (u < 0) u += T;
  const std::size_t k = interval(u);
  const double h = times_[k + 1] - times_[k];
  const double s = (u - times_[k]) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * values_[k] + h * h10 * derivatives_[k] + h01 * values_[k + 1] +
         h * h11 * derivatives_[k + 1];
}

Eigen::VectorXd WaveformTable::derivative(double t) const {
  const double T = period();
  double u = std::fmod(t, T);
  if (u < 0) u += T;
  const std::size_t k = interval(u);
  const double h = times_[k + 1] - times_[k];
  const double s = (u - times_[k]) / h;
  const double s2 = s * s;
  const double d00 = (6 * s2 - 6 * s) / h, d10 = 3 * s2 - 4 * s + 1;
  const double d01 = (-6 * s2 + 6 * s) / h, d11 = 3 * s2 - 2 * s;
  return d00 * values_[k] + d10 * derivatives_[k] + d01 * values_[k + 1] +
         d11 * derivatives_[k + 1];
}

void WaveformTable::scale(double factor) {
  for (auto& v : values_) v *= factor;
  for (auto& d : derivatives_) d *= factor;
}

namespace {

std::string loc(const std::string& name, int line) {
  return name + ":" + std::to_string(line);
}

}  // namespace

WaveformTable WaveformTable::parse(std::istream& in, const std::string& name) {
  int line_no = 0;
  int channels = -1, samples = -1;
  double period = 0.0;
  bool header_seen = false;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> values, derivs;

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string first;
    if (!(ss >> first)) continue;

    if (!header_seen) {
      int version = 0;
      if (first != "waveform" || !(ss >> version) || version != 1)
        throw ConfigError("expected header 'waveform 1'", loc(name, line_no));
      header_seen = true;
    } else if (first == "channels") {
      if (!(ss >> channels) || channels < 1)
        throw ConfigError("bad channel count", loc(name, line_no));
    } else if (first == "period") {
      if (!(ss >> period) || period <= 0.0)
        throw ConfigError("bad period", loc(name, line_no));
    } else if (first == "samples") {
      if (!(ss >> samples) || samples < 2)
        throw ConfigError("bad sample count", loc(name, line_no));
    } else {
      if (channels < 1 || samples < 2 || period <= 0.0)
        throw ConfigError("data row before channels/period/samples", loc(name, line_no));
      double t = 0.0;
      {
        std::istringstream row(first);
        if (!(row >> t)) throw ConfigError("bad time value", loc(name, line_no));
      }
      Eigen::VectorXd v(channels), d(channels);
      for (int cidx = 0; cidx < channels; ++cidx)
        if (!(ss >> v[cidx] >> d[cidx]))
          throw ConfigError("expected value/derivative pair for every channel",
                            loc(name, line_no));
      times.push_back(t);
      values.push_back(std::move(v));
      derivs.push_back(std::move(d));
    }
  }
  if (!header_seen) throw ConfigError("missing 'waveform 1' header", name);
  if (static_cast<int>(times.size()) != samples)
    throw ConfigError("row count does not match 'samples'", name);
  if (std::abs(times.back() - period) > 1e-12 * std::max(1.0, period))
    throw ConfigError("last breakpoint must equal the period", name);
  times.back() = period;
  try {
    return WaveformTable(std::move(times), std::move(values), std::move(derivs));
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), name);
  }
}

WaveformTable WaveformTable::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open waveform table", file.string());
  return parse(in, file.string());
}

void WaveformTable::write(std::ostream& out) const {
  out << "waveform 1\n";
  out << "channels " << channels() << "\n";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", period());
  out << "period " << buf << "\n";
  out << "samples " << times_.size() << "\n";
  for (std::size_t i = 0; i < times_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", times_[i]);
    out << buf;
    for (int c = 0; c < channels(); ++c) {
      std::snprintf(buf, sizeof buf, " %.17g", values_[i][c]);
      out << buf;
      std::snprintf(buf, sizeof buf, " %.17g", derivatives_[i][c]);
      out << buf;
    }
    out << "\n";
  }
}

void WaveformTable::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write waveform table", file.string());
  write(out);
}

}  // namespace eskit
