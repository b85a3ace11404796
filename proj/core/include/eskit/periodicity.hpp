#pragma once

#include <optional>
#include <utility>

namespace eskit {

/// Time structure of a signal: either exactly periodic with a known period,
/// or almost-periodic with a base averaging horizon that the averaging engine
/// doubles until the mean settles.
struct Periodicity {
  bool periodic = true;
  double span = 0.0;  // period when periodic, base horizon otherwise

  static Periodicity make_periodic(double period) { return {true, period}; }
  static Periodicity almost_periodic(double base_horizon) { return {false, base_horizon}; }
};

/// Best rational approximation p/q of x with q <= max_den and
/// |x - p/q| <= tol, via continued fractions.
std::optional<std::pair<long long, long long>> rational_approx(double x, double tol,
                                                               long long max_den);

/// Common time structure of two signals: the least common period when both
/// are periodic with commensurate periods, otherwise almost-periodic.
Periodicity combine(const Periodicity& a, const Periodicity& b);

}  // namespace eskit
