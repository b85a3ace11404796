#include "eskit/periodicity.hpp"

#include <algorithm>
#include <cmath>

namespace eskit {

std::optional<std::pair<long long, long long>> rational_approx(double x, double tol,
                                                               long long max_den) {
  if (!std::isfinite(x)) return std::nullopt;
  long long p0 = 1, q0 = 0;  // convergents p/q
  long long p1 = static_cast<long long>(std::floor(x)), q1 = 1;
  double frac = x - std::floor(x);
  for (int iter = 0; iter < 64; ++iter) {
    if (std::abs(x - static_cast<double>(p1) / static_cast<double>(q1)) <= tol)
      return std::make_pair(p1, q1);
    if (frac == 0.0) break;
    const double inv = 1.0 / frac;
    const long long a = static_cast<long long>(std::floor(inv));
    frac = inv - std::floor(inv);
    const long long p2 = a * p1 + p0;
    const long long q2 = a * q1 + q0;
    if (q2 > max_den || q2 <= 0) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
  }
  if (std::abs(x - static_cast<double>(p1) / static_cast<double>(q1)) <= tol)
    return std::make_pair(p1, q1);
  return std::nullopt;
}

Periodicity combine(const Periodicity& a, const Periodicity& b) {
  const double longest = std::max(a.span, b.span);
  if (!a.periodic || !b.periodic) return Periodicity::almost_periodic(longest);
  // common period T with T = k*Ta = l*Tb  <=>  Ta/Tb rational
  const auto pq = rational_approx(a.span / b.span, 1e-9, 1'000'000);
  if (!pq) return Periodicity::almost_periodic(longest);
  const auto [p, q] = *pq;
  if (p <= 0) return Periodicity::almost_periodic(longest);
  return Periodicity::make_periodic(static_cast<double>(q) * a.span);
}

}  // namespace eskit
