#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "eskit/multiindex.hpp"

using namespace eskit;

namespace {

// Brute-force oracle: every n-tuple with entries <= order summing to k.
std::set<std::vector<int>> all_tuples_of_order(int n, int k) {
  std::set<std::vector<int>> out;
  std::vector<int> t(static_cast<std::size_t>(n), 0);
  while (true) {
    int sum = 0;
    for (int e : t) sum += e;
    if (sum == k) out.insert(t);
    int i = 0;
    while (i < n && t[static_cast<std::size_t>(i)] == k) t[static_cast<std::size_t>(i++)] = 0;
    if (i == n) break;
    ++t[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace

TEST_CASE("basis enumeration matches the worked layouts") {
  const DerivativeBasis b = enumerate_basis(2, 1, 2);
  REQUIRE(b.size() == 5);
  const std::vector<std::vector<int>> expected{{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  for (int i = 0; i < 5; ++i) CHECK(b[i].entries() == expected[static_cast<std::size_t>(i)]);

  const DerivativeBasis zero = enumerate_basis(1, 0, 0);
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].entries() == std::vector<int>{0});

  CHECK(enumerate_basis(3, 1, 2).size() == 9);  // 3 + 6, brute-checked below
}

TEST_CASE("basis equals the brute-force tuple enumeration") {
  for (int n = 1; n <= 5; ++n)
    for (int m = 0; m <= 4; ++m) {
      const DerivativeBasis b = enumerate_basis(n, 0, m);
      std::set<std::vector<int>> seen;
      for (int i = 0; i < b.size(); ++i) seen.insert(b[i].entries());
      std::size_t expected = 0;
      for (int k = 0; k <= m; ++k) expected += all_tuples_of_order(n, k).size();
      CHECK(seen.size() == static_cast<std::size_t>(b.size()));  // no duplicates
      CHECK(static_cast<std::size_t>(b.size()) == expected);
      for (int k = 0; k <= m; ++k)
        for (const auto& t : all_tuples_of_order(n, k)) CHECK(seen.count(t) == 1);
    }
}

TEST_CASE("basis size equals the sum of count_derivatives") {
  for (int n = 1; n <= 5; ++n)
    for (int m0 = 0; m0 <= 2; ++m0)
      for (int m = m0; m <= 4; ++m) {
        std::int64_t total = 0;
        for (int k = m0; k <= m; ++k) total += count_derivatives(n, k);
        CHECK(enumerate_basis(n, m0, m).size() == total);
      }
}

TEST_CASE("count_derivatives values") {
  CHECK(count_derivatives(2, 2) == 3);
  CHECK(count_derivatives(7, 0) == 1);
  CHECK(count_derivatives(4, 3) == 20);  // brute force
  CHECK(count_derivatives(4, 3) ==
        static_cast<std::int64_t>(all_tuples_of_order(4, 3).size()));
  // Newton case o = n + n(n+1)/2
  CHECK(count_derivatives(2, 1) + count_derivatives(2, 2) == 5);
}

TEST_CASE("ordering is graded and stable across enumerations") {
  const DerivativeBasis a = enumerate_basis(4, 0, 3);
  const DerivativeBasis b = enumerate_basis(4, 0, 3);
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  for (int i = 1; i < a.size(); ++i) CHECK(a[i - 1].order() <= a[i].order());
}

TEST_CASE("monomial_power") {
  const std::vector<double> x1{2.0, 3.0};
  CHECK(monomial_power(x1, MultiIndex({1, 2})) == doctest::Approx(18.0));
  CHECK(monomial_power(x1, MultiIndex({0, 0})) == 1.0);
  const std::vector<double> x2{0.5, -1.0};
  CHECK(monomial_power(x2, MultiIndex({2, 3})) == doctest::Approx(-0.25));
  const std::vector<double> zero{0.0, 7.0};
  CHECK(monomial_power(zero, MultiIndex({0, 1})) == doctest::Approx(7.0));  // 0^0 = 1

  CHECK_THROWS_AS(monomial_power(std::vector<double>{1.0}, MultiIndex({1, 1})),
                  std::invalid_argument);
}

TEST_CASE("monomial product property") {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  std::uniform_int_distribution<int> pow(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 4;
    std::vector<double> x(static_cast<std::size_t>(n));
    std::vector<int> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      x[static_cast<std::size_t>(i)] = val(rng);
      a[static_cast<std::size_t>(i)] = pow(rng);
      b[static_cast<std::size_t>(i)] = pow(rng);
    }
    const MultiIndex ma(a), mb(b);
    const double lhs = monomial_power(x, ma) * monomial_power(x, mb);
    const double rhs = monomial_power(x, ma + mb);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("factorial and order") {
  const MultiIndex a({3, 0, 2});
  CHECK(a.order() == 5);
  CHECK(a.factorial() == doctest::Approx(12.0));  // 3! * 0! * 2!
  CHECK_THROWS_AS(MultiIndex({1, -1}), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_basis(2, 3, 2), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_basis(0, 0, 1), std::invalid_argument);
}

TEST_CASE("find locates components") {
  const DerivativeBasis b = enumerate_basis(3, 1, 2);
  CHECK(b.find(MultiIndex({1, 0, 0})) == 0);
  CHECK(b.find(MultiIndex({0, 1, 1})).has_value());
  CHECK_FALSE(b.find(MultiIndex({0, 0, 0})).has_value());
  CHECK_FALSE(b.find(MultiIndex({3, 0, 0})).has_value());
}
