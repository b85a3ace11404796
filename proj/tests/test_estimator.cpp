#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "eskit/errors.hpp"
#include "eskit/estimator.hpp"

using namespace eskit;
namespace {
constexpr double kPi = std::numbers::pi;

// Independent quadrature value of the curvature estimate for the |x|^{5/2}
// map at 0: Hbar(0, a) = c sqrt(a) with
// c = -(32/15) * (1/2pi) * int_0^2pi cos(2 tau) |sin tau|^{5/2} d tau.
constexpr double kHalfpowCurvatureSlopeConstant = 0.5424069429397592;

DemodSpec sin1_demod(double a, int min_order, int max_order) {
  const ExtendedDither ext(DitherSpec::sinusoidal({1.0}, {1.0}),
                           DerivativeBasis(1, min_order, max_order));
  return synthesize_covariance_h(ext, AmplitudeMatrix(ext.basis(), a),
                                 /*centered=*/min_order > 0, 1e-11);
}

DemodSpec triangle_gradient_demod(double a) {
  const ExtendedDither ext(DitherSpec::triangle_arm(), DerivativeBasis(2, 1, 1));
  return synthesize_covariance_h(ext, AmplitudeMatrix(ext.basis(), a), true, 1e-10);
}

// Random full quadratic in 2 vars with exact derivatives:
// c0 + c1 x + c2 y + c3 x^2 + c4 x y + c5 y^2
CostMap make_poly2(const std::array<double, 6>& c) {
  auto j = CostMap::from_function(2, [c](const Eigen::VectorXd& t) {
    return c[0] + c[1] * t[0] + c[2] * t[1] + c[3] * t[0] * t[0] + c[4] * t[0] * t[1] +
           c[5] * t[1] * t[1];
  });
  return j.with_analytic_derivatives([c](const MultiIndex& a, const Eigen::VectorXd& t) {
    if (a[0] == 1 && a[1] == 0) return c[1] + 2 * c[3] * t[0] + c[4] * t[1];
    if (a[0] == 0 && a[1] == 1) return c[2] + c[4] * t[0] + 2 * c[5] * t[1];
    if (a[0] == 2 && a[1] == 0) return 2 * c[3];
    if (a[0] == 1 && a[1] == 1) return c[4];
    if (a[0] == 0 && a[1] == 2) return 2 * c[5];
    return 0.0;
  });
}

}  // namespace

TEST_CASE("pointwise estimates") {
  const DemodSpec demod = triangle_gradient_demod(0.1);
  const CostMap zero = CostMap::from_function(2, [](const Eigen::VectorXd&) { return 0.0; });
  const Eigen::VectorXd theta = Eigen::Vector2d(0.3, -0.2);
  for (double t = 0.0; t < 2.0; t += 0.1)
    CHECK(pointwise_estimate(demod, zero, theta, t, 0.1).norm() == 0.0);

  // constants die under zero-mean demodulation after averaging
  const CostMap one = CostMap::from_function(2, [](const Eigen::VectorXd&) { return 1.0; });
  const Eigen::VectorXd avg = averaged_estimate(demod, one, theta, 0.1, 1e-10);
  CHECK(avg.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("pointwise estimate is linear in the cost map") {
  const DemodSpec demod = triangle_gradient_demod(0.2);
  const CostMap j1 = CostMap::from_function(2, [](const Eigen::VectorXd& t) {
    return std::sin(t[0]) + t[1] * t[1];
  });
  const CostMap j2 = CostMap::from_function(2, [](const Eigen::VectorXd& t) {
    return std::exp(0.5 * t[0] - t[1]);
  });
  const double c1 = 2.25, c2 = -0.75;
  const CostMap mix = CostMap::from_function(2, [&](const Eigen::VectorXd& t) {
    return c1 * j1(t) + c2 * j2(t);
  });
  const Eigen::VectorXd theta = Eigen::Vector2d(0.1, 0.4);
  for (double t = 0.05; t < 2.0; t += 0.21) {
    const Eigen::VectorXd lhs = pointwise_estimate(demod, mix, theta, t, 0.2);
    const Eigen::VectorXd rhs = c1 * pointwise_estimate(demod, j1, theta, t, 0.2) +
                                c2 * pointwise_estimate(demod, j2, theta, t, 0.2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12 * (1 + rhs.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("linear maps are recovered exactly") {
  const CostMap lin = CostMap::from_function(2, [](const Eigen::VectorXd& t) {
    return 3 * t[0] + 5 * t[1];
  });
  const Eigen::VectorXd theta = Eigen::Vector2d(0.0, 0.0);

  const Eigen::VectorXd via_q =
      averaged_estimate(triangle_gradient_demod(0.1), lin, theta, 0.1, 1e-10);
  CHECK(via_q[0] == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(via_q[1] == doctest::Approx(5.0).epsilon(1e-7));

  const ExtendedDither ext(DitherSpec::triangle_arm(), DerivativeBasis(2, 1, 1));
  const DemodSpec hr = synthesize_crossvariance_h(AuxSignals::arm_cosines(), ext,
                                                  AmplitudeMatrix(ext.basis(), 0.1), true, 1e-10);
  const Eigen::VectorXd via_r = averaged_estimate(hr, lin, theta, 0.1, 1e-10);
  CHECK(via_r[0] == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(via_r[1] == doctest::Approx(5.0).epsilon(1e-7));
}

TEST_CASE("quadratic scalar map estimated exactly at any amplitude") {
  const CostMap& j = builtin_cost_map("quadratic1d");
  const DemodSpec demod = sin1_demod(0.3, 0, 2);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 1.0);
  for (double a : {0.3, 0.07}) {
    const Eigen::VectorXd est = averaged_estimate(demod, j, theta, a, 1e-9);
    CHECK(est[0] == doctest::Approx(1.0).epsilon(1e-7));  // J(1)
    CHECK(est[1] == doctest::Approx(2.0).epsilon(1e-6));  // J'(1)
    CHECK(est[2] == doctest::Approx(2.0).epsilon(1e-5));  // J''(1)
  }
}

TEST_CASE("curvature of the |x|^{5/2} map scales as sqrt(a)") {
  const CostMap& j = builtin_cost_map("halfpow52");
  const DemodSpec demod = sin1_demod(0.1, 0, 2);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  for (double a : {0.1, 0.01}) {
    const Eigen::VectorXd est = averaged_estimate(demod, j, zero, a, 1e-9);
    CHECK(est[2] ==
          doctest::Approx(kHalfpowCurvatureSlopeConstant * std::sqrt(a)).epsilon(1e-5));
  }
}

TEST_CASE("taylor polynomials") {
  const CostMap exp1 =
      CostMap::from_function(1, [](const Eigen::VectorXd& t) { return std::exp(t[0]); })
          .with_analytic_derivatives(
              [](const MultiIndex&, const Eigen::VectorXd& t) { return std::exp(t[0]); });
  const TaylorPolynomial p2(exp1, Eigen::VectorXd::Zero(1), 2);
  CHECK(p2(Eigen::VectorXd::Constant(1, 0.1)) == doctest::Approx(1.105).epsilon(1e-12));

  const CostMap sin1 =
      CostMap::from_function(1, [](const Eigen::VectorXd& t) { return std::sin(t[0]); })
          .with_analytic_derivatives([](const MultiIndex& a, const Eigen::VectorXd& t) {
            switch (a.order() % 4) {
              case 0: return std::sin(t[0]);
              case 1: return std::cos(t[0]);
              case 2: return -std::sin(t[0]);
              default: return -std::cos(t[0]);
            }
          });
  const TaylorPolynomial p1(sin1, Eigen::VectorXd::Zero(1), 1);
  for (double d = -0.5; d <= 0.5; d += 0.1)
    CHECK(p1(Eigen::VectorXd::Constant(1, d)) == doctest::Approx(d).epsilon(1e-12));

  // quadratic maps are reproduced exactly by their order-2 expansion
  const CostMap quad = make_poly2({1.0, -2.0, 0.5, 3.0, -1.0, 0.25});
  const TaylorPolynomial pq(quad, Eigen::Vector2d(0.4, -0.6), 2);
  const CostMap pq_map = pq.as_cost_map();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector2d probe(u(rng), u(rng));
    CHECK(pq_map(probe) == doctest::Approx(quad(probe)).epsilon(1e-10));
  }

  const CostMap bare = CostMap::from_function(1, [](const Eigen::VectorXd&) { return 0.0; });
  CHECK_THROWS_AS(TaylorPolynomial(bare, Eigen::VectorXd::Zero(1), 2), CapabilityError);
}

TEST_CASE("averaged estimates of a taylor expansion recover the derivatives") {
  const CostMap& j = builtin_cost_map("expsum2d");
  const Eigen::VectorXd theta = Eigen::Vector2d(0.1, -0.3);
  const ExtendedDither ext(DitherSpec::sinusoidal({1.0, 1.0}, {7.0, 11.0}),
                           DerivativeBasis(2, 0, 2));
  const DemodSpec demod =
      synthesize_covariance_h(ext, AmplitudeMatrix(ext.basis(), 0.1), false, 1e-11);
  const CostMap p2 = TaylorPolynomial(j, theta, 2).as_cost_map();
  const double truth = std::exp(theta.sum());
  for (double a : {0.05, 0.1, 0.5}) {
    const Eigen::VectorXd est = averaged_estimate(demod, p2, theta, a, 1e-9);
    for (int i = 0; i < demod.size(); ++i) {
      INFO("a=", a, " component ", i);
      CHECK(est[i] == doctest::Approx(truth).epsilon(2e-6));
    }
  }
}

TEST_CASE("random quadratics are estimated exactly at every amplitude") {
  const ExtendedDither ext(DitherSpec::sinusoidal({1.0, 1.0}, {7.0, 11.0}),
                           DerivativeBasis(2, 0, 2));
  const DemodSpec demod =
      synthesize_covariance_h(ext, AmplitudeMatrix(ext.basis(), 0.1), false, 1e-11);
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    const std::array<double, 6> c{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    const CostMap poly = make_poly2(c);
    const Eigen::Vector2d theta(u(rng) / 2, u(rng) / 2);
    for (double a : {0.05, 0.5}) {
      const Eigen::VectorXd est = averaged_estimate(demod, poly, theta, a, 1e-9);
      for (int i = 0; i < demod.size(); ++i)
        CHECK(est[i] == doctest::Approx(poly.derivative(demod.basis()[i], theta))
                            .epsilon(1e-6)
                            .scale(1.0));
    }
  }
}

TEST_CASE("convergence sweep slopes") {
  SUBCASE("sqrt rate for the C^2 map") {
    const DemodSpec demod = sin1_demod(0.1, 0, 2);
    std::vector<double> amps;
    for (int i = 0; i < 8; ++i) amps.push_back(std::pow(10.0, -1.0 - 3.0 * i / 7.0));
    const EstimateSweep sweep = convergence_sweep(demod, builtin_cost_map("halfpow52"),
                                                  Eigen::VectorXd::Zero(1), amps, 1e-9);
    const SlopeFit fit = sweep.fit_slope(2, 100 * 1e-9);
    CHECK(fit.points_used == 8);
    CHECK(fit.slope == doctest::Approx(0.5).epsilon(0.04));
  }

  SUBCASE("polynomials flag as exact") {
    const DemodSpec demod = sin1_demod(0.1, 0, 2);
    const EstimateSweep sweep =
        convergence_sweep(demod, builtin_cost_map("quadratic1d"),
                          Eigen::VectorXd::Constant(1, 0.7), {0.4, 0.2, 0.1}, 1e-9);
    const SlopeFit fit = sweep.fit_slope(-1, 100 * 1e-9);
    CHECK(fit.exact);
    for (const auto& row : sweep.rows) CHECK(row.error_norm < 10 * 1e-6);
  }

  SUBCASE("smooth maps improve monotonically under the arm demodulator") {
    const DemodSpec demod = triangle_gradient_demod(0.2);
    const EstimateSweep sweep =
        convergence_sweep(demod, builtin_cost_map("expsum2d"), Eigen::Vector2d(0.2, -0.1),
                          {0.2, 0.1, 0.05, 0.025}, 1e-10);
    for (std::size_t i = 1; i < sweep.rows.size(); ++i)
      CHECK(sweep.rows[i].error_norm < sweep.rows[i - 1].error_norm);
  }

  SUBCASE("input validation") {
    const DemodSpec demod = sin1_demod(0.1, 0, 2);
    CHECK_THROWS_AS(convergence_sweep(demod, builtin_cost_map("quadratic1d"),
                                      Eigen::VectorXd::Zero(1), {0.1, 0.2}, 1e-9),
                    std::invalid_argument);
    CHECK_THROWS_AS(convergence_sweep(demod, builtin_cost_map("quadratic1d"),
                                      Eigen::VectorXd::Zero(1), {}, 1e-9),
                    std::invalid_argument);
  }
}

TEST_CASE("finite-difference truth matches analytic derivatives at probes") {
  const CostMap& with = builtin_cost_map("expsum2d");
  const CostMap bare = CostMap::from_function(2, [](const Eigen::VectorXd& t) {
    return std::exp(t.sum());
  });
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const DerivativeBasis basis(2, 1, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Vector2d theta(u(rng), u(rng));
    for (int i = 0; i < basis.size(); ++i) {
      const double exact = with.derivative(basis[i], theta);
      const double fd = bare.derivative(basis[i], theta);
      CHECK(fd == doctest::Approx(exact).epsilon(1e-4));
    }
  }
}

TEST_CASE("sweep csv layout") {
  const DemodSpec demod = sin1_demod(0.1, 0, 2);
  const EstimateSweep sweep =
      convergence_sweep(demod, builtin_cost_map("quadratic1d"),
                        Eigen::VectorXd::Constant(1, 0.5), {0.2, 0.1}, 1e-9);
  const auto path = std::filesystem::temp_directory_path() / "eskit_sweep_test.csv";
  sweep.write_csv(path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "a,component,estimate,truth,abs_error");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2 * 3);
  std::filesystem::remove(path);
}

TEST_CASE("unknown builtin maps list the alternatives") {
  CHECK_THROWS_WITH_AS(builtin_cost_map("nope"),
                       doctest::Contains("available:"), ConfigError);
  CHECK(!builtin_cost_map_names().empty());
}
