#include <doctest.h>

#include <cmath>

#include "capfield/errors.hpp"
#include "capfield/quadrature.hpp"
#include "capfield/support.hpp"

using namespace capfield;

namespace {

// F of Q = 1 on a south cap: minus the bracket of the no-field density.
double unit_field_F(double alpha, double phi) {
  const double r = std::sqrt((1.0 - std::cos(alpha)) /
                             (std::cos(alpha) - std::cos(phi)));
  return -(1.0 + 2.0 / kPi * (r - std::atan(r))) / (4.0 * kPi);
}

// F for the point charge (q, h) on C_{S,alpha}.
double pointcharge_F(double q, double h, double alpha, double phi) {
  const double r2 = 1.0 + h * h - 2.0 * h * std::cos(phi);
  const double r = std::sqrt(r2);
  const double d = std::cos(alpha) - std::cos(phi);
  const double w = 1.0 - std::cos(alpha);
  return -q * (h + 1.0) / (2.0 * kPi * kPi) *
         (std::sqrt(w / d) / r2 +
          (h - 1.0) / (r2 * r) * std::atan((h - 1.0) / r * std::sqrt(d / w)));
}

}  // namespace

TEST_SUITE("singular_quadrature") {
  TEST_CASE("Gauss-Legendre rules are exact on polynomials") {
    const GaussLegendre& rule = gauss_legendre(8);
    CHECK(rule.integrate([](double x) { return std::pow(x, 15); }, 0.0, 1.0) ==
          doctest::Approx(1.0 / 16.0).epsilon(1e-14));
  }

  TEST_CASE("graded rule resolves a log singularity") {
    const double v = integrate_graded(
        [](double x) { return std::log(std::abs(x - 0.3)); }, 0.0, 1.0, 0.3);
    const double exact = 0.3 * std::log(0.3) + 0.7 * std::log(0.7) - 1.0;
    CHECK(v == doctest::Approx(exact).epsilon(1e-12));
    const QuadratureRule rule = graded_rule(0.0, 1.0, 0.3);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      sum += rule.weights[i] * std::log(std::abs(rule.nodes[i] - 0.3));
    }
    CHECK(sum == doctest::Approx(exact).epsilon(1e-12));
  }

  TEST_CASE("square-root singular integrals") {
    const double t = kPi / 2;
    SingularIntegrand a{[](double x) { return std::sin(x); }, SingularEnd::Lower, t,
                        kPi};
    CHECK(integrate_sqrt_singular(a) ==
          doctest::Approx(2.0 * std::sqrt(1.0 + std::cos(t))).epsilon(1e-10));

    const double alpha = kPi / 3;
    SingularIntegrand b{[&](double x) {
                          return std::sqrt(1.0 - std::cos(alpha)) * std::sin(x);
                        },
                        SingularEnd::Lower, alpha, kPi};
    CHECK(integrate_sqrt_singular(b) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));

    SingularIntegrand c{[](double x) { return std::sin(x); }, SingularEnd::Upper, 0.0,
                        kPi / 2};
    CHECK(integrate_sqrt_singular(c) == doctest::Approx(2.0).epsilon(1e-10));
  }

  TEST_CASE("Richardson derivative") {
    const auto f = [](double x) { return std::sin(3.0 * x); };
    CHECK(richardson_derivative(f, 0.4, 0.0, 1.0) ==
          doctest::Approx(3.0 * std::cos(1.2)).epsilon(1e-10));
    // One-sided near the end of the interval.
    CHECK(richardson_derivative(f, 0.99, 0.0, 1.0) ==
          doctest::Approx(3.0 * std::cos(2.97)).epsilon(1e-8));
  }

  TEST_CASE("stage g for constant and zero fields") {
    const SphericalCap cap = SphericalCap::south(1.0);
    const ExternalField one = ExternalField::zero().shifted(1.0);
    CHECK(abel_stage_g(one, PolarAngle(kPi / 2), cap) ==
          doctest::Approx(-1.0 / (4.0 * kPi)).epsilon(1e-10));
    for (double t : {1.2, 2.0, 3.0}) {
      CHECK(abel_stage_g(one, PolarAngle(t), cap) ==
            doctest::Approx(-std::sqrt(2.0) * std::sin(t / 2) / (4.0 * kPi))
                .epsilon(1e-10));
      CHECK(abel_stage_g(ExternalField::zero(), PolarAngle(t), cap) == 0.0);
    }
  }

  TEST_CASE("stage g for the point charge (1, 2) at t = 2") {
    // Reference: derivative of the inner integral in 30-digit arithmetic.
    const double g = abel_stage_g(ExternalField::point_charge(1, 2),
                                  PolarAngle(2.0), SphericalCap::south(0.7));
    CHECK(g == doctest::Approx(-0.042627736225968174).epsilon(1e-10));
  }

  TEST_CASE("stage g is linear in a constant shift") {
    const SphericalCap cap = SphericalCap::south(0.5);
    const ExternalField q = ExternalField::point_charge(1, 2);
    const ExternalField one = ExternalField::zero().shifted(1.0);
    for (double t : {0.9, 1.7, 2.6}) {
      const double lhs = abel_stage_g(q.shifted(0.8), PolarAngle(t), cap) -
                         abel_stage_g(q, PolarAngle(t), cap);
      CHECK(std::abs(lhs - 0.8 * abel_stage_g(one, PolarAngle(t), cap)) < 1e-10);
    }
  }

  TEST_CASE("stage F") {
    const double alpha = 1.0;
    const SphericalCap cap = SphericalCap::south(alpha);
    CHECK(abel_stage_F([](double) { return 0.0; }, PolarAngle(2.0), cap) == 0.0);

    const ExternalField one = ExternalField::zero().shifted(1.0);
    const RealFunction g1 = [&](double t) {
      return abel_stage_g(one, PolarAngle(t), cap);
    };
    for (double phi : {1.3, 2.0, 2.9}) {
      CHECK(abel_stage_F(g1, PolarAngle(phi), cap) ==
            doctest::Approx(unit_field_F(alpha, phi)).epsilon(1e-6));
    }
    CHECK_THROWS_AS(abel_stage_F(g1, PolarAngle(alpha + 1e-10), cap), DomainError);
  }

  TEST_CASE("stage F for the point charge matches its closed form") {
    const SupportSolution s = solve_support_pointcharge(1, 2);
    const SphericalCap cap = SphericalCap::south(s.alpha0);
    const ExternalField q = ExternalField::point_charge(1, 2);
    const RealFunction g = [&](double t) {
      return abel_stage_g(q, PolarAngle(t), cap);
    };
    CHECK(std::abs(abel_stage_F(g, PolarAngle(2.5), cap) -
                   pointcharge_F(1, 2, s.alpha0, 2.5)) < 1e-6);
  }

  TEST_CASE("Abel round trip on a north cap") {
    const double alpha = 2.0;
    const double ca = std::cos(alpha);
    const auto psi = [](double x) { return 1.0 + 0.5 * std::cos(x); };
    // S(z) = int_z^alpha psi sin / (2 sqrt(cos z - cos x)).
    const auto forward = [&](double z) {
      return integrate_sqrt_singular(
          {[&](double x) { return 0.5 * psi(x) * std::sin(x); }, SingularEnd::Lower,
           z, alpha},
          1e-12);
    };
    for (double z : {0.3, 1.1, 1.9}) {
      const double d = std::cos(z) - ca;
      CHECK(forward(z) == doctest::Approx(std::sqrt(d) * (1.0 + 0.5 * std::cos(z)) -
                                          d * std::sqrt(d) / 6.0)
                              .epsilon(1e-10));
    }
    // G(u) = int_{cos alpha}^u S(acos x) / sqrt(u - x) dx with
    // x = cos alpha + (u - cos alpha) sin^2(theta).
    const GaussLegendre& rule = gauss_legendre(24);
    const auto inverse_inner = [&](double u) {
      const double w = u - ca;
      return rule.integrate(
          [&](double th) {
            const double x = ca + w * std::sin(th) * std::sin(th);
            return 2.0 * std::sqrt(w) * std::sin(th) * forward(std::acos(x));
          },
          0.0, kPi / 2);
    };
    for (double xi : {0.5, 1.0, 1.5}) {
      const double dG =
          richardson_derivative(inverse_inner, std::cos(xi), ca, 1.0, 1.0 / 64.0);
      CHECK(std::abs(2.0 / kPi * dG - psi(xi)) < 1e-6);
    }
  }
}
