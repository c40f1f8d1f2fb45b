#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "capfield/errors.hpp"
#include "capfield/geometry.hpp"

using namespace capfield;

namespace {

std::array<double, 3> cartesian(double phi, double theta) {
  return {std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta),
          std::cos(phi)};
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("chordal gamma on special point pairs") {
    CHECK(chordal_gamma(PolarAngle(0.0), 0.0, PolarAngle(0.0), 1.3) ==
          doctest::Approx(1.0).epsilon(1e-15));
    const double g = chordal_gamma(PolarAngle(0.0), 0.0, PolarAngle(kPi), 0.0);
    CHECK(g == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(2.0 - 2.0 * g == doctest::Approx(4.0));
    const double e = chordal_gamma(PolarAngle(kPi / 2), 0.0,
                                   PolarAngle(kPi / 2), kPi / 2);
    CHECK(std::abs(e) < 1e-15);
    CHECK(std::sqrt(2.0 - 2.0 * e) == doctest::Approx(std::sqrt(2.0)));
  }

  TEST_CASE("2 - 2 gamma is the squared Cartesian distance") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> polar(0.0, kPi);
    std::uniform_real_distribution<double> azimuth(0.0, 2.0 * kPi);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double p1 = polar(rng), t1 = azimuth(rng);
      const double p2 = polar(rng), t2 = azimuth(rng);
      const auto x = cartesian(p1, t1);
      const auto y = cartesian(p2, t2);
      const double d2 = (x[0] - y[0]) * (x[0] - y[0]) +
                        (x[1] - y[1]) * (x[1] - y[1]) +
                        (x[2] - y[2]) * (x[2] - y[2]);
      const double g = chordal_gamma(PolarAngle(p1), t1, PolarAngle(p2), t2);
      worst = std::max(worst, std::abs(2.0 - 2.0 * g - d2));
      CHECK(g == doctest::Approx(chordal_gamma(PolarAngle(p2), t2,
                                               PolarAngle(p1), t1))
                     .epsilon(1e-15));
      CHECK(g == doctest::Approx(chordal_gamma(PolarAngle(p1), t1 + 0.7,
                                               PolarAngle(p2), t2 + 0.7))
                     .epsilon(1e-12));
    }
    CHECK(worst < 1e-14);
  }

  TEST_CASE("cap areas") {
    CHECK(cap_area(SphericalCap::south(0.0)) == doctest::Approx(4.0 * kPi));
    CHECK(cap_area(SphericalCap::south(kPi / 2)) == doctest::Approx(2.0 * kPi));
    CHECK(cap_area(SphericalCap::north(kPi / 2)) == doctest::Approx(2.0 * kPi));
    CHECK(cap_area(SphericalCap::south(1.0)) ==
          doctest::Approx(2.0 * kPi * (1.0 + std::cos(1.0))));
  }

  TEST_CASE("angles and caps reject invalid values") {
    CHECK_THROWS_AS(PolarAngle(-0.1), DomainError);
    CHECK_THROWS_AS(PolarAngle(3.2), DomainError);
    CHECK_THROWS_AS(PolarAngle(std::nan("")), DomainError);
    CHECK_THROWS_AS(SphericalCap::north(0.0), DomainError);
    CHECK_THROWS_AS(SphericalCap::south(kPi), DomainError);
    CHECK(SphericalCap::south(0.0).is_full_sphere());
    CHECK(PolarAngle(1.0).reflected().value() == doctest::Approx(kPi - 1.0));
  }

  TEST_CASE("cap intervals and reflection") {
    const SphericalCap s = SphericalCap::south(1.0);
    CHECK(s.lo() == 1.0);
    CHECK(s.hi() == kPi);
    CHECK(s.contains(2.0));
    CHECK_FALSE(s.contains(0.5));
    CHECK(s.distance_to_rim(1.5) == doctest::Approx(0.5));
    const SphericalCap n = s.reflected();
    CHECK_FALSE(n.is_south());
    CHECK(n.hi() == doctest::Approx(kPi - 1.0));
  }

  TEST_CASE("boundary clustered grids") {
    const double lo = 1.0;
    const int n = 9;
    const PhiGrid g = PhiGrid::interior(lo, kPi, n, GridSpacing::BoundaryClustered);
    REQUIRE(g.size() == static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double u = (k + 1.0) / (n + 1.0);
      const double s = std::sin(kPi * u / 2);
      CHECK(g[k] == doctest::Approx(lo + (kPi - lo) * s * s));
    }
    const PhiGrid c = PhiGrid::closed(lo, kPi, n, GridSpacing::BoundaryClustered);
    CHECK(c[0] == lo);
    CHECK(c[n - 1] == doctest::Approx(kPi));
    const PhiGrid cap = PhiGrid::for_cap(SphericalCap::south(lo), 16);
    CHECK(cap[0] >= lo + 1e-6);
    for (std::size_t i = 1; i < cap.size(); ++i) CHECK(cap[i] > cap[i - 1]);
    const PhiGrid r = cap.reflected();
    CHECK(r[0] == doctest::Approx(kPi - cap[cap.size() - 1]));
  }

  TEST_CASE("grids must be increasing") {
    CHECK_THROWS_AS(PhiGrid({1.0, 0.5}, GridSpacing::Uniform), DomainError);
  }
}
