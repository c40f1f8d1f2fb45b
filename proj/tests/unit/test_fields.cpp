#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "capfield/errors.hpp"
#include "capfield/fields.hpp"

using namespace capfield;

TEST_SUITE("fields") {
  TEST_CASE("point charge values on the axis") {
    const ExternalField f = ExternalField::point_charge(1.0, 2.0);
    CHECK(f.evaluate(PolarAngle(kPi)) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(f.evaluate(PolarAngle(0.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f.kind() == FieldKind::PointCharge);
  }

  TEST_CASE("point charge times distance is q") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> polar(0.0, kPi);
    const double q = 1.7, h = 0.6;
    const ExternalField f = ExternalField::point_charge(q, h);
    for (int i = 0; i < 200; ++i) {
      const double p = polar(rng);
      const double r = std::sqrt(1.0 + h * h - 2.0 * h * std::cos(p));
      CHECK(std::abs(f.evaluate(PolarAngle(p)) * r - q) < 1e-14);
    }
  }

  TEST_CASE("north pole charge is singular only at the pole") {
    const ExternalField f = ExternalField::point_charge(1.0, 1.0);
    CHECK_THROWS_AS(f.evaluate(PolarAngle(0.0)), DomainError);
    CHECK(f.evaluate(PolarAngle(kPi)) == doctest::Approx(0.5));
  }

  TEST_CASE("quadratic field") {
    const ExternalField f = ExternalField::quadratic(1.0, 2.5, 2.0);
    CHECK(f.evaluate(PolarAngle(0.0)) == doctest::Approx(5.5).epsilon(1e-15));
    CHECK(f.at_x3(-1.0) == doctest::Approx(1.0 - 2.5 + 2.0));
    CHECK_THROWS_AS(ExternalField::quadratic(1.0, 1.0, 2.0), ValidationError);
    CHECK_THROWS_AS(ExternalField::quadratic(1.0, 2.5, 1.0), ValidationError);
    CHECK_THROWS_AS(ExternalField::quadratic(-1.0, 2.5, 2.0), ValidationError);
    CHECK(ExternalField::quadratic_admissible(1.0, 2.5, 2.0));
  }

  TEST_CASE("invalid point charges") {
    CHECK_THROWS_AS(ExternalField::point_charge(0.0, 2.0), ValidationError);
    CHECK_THROWS_AS(ExternalField::point_charge(1.0, -2.0), ValidationError);
  }

  TEST_CASE("south cap hypotheses") {
    CHECK(validate_south_cap_hypotheses(ExternalField::point_charge(1, 2), 101).passed);
    for (int n : {3, 4, 10, 57, 400}) {
      CHECK(validate_south_cap_hypotheses(ExternalField::quadratic(1, 2.5, 2), n)
                .passed);
    }
    std::vector<double> x, v;
    for (int i = 0; i <= 40; ++i) {
      const double t = -1.0 + i / 20.0;
      x.push_back(t);
      v.push_back(t * t - 2.5 * t + 2.0);
    }
    const auto report =
        validate_south_cap_hypotheses(ExternalField::tabulated(x, v), 41);
    CHECK_FALSE(report.passed);
    CHECK(report.violation == HypothesisViolation::Monotonicity);
    REQUIRE(report.triple.has_value());
    CHECK((*report.triple)[0] < (*report.triple)[1]);
    CHECK_THROWS_AS(validate_south_cap_hypotheses(ExternalField::zero(), 2),
                    ValidationError);
  }

  TEST_CASE("negative fields only warn") {
    const auto report = validate_south_cap_hypotheses(
        ExternalField::point_charge(1, 2).shifted(-10.0), 33);
    CHECK(report.passed);
    CHECK_FALSE(report.nonnegative);
    CHECK_FALSE(report.warnings.empty());
  }

  TEST_CASE("constant shift is exact") {
    std::vector<double> x, v;
    for (int i = 0; i <= 10; ++i) {
      x.push_back(-1.0 + 0.2 * i);
      v.push_back(std::exp(x.back()));
    }
    const ExternalField t = ExternalField::tabulated(x, v);
    const ExternalField s = t.shifted(0.37);
    for (double p : {0.0, 0.3, 1.1, 2.0, kPi}) {
      CHECK(s.evaluate(PolarAngle(p)) == t.evaluate(PolarAngle(p)) + 0.37);
    }
    CHECK(s.offset() == 0.37);
  }

  TEST_CASE("tabulated interpolation keeps the samples and the range") {
    std::vector<double> x{-1.0, -0.5, 0.0, 0.5, 0.9};
    std::vector<double> v{0.1, 0.2, 0.4, 0.8, 1.6};
    const ExternalField t = ExternalField::tabulated(x, v);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(t.at_x3(x[i]) == doctest::Approx(v[i]));
    }
    CHECK_THROWS_AS(t.at_x3(0.95), DomainError);
    CHECK_THROWS_AS(ExternalField::tabulated({0, 1, 2}, {1, 2, 3}), ValidationError);
    CHECK_THROWS_AS(ExternalField::tabulated({0, 1, 1, 2}, {1, 2, 3, 4}),
                    ValidationError);
  }

  TEST_CASE("reflection") {
    const ExternalField f = ExternalField::point_charge(1, 2);
    const ExternalField r = f.reflected();
    CHECK(r.mirrored());
    CHECK(r.evaluate(PolarAngle(0.3)) ==
          doctest::Approx(f.evaluate(PolarAngle(kPi - 0.3))));
  }

  TEST_CASE("CSV tables with and without header") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto with = dir / "capfield_field_header.csv";
    const auto without = dir / "capfield_field_plain.csv";
    {
      std::ofstream a(with);
      a << "x3,Q\n-1,1\n-0.5,1.5\n0,2\n0.5,3\n1,5\n";
      std::ofstream b(without);
      b << "-1,1\n-0.5,1.5\n0,2\n0.5,3\n1,5\n";
    }
    const ExternalField a = ExternalField::from_csv(with);
    const ExternalField b = ExternalField::from_csv(without);
    CHECK(a.at_x3(0.25) == doctest::Approx(b.at_x3(0.25)));
    CHECK(a.at_x3(1.0) == doctest::Approx(5.0));
    CHECK_THROWS_AS(ExternalField::from_csv(dir / "capfield_missing_table.csv"),
                    ValidationError);
    std::filesystem::remove(with);
    std::filesystem::remove(without);
  }
}
