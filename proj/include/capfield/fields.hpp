#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "capfield/geometry.hpp"

namespace capfield {

enum class FieldKind { Zero, PointCharge, Quadratic, Tabulated };

struct ZeroField {};

/// Positive charge q on the polar axis at height h above the centre:
/// Q(x3) = q / sqrt(1 + h^2 - 2 h x3).
struct PointChargeField {
  double q;
  double h;
};

/// Q(x3) = a x3^2 + b x3 + c with a, b > 0 and 4a^2 < b^2 <= 4ac.
struct QuadraticField {
  double a;
  double b;
  double c;
};

/// Samples (x3, Q) joined by a shape-preserving (PCHIP) cubic.
struct TabulatedField {
  std::vector<double> x3;
  std::vector<double> values;
};

/// Axially symmetric external field, Q as a function of x3 = cos(phi).
/// Immutable value type; copies share the interpolant.
class ExternalField {
 public:
  using Definition =
      std::variant<ZeroField, PointChargeField, QuadraticField, TabulatedField>;

  static ExternalField zero();
  /// Throws ValidationError unless q > 0 and h > 0.
  static ExternalField point_charge(double q, double h);
  /// Throws ValidationError unless the coefficients are admissible.
  static ExternalField quadratic(double a, double b, double c);
  /// Throws ValidationError on fewer than 4 samples, non-finite values or
  /// x3 not strictly increasing.
  static ExternalField tabulated(std::vector<double> x3,
                                 std::vector<double> values);
  /// Two-column CSV `x3,Q`, header optional.
  static ExternalField from_csv(const std::filesystem::path& path);

  static bool quadratic_admissible(double a, double b, double c) noexcept;

  FieldKind kind() const noexcept;
  const Definition& definition() const noexcept { return def_; }
  /// Constant added on top of the base definition.
  double offset() const noexcept { return offset_; }
  /// True when the field is evaluated at -x3 (reflected through the equator).
  bool mirrored() const noexcept { return mirrored_; }

  /// Q at x3 = cos(phi). Throws DomainError outside domain().
  double at_x3(double x3) const;
  /// Q(phi). Throws DomainError for a point charge at phi = 0 with h = 1.
  double evaluate(PolarAngle phi) const;
  double operator()(double phi) const { return evaluate(PolarAngle(phi)); }

  /// Closed x3-interval on which the field may be evaluated; for a point
  /// charge the upper end is the (excluded) charge location.
  std::pair<double, double> domain() const noexcept;
  bool upper_end_singular() const noexcept;
  bool lower_end_singular() const noexcept;

  ExternalField shifted(double constant) const;
  /// Q~(x3) = Q(-x3), i.e. Q~(phi) = Q(pi - phi).
  ExternalField reflected() const;

  std::string describe() const;

 private:
  using Interpolant = std::function<double(double)>;

  explicit ExternalField(Definition def);

  double base_at(double x3) const;

  Definition def_;
  std::shared_ptr<const Interpolant> interp_;
  double offset_ = 0.0;
  bool mirrored_ = false;
};

enum class HypothesisViolation { None, Monotonicity, Convexity };

/// Outcome of checking that Q(x3) is nondecreasing and convex on [-1, 1].
struct SouthCapHypothesisReport {
  bool passed = true;
  bool monotone = true;
  bool convex = true;
  /// Q >= 0 on the grid; a warning only, never a failure.
  bool nonnegative = true;
  HypothesisViolation violation = HypothesisViolation::None;
  /// First violating triple (x3 values); for monotonicity only the first
  /// two entries matter.
  std::optional<std::array<double, 3>> triple;
  std::vector<std::string> warnings;
};

/// Finite-difference check of the convex increasing hypothesis that forces
/// a south-centred support. Requires n >= 3.
SouthCapHypothesisReport validate_south_cap_hypotheses(
    const ExternalField& field, int n);

}  // namespace capfield
