#pragma once

#include <functional>
#include <string_view>
#include <utility>

#include "capfield/fields.hpp"
#include "capfield/geometry.hpp"

namespace capfield {

enum class SupportMethod { TranscendentalRoot, FFunctionalMin, FullSphere };

std::string_view to_string(SupportMethod method) noexcept;

/// Support angle of a south-centred extremal cap C_{S,alpha0}.
/// method == FullSphere exactly when alpha0 == 0.
struct SupportSolution {
  PolarAngle alpha0;
  double robin_constant = 0.0;
  SupportMethod method = SupportMethod::FullSphere;
  /// |residual| of the support equation for roots; final bracket width for
  /// minimizations; for FullSphere, the residual at alpha = 0 when one is
  /// defined (its sign says which side of the threshold we are on).
  double residual = 0.0;
  int iterations = 0;
  std::pair<double, double> bracket{0.0, 0.0};
};

/// Critical heights of a point charge q: the support is a proper cap iff
/// h_minus < h < h_plus.
struct GoncharHeights {
  double h_minus;
  double h_plus;
  double residual_minus;
  double residual_plus;
};

/// F(C_{S,alpha}) = W(C_{S,alpha}) + int Q d(mu_{C_{S,alpha}}) by adaptive
/// quadrature. In the rim coordinate the three integrals collapse into one
/// with a bounded integrand.
double ffunctional_numeric(const ExternalField& field, PolarAngle alpha,
                           double tol = 1e-12);

/// Closed form for a point charge (q, h), h != 1; continuous down to
/// alpha = 0 where it equals 1 + q/h (h > 1) or 1 + q (h < 1).
double ffunctional_pointcharge(double q, double h, PolarAngle alpha);

/// Closed form for the quadratic field a x3^2 + b x3 + c.
double ffunctional_quadratic(double a, double b, double c, PolarAngle alpha);

/// Golden-section minimum of F on [lo, hi] to bracket width tol. A coarse
/// scan first locates the basin and throws NonUnimodalError when it finds
/// two separated local minima. Returns FullSphere when lo == 0 and the
/// minimum sits within tol of it.
SupportSolution minimize_ffunctional(const std::function<double(double)>& F,
                                     double lo, double hi, double tol = 1e-10);

/// Residual (left side minus right side) of the point-charge support
/// equation, defined on [0, pi).
double pointcharge_support_residual(double q, double h, double alpha);
/// pi (1 - cos a) - q (pi - a) cos a - q sin a: the north-pole equation
/// multiplied through by cos a.
double northpole_support_residual(double q, double alpha);
/// Residual of the quadratic-field support equation; independent of c.
double quadratic_support_residual(double a, double b, double alpha);

/// Root of the point-charge support equation. Throws ValidationError
/// unless q > 0, h > 0 and h != 1.
SupportSolution solve_support_pointcharge(double q, double h);
SupportSolution solve_support_northpole(double q);
SupportSolution solve_support_quadratic(double a, double b, double c);

GoncharHeights gonchar_heights(double q);

/// Dispatches on the field kind: the transcendental equation for point
/// charges and quadratics, F-functional minimization otherwise.
SupportSolution solve_support(const ExternalField& field);

}  // namespace capfield
