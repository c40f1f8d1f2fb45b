#pragma once

#include <functional>
#include <span>
#include <vector>

#include "capfield/fields.hpp"
#include "capfield/geometry.hpp"

namespace capfield {

using RealFunction = std::function<double(double)>;

/// Gauss-Legendre rule on [-1, 1], nodes by Newton iteration on P_n.
class GaussLegendre {
 public:
  explicit GaussLegendre(int n);

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  int size() const noexcept { return static_cast<int>(nodes_.size()); }

  /// Integral of f over [a, b].
  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      sum += weights_[i] * f(mid + half * nodes_[i]);
    }
    return half * sum;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Shared rule of the given order; rules are built once and cached.
const GaussLegendre& gauss_legendre(int n);

/// Integral of g from target to far (either order) on 16-point panels whose
/// length halves toward target over `levels` levels. The innermost panel is
/// mapped by x = target + w v^4, so a logarithmic or inverse-square-root
/// singularity at target is integrated to near machine precision.
template <class F>
double integrate_graded_side(F&& g, double target, double far,
                             int levels = 12) {
  const GaussLegendre& rule = gauss_legendre(16);
  const double len = far - target;
  double sum = 0.0;
  double outer = 1.0;
  for (int j = 0; j < levels; ++j) {
    const double inner = 0.5 * outer;
    sum += rule.integrate(g, target + inner * len, target + outer * len);
    outer = inner;
  }
  const double w = outer * len;
  return sum + rule.integrate(
                   [&](double v) {
                     const double v2 = v * v;
                     return 4.0 * w * v2 * v * g(target + w * v2 * v2);
                   },
                   0.0, 1.0);
}

/// Integral of g over [lo, hi], split at target (clamped into [lo, hi]) and
/// graded toward it from both sides.
template <class F>
double integrate_graded(F&& g, double lo, double hi, double target,
                        int levels = 12) {
  target = target < lo ? lo : (target > hi ? hi : target);
  double sum = 0.0;
  if (target > lo) sum -= integrate_graded_side(g, target, lo, levels);
  if (target < hi) sum += integrate_graded_side(g, target, hi, levels);
  return sum;
}

/// Nodes and weights of the rule used by integrate_graded, for integrating
/// several functions against one singular factor at once.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule graded_rule(double lo, double hi, double target,
                           int levels = 12);

/// Adaptive 15-point Gauss-Kronrod on [a, b]. Throws ConvergenceError
/// (with best estimate and error bound) when the error estimate stays
/// above tol after the bisection depth cap.
double integrate_adaptive(const RealFunction& f, double a, double b,
                          double tol, int max_depth = 18);

/// Derivative of fn at x by step-halved finite differences and Richardson
/// extrapolation, using only arguments inside [lo, hi]. Central differences
/// when the stencil fits, one-sided second-order differences otherwise.
/// The stencil is fixed (no adaptive step choice), so the estimate is a
/// smooth function of x whenever fn is.
double richardson_derivative(const RealFunction& fn, double x, double lo,
                             double hi, double h0 = 1.0 / 32.0,
                             int levels = 4);

enum class SingularEnd { Lower, Upper };

/// smooth_part(t) / sqrt|cos(e) - cos(t)| on [lo, hi], e the flagged end.
struct SingularIntegrand {
  RealFunction smooth_part;
  SingularEnd singular_end;
  double lo;
  double hi;
};

/// Integral of a SingularIntegrand. The half of the interval next to the
/// singular end is mapped by cos(e) - cos(t) = +-s^2, which removes the
/// singularity; both halves then go through integrate_adaptive.
double integrate_sqrt_singular(const SingularIntegrand& f, double tol = 1e-10);

/// Resolution of the nested Abel-stage quadratures.
struct AbelOptions {
  int inner_nodes = 48;          // Gauss-Legendre nodes in the inner stage
  int outer_nodes = 48;          // and in the outer stage
  double derivative_step = 1.0 / 32.0;
  int richardson_levels = 4;
};

/// g(t) = (1/4pi) d/dt of the moving-endpoint Abel integral of Q sin(xi):
/// over [t, pi] against (cos t - cos xi)^(-1/2) for a south cap, over
/// [0, t] against (cos xi - cos t)^(-1/2) for a north cap. t must lie
/// strictly inside the cap. Only the cap orientation enters.
double abel_stage_g(const ExternalField& field, PolarAngle t,
                    const SphericalCap& cap, const AbelOptions& opts = {});

/// F(phi) = (2/pi)(1/sin phi) d/dphi of the Abel integral of g(t) sin t
/// between the rim and phi. Throws DomainError within 1e-9 rad of the rim.
double abel_stage_F(const RealFunction& g, PolarAngle phi,
                    const SphericalCap& cap, const AbelOptions& opts = {});

namespace detail {

/// South-cap stages in the x3 = cos variable. All take c = cos(angle).
///
/// With M(c) = int_0^1 Q(c - s^2 (1 + c)) ds the inner Abel integral is
/// 2 sqrt(1 + c) M(c), and
///   g = -(1/4pi) [ sqrt(1-c) M(c) + 2 (1+c) sqrt(1-c) M'(c) ].
double south_g_from_cos(const ExternalField& field, double c,
                        const AbelOptions& opts);
/// The smooth factor gamma of g = sqrt(1 - c) gamma.
double south_gamma_from_cos(const ExternalField& field, double c,
                            const AbelOptions& opts);

/// With D = cos(alpha) - c and K(c) = int_0^1 g~(c + s^2 D) ds (taken with
/// s = sin(theta)), where
/// g~(u) = g(acos u), the outer integral is 2 sqrt(D) K(c) and
///   sqrt(D) F = (2/pi) [ K(c) - 2 D K'(c) ],
/// which stays bounded at the rim. Returns sqrt(D) F.
double south_F_scaled_from_cos(const RealFunction& g_of_cos, double cos_alpha,
                               double c, double d, const AbelOptions& opts);

/// Full sphere (alpha = 0), where g~ = sqrt(1 - u) gamma(u) makes K(c)
/// carry a sqrt(D) factor that cannot be differenced. With
/// L(c) = int_0^{pi/2} gamma(c + D sin^2) cos^2 dtheta, K = sqrt(D) L and
///   sqrt(D) F = (4/pi) sqrt(D) [ L - D L' ].
double full_sphere_F_scaled_from_cos(const RealFunction& gamma_of_cos,
                                     double c, double d,
                                     const AbelOptions& opts);

}  // namespace detail

}  // namespace capfield
