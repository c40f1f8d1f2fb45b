#include "capfield/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "capfield/errors.hpp"
#include "capfield/parallel.hpp"

namespace capfield {

namespace {

constexpr double kPi2 = kPi * kPi;

// s * {1 + (2/pi)[k/s - atan(k/s)]}, k = sqrt(1 - cos alpha): the common
// no-field bracket multiplied by the rim coordinate.
double bracket_scaled(double k, double s) {
  return s + (2.0 / kPi) * (k - s * std::atan2(k, s));
}

// k = sqrt(1 - cos(alpha)) without the cancellation at small alpha.
double rim_k(double alpha) { return std::sqrt(2.0) * std::sin(0.5 * alpha); }

double cap_denominator(double alpha) {
  return kPi - alpha + std::sin(alpha);
}

void require_south_support(double alpha) {
  if (!(alpha >= 0.0 && alpha < kPi)) {
    throw DomainError("support angle must lie in [0, pi)");
  }
}

// phi must lie strictly beyond the rim (or anywhere for the full sphere).
double rim_s(const RimCoordinate& rim, double alpha, double phi) {
  if (alpha > 0.0 && !(phi > alpha)) {
    throw DomainError("density requested at phi = " + std::to_string(phi) +
                      " outside the open cap (alpha = " +
                      std::to_string(alpha) + ")");
  }
  return rim.s_of_phi(phi);
}

double from_scaled(const DensityProfile::ScaledDensity& scaled, double s) {
  // On the full sphere s vanishes at the north pole where f stays finite.
  constexpr double kPoleProbe = 1e-9;
  if (s == 0.0) return scaled(kPoleProbe) / kPoleProbe;
  return scaled(s) / s;
}

DensityProfile::ScaledDensity nofield_scaled(double alpha) {
  const double k = rim_k(alpha);
  const double norm = 1.0 / (4.0 * cap_denominator(alpha));
  return [k, norm](double s) { return norm * bracket_scaled(k, s); };
}

DensityProfile::ScaledDensity pointcharge_scaled(double q, double h,
                                                 double alpha) {
  const double ca = std::cos(alpha);
  const double k = rim_k(alpha);
  const double fq = pointcharge_robin_constant(q, h, PolarAngle(alpha));
  return [=](double s) {
    const double x = ca - s * s;
    const double r = 1.0 + h * h - 2.0 * h * x;
    const double sr = std::sqrt(r);
    const double field_part =
        -q * (h + 1.0) / (2.0 * kPi2) *
        (k / r + (h - 1.0) * s / (r * sr) * std::atan2((h - 1.0) * s, sr * k));
    return fq / (4.0 * kPi) * bracket_scaled(k, s) + field_part;
  };
}

DensityProfile::ScaledDensity northpole_scaled(double q, double alpha) {
  const double ca = std::cos(alpha);
  const double k = rim_k(alpha);
  const double lead =
      (kPi + q * (kPi - alpha)) / (4.0 * kPi * (std::sin(alpha) + kPi - alpha));
  return [=](double s) {
    const double x = ca - s * s;
    return lead * bracket_scaled(k, s) - q / (2.0 * kPi2) * k / (1.0 - x);
  };
}

DensityProfile::ScaledDensity quadratic_scaled(double a, double b, double c,
                                               double alpha) {
  const double ca = std::cos(alpha);
  const double k = rim_k(alpha);
  const double fq = quadratic_robin_constant(a, b, c, PolarAngle(alpha));
  return [=](double s) {
    const double x = ca - s * s;
    const double cos2phi = 2.0 * x * x - 1.0;
    const double t1 =
        k * s * s * (20.0 * a * ca + 60.0 * a * x + 10.0 * a + 27.0 * b);
    const double t2 = k * (8.0 * a * ca * ca + 10.0 * a * ca * x +
                           (4.0 * a + 9.0 * b) * ca + (20.0 * a + 27.0 * b) * x +
                           15.0 * a * cos2phi + 9.0 * a + 18.0 * b + 18.0 * c);
    const double t3 = 6.0 * s * std::atan2(s, k) *
                      (15.0 * a * x * x + 9.0 * b * x - 4.0 * a + 3.0 * c);
    return fq / (4.0 * kPi) * bracket_scaled(k, s) +
           (t1 - t2 - t3) / (36.0 * kPi2);
  };
}

// Barycentric interpolation at Chebyshev-Lobatto points on [lo, hi].
class ChebyshevInterpolant {
 public:
  ChebyshevInterpolant(const RealFunction& fn, double lo, double hi,
                       int degree)
      : nodes_(degree + 1), values_(degree + 1) {
    for (int j = 0; j <= degree; ++j) {
      nodes_[j] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * std::cos(kPi * j / degree);
    }
    parallel_for(nodes_.size(), [&](std::size_t j) { values_[j] = fn(nodes_[j]); });
  }

  int degree() const noexcept { return static_cast<int>(nodes_.size()) - 1; }

  double operator()(double x) const {
    double num = 0.0;
    double den = 0.0;
    const std::size_t n = nodes_.size();
    for (std::size_t j = 0; j < n; ++j) {
      const double diff = x - nodes_[j];
      if (diff == 0.0) return values_[j];
      double w = (j % 2 == 0 ? 1.0 : -1.0) / diff;
      if (j == 0 || j + 1 == n) w *= 0.5;
      num += w * values_[j];
      den += w;
    }
    return num / den;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
};

// s * F(phi(s)) for the general pipeline on a south cap.
RealFunction scaled_field_part(const ExternalField& field,
                               const RimCoordinate& rim,
                               const AbelOptions& opts) {
  if (rim.cos_alpha == 1.0) {
    return [field, rim, opts](double s) {
      const RealFunction gamma = [&](double u) {
        return detail::south_gamma_from_cos(field, u, opts);
      };
      return detail::full_sphere_F_scaled_from_cos(gamma, rim.cos_of_s(s),
                                                   s * s, opts);
    };
  }
  return [field, rim, opts](double s) {
    const RealFunction g_of_cos = [&](double u) {
      return detail::south_g_from_cos(field, u, opts);
    };
    return detail::south_F_scaled_from_cos(g_of_cos, rim.cos_alpha,
                                           rim.cos_of_s(s), s * s, opts);
  };
}

}  // namespace

RimCoordinate::RimCoordinate(const SphericalCap& cap)
    : alpha(cap.alpha().value()),
      cos_alpha(std::cos(alpha)),
      south(cap.is_south()) {}

double RimCoordinate::s_of_phi(double phi) const noexcept {
  const double d = 2.0 * std::sin(0.5 * (phi + alpha)) *
                   std::sin(0.5 * (south ? phi - alpha : alpha - phi));
  return std::sqrt(std::max(d, 0.0));
}

double RimCoordinate::phi_of_s(double s) const noexcept {
  // sin^2(phi/2) = sin^2(alpha/2) +- s^2/2; whichever half-angle is small
  // is the one to invert.
  const double half = 0.5 * s * s;
  const double sa = std::sin(0.5 * alpha);
  const double sin2 = south ? sa * sa + half : sa * sa - half;
  if (sin2 <= 0.5) {
    return 2.0 * std::asin(std::sqrt(std::clamp(sin2, 0.0, 1.0)));
  }
  const double ca = std::cos(0.5 * alpha);
  const double cos2 = south ? ca * ca - half : ca * ca + half;
  return 2.0 * std::acos(std::sqrt(std::clamp(cos2, 0.0, 1.0)));
}

double RimCoordinate::s_max() const noexcept {
  return std::sqrt(std::max(south ? 1.0 + cos_alpha : 1.0 - cos_alpha, 0.0));
}

DensityProfile::DensityProfile(SphericalCap cap, PhiGrid grid,
                               double robin_constant, ScaledDensity scaled,
                               double negative_tolerance)
    : cap_(cap),
      grid_(std::move(grid)),
      rim_(cap_),
      robin_constant_(robin_constant),
      scaled_(std::move(scaled)) {
  values_.resize(grid_.size());
  parallel_for(grid_.size(), [&](std::size_t i) {
    values_[i] = density(grid_[i]);
  });
  finish(negative_tolerance);
}

DensityProfile::DensityProfile(SphericalCap cap, PhiGrid grid,
                               double robin_constant, ScaledDensity scaled,
                               std::vector<double> values,
                               std::vector<double> breakpoints,
                               double negative_tolerance)
    : cap_(cap),
      grid_(std::move(grid)),
      rim_(cap_),
      robin_constant_(robin_constant),
      scaled_(std::move(scaled)),
      values_(std::move(values)),
      breakpoints_(std::move(breakpoints)) {
  if (values_.size() != grid_.size()) {
    throw ValidationError("one density value per grid node expected");
  }
  finish(negative_tolerance);
}

void DensityProfile::finish(double negative_tolerance) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] < -negative_tolerance) negative_nodes_.push_back(i);
  }
  mass_ = total_mass(*this);
}

double DensityProfile::density(double phi) const {
  if (!cap_.contains(phi)) {
    throw DomainError("density requested off the cap");
  }
  const double s = rim_.s_of_phi(phi);
  if (s == 0.0 && !cap_.is_full_sphere()) {
    throw DomainError("density is unbounded on the cap rim");
  }
  return from_scaled(scaled_, s);
}

DensityProfile DensityProfile::scaled(double factor) const {
  ScaledDensity inner = scaled_;
  std::vector<double> values = values_;
  for (double& v : values) v *= factor;
  return {cap_, grid_, factor * robin_constant_,
          [inner, factor](double s) { return factor * inner(s); },
          std::move(values), breakpoints_};
}

double capacity_south_cap(PolarAngle alpha) noexcept {
  return cap_denominator(alpha.value()) / kPi;
}

double nofield_density(PolarAngle alpha, PolarAngle phi) {
  const auto cap = SphericalCap::south(alpha);
  const double s = rim_s(RimCoordinate(cap), alpha, phi);
  return from_scaled(nofield_scaled(alpha), s);
}

double pointcharge_robin_constant(double q, double h, PolarAngle alpha0) {
  const double a = alpha0.value();
  require_south_support(a);
  // atan((h-1)/(h+1) cot(a/2)), continuous up to a = 0.
  const double arc =
      std::atan2((h - 1.0) * std::cos(0.5 * a), (h + 1.0) * std::sin(0.5 * a));
  return kPi / cap_denominator(a) *
         (1.0 + q * (h + 1.0) / (2.0 * h) * (1.0 - a / kPi) -
          q * (h - 1.0) / (kPi * h) * arc);
}

double quadratic_robin_constant(double a, double b, double c,
                                PolarAngle alpha0) {
  const double al = alpha0.value();
  require_south_support(al);
  const double x = std::cos(al);
  const double poly = 32.0 * a * x * x * x + 4.0 * (2.0 * a + 9.0 * b) * x * x +
                      4.0 * (9.0 * c - 5.0 * a) * x + 4.0 * a - 36.0 * b +
                      36.0 * c;
  return (std::tan(0.5 * al) * poly + 12.0 * (a + 3.0 * c) * (kPi - al) +
          36.0 * kPi) /
         (36.0 * cap_denominator(al));
}

DensityValue pointcharge_density(double q, double h, PolarAngle alpha0,
                                 PolarAngle phi) {
  if (!(q > 0.0) || !(h > 0.0) || h == 1.0) {
    throw ValidationError("point-charge density needs q > 0, h > 0, h != 1");
  }
  require_south_support(alpha0);
  const auto cap = SphericalCap::south(alpha0);
  const double s = rim_s(RimCoordinate(cap), alpha0, phi);
  return {from_scaled(pointcharge_scaled(q, h, alpha0), s),
          pointcharge_robin_constant(q, h, alpha0)};
}

double northpole_density(double q, PolarAngle alpha0, PolarAngle phi) {
  if (!(q > 0.0)) throw ValidationError("north-pole density needs q > 0");
  if (!(alpha0.value() > 0.0 && alpha0.value() < kPi)) {
    throw DomainError("north-pole support angle must lie in (0, pi)");
  }
  const auto cap = SphericalCap::south(alpha0);
  const double s = rim_s(RimCoordinate(cap), alpha0, phi);
  return from_scaled(northpole_scaled(q, alpha0), s);
}

DensityValue quadratic_density(double a, double b, double c,
                               PolarAngle alpha0, PolarAngle phi) {
  if (!ExternalField::quadratic_admissible(a, b, c)) {
    throw ValidationError("inadmissible quadratic coefficients");
  }
  require_south_support(alpha0);
  const auto cap = SphericalCap::south(alpha0);
  const double s = rim_s(RimCoordinate(cap), alpha0, phi);
  return {from_scaled(quadratic_scaled(a, b, c, alpha0), s),
          quadratic_robin_constant(a, b, c, alpha0)};
}

DensityProfile nofield_profile(PolarAngle alpha, const PhiGrid& grid) {
  return {SphericalCap::south(alpha), grid, kPi / cap_denominator(alpha),
          nofield_scaled(alpha)};
}

DensityProfile pointcharge_profile(double q, double h, PolarAngle alpha0,
                                   const PhiGrid& grid) {
  if (!(q > 0.0) || !(h > 0.0) || h == 1.0) {
    throw ValidationError("point-charge density needs q > 0, h > 0, h != 1");
  }
  return {SphericalCap::south(alpha0), grid,
          pointcharge_robin_constant(q, h, alpha0),
          pointcharge_scaled(q, h, alpha0)};
}

DensityProfile northpole_profile(double q, PolarAngle alpha0,
                                 const PhiGrid& grid) {
  if (!(q > 0.0)) throw ValidationError("north-pole density needs q > 0");
  const double a = alpha0.value();
  return {SphericalCap::south(alpha0), grid,
          (kPi + q * (kPi - a)) / cap_denominator(a),
          northpole_scaled(q, a)};
}

DensityProfile quadratic_profile(double a, double b, double c,
                                 PolarAngle alpha0, const PhiGrid& grid) {
  if (!ExternalField::quadratic_admissible(a, b, c)) {
    throw ValidationError("inadmissible quadratic coefficients");
  }
  return {SphericalCap::south(alpha0), grid,
          quadratic_robin_constant(a, b, c, alpha0),
          quadratic_scaled(a, b, c, alpha0)};
}

DensityProfile closed_form_profile(const ExternalField& field,
                                   PolarAngle alpha0, const PhiGrid& grid) {
  if (field.offset() != 0.0 || field.mirrored()) {
    throw ValidationError("no closed form for shifted or reflected fields");
  }
  const auto& def = field.definition();
  if (std::holds_alternative<ZeroField>(def)) {
    return nofield_profile(alpha0, grid);
  }
  if (const auto* p = std::get_if<PointChargeField>(&def)) {
    return p->h == 1.0 ? northpole_profile(p->q, alpha0, grid)
                       : pointcharge_profile(p->q, p->h, alpha0, grid);
  }
  if (const auto* p = std::get_if<QuadraticField>(&def)) {
    return quadratic_profile(p->a, p->b, p->c, alpha0, grid);
  }
  throw ValidationError("no closed-form density for " + field.describe());
}

double robin_constant_general(const ExternalField& field,
                              const SphericalCap& cap,
                              const AbelOptions& opts) {
  if (!cap.is_south()) {
    return robin_constant_general(field.reflected(), cap.reflected(), opts);
  }
  const double alpha = cap.alpha().value();
  const RimCoordinate rim(cap);
  const auto field_part = scaled_field_part(field, rim, opts);
  // integral of F sin(phi) dphi = integral of 2 (s F) ds over [0, s_max].
  const double f_integral = gauss_legendre(opts.outer_nodes)
                                .integrate(
                                    [&](double s) {
                                      return 2.0 * field_part(s);
                                    },
                                    0.0, rim.s_max());
  return kPi / cap_denominator(alpha) * (1.0 - 2.0 * kPi * f_integral);
}

DensityProfile density_general(const ExternalField& field,
                               const SphericalCap& cap, const PhiGrid& grid,
                               const AbelOptions& opts) {
  for (double phi : grid.nodes()) {
    if (!cap.contains(phi)) {
      throw DomainError("grid node outside the cap");
    }
  }
  if (!cap.is_south()) {
    // f_N(phi) = f_S(pi - phi) for the reflected field; the rim coordinate
    // is unchanged by the reflection, so the scaled density carries over.
    const DensityProfile south =
        density_general(field.reflected(), cap.reflected(), grid.reflected(),
                        opts);
    std::vector<double> values(south.values().rbegin(), south.values().rend());
    return {cap, grid, south.robin_constant(),
            [south](double s) { return south.scaled_density(s); },
            std::move(values)};
  }
  const RimCoordinate rim(cap);
  const double s_max = rim.s_max();
  const RealFunction field_part = scaled_field_part(field, rim, opts);

  // Node values come straight from the pipeline.
  std::vector<double> node_s(grid.size());
  std::vector<double> node_part(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    node_s[i] = rim.s_of_phi(grid[i]);
    node_part[i] = field_part(node_s[i]);
  });

  // Off the grid (mass, F_Q, potentials) a Chebyshev interpolant in s stands
  // in for the pipeline; the nodes double as a check on it.
  constexpr double kInterpolationTol = 1e-9;
  std::shared_ptr<const ChebyshevInterpolant> interp;
  for (int degree = 64; degree <= 256; degree *= 2) {
    interp = std::make_shared<const ChebyshevInterpolant>(field_part, 0.0,
                                                          s_max, degree);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      worst = std::max(worst, std::abs((*interp)(node_s[i]) - node_part[i]));
    }
    if (worst <= kInterpolationTol) break;
  }

  // integral of F sin(phi) dphi = integral of 2 (s F) ds.
  const double f_integral = gauss_legendre(interp->degree() / 2 + 2)
                                .integrate(
                                    [&](double s) { return 2.0 * (*interp)(s); },
                                    0.0, s_max);
  const double fq =
      kPi / cap_denominator(rim.alpha) * (1.0 - 2.0 * kPi * f_integral);
  const double k = rim_k(rim.alpha);

  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = from_scaled(
        [&](double s) {
          return fq / (4.0 * kPi) * bracket_scaled(k, s) +
                 (s == node_s[i] ? node_part[i] : field_part(s));
        },
        node_s[i]);
  }
  DensityProfile::ScaledDensity scaled = [fq, k, interp](double s) {
    return fq / (4.0 * kPi) * bracket_scaled(k, s) + (*interp)(s);
  };
  return {cap, grid, fq, std::move(scaled), std::move(values)};
}

double total_mass(const DensityProfile& profile, double tol) {
  const double s_max = profile.rim().s_max();
  const RealFunction integrand = [&](double s) {
    return profile.scaled_density(s);
  };
  std::vector<double> cuts{0.0};
  for (double b : profile.breakpoints()) {
    if (b > cuts.back() && b < s_max) cuts.push_back(b);
  }
  cuts.push_back(s_max);
  const double piece_tol =
      tol / (4.0 * kPi * static_cast<double>(cuts.size() - 1));
  double value = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    value += integrate_adaptive(integrand, cuts[i], cuts[i + 1], piece_tol);
  }
  return 4.0 * kPi * value;
}

}  // namespace capfield
