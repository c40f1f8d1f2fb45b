#pragma once

#include <functional>
#include <vector>

#include "capfield/fields.hpp"
#include "capfield/geometry.hpp"
#include "capfield/quadrature.hpp"

namespace capfield {

/// Rim coordinate of a cap: s = sqrt|cos(alpha) - cos(phi)|. Densities of
/// cap equilibrium problems behave like 1/s at the rim, so they are stored
/// as the bounded product f * s, a smooth function of s.
struct RimCoordinate {
  double alpha;
  double cos_alpha;
  bool south;

  explicit RimCoordinate(const SphericalCap& cap);

  /// s at phi, computed from a product of sines so it keeps full relative
  /// precision next to the rim.
  double s_of_phi(double phi) const noexcept;
  /// cos(phi) at rim coordinate s.
  double cos_of_s(double s) const noexcept {
    return south ? cos_alpha - s * s : cos_alpha + s * s;
  }
  double phi_of_s(double s) const noexcept;
  /// Largest s on the cap (at the pole the cap is centred on).
  double s_max() const noexcept;
};

/// Equilibrium density on a cap: nodal values on a grid, the Robin constant
/// F_Q and the total mass, plus an evaluator for f * s so the profile can be
/// integrated and its potential evaluated away from the grid.
class DensityProfile {
 public:
  /// f(phi) * s(phi) as a function of the rim coordinate s.
  using ScaledDensity = std::function<double(double)>;

  DensityProfile(SphericalCap cap, PhiGrid grid, double robin_constant,
                 ScaledDensity scaled, double negative_tolerance = 1e-9);
  /// With nodal values computed elsewhere (e.g. more accurately than the
  /// scaled evaluator used between nodes). `breakpoints` lists interior
  /// values of s where the scaled density has kinks.
  DensityProfile(SphericalCap cap, PhiGrid grid, double robin_constant,
                 ScaledDensity scaled, std::vector<double> values,
                 std::vector<double> breakpoints = {},
                 double negative_tolerance = 1e-9);

  const SphericalCap& cap() const noexcept { return cap_; }
  const PhiGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double robin_constant() const noexcept { return robin_constant_; }
  double mass() const noexcept { return mass_; }
  /// Indices of grid nodes where f < -negative_tolerance. Reported, never
  /// clamped: a negative density means the support angle is wrong.
  const std::vector<std::size_t>& negative_nodes() const noexcept {
    return negative_nodes_;
  }
  const RimCoordinate& rim() const noexcept { return rim_; }
  const std::vector<double>& breakpoints() const noexcept {
    return breakpoints_;
  }

  double scaled_density(double s) const { return scaled_(s); }
  /// f(phi); throws DomainError off the cap or exactly on the rim.
  double density(double phi) const;

  DensityProfile scaled(double factor) const;

 private:
  void finish(double negative_tolerance);

  SphericalCap cap_;
  PhiGrid grid_;
  RimCoordinate rim_;
  double robin_constant_;
  ScaledDensity scaled_;
  std::vector<double> values_;
  std::vector<std::size_t> negative_nodes_;
  std::vector<double> breakpoints_;
  double mass_ = 0.0;
};

/// cap(C_{S,alpha}) = (pi - alpha + sin alpha) / pi.
double capacity_south_cap(PolarAngle alpha) noexcept;

/// Equilibrium density of C_{S,alpha} without external field.
/// Throws DomainError for phi <= alpha (phi = alpha allowed when alpha = 0).
double nofield_density(PolarAngle alpha, PolarAngle phi);

struct DensityValue {
  double f;
  double robin_constant;
};

/// Closed-form density for a point charge (q, h), h != 1, with support
/// C_{S,alpha0}. Valid for any alpha0 in [0, pi): away from the true
/// support angle it is the signed solution of the cap integral equation.
DensityValue pointcharge_density(double q, double h, PolarAngle alpha0,
                                 PolarAngle phi);

/// Closed-form density for a point charge sitting at the north pole.
double northpole_density(double q, PolarAngle alpha0, PolarAngle phi);

/// Closed-form density for the quadratic field a x3^2 + b x3 + c.
DensityValue quadratic_density(double a, double b, double c,
                               PolarAngle alpha0, PolarAngle phi);

/// Robin constant of the point-charge problem, as stated with the density.
double pointcharge_robin_constant(double q, double h, PolarAngle alpha0);
/// Robin constant of the quadratic problem, as stated with the density.
double quadratic_robin_constant(double a, double b, double c,
                                PolarAngle alpha0);

DensityProfile nofield_profile(PolarAngle alpha, const PhiGrid& grid);
DensityProfile pointcharge_profile(double q, double h, PolarAngle alpha0,
                                   const PhiGrid& grid);
DensityProfile northpole_profile(double q, PolarAngle alpha0,
                                 const PhiGrid& grid);
DensityProfile quadratic_profile(double a, double b, double c,
                                 PolarAngle alpha0, const PhiGrid& grid);

/// Closed-form profile for any field that has one (zero, point charge,
/// north-pole charge, quadratic), on a south cap. Throws ValidationError
/// for tabulated, shifted or reflected fields.
DensityProfile closed_form_profile(const ExternalField& field,
                                   PolarAngle alpha0, const PhiGrid& grid);

/// Density for an arbitrary C^2 field on a given cap by the two Abel stages:
/// g from Q, F from g, F_Q from the mass condition, then f on the grid.
/// North caps are reduced to south caps by phi -> pi - phi.
DensityProfile density_general(const ExternalField& field,
                               const SphericalCap& cap, const PhiGrid& grid,
                               const AbelOptions& opts = {});

/// Robin constant of the general pipeline, from the mass condition with the
/// integral of F sin(phi) taken in the rim coordinate.
double robin_constant_general(const ExternalField& field,
                              const SphericalCap& cap,
                              const AbelOptions& opts = {});

/// 2 pi * integral of f sin(phi) over the cap, in the rim coordinate
/// (f sin(phi) dphi = 2 (f s) ds), so the edge factor costs nothing.
double total_mass(const DensityProfile& profile, double tol = 1e-12);

}  // namespace capfield
