#pragma once

#include <optional>
#include <vector>

#include "capfield/equilibrium.hpp"
#include "capfield/fields.hpp"
#include "capfield/geometry.hpp"

namespace capfield {

/// K(k) = pi / (2 AGM(1, sqrt(1 - k^2))), 0 <= k < 1.
double complete_elliptic_k(double k);
/// K from the complementary modulus k' = sqrt(1 - k^2), which keeps full
/// precision as k -> 1.
double complete_elliptic_k_from_complement(double k_prime);

/// M(phi, xi) = int_0^{2pi} d(eta) / sqrt(2 - 2 gamma): the potential at
/// polar angle phi of the unit-density latitude circle at xi.
/// Throws DomainError on the diagonal phi == xi.
double ring_kernel(PolarAngle phi, PolarAngle xi);

/// Same kernel with |cos(xi) - cos(phi)| supplied by the caller, for points
/// so close that the angles alone no longer resolve their separation.
double ring_kernel(PolarAngle phi, PolarAngle xi, double cos_gap);

/// U(phi) = int f(xi) sin(xi) M(phi, xi) d(xi) over the profile's cap.
/// phi may lie on or off the cap.
double potential_on_sphere(const DensityProfile& profile, PolarAngle phi);

struct EquilibriumReport {
  /// max |U + Q - F_Q| over interior support nodes.
  double sup_deviation_on_support = 0.0;
  /// min (U + Q - F_Q) over off-support nodes; +inf when there are none.
  double min_slack_off_support = 0.0;
  double mass_error = 0.0;
  /// Smallest density value on the support nodes.
  double min_density = 0.0;
  double tolerance = 0.0;
  /// False when the profile's cap reaches outside the conductor.
  bool support_in_conductor = true;
  bool passed = false;

  std::vector<double> support_nodes;
  std::vector<double> support_deviation;
  std::vector<double> off_support_nodes;
  std::vector<double> off_support_slack;
};

/// Checks U + Q = F_Q on the support and U + Q >= F_Q on the rest of the
/// conductor (the whole sphere unless a cap is given). Passing also needs
/// min_density >= -tol_eq, mass_error <= tol_eq and the support inside the
/// conductor. Throws ValidationError only for tol_eq <= 0.
EquilibriumReport verify_equilibrium(
    const ExternalField& field, const DensityProfile& profile, double tol_eq,
    const std::optional<SphericalCap>& conductor = std::nullopt,
    int support_nodes = 48, int off_support_nodes = 64);

}  // namespace capfield
