#pragma once

#include <vector>

#include "capfield/equilibrium.hpp"
#include "capfield/errors.hpp"
#include "capfield/fields.hpp"
#include "capfield/geometry.hpp"

namespace capfield {

/// Probability measure spread uniformly (per unit area) over latitude bands
/// [angle - halfwidth, angle + halfwidth].
struct DiscreteMeasure {
  std::vector<double> ring_angles;
  std::vector<double> weights;
  std::vector<double> ring_halfwidths;

  /// (K w + q)_i: weighted potential averaged over band i.
  std::vector<double> weighted_potential;
  /// Mass-constraint multiplier: the weighted potential averaged against w.
  double multiplier = 0.0;
  /// max_i |w_i - P(w_i - grad_i / L)| * L at the last iterate.
  double gradient_norm = 0.0;
  int iterations = 0;
};

/// Thrown when projected gradient stops at the iteration cap; carries the
/// last iterate.
class EnergyNonconvergence : public ConvergenceError {
 public:
  EnergyNonconvergence(const std::string& what, DiscreteMeasure last)
      : ConvergenceError(what, last.multiplier, last.gradient_norm),
        last_(std::move(last)) {}
  const DiscreteMeasure& last_iterate() const noexcept { return last_; }

 private:
  DiscreteMeasure last_;
};

struct NystromSolution {
  /// Density on the collocation nodes strictly inside the cap; between
  /// nodes f s is the local cubic in cos(phi) through the four nearest.
  DensityProfile profile;
  double robin_constant;
  /// Collocation nodes (rim and pole included) and the unknowns f s there.
  std::vector<double> nodes;
  std::vector<double> scaled_values;
};

/// Solves int_cap f(xi) sin(xi) M(phi, xi) d(xi) = F_Q - Q(phi) with mass 1
/// by collocation at n BoundaryClustered nodes (rim and pole included).
/// The unknown is f s, s = sqrt|cos(alpha) - cos(phi)|, interpolated by
/// local cubics in cos(phi), so the rim factor 1/s is exact (on the full
/// sphere f itself is interpolated). Kernel weights are product-integrated
/// on graded panels. Throws DomainError when the cap is
/// within 1e-6 of a single point, ValidationError for n < 16.
NystromSolution nystrom_solve(const ExternalField& field,
                              const SphericalCap& cap, int n);

/// Minimizes w^T K w + 2 q^T w over the probability simplex, with K the
/// mutual energies of n equal-width bands covering the sphere (self-energy
/// included exactly via the graded quadrature) and q_i the band average of
/// Q. Projected gradient with step 1/L, L = 2 lambda_max(K). Stops once the
/// gradient norm is below tol; throws EnergyNonconvergence otherwise.
DiscreteMeasure discrete_energy_minimize(const ExternalField& field, int n,
                                         int iterations = 20000,
                                         double tol = 1e-10);

}  // namespace capfield
