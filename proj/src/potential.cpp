#include "capfield/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "capfield/errors.hpp"
#include "capfield/parallel.hpp"
#include "capfield/quadrature.hpp"

namespace capfield {

namespace {

double agm(double a, double b) {
  for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
    const double m = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = m;
  }
  return 0.5 * (a + b);
}

}  // namespace

double complete_elliptic_k_from_complement(double k_prime) {
  if (!(k_prime > 0.0 && k_prime <= 1.0)) {
    throw DomainError("complementary modulus must lie in (0, 1]");
  }
  return kPi / (2.0 * agm(1.0, k_prime));
}

double complete_elliptic_k(double k) {
  if (!(k >= 0.0 && k < 1.0)) throw DomainError("modulus must lie in [0, 1)");
  return complete_elliptic_k_from_complement(std::sqrt((1.0 - k) * (1.0 + k)));
}

double ring_kernel(PolarAngle phi, PolarAngle xi) {
  const double p = phi.value();
  const double x = xi.value();
  if (p == x) throw DomainError("ring kernel is singular on the diagonal");
  return ring_kernel(phi, xi,
                     std::abs(2.0 * std::sin(0.5 * (p - x)) *
                              std::sin(0.5 * (p + x))));
}

double ring_kernel(PolarAngle phi, PolarAngle xi, double cos_gap) {
  if (!(cos_gap > 0.0)) {
    throw DomainError("ring kernel is singular on the diagonal");
  }
  const double p = phi.value();
  const double x = xi.value();
  const double a = 2.0 * std::sin(0.5 * p) * std::cos(0.5 * x);
  const double b = 2.0 * std::sin(0.5 * x) * std::cos(0.5 * p);
  const double big = std::max(a, b);
  // max^2 - min^2 = (a - b)(a + b) = 2 |cos(x) - cos(p)|.
  const double k_prime = std::sqrt(2.0 * cos_gap) / big;
  return 4.0 / big * complete_elliptic_k_from_complement(std::min(k_prime, 1.0));
}

double potential_on_sphere(const DensityProfile& profile, PolarAngle phi) {
  const SphericalCap& cap = profile.cap();
  const RimCoordinate& rim = profile.rim();
  const double p = phi.value();
  const double alpha = cap.alpha().value();
  const double pole = cap.is_south() ? kPi : 0.0;
  const double mid = 0.5 * (alpha + pole);
  const double s_mid = rim.s_of_phi(mid);

  // Nodes of the innermost graded panel can round onto phi itself; their
  // weight is negligible and the singularity integrable, so they drop out.
  const auto kernel = [&](double x) {
    return x == p ? 0.0 : ring_kernel(phi, PolarAngle(x));
  };
  // Rim half in s, where f sin(xi) d(xi) = 2 (f s) ds is bounded. Near the
  // rim xi rounds too coarsely, so |cos(xi) - cos(phi)| comes from s.
  const bool on_cap_point = cap.contains(p);
  const double s_p = rim.s_of_phi(p);
  const double off_gap =
      std::abs(2.0 * std::sin(0.5 * (p + alpha)) * std::sin(0.5 * (alpha - p)));
  const auto rim_part = [&](double s) {
    const double gap =
        on_cap_point ? std::abs((s - s_p) * (s + s_p)) : s * s + off_gap;
    if (gap == 0.0) return 0.0;
    return 2.0 * profile.scaled_density(s) *
           ring_kernel(phi, PolarAngle(rim.phi_of_s(s)), gap);
  };
  // Pole half in xi, where the kernel can blow up like 1/(pi - xi).
  const auto pole_part = [&](double x) {
    const double s = rim.s_of_phi(x);
    return profile.scaled_density(s) / s * std::sin(x) * kernel(x);
  };

  const bool on_cap = on_cap_point;
  const bool in_rim_half =
      on_cap && (cap.is_south() ? p <= mid : p >= mid);
  const double s_target = !on_cap ? 0.0 : in_rim_half ? rim.s_of_phi(p) : s_mid;
  const double x_target = (on_cap && !in_rim_half) ? p : mid;

  const double u_rim = integrate_graded(rim_part, 0.0, s_mid, s_target);
  const double u_pole = cap.is_south() ? integrate_graded(pole_part, mid, kPi, x_target)
                                       : integrate_graded(pole_part, 0.0, mid, x_target);
  return u_rim + u_pole;
}

EquilibriumReport verify_equilibrium(
    const ExternalField& field, const DensityProfile& profile, double tol_eq,
    const std::optional<SphericalCap>& conductor, int support_nodes,
    int off_support_nodes) {
  if (!(tol_eq > 0.0)) throw ValidationError("tol_eq must be positive");
  const SphericalCap& cap = profile.cap();
  const double fq = profile.robin_constant();

  EquilibriumReport report;
  report.tolerance = tol_eq;
  report.support_nodes =
      PhiGrid::for_cap(cap, support_nodes, GridSpacing::BoundaryClustered)
          .nodes();
  const double e_lo = conductor ? conductor->lo() : 0.0;
  const double e_hi = conductor ? conductor->hi() : kPi;
  report.support_in_conductor = cap.lo() >= e_lo && cap.hi() <= e_hi;
  // Conductor minus support: at most one interval, on the rim side.
  const double off_lo = cap.is_south() ? e_lo : std::max(cap.hi(), e_lo);
  const double off_hi = cap.is_south() ? std::min(cap.lo(), e_hi) : e_hi;
  if (off_hi > off_lo) {
    report.off_support_nodes =
        PhiGrid::interior(off_lo, off_hi, off_support_nodes,
                          GridSpacing::BoundaryClustered)
            .nodes();
  }

  const auto weighted = [&](double p) {
    return potential_on_sphere(profile, PolarAngle(p)) +
           field.evaluate(PolarAngle(p)) - fq;
  };
  report.support_deviation.resize(report.support_nodes.size());
  parallel_for(report.support_nodes.size(), [&](std::size_t i) {
    report.support_deviation[i] = weighted(report.support_nodes[i]);
  });
  report.off_support_slack.resize(report.off_support_nodes.size());
  parallel_for(report.off_support_nodes.size(), [&](std::size_t i) {
    report.off_support_slack[i] = weighted(report.off_support_nodes[i]);
  });

  report.sup_deviation_on_support = 0.0;
  report.min_density = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < report.support_nodes.size(); ++i) {
    report.sup_deviation_on_support =
        std::max(report.sup_deviation_on_support,
                 std::abs(report.support_deviation[i]));
    report.min_density = std::min(
        report.min_density, profile.density(report.support_nodes[i]));
  }
  report.min_slack_off_support = std::numeric_limits<double>::infinity();
  for (double v : report.off_support_slack) {
    report.min_slack_off_support = std::min(report.min_slack_off_support, v);
  }
  report.mass_error = std::abs(profile.mass() - 1.0);
  report.passed = report.support_in_conductor &&
                  report.sup_deviation_on_support <= tol_eq &&
                  report.min_slack_off_support >= -tol_eq &&
                  report.min_density >= -tol_eq && report.mass_error <= tol_eq;
  return report;
}

}  // namespace capfield
