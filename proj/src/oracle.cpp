#include "capfield/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>

#include "capfield/parallel.hpp"
#include "capfield/potential.hpp"
#include "capfield/quadrature.hpp"

namespace capfield {

namespace {

// Kernel with the diagonal dropped: graded rules can place a node within
// rounding of the singular point, where its weight is negligible.
double kernel(double phi, double xi) {
  return phi == xi ? 0.0 : ring_kernel(PolarAngle(phi), PolarAngle(xi));
}

// Same, with the separation given as |cos(xi) - cos(phi)|.
double kernel(double phi, double xi, double gap) {
  return gap == 0.0 ? 0.0 : ring_kernel(PolarAngle(phi), PolarAngle(xi), gap);
}

// Levels of grading for a panel at distance `dist` from the singular point.
int grading_levels(double dist, double width) {
  if (dist <= 0.0) return 12;
  const double ratio = width / dist;
  if (ratio < 0.25) return 1;
  return std::clamp(static_cast<int>(std::ceil(std::log2(ratio))) + 4, 2, 12);
}

// First of the four nodes carrying the cubic on panel [s_k, s_k+1].
int stencil_start(int k, int n) { return std::clamp(k - 1, 0, n - 4); }

// cos(x) - cos(y) without cancellation between nearby angles.
double cos_gap(double x, double y) {
  return -2.0 * std::sin(0.5 * (x + y)) * std::sin(0.5 * (x - y));
}

// Lagrange basis in cos(phi) through the angles x0[0..3], evaluated at x.
std::array<double, 4> lagrange4(const double* x0, double x) {
  std::array<double, 4> l{};
  for (int m = 0; m < 4; ++m) {
    double v = 1.0;
    for (int j = 0; j < 4; ++j) {
      if (j != m) v *= cos_gap(x, x0[j]) / cos_gap(x0[m], x0[j]);
    }
    l[m] = v;
  }
  return l;
}

// Euclidean projection onto {w >= 0, sum w = 1}.
void project_simplex(Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  v = (v.array() - theta).max(0.0);
}

}  // namespace

NystromSolution nystrom_solve(const ExternalField& field,
                              const SphericalCap& cap, int n) {
  if (n < 16) throw ValidationError("nystrom_solve needs n >= 16");
  if (cap.hi() - cap.lo() < 1e-6) {
    throw DomainError("cap too small for the Nystrom system");
  }
  const RimCoordinate rim(cap);
  const PhiGrid closed =
      PhiGrid::closed(cap.lo(), cap.hi(), n, GridSpacing::BoundaryClustered);

  // Work in increasing s, i.e. from the rim toward the pole.
  std::vector<double> phi(closed.nodes());
  if (!cap.is_south()) std::reverse(phi.begin(), phi.end());
  std::vector<double> s(n);
  for (int j = 0; j < n; ++j) s[j] = rim.s_of_phi(phi[j]);
  s[0] = 0.0;

  const int size = n + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
  Eigen::VectorXd rhs(size);

  // The smooth part is interpolated in cos(phi), with node gaps taken from
  // phi so the crowded pole nodes stay resolved. On the full sphere psi has
  // a factor s that is not smooth in cos(phi), so f is interpolated there.
  const bool full = cap.is_full_sphere();
  const auto weight = [&](double x) { return full ? rim.s_of_phi(x) : 1.0; };
  // Panels on the rim half are integrated in s, the rest in phi with ds = sin(phi) dphi / (2 s).
  const int split = (n - 1) / 2;
  const auto panel_rule = [&](int k, double target_s, double target_phi) {
    const bool in_s = k < split;
    const double lo = in_s ? s[k] : std::min(phi[k], phi[k + 1]);
    const double hi = in_s ? s[k + 1] : std::max(phi[k], phi[k + 1]);
    const double t = in_s ? target_s : target_phi;
    const double dist = t < lo ? lo - t : (t > hi ? t - hi : 0.0);
    QuadratureRule rule = graded_rule(lo, hi, std::clamp(t, lo, hi),
                                      grading_levels(dist, hi - lo));
    // Convert to (phi, ds weight) pairs, keeping |cos(xi) - cos(target)|
    // exact in s near the rim where phi rounds too coarsely.
    std::vector<double> gaps(rule.nodes.size());
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double x = rule.nodes[q];
      if (in_s) {
        gaps[q] = std::abs((target_s - x) * (target_s + x));
        rule.nodes[q] = rim.phi_of_s(x);
      } else {
        gaps[q] = std::abs(cos_gap(target_phi, x));
        rule.weights[q] *= std::sin(x) / (2.0 * rim.s_of_phi(x));
      }
    }
    return std::pair{std::move(rule), std::move(gaps)};
  };

  parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    const double p = phi[i];
    for (int k = 0; k + 1 < n; ++k) {
      const auto [rule, gaps] = panel_rule(k, s[i], p);
      const int st = stencil_start(k, n);
      std::array<double, 4> w{};
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double x = rule.nodes[q];
        const double g =
            2.0 * kernel(p, x, gaps[q]) * weight(x) * rule.weights[q];
        const auto l = lagrange4(&phi[st], x);
        for (int m = 0; m < 4; ++m) w[m] += g * l[m];
      }
      for (int m = 0; m < 4; ++m) a(i, st + m) += w[m];
    }
    a(i, n) = -1.0;
    rhs(i) = -field.evaluate(PolarAngle(p));
  });
  // Mass: 4 pi int (f s) ds.
  for (int k = 0; k + 1 < n; ++k) {
    const QuadratureRule rule = panel_rule(k, -1.0, -1.0).first;
    const int st = stencil_start(k, n);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const auto l = lagrange4(&phi[st], rule.nodes[q]);
      for (int m = 0; m < 4; ++m) {
        a(n, st + m) +=
            4.0 * kPi * weight(rule.nodes[q]) * rule.weights[q] * l[m];
      }
    }
  }
  rhs(n) = 1.0;

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) {
    throw DomainError("Nystrom system is singular");
  }
  const Eigen::VectorXd x = lu.solve(rhs);
  const std::vector<double> u(x.data(), x.data() + n);
  const double fq = x(n);
  std::vector<double> psi(n);
  for (int j = 0; j < n; ++j) psi[j] = full ? s[j] * u[j] : u[j];

  // Profile on the nodes where f is finite: all but the rim.
  std::vector<double> grid_nodes;
  std::vector<double> values;
  for (int j = full ? 0 : 1; j < n; ++j) {
    grid_nodes.push_back(phi[j]);
    values.push_back(full ? u[j] : u[j] / s[j]);
  }
  if (!cap.is_south()) {
    std::reverse(grid_nodes.begin(), grid_nodes.end());
    std::reverse(values.begin(), values.end());
  }
  DensityProfile::ScaledDensity cubic = [rim, full, s, phi, u](double x) {
    const auto it = std::upper_bound(s.begin(), s.end(), x);
    const int k = std::clamp(static_cast<int>(it - s.begin()) - 1, 0,
                             static_cast<int>(s.size()) - 2);
    const int st = stencil_start(k, static_cast<int>(s.size()));
    const auto l = lagrange4(&phi[st], rim.phi_of_s(x));
    double sum = 0.0;
    for (int m = 0; m < 4; ++m) sum += l[m] * u[st + m];
    return full ? x * sum : sum;
  };
  DensityProfile profile(cap,
                         PhiGrid(std::move(grid_nodes),
                                 GridSpacing::BoundaryClustered),
                         fq, std::move(cubic), std::move(values),
                         std::vector<double>(s.begin() + 1, s.end() - 1));
  return {std::move(profile), fq, std::move(s), std::move(psi)};
}

DiscreteMeasure discrete_energy_minimize(const ExternalField& field, int n,
                                         int iterations, double tol) {
  if (n < 32) throw ValidationError("discrete_energy_minimize needs n >= 32");
  if (iterations < 1) throw ValidationError("iterations must be positive");

  const double width = kPi / n;
  std::vector<double> center(n);
  std::vector<double> area(n);
  for (int i = 0; i < n; ++i) {
    center[i] = (i + 0.5) * width;
    area[i] = 2.0 * kPi * (std::cos(i * width) - std::cos((i + 1) * width));
  }

  const GaussLegendre& rule = gauss_legendre(16);
  // Potential at phi of band j carrying unit mass uniformly per area.
  const auto band_potential = [&](int j, double p) {
    const double lo = j * width;
    const double hi = lo + width;
    const double dist = p < lo ? lo - p : (p > hi ? p - hi : 0.0);
    const auto g = [&](double x) { return std::sin(x) * kernel(p, x); };
    const double u = dist > width ? rule.integrate(g, lo, hi)
                                  : integrate_graded(g, lo, hi, p);
    return u / area[j];
  };

  Eigen::MatrixXd k(n, n);
  Eigen::VectorXd q(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
    const int i = static_cast<int>(row);
    const double lo = i * width;
    const double hi = lo + width;
    for (int j = 0; j < n; ++j) {
      k(i, j) = 2.0 * kPi / area[i] *
                rule.integrate(
                    [&](double p) { return std::sin(p) * band_potential(j, p); },
                    lo, hi);
    }
    q(i) = 2.0 * kPi / area[i] *
           rule.integrate(
               [&](double p) {
                 return std::sin(p) * field.evaluate(PolarAngle(p));
               },
               lo, hi);
  });
  const Eigen::MatrixXd sym = 0.5 * (k + k.transpose());

  // Largest eigenvalue by power iteration; K is symmetric positive.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    const Eigen::VectorXd kv = sym * v;
    const double next = v.dot(kv);
    v = kv.normalized();
    if (std::abs(next - lambda) <= 1e-12 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  const double lipschitz = 2.0 * lambda;

  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = area[i] / (4.0 * kPi);
  double gnorm = 0.0;
  int it = 0;
  for (; it < iterations; ++it) {
    Eigen::VectorXd next = w - (2.0 * (sym * w + q)) / lipschitz;
    project_simplex(next);
    gnorm = lipschitz * (next - w).cwiseAbs().maxCoeff();
    w = std::move(next);
    if (gnorm <= tol) {
      ++it;
      break;
    }
  }

  DiscreteMeasure m;
  m.ring_angles = center;
  m.weights.assign(w.data(), w.data() + n);
  m.ring_halfwidths.assign(n, 0.5 * width);
  const Eigen::VectorXd wp = sym * w + q;
  m.weighted_potential.assign(wp.data(), wp.data() + n);
  m.multiplier = w.dot(wp);
  m.gradient_norm = gnorm;
  m.iterations = it;
  if (gnorm > tol) {
    throw EnergyNonconvergence(
        "projected gradient did not converge within the iteration cap",
        std::move(m));
  }
  return m;
}

}  // namespace capfield
