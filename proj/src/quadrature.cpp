#include "capfield/quadrature.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <queue>

#include "capfield/errors.hpp"

namespace capfield {

GaussLegendre::GaussLegendre(int n) {
  if (n < 1) throw ValidationError("Gauss-Legendre order must be >= 1");
  nodes_.resize(static_cast<std::size_t>(n));
  weights_.resize(nodes_.size());
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes_[i] = -x;
    nodes_[n - 1 - i] = x;
    weights_[i] = w;
    weights_[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes_[n / 2] = 0.0;
}

const GaussLegendre& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const GaussLegendre>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<const GaussLegendre>(n);
  return *slot;
}

double integrate_adaptive(const RealFunction& f, double a, double b,
                          double tol, int max_depth) {
  if (a == b) return 0.0;
  using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
  struct Panel {
    double a, b, value, error;
    int depth;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  const auto panel = [&](double lo, double hi, int depth) {
    double err = 0.0;
    const double v = Kronrod::integrate(f, lo, hi, 0, 0.0, &err);
    // Boost reports the estimate on [-1, 1]; rescale to the panel.
    return Panel{lo, hi, v, err * 0.5 * std::abs(hi - lo), depth};
  };
  // Global adaptive bisection of the panel with the largest error estimate.
  std::priority_queue<Panel> heap;
  heap.push(panel(a, b, 0));
  double total = heap.top().value;
  double error = heap.top().error;
  const std::size_t max_panels = std::size_t{1} << std::min(max_depth, 20);
  while (error > tol && heap.size() < max_panels) {
    const Panel worst = heap.top();
    if (worst.depth >= max_depth) break;
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = panel(worst.a, mid, worst.depth + 1);
    const Panel right = panel(mid, worst.b, worst.depth + 1);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  total = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(total) || error > tol) {
    throw ConvergenceError("adaptive quadrature did not reach tolerance",
                           total, error);
  }
  return total;
}

double richardson_derivative(const RealFunction& fn, double x, double lo,
                             double hi, double h0, int levels) {
  const double room_lo = x - lo;
  const double room_hi = hi - x;
  levels = std::clamp(levels, 1, 8);
  std::array<double, 8> table{};

  if (std::min(room_lo, room_hi) >= h0) {
    // Central: error series in h^2, h^4, ...
    double h = h0;
    for (int k = 0; k < levels; ++k, h *= 0.5) {
      table[k] = (fn(x + h) - fn(x - h)) / (2.0 * h);
    }
    for (int m = 1; m < levels; ++m) {
      const double factor = std::pow(4.0, m);
      for (int k = levels - 1; k >= m; --k) {
        table[k] = (factor * table[k] - table[k - 1]) / (factor - 1.0);
      }
    }
    return table[levels - 1];
  }

  // One-sided second-order stencil: error series in h^2, h^3, h^4, ...
  const double dir = room_hi >= room_lo ? 1.0 : -1.0;
  const double room = std::max(room_lo, room_hi);
  double h = std::min(h0, 0.5 * room);
  if (!(h > 0.0)) {
    throw DomainError("no room for a finite-difference stencil");
  }
  const double f0 = fn(x);
  for (int k = 0; k < levels; ++k, h *= 0.5) {
    const double f1 = fn(x + dir * h);
    const double f2 = fn(x + dir * 2.0 * h);
    table[k] = dir * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
  }
  for (int m = 1; m < levels; ++m) {
    const double factor = std::pow(2.0, m + 1);
    for (int k = levels - 1; k >= m; --k) {
      table[k] = (factor * table[k] - table[k - 1]) / (factor - 1.0);
    }
  }
  return table[levels - 1];
}

double integrate_sqrt_singular(const SingularIntegrand& f, double tol) {
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
  if (!(f.hi > f.lo)) return 0.0;
  const bool lower = f.singular_end == SingularEnd::Lower;
  const double e = lower ? f.lo : f.hi;
  const double ce = std::cos(e);
  const double mid = 0.5 * (f.lo + f.hi);
  const double cm = std::cos(mid);

  // Near the singular end: |cos e - cos t| = s^2, dt = 2 s ds / sin t, so
  // the integrand becomes 2 smooth(t) / sin t, bounded for e in (0, pi).
  const double s_max = std::sqrt(std::abs(ce - cm));
  const RealFunction near = [&](double s) {
    const double c = lower ? ce - s * s : ce + s * s;
    const double t = std::acos(std::clamp(c, -1.0, 1.0));
    const double st = std::sin(t);
    if (st == 0.0) {
      // Only reachable at e in {0, pi}, where sin t ~ sqrt(2) s.
      return 2.0 * f.smooth_part(t) / (std::sqrt(2.0) * std::max(s, 1e-300));
    }
    return 2.0 * f.smooth_part(t) / st;
  };
  const RealFunction far = [&](double t) {
    return f.smooth_part(t) / std::sqrt(std::abs(ce - std::cos(t)));
  };
  const double part_near = integrate_adaptive(near, 0.0, s_max, 0.5 * tol);
  const double part_far = lower ? integrate_adaptive(far, mid, f.hi, 0.5 * tol)
                                : integrate_adaptive(far, f.lo, mid, 0.5 * tol);
  return part_near + part_far;
}

QuadratureRule graded_rule(double lo, double hi, double target, int levels) {
  const GaussLegendre& rule = gauss_legendre(16);
  QuadratureRule out;
  const auto add_panel = [&](double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int j = 0; j < rule.size(); ++j) {
      out.nodes.push_back(mid + half * rule.nodes()[j]);
      out.weights.push_back(half * rule.weights()[j]);
    }
  };
  const auto side = [&](double far) {
    const double len = far - target;
    double outer = 1.0;
    for (int j = 0; j < levels; ++j) {
      const double inner = 0.5 * outer;
      const double a = target + inner * len;
      const double b = target + outer * len;
      add_panel(std::min(a, b), std::max(a, b));
      outer = inner;
    }
    // x = target + w v^4 on the innermost panel.
    const double w = outer * len;
    for (int j = 0; j < rule.size(); ++j) {
      const double v = 0.5 + 0.5 * rule.nodes()[j];
      const double v2 = v * v;
      out.nodes.push_back(target + w * v2 * v2);
      out.weights.push_back(0.5 * rule.weights()[j] * 4.0 * std::abs(w) * v2 * v);
    }
  };
  target = std::clamp(target, lo, hi);
  if (target > lo) side(lo);
  if (target < hi) side(hi);
  return out;
}

namespace detail {

namespace {

// Largest x3 at which field-derived inner quantities may be sampled.
double field_upper(const ExternalField& field) {
  const auto [lo, hi] = field.domain();
  (void)lo;
  if (field.upper_end_singular()) {
    return hi - 1e-3 * std::max(hi - 1.0, 1e-6);
  }
  return hi;
}

}  // namespace

double south_gamma_from_cos(const ExternalField& field, double c,
                            const AbelOptions& opts) {
  const GaussLegendre& rule = gauss_legendre(opts.inner_nodes);
  const RealFunction inner = [&](double cc) {
    const double w = 1.0 + cc;
    return rule.integrate(
        [&](double s) { return field.at_x3(cc - s * s * w); }, 0.0, 1.0);
  };
  const auto [dlo, dhi] = field.domain();
  const double lo = field.lower_end_singular() ? -1.0 : std::max(dlo, -2.0);
  const double hi = std::min(field_upper(field), 2.0);
  const double m = inner(c);
  const double dm = richardson_derivative(inner, c, lo, hi,
                                          opts.derivative_step,
                                          opts.richardson_levels);
  return -(m + 2.0 * (1.0 + c) * dm) / (4.0 * kPi);
}

double south_g_from_cos(const ExternalField& field, double c,
                        const AbelOptions& opts) {
  return std::sqrt(std::max(1.0 - c, 0.0)) *
         south_gamma_from_cos(field, c, opts);
}

double south_F_scaled_from_cos(const RealFunction& g_of_cos, double cos_alpha,
                               double c, double d, const AbelOptions& opts) {
  const GaussLegendre& rule = gauss_legendre(opts.outer_nodes);
  // s = sin(theta): g~ carries a sqrt(1 - u) factor that makes the plain
  // s-integrand non-smooth at s = 1 on the full sphere.
  const auto outer = [&](double cc) {
    const double dd = cos_alpha - cc;
    return rule.integrate(
        [&](double th) {
          const double st = std::sin(th);
          return g_of_cos(cc + st * st * dd) * std::cos(th);
        },
        0.0, 0.5 * kPi);
  };
  const double hi = cos_alpha + 0.5 * (1.0 - cos_alpha);
  const double k = outer(c);
  const double dk = richardson_derivative(outer, c, -1.0, hi,
                                          opts.derivative_step,
                                          opts.richardson_levels);
  return (2.0 / kPi) * (k - 2.0 * d * dk);
}

double full_sphere_F_scaled_from_cos(const RealFunction& gamma_of_cos,
                                     double c, double d,
                                     const AbelOptions& opts) {
  const GaussLegendre& rule = gauss_legendre(opts.outer_nodes);
  const auto reduced = [&](double cc) {
    const double dd = 1.0 - cc;
    return rule.integrate(
        [&](double th) {
          const double st = std::sin(th);
          const double ct = std::cos(th);
          return gamma_of_cos(cc + st * st * dd) * ct * ct;
        },
        0.0, 0.5 * kPi);
  };
  const double l = reduced(c);
  const double dl = richardson_derivative(reduced, c, -1.0, 1.0,
                                          opts.derivative_step,
                                          opts.richardson_levels);
  return (4.0 / kPi) * std::sqrt(std::max(d, 0.0)) * (l - d * dl);
}

}  // namespace detail

namespace {

constexpr double kRimExclusion = 1e-9;

void require_interior(double angle, const SphericalCap& cap, const char* what) {
  if (!(angle > cap.lo() && angle < cap.hi()) &&
      !(cap.is_south() && angle == kPi) &&
      !(!cap.is_south() && angle == 0.0)) {
    throw DomainError(std::string(what) + ": angle outside the cap interior");
  }
}

}  // namespace

double abel_stage_g(const ExternalField& field, PolarAngle t,
                    const SphericalCap& cap, const AbelOptions& opts) {
  require_interior(t, cap, "abel_stage_g");
  if (cap.is_south()) {
    return detail::south_g_from_cos(field, std::cos(t.value()), opts);
  }
  // North: g_N[Q](t) = -g_S[Q(pi - .)](pi - t).
  return -detail::south_g_from_cos(field.reflected(), -std::cos(t.value()),
                                   opts);
}

double abel_stage_F(const RealFunction& g, PolarAngle phi,
                    const SphericalCap& cap, const AbelOptions& opts) {
  require_interior(phi, cap, "abel_stage_F");
  if (cap.distance_to_rim(phi) < kRimExclusion) {
    throw DomainError("abel_stage_F: too close to the cap rim");
  }
  const double alpha = cap.alpha().value();
  const double p = phi.value();
  if (cap.is_south()) {
    const RealFunction g_of_cos = [&](double u) {
      return g(std::acos(std::clamp(u, -1.0, 1.0)));
    };
    const double d =
        2.0 * std::sin(0.5 * (p + alpha)) * std::sin(0.5 * (p - alpha));
    return detail::south_F_scaled_from_cos(g_of_cos, std::cos(alpha),
                                           std::cos(p), d, opts) /
           std::sqrt(d);
  }
  // North: F_N[g](phi) = -F_S[g(pi - .)](pi - phi) on the cap pi - alpha.
  const RealFunction g_of_cos = [&](double u) {
    return g(kPi - std::acos(std::clamp(u, -1.0, 1.0)));
  };
  const double beta = kPi - alpha;
  const double pr = kPi - p;
  const double d = 2.0 * std::sin(0.5 * (pr + beta)) * std::sin(0.5 * (pr - beta));
  return -detail::south_F_scaled_from_cos(g_of_cos, std::cos(beta),
                                          std::cos(pr), d, opts) /
         std::sqrt(d);
}

}  // namespace capfield
