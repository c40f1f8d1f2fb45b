#include "capfield/support.hpp"

#include <boost/math/tools/roots.hpp>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "capfield/errors.hpp"
#include "capfield/quadrature.hpp"

namespace capfield {

namespace {

constexpr double kScanLo = 1e-6;
constexpr double kScanHi = kPi - 1e-6;
constexpr int kScanPoints = 256;

double cap_denominator(double alpha) { return kPi - alpha + std::sin(alpha); }

void require_pointcharge(double q, double h) {
  if (!(q > 0.0) || !(h > 0.0) || !std::isfinite(q) || !std::isfinite(h)) {
    throw ValidationError("point charge needs finite q > 0 and h > 0");
  }
}

void require_quadratic(double a, double b, double c) {
  if (!ExternalField::quadratic_admissible(a, b, c)) {
    throw ValidationError("inadmissible quadratic coefficients");
  }
}

// First sign change of residual on the scan grid, refined by TOMS 748.
// Returns nothing when the residual keeps one sign.
std::optional<SupportSolution> scan_and_solve(
    const std::function<double(double)>& residual, double tol) {
  const double step = (kScanHi - kScanLo) / (kScanPoints - 1);
  double x0 = kScanLo;
  double r0 = residual(x0);
  for (int i = 1; i < kScanPoints; ++i) {
    const double x1 = kScanLo + step * i;
    const double r1 = residual(x1);
    if (r0 == 0.0 || (r0 < 0.0) != (r1 < 0.0)) {
      SupportSolution sol;
      sol.method = SupportMethod::TranscendentalRoot;
      if (r0 == 0.0) {
        sol.alpha0 = PolarAngle(x0);
        sol.bracket = {x0, x0};
      } else {
        std::uintmax_t max_iter = 200;
        const auto [a, b] = boost::math::tools::toms748_solve(
            residual, x0, x1, r0, r1,
            boost::math::tools::eps_tolerance<double>(52), max_iter);
        const double ra = std::abs(residual(a));
        const double rb = std::abs(residual(b));
        sol.alpha0 = PolarAngle(ra <= rb ? a : b);
        sol.bracket = {a, b};
        sol.iterations = static_cast<int>(max_iter);
      }
      sol.residual = std::abs(residual(sol.alpha0));
      if (sol.residual > tol) {
        throw ConvergenceError("support equation residual above tolerance",
                               sol.alpha0, sol.residual);
      }
      return sol;
    }
    x0 = x1;
    r0 = r1;
  }
  return std::nullopt;
}

SupportSolution full_sphere(double robin_constant, double residual_at_zero) {
  SupportSolution sol;
  sol.alpha0 = PolarAngle(0.0);
  sol.robin_constant = robin_constant;
  sol.method = SupportMethod::FullSphere;
  sol.residual = residual_at_zero;
  return sol;
}

// Newton polish of a polynomial root, coefficients highest degree first.
double polish(const std::vector<double>& coeffs, double x) {
  for (int it = 0; it < 8; ++it) {
    double p = 0.0;
    double dp = 0.0;
    for (double c : coeffs) {
      dp = dp * x + p;
      p = p * x + c;
    }
    if (dp == 0.0) break;
    const double dx = p / dp;
    x -= dx;
    if (std::abs(dx) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) {
      break;
    }
  }
  return x;
}

// Real roots of the monic cubic x^3 + b x^2 + c x + d.
std::vector<double> cubic_real_roots(double b, double c, double d) {
  const double shift = b / 3.0;
  const double p = c - b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  std::vector<double> roots;
  if (disc < 0.0) {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double theta = std::acos(std::clamp(3.0 * q / (p * m), -1.0, 1.0)) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(m * std::cos(theta - 2.0 * kPi * k / 3.0) - shift);
    }
  } else {
    const double sq = std::sqrt(disc);
    roots.push_back(std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq) - shift);
  }
  return roots;
}

}  // namespace

std::string_view to_string(SupportMethod method) noexcept {
  switch (method) {
    case SupportMethod::TranscendentalRoot: return "TranscendentalRoot";
    case SupportMethod::FFunctionalMin: return "FFunctionalMin";
    case SupportMethod::FullSphere: return "FullSphere";
  }
  return "unknown";
}

double ffunctional_numeric(const ExternalField& field, PolarAngle alpha,
                           double tol) {
  const double a = alpha.value();
  if (!(a < kPi)) throw DomainError("F-functional needs alpha < pi");
  const double ca = std::cos(a);
  const double k = std::sqrt(1.0 - ca);
  // Q(phi) {1 + (2/pi)[k/s - atan(k/s)]} sin(phi) dphi = 2 Q B(s) ds.
  const RealFunction integrand = [&](double s) {
    const double b = s + (2.0 / kPi) * (k - s * std::atan2(k, s));
    return 2.0 * field.at_x3(ca - s * s) * b;
  };
  const double integral =
      integrate_adaptive(integrand, 0.0, std::sqrt(1.0 + ca), tol);
  return kPi / (2.0 * cap_denominator(a)) * (2.0 + integral);
}

double ffunctional_pointcharge(double q, double h, PolarAngle alpha) {
  const double a = alpha.value();
  // atan(cot(a/2) (h-1)/(h+1)), continuous at a = 0.
  const double arc =
      std::atan2((h - 1.0) * std::cos(0.5 * a), (h + 1.0) * std::sin(0.5 * a));
  return kPi / cap_denominator(a) *
         (1.0 + q * (h + 1.0) / (2.0 * h) * (1.0 - a / kPi) -
          q * (h - 1.0) / (kPi * h) * arc);
}

double ffunctional_quadratic(double a, double b, double c, PolarAngle alpha) {
  const double al = alpha.value();
  const double x = std::cos(al);
  const double poly = 32.0 * a * x * x * x + 4.0 * (2.0 * a + 9.0 * b) * x * x +
                      4.0 * (9.0 * c - 5.0 * a) * x + 4.0 * a - 36.0 * b +
                      36.0 * c;
  return (std::tan(0.5 * al) * poly + 12.0 * (a + 3.0 * c) * (kPi - al) +
          36.0 * kPi) /
         (36.0 * cap_denominator(al));
}

SupportSolution minimize_ffunctional(const std::function<double(double)>& F,
                                     double lo, double hi, double tol) {
  if (!(lo < hi) || lo < 0.0 || hi > kPi || !(tol > 0.0)) {
    throw ValidationError("minimize_ffunctional needs 0 <= lo < hi <= pi");
  }
  constexpr int kCoarse = 65;
  std::vector<double> xs(kCoarse);
  std::vector<double> fs(kCoarse);
  double scale = 0.0;
  for (int i = 0; i < kCoarse; ++i) {
    xs[i] = lo + (hi - lo) * i / (kCoarse - 1);
    fs[i] = F(xs[i]);
    scale = std::max(scale, std::abs(fs[i]));
  }
  const auto m = static_cast<int>(
      std::min_element(fs.begin(), fs.end()) - fs.begin());
  const double noise = 1e-13 * std::max(scale, 1.0);
  for (int i = 1; i < kCoarse; ++i) {
    const bool rises_before_min = i <= m && fs[i] > fs[i - 1] + noise;
    const bool falls_after_min = i > m && fs[i] < fs[i - 1] - noise;
    if (rises_before_min || falls_after_min) {
      throw NonUnimodalError(
          "F-functional is not unimodal near alpha in [" +
              std::to_string(xs[i - 1]) + ", " + std::to_string(xs[i]) + "]",
          xs[i - 1], xs[i]);
    }
  }

  constexpr double kInvPhi = 0.6180339887498948482;
  double a = xs[std::max(m - 1, 0)];
  double b = xs[std::min(m + 1, kCoarse - 1)];
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = F(x1);
  double f2 = F(x2);
  int iterations = 0;
  while (b - a > tol && iterations < 500) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = F(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = F(x2);
    }
    ++iterations;
  }
  double best = f1 <= f2 ? x1 : x2;
  double best_f = std::min(f1, f2);
  // The probes never sample lo itself. A boundary minimum can be so flat
  // that rounding noise steers the search off lo, so values within a few
  // ulps of the best one count as ties.
  if (m <= 1) {
    const double f_lo = F(lo);
    const double tie = 8.0 * std::numeric_limits<double>::epsilon() *
                       std::max(std::abs(f_lo), std::abs(best_f));
    if (f_lo <= best_f + tie) {
      best = lo;
      best_f = f_lo;
    }
  }

  if (lo == 0.0 && best <= tol) {
    SupportSolution sol = full_sphere(F(0.0), 0.0);
    sol.iterations = iterations;
    sol.bracket = {a, b};
    return sol;
  }
  SupportSolution sol;
  sol.alpha0 = PolarAngle(best);
  sol.robin_constant = best_f;
  sol.method = SupportMethod::FFunctionalMin;
  sol.residual = b - a;
  sol.iterations = iterations;
  sol.bracket = {a, b};
  return sol;
}

double pointcharge_support_residual(double q, double h, double alpha) {
  return ffunctional_pointcharge(q, h, PolarAngle(alpha)) -
         q * (h + 1.0) / (h * h + 1.0 - 2.0 * h * std::cos(alpha));
}

double northpole_support_residual(double q, double alpha) {
  return kPi * (1.0 - std::cos(alpha)) -
         q * (kPi - alpha) * std::cos(alpha) - q * std::sin(alpha);
}

double quadratic_support_residual(double a, double b, double alpha) {
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  const double p = kPi - alpha;
  const double lhs = 8.0 * a * c * c * c * (2.0 * s + 3.0 * p) +
                     c * c * ((2.0 * a + 9.0 * b) * s - 6.0 * (2.0 * a - 3.0 * b) * p) +
                     0.5 * std::sin(2.0 * alpha) * (9.0 * b - 22.0 * a) +
                     3.0 * (2.0 * a - 3.0 * b) * p + 9.0 * kPi;
  const double rhs =
      9.0 * c * (kPi + (2.0 * a + b) * p) - 2.0 * s * (2.0 * a - 9.0 * b);
  return lhs - rhs;
}

SupportSolution solve_support_pointcharge(double q, double h) {
  require_pointcharge(q, h);
  if (h == 1.0) {
    throw ValidationError(
        "h = 1 puts the charge on the sphere; use the north-pole solver");
  }
  const auto residual = [q, h](double a) {
    return pointcharge_support_residual(q, h, a);
  };
  const double at_zero = residual(0.0);
  const GoncharHeights g = gonchar_heights(q);
  if (h >= g.h_plus || h <= g.h_minus) {
    return full_sphere(ffunctional_pointcharge(q, h, PolarAngle(0.0)), at_zero);
  }
  constexpr double kTol = 1e-12;
  std::optional<SupportSolution> sol;
  if (residual(kScanLo) >= 0.0 && at_zero < 0.0) {
    // Just inside a Gonchar threshold the root sits below the scan start.
    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        residual, 0.0, kScanLo, boost::math::tools::eps_tolerance<double>(52),
        max_iter);
    SupportSolution s;
    s.method = SupportMethod::TranscendentalRoot;
    s.alpha0 = PolarAngle(std::abs(residual(a)) <= std::abs(residual(b)) ? a : b);
    s.bracket = {a, b};
    s.iterations = static_cast<int>(max_iter);
    s.residual = std::abs(residual(s.alpha0));
    sol = s;
  } else {
    sol = scan_and_solve(residual, kTol);
  }
  if (!sol) {
    return full_sphere(ffunctional_pointcharge(q, h, PolarAngle(0.0)), at_zero);
  }
  sol->robin_constant = ffunctional_pointcharge(q, h, sol->alpha0);
  return *sol;
}

SupportSolution solve_support_northpole(double q) {
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw ValidationError("north-pole charge needs finite q > 0");
  }
  const auto residual = [q](double a) { return northpole_support_residual(q, a); };
  auto sol = scan_and_solve(residual, 1e-12);
  if (!sol) {
    throw ConvergenceError("north-pole support equation has no root",
                           0.0, residual(kScanLo));
  }
  const double a = sol->alpha0;
  sol->robin_constant = (kPi + q * (kPi - a)) / cap_denominator(a);
  return *sol;
}

SupportSolution solve_support_quadratic(double a, double b, double c) {
  require_quadratic(a, b, c);
  const auto residual = [a, b](double al) {
    return quadratic_support_residual(a, b, al);
  };
  auto sol = scan_and_solve(residual, 1e-10);
  if (!sol) {
    return full_sphere(ffunctional_quadratic(a, b, c, PolarAngle(0.0)), 0.0);
  }
  sol->robin_constant = ffunctional_quadratic(a, b, c, sol->alpha0);
  return *sol;
}

GoncharHeights gonchar_heights(double q) {
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw ValidationError("Gonchar heights need finite q > 0");
  }
  // 1/q = (h+1)/(h-1)^2 - 1/h  <=>  h^3 - 2h^2 + (1-3q) h + q = 0.
  const std::vector<double> cubic{1.0, -2.0, 1.0 - 3.0 * q, q};
  double h_plus = 0.0;
  for (double r : cubic_real_roots(-2.0, 1.0 - 3.0 * q, q)) {
    h_plus = std::max(h_plus, r);
  }
  h_plus = polish(cubic, h_plus);
  // 1/q = (h+1)/(1-h)^2 - 1  <=>  (1+q) h^2 - (2+3q) h + 1 = 0; the small
  // root in the cancellation-free form.
  const double h_minus =
      2.0 / ((2.0 + 3.0 * q) + std::sqrt(9.0 * q * q + 8.0 * q));
  const auto sgp = [q](double h) {
    return 1.0 / q - ((h + 1.0) / ((h - 1.0) * (h - 1.0)) - 1.0 / h);
  };
  const auto sgp1 = [q](double h) {
    return 1.0 / q - ((h + 1.0) / ((1.0 - h) * (1.0 - h)) - 1.0);
  };
  return {h_minus, h_plus, std::abs(sgp1(h_minus)), std::abs(sgp(h_plus))};
}

SupportSolution solve_support(const ExternalField& field) {
  const double offset = field.offset();
  const auto add_offset = [offset](SupportSolution s) {
    s.robin_constant += offset;
    return s;
  };
  if (!field.mirrored()) {
    const auto& def = field.definition();
    if (std::holds_alternative<ZeroField>(def)) {
      return full_sphere(1.0 + offset, 0.0);
    }
    if (const auto* p = std::get_if<PointChargeField>(&def)) {
      return add_offset(p->h == 1.0 ? solve_support_northpole(p->q)
                                    : solve_support_pointcharge(p->q, p->h));
    }
    if (const auto* p = std::get_if<QuadraticField>(&def)) {
      return add_offset(solve_support_quadratic(p->a, p->b, p->c));
    }
  }
  return minimize_ffunctional(
      [&field](double a) { return ffunctional_numeric(field, PolarAngle(a)); },
      0.0, kPi - 1e-3, 1e-9);
}

}  // namespace capfield
