#include "capfield/fields.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "capfield/errors.hpp"

// pchip.hpp calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

namespace capfield {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// x3 range used by the closed-form fields away from their singularities.
constexpr double kAnalyticReach = 2.0;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

ExternalField::ExternalField(Definition def) : def_(std::move(def)) {}

ExternalField ExternalField::zero() { return ExternalField(ZeroField{}); }

ExternalField ExternalField::point_charge(double q, double h) {
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw ValidationError("point charge needs q > 0");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ValidationError("point charge needs h > 0");
  }
  return ExternalField(PointChargeField{q, h});
}

bool ExternalField::quadratic_admissible(double a, double b,
                                         double c) noexcept {
  return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && a > 0.0 &&
         b > 0.0 && 4.0 * a * a < b * b && b * b <= 4.0 * a * c;
}

ExternalField ExternalField::quadratic(double a, double b, double c) {
  if (!quadratic_admissible(a, b, c)) {
    throw ValidationError(
        "quadratic field needs a, b > 0 and 4a^2 < b^2 <= 4ac");
  }
  return ExternalField(QuadraticField{a, b, c});
}

ExternalField ExternalField::tabulated(std::vector<double> x3,
                                       std::vector<double> values) {
  if (x3.size() != values.size()) {
    throw ValidationError("tabulated field: column lengths differ");
  }
  if (x3.size() < 4) {
    throw ValidationError("tabulated field needs at least 4 samples");
  }
  for (std::size_t i = 0; i < x3.size(); ++i) {
    if (!std::isfinite(x3[i]) || !std::isfinite(values[i])) {
      throw ValidationError("tabulated field: non-finite sample");
    }
    if (i > 0 && !(x3[i] > x3[i - 1])) {
      throw ValidationError("tabulated field: x3 must be strictly increasing");
    }
  }
  ExternalField field(TabulatedField{x3, values});
  auto spline = boost::math::interpolators::pchip<std::vector<double>>(
      std::move(x3), std::move(values));
  field.interp_ = std::make_shared<const Interpolant>(
      [spline = std::move(spline)](double x) { return spline(x); });
  return field;
}

ExternalField ExternalField::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open field table " + path.string());
  std::vector<double> xs;
  std::vector<double> qs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto comma = t.find(',');
    if (comma == std::string::npos) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": expected two comma-separated columns");
    }
    double x = 0.0;
    double q = 0.0;
    const bool ok = parse_double(trim(t.substr(0, comma)), x) &&
                    parse_double(trim(t.substr(comma + 1)), q);
    if (!ok) {
      if (xs.empty() && lineno == 1) continue;  // header
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": not a number");
    }
    xs.push_back(x);
    qs.push_back(q);
  }
  try {
    return tabulated(std::move(xs), std::move(qs));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

FieldKind ExternalField::kind() const noexcept {
  return std::visit(Overloaded{
                        [](const ZeroField&) { return FieldKind::Zero; },
                        [](const PointChargeField&) {
                          return FieldKind::PointCharge;
                        },
                        [](const QuadraticField&) {
                          return FieldKind::Quadratic;
                        },
                        [](const TabulatedField&) {
                          return FieldKind::Tabulated;
                        },
                    },
                    def_);
}

std::pair<double, double> ExternalField::domain() const noexcept {
  const auto base = std::visit(
      Overloaded{
          [](const ZeroField&) {
            return std::pair{-kAnalyticReach, kAnalyticReach};
          },
          [](const PointChargeField& p) {
            return std::pair{-kAnalyticReach, (1.0 + p.h * p.h) / (2.0 * p.h)};
          },
          [](const QuadraticField&) {
            return std::pair{-kAnalyticReach, kAnalyticReach};
          },
          [](const TabulatedField& t) {
            return std::pair{t.x3.front(), t.x3.back()};
          },
      },
      def_);
  if (!mirrored_) return base;
  return {-base.second, -base.first};
}

bool ExternalField::upper_end_singular() const noexcept {
  return !mirrored_ && kind() == FieldKind::PointCharge;
}

bool ExternalField::lower_end_singular() const noexcept {
  return mirrored_ && kind() == FieldKind::PointCharge;
}

double ExternalField::base_at(double x) const {
  return std::visit(
      Overloaded{
          [](const ZeroField&) { return 0.0; },
          [x](const PointChargeField& p) {
            const double d2 = 1.0 + p.h * p.h - 2.0 * p.h * x;
            if (!(d2 > 0.0)) {
              throw DomainError("point-charge field is singular at x3 = " +
                                std::to_string(x));
            }
            return p.q / std::sqrt(d2);
          },
          [x](const QuadraticField& p) { return (p.a * x + p.b) * x + p.c; },
          [this, x](const TabulatedField&) { return (*interp_)(x); },
      },
      def_);
}

double ExternalField::at_x3(double x3) const {
  const auto [lo, hi] = domain();
  const bool below = lower_end_singular() ? !(x3 > lo) : !(x3 >= lo);
  const bool above = upper_end_singular() ? !(x3 < hi) : !(x3 <= hi);
  if (below || above) {
    throw DomainError("field evaluated at x3 = " + std::to_string(x3) +
                      " outside its domain");
  }
  return base_at(mirrored_ ? -x3 : x3) + offset_;
}

double ExternalField::evaluate(PolarAngle phi) const {
  // cos(0) is exactly 1, so the h = 1 charge at the north pole is caught.
  return at_x3(std::cos(phi.value()));
}

ExternalField ExternalField::shifted(double constant) const {
  ExternalField out = *this;
  out.offset_ += constant;
  return out;
}

ExternalField ExternalField::reflected() const {
  ExternalField out = *this;
  out.mirrored_ = !mirrored_;
  return out;
}

std::string ExternalField::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const ZeroField&) { os << "zero"; },
                 [&](const PointChargeField& p) {
                   os << "point-charge(q=" << p.q << ", h=" << p.h << ")";
                 },
                 [&](const QuadraticField& p) {
                   os << "quadratic(a=" << p.a << ", b=" << p.b
                      << ", c=" << p.c << ")";
                 },
                 [&](const TabulatedField& t) {
                   os << "tabulated(" << t.x3.size() << " samples)";
                 },
             },
             def_);
  if (offset_ != 0.0) os << " + " << offset_;
  if (mirrored_) os << " [reflected]";
  return os.str();
}

SouthCapHypothesisReport validate_south_cap_hypotheses(
    const ExternalField& field, int n) {
  if (n < 3) throw ValidationError("hypothesis check needs n >= 3");
  SouthCapHypothesisReport report;
  std::vector<double> x(static_cast<std::size_t>(n));
  std::vector<double> q(x.size());
  double scale = 0.0;
  for (int k = 0; k < n; ++k) {
    x[k] = -1.0 + 2.0 * k / double(n - 1);
    try {
      q[k] = field.at_x3(x[k]);
    } catch (const DomainError&) {
      // Only a charge sitting on the sphere lands here; Q blows up to +inf.
      q[k] = std::numeric_limits<double>::infinity();
    }
    if (std::isfinite(q[k])) scale = std::max(scale, std::abs(q[k]));
    if (q[k] < 0.0) report.nonnegative = false;
  }
  const double tol = 1e-12 * std::max(scale, 1.0);

  for (int k = 1; k < n && report.monotone; ++k) {
    if (q[k] < q[k - 1] - tol) {
      report.monotone = false;
      report.violation = HypothesisViolation::Monotonicity;
      report.triple = std::array{x[k - 1], x[k], x[k]};
    }
  }
  for (int k = 1; k + 1 < n && report.convex; ++k) {
    if (!std::isfinite(q[k + 1])) continue;
    if (q[k] > 0.5 * (q[k - 1] + q[k + 1]) + tol) {
      report.convex = false;
      if (report.violation == HypothesisViolation::None) {
        report.violation = HypothesisViolation::Convexity;
        report.triple = std::array{x[k - 1], x[k], x[k + 1]};
      }
    }
  }
  report.passed = report.monotone && report.convex;
  if (!report.nonnegative) {
    report.warnings.emplace_back(
        "field takes negative values; the cap formulas only use Q in C^2, "
        "but energy-problem admissibility assumes Q >= 0");
  }
  return report;
}

}  // namespace capfield
