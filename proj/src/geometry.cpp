#include "capfield/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "capfield/errors.hpp"

namespace capfield {

PolarAngle::PolarAngle(double value) : value_(value) {
  if (!std::isfinite(value) || value < 0.0 || value > kPi) {
    throw DomainError("polar angle " + std::to_string(value) +
                      " outside [0, pi]");
  }
}

PolarAngle PolarAngle::reflected() const noexcept {
  PolarAngle out;
  out.value_ = std::clamp(kPi - value_, 0.0, kPi);
  return out;
}

SphericalCap::SphericalCap(CapOrientation orientation, PolarAngle alpha)
    : orientation_(orientation), alpha_(alpha) {
  if (orientation == CapOrientation::NorthCentered && alpha.value() <= 0.0) {
    throw DomainError("north-centred cap needs 0 < alpha <= pi");
  }
  if (orientation == CapOrientation::SouthCentered && alpha.value() >= kPi) {
    throw DomainError("south-centred cap needs 0 <= alpha < pi");
  }
}

SphericalCap SphericalCap::south(double alpha) {
  return {CapOrientation::SouthCentered, PolarAngle(alpha)};
}

SphericalCap SphericalCap::north(double alpha) {
  return {CapOrientation::NorthCentered, PolarAngle(alpha)};
}

double SphericalCap::lo() const noexcept {
  return is_south() ? alpha_.value() : 0.0;
}

double SphericalCap::hi() const noexcept {
  return is_south() ? kPi : alpha_.value();
}

bool SphericalCap::contains(double phi) const noexcept {
  return phi >= lo() && phi <= hi();
}

double SphericalCap::distance_to_rim(double phi) const noexcept {
  return std::abs(phi - alpha_.value());
}

SphericalCap SphericalCap::reflected() const {
  return {is_south() ? CapOrientation::NorthCentered
                     : CapOrientation::SouthCentered,
          alpha_.reflected()};
}

bool SphericalCap::is_full_sphere() const noexcept {
  return is_south() ? alpha_.value() == 0.0 : alpha_.value() == kPi;
}

PhiGrid::PhiGrid(std::vector<double> nodes, GridSpacing spacing)
    : nodes_(std::move(nodes)), spacing_(spacing) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!(nodes_[i] >= 0.0 && nodes_[i] <= kPi)) {
      throw DomainError("grid node outside [0, pi]");
    }
    if (i > 0 && !(nodes_[i] > nodes_[i - 1])) {
      throw DomainError("grid nodes must be strictly increasing");
    }
  }
}

namespace {

double spaced(double lo, double hi, double u, GridSpacing spacing) {
  if (spacing == GridSpacing::Uniform) return lo + (hi - lo) * u;
  const double s = std::sin(0.5 * kPi * u);
  return lo + (hi - lo) * s * s;
}

}  // namespace

PhiGrid PhiGrid::interior(double lo, double hi, int n, GridSpacing spacing) {
  if (n < 1 || !(hi > lo)) throw DomainError("bad interior grid request");
  std::vector<double> nodes(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    nodes[k] = spaced(lo, hi, double(k + 1) / double(n + 1), spacing);
  }
  return {std::move(nodes), spacing};
}

PhiGrid PhiGrid::closed(double lo, double hi, int n, GridSpacing spacing) {
  if (n < 2 || !(hi > lo)) throw DomainError("bad closed grid request");
  std::vector<double> nodes(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    nodes[k] = spaced(lo, hi, double(k) / double(n - 1), spacing);
  }
  nodes.front() = lo;
  nodes.back() = hi;
  return {std::move(nodes), spacing};
}

PhiGrid PhiGrid::for_cap(const SphericalCap& cap, int n, GridSpacing spacing,
                         double guard) {
  double lo = cap.lo();
  double hi = cap.hi();
  if (cap.is_south()) {
    if (lo > 0.0) lo += guard;
  } else if (hi < kPi) {
    hi -= guard;
  }
  return interior(lo, hi, n, spacing);
}

PhiGrid PhiGrid::reflected() const {
  std::vector<double> out(nodes_.rbegin(), nodes_.rend());
  for (double& x : out) x = std::clamp(kPi - x, 0.0, kPi);
  return {std::move(out), spacing_};
}

double chordal_gamma(PolarAngle phi1, double theta1, PolarAngle phi2,
                     double theta2) noexcept {
  const double g = std::cos(phi1) * std::cos(phi2) +
                   std::sin(phi1) * std::sin(phi2) * std::cos(theta1 - theta2);
  return std::clamp(g, -1.0, 1.0);
}

double cap_area(const SphericalCap& cap) noexcept {
  const double c = std::cos(cap.alpha().value());
  return cap.is_south() ? 2.0 * kPi * (1.0 + c) : 2.0 * kPi * (1.0 - c);
}

}  // namespace capfield
