#pragma once

#include <numbers>
#include <vector>

namespace capfield {

inline constexpr double kPi = std::numbers::pi;

/// Polar angle measured from the north pole, in radians, 0 <= value <= pi.
class PolarAngle {
 public:
  constexpr PolarAngle() = default;
  /// Throws DomainError when value is outside [0, pi] or not finite.
  explicit PolarAngle(double value);

  constexpr double value() const noexcept { return value_; }
  constexpr operator double() const noexcept { return value_; }

  /// Mirror through the equatorial plane, phi -> pi - phi.
  PolarAngle reflected() const noexcept;

 private:
  double value_ = 0.0;
};

enum class CapOrientation { NorthCentered, SouthCentered };

/// Spherical cap. North-centred caps cover 0 <= phi <= alpha, south-centred
/// caps cover alpha <= phi <= pi. A south cap with alpha = 0 is the sphere.
class SphericalCap {
 public:
  SphericalCap(CapOrientation orientation, PolarAngle alpha);

  static SphericalCap south(double alpha);
  static SphericalCap north(double alpha);

  CapOrientation orientation() const noexcept { return orientation_; }
  PolarAngle alpha() const noexcept { return alpha_; }
  bool is_south() const noexcept {
    return orientation_ == CapOrientation::SouthCentered;
  }

  /// Angular interval [lo, hi] covered by the cap.
  double lo() const noexcept;
  double hi() const noexcept;

  bool contains(double phi) const noexcept;
  /// Distance in radians from phi to the rim at alpha.
  double distance_to_rim(double phi) const noexcept;

  /// The cap obtained under phi -> pi - phi.
  SphericalCap reflected() const;

  bool is_full_sphere() const noexcept;

 private:
  CapOrientation orientation_;
  PolarAngle alpha_;
};

enum class GridSpacing { Uniform, BoundaryClustered };

/// Strictly increasing nodes inside a cap's angular interval.
class PhiGrid {
 public:
  PhiGrid(std::vector<double> nodes, GridSpacing spacing);

  /// n interior nodes of [lo, hi] (endpoints excluded). BoundaryClustered
  /// places node k at lo + (hi - lo) sin^2(pi u_k / 2), u_k = (k+1)/(n+1),
  /// which crowds nodes at both ends of the interval.
  static PhiGrid interior(double lo, double hi, int n, GridSpacing spacing);
  /// Same, but including both endpoints; n >= 2.
  static PhiGrid closed(double lo, double hi, int n, GridSpacing spacing);
  /// Interior nodes of the cap with the rim guard band removed.
  static PhiGrid for_cap(const SphericalCap& cap, int n,
                         GridSpacing spacing = GridSpacing::BoundaryClustered,
                         double guard = 1e-6);

  const std::vector<double>& nodes() const noexcept { return nodes_; }
  GridSpacing spacing() const noexcept { return spacing_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  double operator[](std::size_t i) const { return nodes_[i]; }

  /// The grid under phi -> pi - phi (order restored to increasing).
  PhiGrid reflected() const;

 private:
  std::vector<double> nodes_;
  GridSpacing spacing_;
};

/// gamma = cos(phi1)cos(phi2) + sin(phi1)sin(phi2)cos(theta1 - theta2), the
/// cosine of the central angle between two points on the unit sphere.
/// Their squared chordal distance is 2 - 2 gamma.
double chordal_gamma(PolarAngle phi1, double theta1, PolarAngle phi2,
                     double theta2) noexcept;

/// Surface area of the cap.
double cap_area(const SphericalCap& cap) noexcept;

}  // namespace capfield
