#pragma once
#include <string>
#include <vector>

#include "orbitforge/cvector.hpp"

namespace orbitforge {

// Closed planar sets used by the spectral catalogue. "circles" is a finite
// union of centred circles (a weighted shift with distinct weight limits has
// two essential circles).
enum class SetKind { empty, points, circle, circles, annulus, disk };

const char* to_string(SetKind k);

struct SetDescriptor {
  SetKind kind = SetKind::empty;
  std::vector<double> radii;  // circle: {r}; circles: sorted radii; annulus: {r1, r2}; disk: {r}
  std::vector<cplx> points;

  static SetDescriptor empty() { return {}; }
  static SetDescriptor finite_points(std::vector<cplx> p) { return {SetKind::points, {}, std::move(p)}; }
  static SetDescriptor circle(double r) { return {SetKind::circle, {r}, {}}; }
  static SetDescriptor circles(std::vector<double> r);
  static SetDescriptor annulus(double r1, double r2) { return {SetKind::annulus, {r1, r2}, {}}; }
  static SetDescriptor disk(double r) { return {SetKind::disk, {r}, {}}; }

  bool contains(cplx z, double tol = 1e-12) const;
  // True when the whole centred circle of radius rho lies in the set.
  bool contains_circle(double rho, double tol = 1e-12) const;
  double outer_radius() const;
  // Polynomial convex hull: circles, annuli and disks fill to a disk.
  SetDescriptor hull() const;
  // Membership in the interior of the hull.
  bool hull_interior_contains(cplx z) const;
  // Region inclusion on the descriptor algebra (conservative: false when unsure).
  bool subset_of(const SetDescriptor& other, double tol = 1e-12) const;
  std::string describe() const;
};

}  // namespace orbitforge
