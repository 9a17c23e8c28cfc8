#include "orbitforge/regions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace orbitforge {

const char* to_string(SetKind k) {
  switch (k) {
    case SetKind::empty: return "empty";
    case SetKind::points: return "points";
    case SetKind::circle: return "circle";
    case SetKind::circles: return "circles";
    case SetKind::annulus: return "annulus";
    case SetKind::disk: return "disk";
  }
  return "?";
}

SetDescriptor SetDescriptor::circles(std::vector<double> r) {
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  if (r.size() == 1) return circle(r[0]);
  return {SetKind::circles, std::move(r), {}};
}

bool SetDescriptor::contains(cplx z, double tol) const {
  const double a = std::abs(z);
  switch (kind) {
    case SetKind::empty: return false;
    case SetKind::points:
      return std::any_of(points.begin(), points.end(), [&](cplx p) { return std::abs(p - z) <= tol; });
    case SetKind::circle:
    case SetKind::circles:
      return std::any_of(radii.begin(), radii.end(), [&](double r) { return std::abs(a - r) <= tol; });
    case SetKind::annulus: return a >= radii[0] - tol && a <= radii[1] + tol;
    case SetKind::disk: return a <= radii[0] + tol;
  }
  return false;
}

bool SetDescriptor::contains_circle(double rho, double tol) const {
  switch (kind) {
    case SetKind::empty:
    case SetKind::points: return false;
    default: return contains(cplx(rho, 0.0), tol);
  }
}

double SetDescriptor::outer_radius() const {
  switch (kind) {
    case SetKind::empty: return 0.0;
    case SetKind::points: {
      double m = 0.0;
      for (cplx p : points) m = std::max(m, std::abs(p));
      return m;
    }
    default: return radii.back();
  }
}

SetDescriptor SetDescriptor::hull() const {
  switch (kind) {
    case SetKind::empty:
    case SetKind::points: return *this;
    default: return disk(outer_radius());
  }
}

bool SetDescriptor::hull_interior_contains(cplx z) const {
  SetDescriptor h = hull();
  if (h.kind != SetKind::disk) return false;
  return std::abs(z) < h.radii[0];
}

bool SetDescriptor::subset_of(const SetDescriptor& o, double tol) const {
  switch (kind) {
    case SetKind::empty: return true;
    case SetKind::points:
      return std::all_of(points.begin(), points.end(), [&](cplx p) { return o.contains(p, tol); });
    case SetKind::circle:
    case SetKind::circles:
      return std::all_of(radii.begin(), radii.end(), [&](double r) { return o.contains_circle(r, tol); });
    case SetKind::annulus:
      if (o.kind == SetKind::disk) return radii[1] <= o.radii[0] + tol;
      if (o.kind == SetKind::annulus) return radii[0] >= o.radii[0] - tol && radii[1] <= o.radii[1] + tol;
      return false;
    case SetKind::disk:
      return o.kind == SetKind::disk && radii[0] <= o.radii[0] + tol;
  }
  return false;
}

std::string SetDescriptor::describe() const {
  std::ostringstream os;
  os << to_string(kind) << "(";
  if (kind == SetKind::points) {
    for (std::size_t i = 0; i < points.size(); ++i)
      os << (i ? ", " : "") << points[i].real() << (points[i].imag() < 0 ? "" : "+") << points[i].imag() << "i";
  } else {
    for (std::size_t i = 0; i < radii.size(); ++i) os << (i ? ", " : "") << radii[i];
  }
  os << ")";
  return os.str();
}

}  // namespace orbitforge
