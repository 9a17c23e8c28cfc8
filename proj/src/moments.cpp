#include "orbitforge/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "orbitforge/errors.hpp"

namespace orbitforge {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx ipow(cplx z, int k) {
  cplx r(1.0, 0.0);
  for (int i = 0; i < k; ++i) r *= z;
  return r;
}
}  // namespace

double AtomicMeasure::mass() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

cplx AtomicMeasure::moment(int k) const {
  cplx s{};
  for (const auto& a : atoms) s += a.weight * ipow(a.lambda, k);
  return s;
}

double AtomicMeasure::max_moment_error(const std::vector<cplx>& target) const {
  double e = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k)
    e = std::max(e, std::abs(moment(static_cast<int>(k) + 1) - target[k]));
  return e;
}

double sup_norm(const std::vector<cplx>& v) {
  double m = 0.0;
  for (cplx z : v) m = std::max(m, std::abs(z));
  return m;
}

RadiusBudget admissible_radius(double rho, int n) {
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (n < 1) throw DomainError("n must be at least 1");
  double b = 1.0 / rho;
  for (int k = 2; k <= n; ++k) b = 2.0 * b + std::pow(rho, -k);
  return {rho, n, b, 1.0 / b};
}

AtomicMeasure circle_moment_match(double rho, const std::vector<cplx>& eps, MatchTrace* trace) {
  const int n = static_cast<int>(eps.size());
  const RadiusBudget rb = admissible_radius(rho, n);
  const double norm = sup_norm(eps);
  if (norm > rb.r)
    throw DomainError("moment vector norm " + std::to_string(norm) + " exceeds admissible radius " +
                          std::to_string(rb.r),
                      rb.r);
  AtomicMeasure mu;
  mu.rho = rho;
  MatchTrace tr;
  for (int m = 1; m <= n; ++m) {
    const cplx resid = eps[static_cast<std::size_t>(m - 1)] - mu.moment(m);
    if (resid == cplx{}) {
      ++tr.skipped_stages;
      continue;
    }
    double phi = std::arg(resid) / kTwoPi;
    if (phi < 0) phi += 1.0;
    const double w = std::abs(resid) / (m * std::pow(rho, m));
    for (int j = 1; j <= m; ++j) mu.atoms.push_back({std::polar(rho, kTwoPi * (phi + j) / m), w});
  }
  tr.prepadding_mass = mu.mass();
  tr.mass_bound = rb.b * norm;
  const double d = 1.0 - tr.prepadding_mass;
  if (d < -1e-12) throw DomainError("stage masses exceed one", rb.r);
  if (d > 0.0) {
    for (int j = 1; j <= n + 1; ++j)
      mu.atoms.push_back({std::polar(rho, kTwoPi * j / (n + 1)), d / (n + 1)});
  }
  tr.padding = std::max(d, 0.0);
  if (trace) *trace = tr;
  return mu;
}

PoissonAtoms poisson_atoms(cplx u, double rho, int m_atoms, int n_report) {
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (std::abs(u) >= rho) throw DomainError("Poisson centre must lie inside the circle", rho);
  if (m_atoms < 1) throw DomainError("need at least one atom");
  const double a = std::abs(u), phase = std::arg(u);
  PoissonAtoms out;
  out.measure.rho = rho;
  double total = 0.0;
  std::vector<double> p(static_cast<std::size_t>(m_atoms));
  for (int j = 0; j < m_atoms; ++j) {
    const double th = kTwoPi * j / m_atoms;
    p[static_cast<std::size_t>(j)] = (rho * rho - a * a) / (rho * rho - 2.0 * rho * a * std::cos(th - phase) + a * a);
    total += p[static_cast<std::size_t>(j)];
  }
  for (int j = 0; j < m_atoms; ++j)
    out.measure.atoms.push_back({std::polar(rho, kTwoPi * j / m_atoms), p[static_cast<std::size_t>(j)] / total});
  for (int k = 1; k <= n_report; ++k) out.moment_error.push_back(std::abs(out.measure.moment(k) - ipow(u, k)));
  return out;
}

namespace {

double default_inner_radius(const SetDescriptor& K) {
  switch (K.kind) {
    case SetKind::circle:
    case SetKind::circles: return K.radii.back();
    case SetKind::annulus: return 0.5 * (K.radii[0] + K.radii[1]);
    case SetKind::disk: return 0.9 * K.radii[0];
    default: throw UnsupportedError("region " + K.describe() + " has no extractable inner circle");
  }
}

// Smallest circle of K strictly outside radius rho, used to relocate atoms.
double relocation_radius(const SetDescriptor& K, double rho) {
  switch (K.kind) {
    case SetKind::circle:
    case SetKind::circles:
      for (double r : K.radii)
        if (r > rho) return r;
      break;
    case SetKind::annulus:
      if (K.radii[1] > rho) return std::max(K.radii[0], rho * 1.0000001);
      break;
    case SetKind::disk: return K.radii[0];
    default: break;
  }
  throw UnsupportedError("no circle of " + K.describe() + " encloses radius " + std::to_string(rho));
}

}  // namespace

AtomicMeasure hull_moment_match(const SetDescriptor& K, const std::vector<cplx>& eps, double delta,
                                std::optional<double> rho_opt) {
  if (!K.hull_interior_contains(0.0)) throw UnsupportedError("0 is not interior to the hull of " + K.describe());
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  const double rho = rho_opt ? *rho_opt : default_inner_radius(K);
  if (!(rho > 0.0) || rho > K.hull().radii[0] + 1e-12)
    throw UnsupportedError("circle of radius " + std::to_string(rho) + " is not inside the hull");
  const int n = static_cast<int>(eps.size());
  AtomicMeasure base = circle_moment_match(rho, eps);
  AtomicMeasure out;
  bool same_circle = true;
  for (const auto& a : base.atoms) {
    if (K.contains(a.lambda)) {
      out.atoms.push_back(a);
      continue;
    }
    const double R = relocation_radius(K, rho);
    same_circle = false;
    for (int m = 32;; m *= 2) {
      PoissonAtoms pa = poisson_atoms(a.lambda, R, m, n);
      double err = *std::max_element(pa.moment_error.begin(), pa.moment_error.end());
      if (err <= 0.5 * delta) {
        for (const auto& b : pa.measure.atoms) out.atoms.push_back({b.lambda, b.weight * a.weight});
        break;
      }
      if (m > (1 << 22)) throw NumericalError("Poisson relocation did not reach the tolerance", err);
    }
  }
  if (same_circle) out.rho = rho;
  return out;
}

}  // namespace orbitforge
