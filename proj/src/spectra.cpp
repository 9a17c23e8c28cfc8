#include "orbitforge/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "orbitforge/errors.hpp"

namespace orbitforge {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLambdaTol = 1e-9;

std::vector<cplx> window_values(WindowShape shape, std::int64_t m, cplx ratio) {
  std::vector<cplx> v(static_cast<std::size_t>(m));
  const double c = shape == WindowShape::flat ? 1.0 / std::sqrt(double(m)) : std::sqrt(2.0 / double(m + 1));
  // Powers by repeated multiplication drift; recompute from the angle when unimodular.
  const double ang = std::arg(ratio);
  const double mod = std::abs(ratio);
  for (std::int64_t k = 0; k < m; ++k) {
    double amp = shape == WindowShape::flat ? c : c * std::sin(kPi * double(k + 1) / double(m + 1));
    double scale = mod == 1.0 ? 1.0 : std::pow(mod, double(k));
    v[static_cast<std::size_t>(k)] = std::polar(amp * scale, std::remainder(ang * double(k), 2 * kPi));
  }
  return v;
}

void require_lazy(const OperatorModel& op, const char* what) {
  if (!op.is_lazy()) throw UnsupportedError(std::string(what) + " needs a lazy model");
}

// Best basis index in [a, a+m) for a diagonal unitary.
std::int64_t best_phase_index(const PhaseRule& p, cplx lambda, std::int64_t a, std::int64_t m) {
  std::int64_t best = a;
  double bd = 1e300;
  for (std::int64_t k = a; k < a + m; ++k) {
    double d = std::abs(std::polar(1.0, p.theta(k)) - lambda);
    if (d < bd) {
      bd = d;
      best = k;
    }
  }
  return best;
}

}  // namespace

bool SpectralDescriptor::consistent() const {
  if (!sigma_pi_e.subset_of(sigma_e) || !sigma_e.subset_of(sigma)) return false;
  if (sigma.contains_circle(1.0) && sigma.outer_radius() <= 1.0 + 1e-12 && !unit_circle_in_pi_e()) return false;
  return true;
}

double flat_window_residual(std::int64_t m) { return std::sqrt(2.0 / double(m)); }

double sine_window_residual(std::int64_t m) { return 2.0 * std::sin(kPi / (2.0 * double(m + 1))); }

std::int64_t window_length_for(WindowShape shape, double tau) {
  if (!(tau > 0)) throw DomainError("window residual target must be positive");
  std::int64_t m;
  if (shape == WindowShape::flat) {
    m = static_cast<std::int64_t>(std::floor(2.0 / (tau * tau))) + 1;
    while (m > 2 && flat_window_residual(m - 1) < tau) --m;
    while (flat_window_residual(m) >= tau) ++m;
  } else {
    m = static_cast<std::int64_t>(std::floor(kPi / tau));
    if (m < 2) m = 2;
    while (m > 2 && sine_window_residual(m - 1) < tau) --m;
    while (sine_window_residual(m) >= tau) ++m;
  }
  return std::max<std::int64_t>(m, 2);
}

std::vector<cplx> dense_spectrum(const OperatorModel& op) {
  if (op.kind() != OpKind::dense) throw UnsupportedError("dense_spectrum needs a dense model");
  const Matrix& a = op.matrix();
  if (a.rows() > kDenseCap)
    throw ResourceError("dense model exceeds " + std::to_string(kDenseCap) + " rows", a.rows() * a.rows());
  if (a.rows() == 0) return {};
  Eigen::ComplexEigenSolver<Matrix> es(a, true);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue iteration did not converge", -1.0);
  const double tol = 1e-8 * std::max(op.norm_bound(), 1e-300);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Eigen::VectorXcd v = es.eigenvectors().col(i);
    double r = (a * v - es.eigenvalues()(i) * v).norm() / std::max(v.norm(), 1e-300);
    worst = std::max(worst, r);
  }
  if (worst > tol) throw NumericalError("eigenpair backward error too large", worst);
  std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + a.rows());
  return out;
}

SpectralDescriptor analytic_descriptor(const OperatorModel& op) {
  SpectralDescriptor d;
  switch (op.kind()) {
    case OpKind::dense:
      throw UnsupportedError("essential spectra are undefined at finite dimension");
    case OpKind::multiplication:
      throw UnsupportedError("sampled multiplication models have no catalogued descriptor");
    case OpKind::bilateral_shift:
      d.sigma = d.sigma_e = d.sigma_pi_e = SetDescriptor::circle(1.0);
      break;
    case OpKind::unilateral_shift:
      d.sigma = SetDescriptor::disk(1.0);
      d.sigma_e = d.sigma_pi_e = SetDescriptor::circle(1.0);
      break;
    case OpKind::diagonal_unitary: {
      const auto& p = op.phases();
      if (auto q = p.period()) {
        std::vector<cplx> pts;
        for (std::int64_t j = 0; j < *q; ++j) pts.push_back(std::polar(1.0, p.theta(j)));
        d.sigma = d.sigma_e = d.sigma_pi_e = SetDescriptor::finite_points(pts);
      } else {
        d.sigma = d.sigma_e = d.sigma_pi_e = SetDescriptor::circle(1.0);
      }
      break;
    }
    case OpKind::weighted_shift: {
      const auto& w = op.weights();
      double a = std::abs(w.w_minus), b = std::abs(w.w_plus);
      if (!std::isfinite(a) || !std::isfinite(b) || a == 0.0 || b == 0.0)
        throw UnsupportedError("weight limits must be finite and nonzero");
      for (double x : w.values)
        if (x == 0.0) throw UnsupportedError("explicit zero weights are not catalogued");
      double lo = std::min(a, b), hi = std::max(a, b);
      d.sigma = lo == hi ? SetDescriptor::circle(lo) : SetDescriptor::annulus(lo, hi);
      d.sigma_e = d.sigma_pi_e = SetDescriptor::circles({lo, hi});
      break;
    }
  }
  SetDescriptor h = d.sigma_e.hull();
  d.hull_contains_zero = h.contains(0.0);
  d.hull_interior = h.kind == SetKind::disk ? h : SetDescriptor::empty();
  return d;
}

double eigen_residual(const OperatorModel& op, const CVector& x, cplx lambda) {
  CVector tx = apply(op, x);
  return linear_combination({{cplx(1.0), &tx}, {-lambda, &x}}).norm();
}

ApproxEigenpair approx_eigenvector(const OperatorModel& op, cplx lambda, std::int64_t m, std::int64_t a,
                                   WindowShape shape) {
  require_lazy(op, "approx_eigenvector");
  if (m < 2) throw DomainError("window length must be at least 2");
  check_budget(m, "approx_eigenvector");
  const Space sp = op.space();
  ApproxEigenpair out;
  out.lambda = lambda;
  switch (op.kind()) {
    case OpKind::bilateral_shift:
    case OpKind::unilateral_shift: {
      if (std::abs(std::abs(lambda) - 1.0) > kLambdaTol) throw DomainError("lambda is off the unit circle");
      if (!sp.contains(a)) throw DimensionError("window start outside the space");
      out.vector = CVector::window(sp, a, window_values(shape, m, 1.0 / lambda));
      out.support_window = {a, a + m};
      break;
    }
    case OpKind::weighted_shift: {
      const auto& w = op.weights();
      const double r = std::abs(lambda);
      double wl;
      if (std::abs(r - std::abs(w.w_plus)) <= kLambdaTol) {
        if (a < w.end()) throw DomainError("window must lie where the weights equal the upper limit");
        wl = w.w_plus;
      } else if (std::abs(r - std::abs(w.w_minus)) <= kLambdaTol) {
        if (a + m > w.start) throw DomainError("window must lie where the weights equal the lower limit");
        wl = w.w_minus;
      } else {
        throw DomainError("|lambda| matches neither weight limit");
      }
      out.vector = CVector::window(sp, a, window_values(shape, m, wl / lambda));
      out.support_window = {a, a + m};
      break;
    }
    case OpKind::diagonal_unitary: {
      if (!analytic_descriptor(op).sigma_pi_e.contains(lambda, kLambdaTol))
        throw DomainError("lambda is off the descriptor");
      std::int64_t k = best_phase_index(op.phases(), lambda, a, m);
      out.vector = CVector::basis(sp, k);
      out.support_window = {k, k + 1};
      break;
    }
    default: throw UnsupportedError("no approximate eigenvectors for this model kind");
  }
  out.residual = eigen_residual(op, out.vector, lambda);
  return out;
}

std::vector<ApproxEigenpair> approx_eigenvector_family_avoiding(const OperatorModel& op,
                                                                const std::vector<cplx>& lambdas,
                                                                std::int64_t m, std::int64_t margin,
                                                                std::optional<Interval> avoid,
                                                                WindowShape shape) {
  require_lazy(op, "approx_eigenvector_family");
  if (margin < 0) throw DomainError("margin must be non-negative");
  const std::int64_t count = static_cast<std::int64_t>(lambdas.size());
  check_budget(count * (m + margin), "approx_eigenvector_family");
  std::int64_t right = 0;
  std::int64_t left = 0;
  if (avoid) {
    right = avoid->hi + margin;
    left = avoid->lo - margin;
  }
  if (op.kind() == OpKind::weighted_shift) {
    right = std::max(right, op.weights().end());
    left = std::min(left, op.weights().start);
  }
  std::vector<ApproxEigenpair> out;
  out.reserve(lambdas.size());
  for (cplx lam : lambdas) {
    bool lower = op.kind() == OpKind::weighted_shift &&
                 std::abs(std::abs(lam) - std::abs(op.weights().w_plus)) > kLambdaTol;
    if (lower) {
      out.push_back(approx_eigenvector(op, lam, m, left - m, shape));
      left -= m + margin;
    } else {
      out.push_back(approx_eigenvector(op, lam, m, right, shape));
      right += m + margin;
    }
  }
  return out;
}

std::vector<ApproxEigenpair> approx_eigenvector_family(const OperatorModel& op, const std::vector<cplx>& lambdas,
                                                       std::int64_t m, std::int64_t margin,
                                                       const Subspace& constraints, WindowShape shape) {
  if (!constraints.basis.empty() && !(constraints.basis.front().space() == op.space()))
    throw DimensionError("constraints live in a different space");
  return approx_eigenvector_family_avoiding(op, lambdas, m, margin, constraints.support(), shape);
}

ApproxEigenpair orbit_to_approx_eigenvector(const OperatorModel& op, const CVector& x, cplx lambda, int n) {
  if (n < 1) throw DomainError("orbit length must be positive");
  if (lambda == cplx{}) throw DomainError("lambda must be nonzero");
  std::vector<CVector> orbit;
  orbit.reserve(static_cast<std::size_t>(n));
  orbit.push_back(x);
  for (int j = 1; j < n; ++j) orbit.push_back(apply(op, orbit.back()));
  std::vector<std::pair<cplx, const CVector*>> terms;
  const cplx inv = 1.0 / lambda;
  cplx c = 1.0;
  for (int j = 0; j < n; ++j) {
    terms.push_back({c, &orbit[static_cast<std::size_t>(j)]});
    c *= inv;
  }
  CVector y = linear_combination(terms);
  ApproxEigenpair out;
  out.lambda = lambda;
  out.raw_norm = y.norm();
  if (out.raw_norm == 0.0) throw DegenerateError("orbit sum vanishes", 0);
  out.vector = y.scaled(1.0 / out.raw_norm);
  out.residual = eigen_residual(op, out.vector, lambda);
  if (auto s = out.vector.support()) out.support_window = *s;
  return out;
}

json to_json(const SetDescriptor& s) {
  json p = json::object();
  switch (s.kind) {
    case SetKind::empty: break;
    case SetKind::points: {
      json pts = json::array();
      for (cplx z : s.points) pts.push_back({z.real(), z.imag()});
      p["points"] = pts;
      break;
    }
    case SetKind::circle:
    case SetKind::disk: p["radius"] = s.radii.at(0); break;
    case SetKind::circles: p["radii"] = s.radii; break;
    case SetKind::annulus:
      p["inner"] = s.radii.at(0);
      p["outer"] = s.radii.at(1);
      break;
  }
  return {{"kind", to_string(s.kind)}, {"params", p}};
}

json to_json(const SpectralDescriptor& d) {
  return {{"sigma", to_json(d.sigma)},
          {"sigma_e", to_json(d.sigma_e)},
          {"sigma_pi_e", to_json(d.sigma_pi_e)},
          {"hull_contains_zero", d.hull_contains_zero},
          {"hull_interior", to_json(d.hull_interior)}};
}

}  // namespace orbitforge
