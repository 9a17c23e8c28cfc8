#include "orbitforge/witness.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "orbitforge/errors.hpp"

namespace orbitforge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::optional<Interval> merge(std::optional<Interval> a, std::optional<Interval> b) {
  if (!a) return b;
  if (!b) return a;
  return Interval{std::min(a->lo, b->lo), std::max(a->hi, b->hi)};
}

// Hull of the supports of x, T^j x and T^{*j} x for j = 1..n.
std::optional<Interval> orbit_hull(const OperatorModel& base, const CVector& x, int n) {
  std::optional<Interval> h = x.support();
  if (!h) return h;
  CVector f = x, b = x;
  for (int j = 1; j <= n; ++j) {
    f = apply(base, f);
    b = adjoint_apply(base, b);
    h = merge(h, merge(f.support(), b.support()));
  }
  return h;
}

double max_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (cplx z : v) m = std::max(m, std::abs(z));
  return m;
}

// Largest circle of the essential approximate point spectrum.
double essential_circle(const OperatorModel& base) {
  auto d = analytic_descriptor(base);
  if (d.sigma_pi_e.kind != SetKind::circle && d.sigma_pi_e.kind != SetKind::circles)
    throw UnsupportedError("essential spectrum " + d.sigma_pi_e.describe() + " contains no circle");
  return d.sigma_pi_e.radii.back();
}

void require_unit_circle(const OperatorModel& base) {
  if (base.kind() == OpKind::dense)
    throw UnsupportedError("dense models carry no essential spectrum; the construction needs one");
  auto d = analytic_descriptor(base);
  if (!d.sigma_pi_e.contains_circle(1.0))
    throw PreconditionError("unit circle is not contained in " + d.sigma_pi_e.describe());
}

[[noreturn]] void rethrow_in_stage(int k) {
  const std::string ctx = "stage " + std::to_string(k) + ": ";
  try {
    throw;
  } catch (const DomainError& e) {
    throw DomainError(ctx + e.what(), e.limit);
  } catch (const NumericalError& e) {
    throw NumericalError(ctx + e.what(), e.residual);
  } catch (const PreconditionError& e) {
    throw PreconditionError(ctx + e.what(), e.minimal);
  }
}

std::vector<cplx> root_table(int n) {
  std::vector<cplx> z(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) z[static_cast<std::size_t>(m)] = std::polar(1.0, kTwoPi * m / n);
  return z;
}

CVector sum_of(const std::vector<std::pair<cplx, const CVector*>>& terms, Space sp) {
  std::vector<std::pair<cplx, const CVector*>> nz;
  for (const auto& t : terms)
    if (!t.second->is_zero()) nz.push_back(t);
  if (nz.empty()) return CVector(sp);
  return linear_combination(nz);
}

// Unit vectors near the n-th roots of unity for shift-type models, superposed
// with equal weights.
CVector shift_superposition(const OperatorModel& base, int n, double tau, std::int64_t& window) {
  auto roots = root_table(n);
  for (std::int64_t m = window_length_for(WindowShape::sine, tau);; m *= 2) {
    auto fam = approx_eigenvector_family_avoiding(base, roots, m, n + 1, std::nullopt, WindowShape::sine);
    bool ok = std::all_of(fam.begin(), fam.end(), [&](const ApproxEigenpair& p) { return p.residual < tau; });
    if (!ok) continue;
    window = m;
    std::vector<std::pair<cplx, const CVector*>> terms;
    for (const auto& p : fam) terms.push_back({1.0 / std::sqrt(double(n)), &p.vector});
    return linear_combination(terms);
  }
}

// Diagonal unitary: two basis vectors per root of unity, phases within tau of
// the root, with probability weights p solving sum_i p_i z_i^j = 0 for
// j = 1..n-1. Then v = sum sqrt(p_i) e_i has <T^j v, v> = 0 up to rounding.
CVector diagonal_superposition(const OperatorModel& base, int n, double tau, std::int64_t& window) {
  const PhaseRule& ph = base.phases();
  const long double two64 = std::ldexp(1.0L, 64);
  auto to_fixed = [&](double f) {
    long double t = static_cast<long double>(f) - std::floor(static_cast<long double>(f));
    return static_cast<std::uint64_t>(t * two64);
  };
  const std::uint64_t A = to_fixed(ph.alpha), B = to_fixed(ph.beta);
  std::vector<std::uint64_t> target(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) target[static_cast<std::size_t>(k)] = static_cast<std::uint64_t>((long double)k / n * two64);
  const double tau_frac = tau / kTwoPi;

  for (std::int64_t S = static_cast<std::int64_t>(std::ceil(4.0 * kTwoPi / tau));; S *= 2) {
    check_budget(S / 64, "diagonal phase search");
    struct Slot {
      std::int64_t idx = -1;
      double dist = 1e300;
    };
    std::vector<Slot> best(static_cast<std::size_t>(2 * n));
    std::uint64_t phase = B;
    for (std::int64_t i = 0; i < S; ++i, phase += A) {
      long double kf = static_cast<long double>(phase) / two64 * n;
      int k = static_cast<int>(std::llround(kf)) % n;
      auto diff = static_cast<std::int64_t>(phase - target[static_cast<std::size_t>(k)]);
      double d = std::abs(static_cast<double>(diff)) / static_cast<double>(two64);
      Slot* s = &best[static_cast<std::size_t>(2 * k)];
      if (d < s[1].dist) {
        if (d < s[0].dist) {
          s[1] = s[0];
          s[0] = {i, d};
        } else {
          s[1] = {i, d};
        }
      }
    }
    bool close = std::all_of(best.begin(), best.end(), [&](const Slot& s) { return s.idx >= 0 && s.dist < tau_frac / 2; });
    if (!close) continue;

    const int K = 2 * n;
    std::vector<cplx> z(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) z[static_cast<std::size_t>(i)] = std::polar(1.0, ph.theta(best[static_cast<std::size_t>(i)].idx));
    Eigen::MatrixXd M(2 * n - 1, K);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * n - 1);
    b(0) = 1.0;
    for (int i = 0; i < K; ++i) {
      M(0, i) = 1.0;
      cplx p = 1.0;
      for (int j = 1; j < n; ++j) {
        p *= z[static_cast<std::size_t>(i)];
        M(2 * j - 1, i) = p.real();
        M(2 * j, i) = p.imag();
      }
    }
    Eigen::VectorXd p0 = Eigen::VectorXd::Constant(K, 1.0 / K);
    Eigen::VectorXd p = p0 + M.completeOrthogonalDecomposition().solve(b - M * p0);
    if (p.minCoeff() <= 0.0) continue;

    window = S;
    std::vector<std::pair<std::int64_t, double>> entries;
    for (int i = 0; i < K; ++i) entries.push_back({best[static_cast<std::size_t>(i)].idx, p(i)});
    std::sort(entries.begin(), entries.end());
    CVector v(base.space());
    for (const auto& [idx, w] : entries) {
      cplx c = std::sqrt(w);
      v.append_run(idx, &c, 1);
    }
    return v.scaled(1.0 / v.norm());
  }
}

}  // namespace

CheckResult make_check(std::string label, double measured, double bound, bool strict) {
  CheckResult c{std::move(label), measured, bound, strict, false};
  c.pass = strict ? measured < bound : measured <= bound;
  return c;
}

bool OrbitCertificate::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

bool Tower::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

OrbitCertificate certify_orbit(const OperatorModel& base, const CVector& x, int n, double eps) {
  if (n < 1) throw DomainError("orbit length must be positive");
  std::vector<CVector> P{x};
  for (int j = 1; j <= n; ++j) P.push_back(apply(base, P.back()));
  OrbitCertificate c;
  c.x = x;
  c.n = n;
  c.eps = eps;
  c.gram = Matrix(n, n);
  for (int m = 0; m < n; ++m)
    for (int j = 0; j < n; ++j) c.gram(m, j) = inner(P[static_cast<std::size_t>(m)], P[static_cast<std::size_t>(j)]);
  for (int j = 0; j < n; ++j) c.norms.push_back(P[static_cast<std::size_t>(j)].norm());
  c.recurrence = distance(P[static_cast<std::size_t>(n)], x);

  double orth = 0.0, off = 0.0, nrm = 0.0;
  for (int j = 1; j < n; ++j) orth = std::max(orth, std::abs(c.gram(j, 0)));
  for (int m = 1; m < n; ++m)
    for (int j = 1; j < n; ++j)
      if (m != j) off = std::max(off, std::abs(c.gram(m, j)));
  for (double v : c.norms) nrm = std::max(nrm, std::abs(v - 1.0));
  c.checks.push_back(make_check("orthogonality max|<T^j x, x>|", orth, kOrthogonalityTol, false));
  c.checks.push_back(make_check("off-diagonal max|<T^m x, T^j x>|", off, eps, true));
  c.checks.push_back(make_check("norms max| ||T^j x|| - 1 |", nrm, eps, true));
  c.checks.push_back(make_check("recurrence ||T^n x - x||", c.recurrence, eps, true));
  return c;
}

CVector zero_iteration_step(const OperatorTuple& tuple, const CVector& x, int k, double r, const Subspace& M) {
  if (!tuple.base) throw UnsupportedError("the zeroing step needs a power tuple of a lazy model");
  const OperatorModel& base = *tuple.base;
  const int n = tuple.size();
  if (k < 0) throw DomainError("stage must be non-negative");
  const double h = std::ldexp(1.0, -(k + 1));
  if (std::abs(x.norm2() - (1.0 - 2 * h)) > 1e-10)
    throw PreconditionError("stage " + std::to_string(k) + ": ||x||^2 differs from 1 - 2^-k");
  std::vector<cplx> corr = joint_point(tuple, x);
  if (max_abs(corr) > r * h * (1 + 1e-9))
    throw PreconditionError("stage " + std::to_string(k) + ": correlations exceed r 2^(-k-1)");

  std::vector<cplx> mu(corr.size());
  for (std::size_t j = 0; j < corr.size(); ++j) mu[j] = -corr[j] / h;
  if (double s = max_abs(mu); s > r) {
    for (auto& z : mu) z *= r / s;  // rounding only; the precondition bounds s by r(1 + 1e-9)
  }

  std::optional<Interval> avoid = merge(orbit_hull(base, x, n), M.support());
  WeWitness u;
  try {
    u = we_membership_detail(base, n, mu, avoid, r / 4);
  } catch (const Error&) {
    rethrow_in_stage(k);
  }
  CVector xn = sum_of({{1.0, &x}, {std::sqrt(h), &u.x}}, x.space());
  if (std::abs(xn.norm2() - (1.0 - h)) > 1e-10 || std::abs(distance(xn, x) * distance(xn, x) - h) > 1e-10)
    throw NumericalError("stage " + std::to_string(k) + ": norm identities failed", std::abs(xn.norm2() - (1.0 - h)));
  return xn;
}

ZeroTupleResult zero_tuple_vector(const OperatorTuple& tuple, const Subspace& M, const CVector& start_x,
                                  int start_k, double tol) {
  if (!tuple.base) throw UnsupportedError("the zeroing iteration needs a power tuple of a lazy model");
  const double r = admissible_radius(essential_circle(*tuple.base), tuple.size()).r;
  ZeroTupleResult res;
  res.start_k = res.final_k = start_k;
  res.tail_bound = std::pow(2.0, -start_k / 2.0) / (std::sqrt(2.0) - 1.0);

  auto normalized_corr = [&](const CVector& v) {
    double n2 = v.norm2();
    return max_abs(joint_point(tuple, v)) / n2;
  };

  CVector x = start_x;
  bool done = x.norm2() > 0 && normalized_corr(x) <= tol;
  for (int k = start_k; !done; ++k) {
    if (k - start_k >= kStageCap)
      throw NumericalError("zeroing iteration did not converge within the stage cap", normalized_corr(x));
    x = zero_iteration_step(tuple, x, k, r, M);
    res.stage_norms.push_back(x.norm2());
    res.final_k = k + 1;
    done = normalized_corr(x) <= tol && 1.0 - x.norm() <= tol;
  }
  res.w = x.scaled(1.0 / x.norm());
  res.correlations = joint_point(tuple, res.w);
  res.tail_distance = distance(res.w, start_x);
  if (res.tail_distance > res.tail_bound * (1 + 1e-12) + 1e-15)
    throw NumericalError("iterate left the Cauchy tail bound", res.tail_distance);
  return res;
}

Subspace diagonal_compression_subspace(const OperatorModel& base, int n, cplx lambda, int d, double tol) {
  if (d < 1) throw DomainError("dimension must be at least 1");
  if (!base.is_lazy()) throw UnsupportedError("diagonal compression needs a lazy model");
  auto desc = analytic_descriptor(base);
  if (!desc.sigma.hull_interior_contains(lambda))
    throw DomainError("lambda is outside the interior of the spectral hull", desc.sigma.outer_radius());
  std::vector<cplx> mu(static_cast<std::size_t>(n));
  cplx p = 1.0;
  for (auto& z : mu) z = (p *= lambda);
  Subspace L;
  std::optional<Interval> avoid;
  for (int i = 0; i < d; ++i) {
    WeWitness w = we_membership_detail(base, n, mu, avoid, tol);
    avoid = merge(avoid, orbit_hull(base, w.x, n));
    L.basis.push_back(std::move(w.x));
  }
  return L;
}

OrbitCertificate almost_orthogonal_orbit(const OperatorModel& base, int n, double eps) {
  require_unit_circle(base);
  if (n < 1) throw DomainError("orbit length must be positive");
  if (!(eps > 0 && eps < 1)) throw DomainError("eps must lie in (0, 1)");
  const double T = std::max(base.norm_bound(), 1.0);
  const double Tn = std::pow(T, n);
  double tau = eps / (4.0 * std::pow(double(n), 1.5) * Tn * Tn);
  int c = 0;
  while (32.0 * std::pow(2.0, -c / 2.0) * Tn >= eps) ++c;

  for (;;) {
    std::int64_t window = 0;
    CVector v = base.kind() == OpKind::diagonal_unitary ? diagonal_superposition(base, n, tau, window)
                                                        : shift_superposition(base, n, tau, window);
    CVector x = v;
    bool corrected = false;
    if (n > 1) {
      auto tuple = OperatorTuple::power_tuple_of(base, n - 1);
      double corr = max_abs(joint_point(tuple, v));
      if (corr > kOrthogonalityTol * 1e-3) {
        const double r = admissible_radius(essential_circle(base), n - 1).r;
        if (corr > r * std::ldexp(1.0, -c - 1)) {
          tau /= 2;  // not yet inside the zeroing iteration's basin at stage c
          continue;
        }
        CVector start = v.scaled(std::sqrt(1.0 - std::ldexp(1.0, -c)));
        x = zero_tuple_vector(tuple, Subspace::trivial_constraint(), start, c, 1e-11).w;
        corrected = true;
      }
    }
    OrbitCertificate cert = certify_orbit(base, x, n, eps);
    cert.window = window;
    cert.tau = tau;
    cert.c = c;
    cert.corrected = corrected;
    return cert;
  }
}

Tower rokhlin_tower(const OperatorModel& base, int n, double eps, const CVector& u) {
  require_unit_circle(base);
  if (!(eps > 0)) throw DomainError("eps must be positive");
  const double T = base.norm_bound();
  const double thr = std::max(4.0 * T * T / (eps * eps), 1.0);
  if (!(n > thr))
    throw PreconditionError("tower height must exceed " + std::to_string(thr),
                            static_cast<std::int64_t>(std::floor(thr)) + 1);
  if (!(u.space() == base.space())) throw DimensionError("u lives in a different space");
  if (std::abs(u.norm() - 1.0) > 1e-12) throw DomainError("u must be a unit vector");

  const double sq = 1.0 / std::sqrt(double(n));
  Tower t;
  t.eps = eps;
  t.u = u;
  t.eps_prime = 0.5 * sq * (eps - 2.0 * T * sq);
  const auto zeta = root_table(n);

  // u_1..u_{n-1}: approximate eigenvectors at zeta^k beyond the support of u
  std::vector<CVector> uk;
  if (base.kind() == OpKind::diagonal_unitary) {
    std::int64_t cursor = u.support() ? u.support()->hi + 1 : 0;
    for (int k = 1; k < n; ++k) {
      for (std::int64_t m = window_length_for(WindowShape::sine, t.eps_prime);; m *= 2) {
        auto p = approx_eigenvector(base, zeta[static_cast<std::size_t>(k)], m, cursor);
        cursor += m;
        if (p.residual < t.eps_prime) {
          uk.push_back(std::move(p.vector));
          break;
        }
      }
    }
  } else {
    std::vector<cplx> lams(zeta.begin() + 1, zeta.end());
    std::int64_t m = window_length_for(WindowShape::sine, t.eps_prime);
    auto fam = approx_eigenvector_family_avoiding(base, lams, m, 1, u.support(), WindowShape::sine);
    for (auto& p : fam) {
      if (!(p.residual < t.eps_prime)) throw NumericalError("eigenvector residual above eps'", p.residual);
      uk.push_back(std::move(p.vector));
    }
  }

  for (int j = 0; j < n; ++j) {
    std::vector<std::pair<cplx, const CVector*>> terms{{sq, &u}};
    for (int k = 1; k < n; ++k)
      terms.push_back({sq * zeta[static_cast<std::size_t>((std::int64_t(j) * k) % n)], &uk[static_cast<std::size_t>(k - 1)]});
    t.w.push_back(linear_combination(terms));
  }
  uk.clear();

  t.gram_defect = gram_defect(t.w);
  {
    std::vector<std::pair<cplx, const CVector*>> terms{{-1.0, &u}};
    for (const auto& w : t.w) terms.push_back({sq, &w});
    t.mean_defect = linear_combination(terms).norm();
  }
  for (int j = 0; j < n; ++j)
    t.link_residuals.push_back(distance(apply(base, t.w[static_cast<std::size_t>(j)]), t.w[static_cast<std::size_t>((j + 1) % n)]));
  t.link_bound = sq * (1.0 + T + n * t.eps_prime);
  const double worst = *std::max_element(t.link_residuals.begin(), t.link_residuals.end());
  t.checks.push_back(make_check("gram defect max|G - I|", t.gram_defect, 1e-10, false));
  t.checks.push_back(make_check("mean identity ||n^-1/2 sum w_j - u||", t.mean_defect, 1e-12, false));
  t.checks.push_back(make_check("link residual max||T w_j - w_j+1||", worst, eps, true));
  t.checks.push_back(make_check("link residual against construction bound", worst, t.link_bound, false));
  t.checks.push_back(make_check("construction bound n^-1/2 (1 + ||T|| + n eps')", t.link_bound, eps, true));
  return t;
}

Tower rotation_tower(const OperatorModel& mult, int n, const CVector& w0, std::optional<double> eps) {
  if (mult.kind() != OpKind::multiplication) throw UnsupportedError("rotation tower needs a multiplication model");
  if (n < 2) throw DomainError("tower height must be at least 2");
  const std::int64_t N = mult.grid().nodes;
  if (N < n) throw ResolutionError("grid of " + std::to_string(N) + " nodes cannot resolve " + std::to_string(n) + " arcs");
  if (eps && !(n > kTwoPi / *eps))
    throw PreconditionError("tower height must exceed 2 pi / eps",
                            static_cast<std::int64_t>(std::floor(kTwoPi / *eps)) + 1);
  if (!(w0.space() == mult.space())) throw DimensionError("w0 lives in a different space");
  if (std::abs(w0.norm() - 1.0) > 1e-12) throw DomainError("w0 must be a unit vector");

  // s_p + t_p = 2 pi k_p / n with k_p = ceil(p n / N) in [1, n-1]; the last arc snaps down.
  std::vector<int> kp(static_cast<std::size_t>(N));
  for (std::int64_t p = 0; p < N; ++p) {
    std::int64_t k = (p * n + N - 1) / N;
    kp[static_cast<std::size_t>(p)] = static_cast<int>(std::clamp<std::int64_t>(k, 1, n - 1));
  }
  const auto zeta = root_table(n);
  const std::vector<cplx> base = w0.to_dense();
  Tower t;
  if (eps) t.eps = *eps;
  for (int j = 0; j < n; ++j) {
    std::vector<cplx> v(static_cast<std::size_t>(N));
    for (std::int64_t p = 0; p < N; ++p)
      v[static_cast<std::size_t>(p)] = base[static_cast<std::size_t>(p)] *
                                       zeta[static_cast<std::size_t>((std::int64_t(j) * kp[static_cast<std::size_t>(p)]) % n)];
    t.w.push_back(CVector::dense(v));
  }
  double sum_max = 0.0;
  for (std::int64_t p = 0; p < N; ++p) {
    cplx s = 0.0;
    for (const auto& w : t.w) s += w.data()[static_cast<std::size_t>(p)];
    sum_max = std::max(sum_max, std::abs(s));
  }
  t.mean_defect = sum_max;
  double unit = 0.0;
  for (const auto& w : t.w) unit = std::max(unit, std::abs(w.norm() - 1.0));
  for (int j = 0; j < n; ++j)
    t.link_residuals.push_back(distance(apply(mult, t.w[static_cast<std::size_t>(j)]), t.w[static_cast<std::size_t>((j + 1) % n)]));
  t.link_bound = kTwoPi / n;
  const double worst = *std::max_element(t.link_residuals.begin(), t.link_residuals.end());
  t.checks.push_back(make_check("link residual max||T w_j - w_j+1||", worst, t.link_bound, false));
  t.checks.push_back(make_check("pointwise max|sum_j w_j(z)|", sum_max, 1e-12, false));
  t.checks.push_back(make_check("unit norms max| ||w_j|| - 1 |", unit, 1e-12, false));
  return t;
}

json to_json(const CheckResult& c) {
  return {{"label", c.label}, {"measured", c.measured}, {"bound", c.bound},
          {"strict", c.strict}, {"pass", c.pass},     {"slack", c.slack()}};
}

json to_json(const OrbitCertificate& c, bool compact) {
  json checks = json::array();
  for (const auto& k : c.checks) checks.push_back(to_json(k));
  json j = {{"kind", "orbit_certificate"},
            {"params", {{"n", c.n}, {"eps", c.eps}, {"window", c.window}, {"tau", c.tau}, {"c", c.c},
                        {"corrected", c.corrected}}},
            {"checks", checks},
            {"recurrence", c.recurrence},
            {"norms", c.norms}};
  if (!compact) {
    j["x"] = to_json(c.x);
    j["gram"] = to_json(c.gram);
  }
  return j;
}

json to_json(const Tower& t, bool compact) {
  json checks = json::array();
  for (const auto& k : t.checks) checks.push_back(to_json(k));
  json j = {{"kind", "tower"},
            {"params", {{"n", t.w.size()}, {"eps", t.eps}, {"eps_prime", t.eps_prime}, {"link_bound", t.link_bound}}},
            {"checks", checks},
            {"link_residuals", t.link_residuals},
            {"gram_defect", t.gram_defect},
            {"mean_defect", t.mean_defect}};
  if (!compact) {
    json w = json::array();
    for (const auto& v : t.w) w.push_back(to_json(v));
    j["w"] = w;
    if (t.u) j["u"] = to_json(*t.u);
  }
  return j;
}

}  // namespace orbitforge
