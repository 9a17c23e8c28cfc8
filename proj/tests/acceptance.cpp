// Acceptance run: one PASS/FAIL line per criterion. Tolerances are pinned below.
#include <gmpxx.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "orbitforge/errors.hpp"
#include "orbitforge/flatten.hpp"
#include "orbitforge/moments.hpp"
#include "orbitforge/moments_exact.hpp"
#include "orbitforge/spectra.hpp"

#ifndef ORBITFORGE_CLI
#error "ORBITFORGE_CLI must name the command-line binary"
#endif

using namespace orbitforge;

namespace {

constexpr double kPi = std::numbers::pi;

// criterion 1
constexpr int kMomentTrials = 500;
constexpr double kFloatMomentTol = 1e-10;
constexpr double kOracleMomentTol = 1e-12;
constexpr double kRadiusRelTol = 1e-14;
// criterion 2
constexpr double kStageNormTol = 1e-10;
constexpr double kZeroCorrTol = 1e-8;
// criterion 3
constexpr std::int64_t kCertBudget = 1000000;
constexpr double kOrthTol = 1e-8;
// criterion 4
constexpr double kGramTol = 1e-10;
constexpr double kMeanTol = 1e-12;
// criterion 5
constexpr double kRotationTol = 1e-12;
// criterion 6
constexpr double kCompressionRelTol = 1e-9;
constexpr double kCompressionAbsTol = 1e-13;
// criterion 7
constexpr double kJ2Tol = 1e-6;
constexpr double kNormSlack = 1e-8;

struct Verdict {
  bool pass = true;
  std::ostringstream note;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<void(Verdict&)>& body) {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.note << " [exception: " << e.what() << "]";
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= limit_s) {
    v.pass = false;
    v.note << " [over time]";
  }
  if (!v.pass) ++failures;
  std::printf("%s criterion %d: %s |%s | %.2f s (limit %.0f s)\n", v.pass ? "PASS" : "FAIL", id, title,
              v.note.str().c_str(), secs, limit_s);
  std::fflush(stdout);
}

double max_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (cplx z : v) m = std::max(m, std::abs(z));
  return m;
}

CVector e(std::int64_t i) { return CVector::basis(Space::integers(), i); }

void c1_moments(Verdict& v) {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> pick_n(1, 6), pick_rho(0, 2);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const double rhos[] = {0.5, 1.0, 2.0};
  int exact_bad = 0, mass_bad = 0;
  double float_err = 0.0, oracle_err = 0.0;
  for (int t = 0; t < kMomentTrials; ++t) {
    const int n = pick_n(rng);
    const double rho = rhos[pick_rho(rng)];
    const double r = admissible_radius(rho, n).r;
    std::vector<cplx> eps(static_cast<std::size_t>(n));
    for (auto& z : eps) {
      do z = cplx(unif(rng), unif(rng));
      while (std::abs(z) > 1.0);
      z *= 0.999 * r;
    }
    std::vector<QComplex> q;
    for (cplx z : eps) q.push_back(to_qcomplex(z));
    auto m = circle_moment_match_exact(mpq_class(rho), q);
    for (int k = 1; k <= n; ++k) {
      QComplex d = m.moment(k) - q[static_cast<std::size_t>(k - 1)];
      if (d.re != 0 || d.im != 0) ++exact_bad;
    }
    if (m.mass() != 1) ++mass_bad;
    // independent evaluation from the atoms themselves
    auto atoms = m.to_float();
    for (int k = 1; k <= n; ++k) {
      cplx s{};
      for (const auto& a : atoms.atoms) s += a.weight * std::pow(a.lambda, k);
      oracle_err = std::max(oracle_err, std::abs(s - eps[static_cast<std::size_t>(k - 1)]));
    }
    auto f = circle_moment_match(rho, eps);
    float_err = std::max(float_err, f.max_moment_error(eps));
  }
  double radius_err = 0.0;
  for (int n = 1; n <= 12; ++n) {
    double want = 1.0 / (std::ldexp(1.0, n) - 1.0);
    radius_err = std::max(radius_err, std::abs(admissible_radius(1.0, n).r - want) / want);
  }
  v.note << " exact moment misses " << exact_bad << ", mass misses " << mass_bad << ", float err " << float_err
         << ", atom oracle err " << oracle_err << ", radius rel err " << radius_err;
  v.require(exact_bad == 0, "exact moments");
  v.require(mass_bad == 0, "exact mass");
  v.require(float_err <= kFloatMomentTol, "float moments");
  v.require(oracle_err <= kOracleMomentTol, "atom oracle");
  v.require(radius_err <= kRadiusRelTol, "radius recurrence");
}

void c2_prop_basic(Verdict& v) {
  auto s = OperatorModel::bilateral_shift();
  const int n = 4;
  auto tup = OperatorTuple::power_tuple_of(s, n);
  double corr = 0.0, stage_dev = 0.0;
  auto check_w = [&](const CVector& w) {
    CVector t = w;
    for (int j = 1; j <= n; ++j) {
      t = apply(s, t, 1);
      corr = std::max(corr, std::abs(inner(t, w)));
    }
  };
  // from zero
  auto z0 = zero_tuple_vector(tup, Subspace::trivial_constraint(), CVector(Space::integers()), 0, kZeroCorrTol);
  v.require(z0.stage_norms.size() >= 10, "ten stages");
  for (std::size_t m = 1; m <= 10 && m <= z0.stage_norms.size(); ++m)
    stage_dev = std::max(stage_dev, std::abs(z0.stage_norms[m - 1] - (1.0 - std::ldexp(1.0, -static_cast<int>(m)))));
  check_w(z0.w);
  // from a stage-4 vector with nonzero correlations
  const int k = 4;
  const double r = admissible_radius(1.0, n).r;
  const double target = r * std::ldexp(1.0, -k - 2);
  // x = a (e0 + t e1): <S x, x> = a^2 t, ||x||^2 = a^2 (1 + t^2) = 1 - 2^-k
  const double h = 1.0 - std::ldexp(1.0, -k);
  const double t = target / h;  // gives <S x, x> = h t / (1 + t^2) <= target
  const double a2 = h / (1.0 + t * t);
  CVector x = (e(0) + e(1).scaled(t)).scaled(std::sqrt(a2));
  auto zk = zero_tuple_vector(tup, Subspace::trivial_constraint(), x, k, kZeroCorrTol);
  for (std::size_t i = 0; i < zk.stage_norms.size() && i < 10; ++i) {
    int m = k + 1 + static_cast<int>(i);
    stage_dev = std::max(stage_dev, std::abs(zk.stage_norms[i] - (1.0 - std::ldexp(1.0, -m))));
  }
  check_w(zk.w);
  const double tail = distance(zk.w, x);
  const double tail_bound = 3.0 * std::pow(2.0, -k / 2.0 - 1.0);
  v.note << " stages " << z0.stage_norms.size() << "/" << zk.stage_norms.size() << ", stage norm dev " << stage_dev
         << ", max |<S^j w, w>| " << corr << ", tail(k=4) " << tail << " <= " << tail_bound;
  v.require(zk.stage_norms.size() >= 1, "k=4 start runs stages");
  v.require(stage_dev <= kStageNormTol, "stage norms");
  v.require(corr <= kZeroCorrTol, "correlations");
  v.require(tail <= tail_bound, "tail");
  v.require(std::abs(z0.w.norm() - 1.0) <= 1e-12 && std::abs(zk.w.norm() - 1.0) <= 1e-12, "unit w");
}

void c3_certificate(Verdict& v) {
  ::setenv("ORBITFORGE_WINDOW_BUDGET", std::to_string(kCertBudget).c_str(), 1);
  const int n = 8;
  const double eps = 0.1;
  auto s = OperatorModel::bilateral_shift();
  OrbitCertificate cert;
  try {
    cert = almost_orthogonal_orbit(s, n, eps);
  } catch (...) {
    ::unsetenv("ORBITFORGE_WINDOW_BUDGET");
    throw;
  }
  ::unsetenv("ORBITFORGE_WINDOW_BUDGET");
  std::vector<CVector> orb{cert.x};
  for (int j = 1; j <= n; ++j) orb.push_back(apply(s, orb.back(), 1));
  double orth = 0.0, off = 0.0, norms = 0.0;
  for (int j = 1; j < n; ++j) orth = std::max(orth, std::abs(inner(orb[static_cast<std::size_t>(j)], orb[0])));
  for (int m = 1; m < n; ++m)
    for (int j = 1; j < n; ++j)
      if (m != j) off = std::max(off, std::abs(inner(orb[static_cast<std::size_t>(m)], orb[static_cast<std::size_t>(j)])));
  for (int j = 0; j < n; ++j) norms = std::max(norms, std::abs(orb[static_cast<std::size_t>(j)].norm() - 1.0));
  const double rec = distance(orb[static_cast<std::size_t>(n)], orb[0]);
  const auto entries = static_cast<std::int64_t>(n) * cert.window;
  v.note << " orth " << orth << " (slack " << kOrthTol - orth << "), off-diag " << off << " (slack " << eps - off
         << "), norms " << norms << " (slack " << eps - norms << "), recurrence " << rec << " (slack " << eps - rec
         << "), entries " << entries;
  v.require(orth <= kOrthTol, "orthogonality");
  v.require(off < eps, "off-diagonal");
  v.require(norms < eps, "norms");
  v.require(rec < eps, "recurrence");
  v.require(entries <= kCertBudget && cert.x.nnz() <= kCertBudget, "budget");
}

void c4_rokhlin(Verdict& v) {
  auto s = OperatorModel::bilateral_shift();
  const double eps = 0.25;
  bool refused = false;
  std::int64_t minimal = 0;
  try {
    rokhlin_tower(s, 64, eps, e(0));
  } catch (const PreconditionError& err) {
    refused = true;
    minimal = err.minimal;
  }
  const int n = 65;
  auto t = rokhlin_tower(s, n, eps, e(0));
  double links = 0.0;
  for (int j = 0; j < n; ++j)
    links = std::max(links, distance(apply(s, t.w[static_cast<std::size_t>(j)]), t.w[static_cast<std::size_t>((j + 1) % n)]));
  const double gd = gram_defect(t.w);
  std::vector<std::pair<cplx, const CVector*>> terms;
  CVector u = e(0);
  terms.push_back({-1.0, &u});
  for (const auto& w : t.w) terms.push_back({1.0 / std::sqrt(double(n)), &w});
  const double mean = linear_combination(terms).norm();
  v.note << " n=64 refused " << (refused ? "yes" : "no") << " (minimal " << minimal << "), gram " << gd << ", mean "
         << mean << ", max link " << links;
  v.require(refused && minimal == 65, "n=64 refusal");
  v.require(gd <= kGramTol, "gram");
  v.require(mean <= kMeanTol, "mean identity");
  v.require(links < eps, "links");
}

void c5_rotation(Verdict& v) {
  const std::int64_t N = 4096;
  auto mult = OperatorModel::multiplication({N, {}});
  auto w0 = CVector::dense(std::vector<cplx>(N, 1.0 / std::sqrt(double(N))));
  double worst_ratio = 0.0, sum_max = 0.0, unit = 0.0;
  for (int n : {8, 64, 512}) {
    auto t = rotation_tower(mult, n, w0);
    std::vector<cplx> sum(N, 0.0);
    for (int j = 0; j < n; ++j) {
      const auto& w = t.w[static_cast<std::size_t>(j)];
      auto dw = w.to_dense();
      for (std::int64_t p = 0; p < N; ++p) sum[static_cast<std::size_t>(p)] += dw[static_cast<std::size_t>(p)];
      unit = std::max(unit, std::abs(w.norm() - 1.0));
      double link = distance(apply(mult, w), t.w[static_cast<std::size_t>((j + 1) % n)]);
      worst_ratio = std::max(worst_ratio, link / (2 * kPi / n));
    }
    sum_max = std::max(sum_max, max_abs(sum));
  }
  v.note << " max link / (2 pi/n) " << worst_ratio << ", max |sum_j w_j(z)| " << sum_max << ", unit norm dev "
         << unit;
  v.require(worst_ratio <= 1.0, "links");
  v.require(sum_max <= kRotationTol, "pointwise sum");
  v.require(unit <= kRotationTol, "unit norms");
}

void c6_flat(Verdict& v) {
  auto s = OperatorModel::bilateral_shift();
  const double eps = 0.25;
  const int d = 3;
  auto r = flat_subspace(s, eps, d);
  const auto& sch = r.schedule;
  bool schedule_ok = sch.s.size() == static_cast<std::size_t>(d);
  const mpq_class E(eps), K(sch.K);
  for (int k = 0; k < d && schedule_ok; ++k) {
    const std::int64_t den = (std::int64_t{1} << (k + 3)) * (k + 1);
    mpq_class er = E / den;
    schedule_ok = sch.threshold_den[static_cast<std::size_t>(k)] == den &&
                  sch.thresholds[static_cast<std::size_t>(k)] == eps / static_cast<double>(den) &&
                  mpq_class(static_cast<double>(sch.s[static_cast<std::size_t>(k)])) * er * er > 16 * K * K;
  }
  // direct compressions at sampled times
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::int64_t> pick(1, r.exact_zero_beyond - 1);
  std::vector<std::int64_t> times{1, 2, 3};
  for (auto t : sch.times) times.push_back(t);
  for (int i = 0; i < 24; ++i) times.push_back(pick(rng));
  double mism = 0.0;
  for (auto n : times) {
    Matrix c = compress(s, r.L, static_cast<int>(n));
    double nrm = c.jacobiSvd().singularValues()(0);
    double rep = r.norm[static_cast<std::size_t>(n - 1)];
    mism = std::max(mism, std::abs(nrm - rep) / std::max(kCompressionAbsTol / kCompressionRelTol, rep));
  }
  double beyond = 0.0;
  for (auto n : {r.exact_zero_beyond, r.exact_zero_beyond + 1, r.exact_zero_beyond + 1000})
    beyond = std::max(beyond, compress(s, r.L, static_cast<int>(n)).cwiseAbs().maxCoeff());
  double stage_ratio = 0.0;
  for (std::size_t i = 0; i < r.norm.size(); ++i)
    stage_ratio = std::max(stage_ratio, r.norm[i] / std::ldexp(eps, -r.stage[i]));
  v.note << " s = " << sch.s[0] << "/" << sch.s[1] << "/" << sch.s[2] << ", horizon " << r.exact_zero_beyond - 1
         << ", sup norm " << r.sup_norm << ", stagewise ratio " << stage_ratio << ", direct-vs-report rel "
         << mism << ", beyond span " << beyond;
  v.require(r.all_pass(), "construction checks");
  v.require(r.sup_norm <= eps, "sup norm");
  v.require(stage_ratio <= 1.0, "stagewise");
  v.require(schedule_ok, "schedule exact");
  v.require(mism <= kCompressionRelTol, "direct compressions");
  v.require(beyond == 0.0, "exact zero beyond span");
}

void c7_nrange(Verdict& v) {
  Matrix j2 = Matrix::Zero(2, 2);
  j2(0, 1) = 1.0;
  auto op = OperatorModel::dense(j2);
  const double w = numerical_radius(op);
  auto b = nr_boundary(op, 720);
  double hmax = *std::max_element(b.support_values.begin(), b.support_values.end());
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  double sampled = 0.0;
  for (int i = 0; i < 400000; ++i) {
    Eigen::Vector2cd x(cplx(g(rng), g(rng)), cplx(g(rng), g(rng)));
    x.normalize();
    sampled = std::max(sampled, std::abs(x.dot(j2 * x)));
  }
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Matrix a(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) a(i, j) = cplx(g(rng), g(rng));
    const double wa = numerical_radius(OperatorModel::dense(a));
    worst = std::max(worst, spectral_norm(a) / (2 * wa));
  }
  v.note << " w(J2) " << w << ", boundary max " << hmax << ", sampled " << sampled << ", max ||T||/2w "
         << worst;
  v.require(std::abs(w - 0.5) <= kJ2Tol && std::abs(hmax - 0.5) <= kJ2Tol, "J2 radius");
  v.require(std::abs(sampled - w) <= kJ2Tol, "sampling oracle");
  v.require(worst <= 1.0 + kNormSlack, "norm vs radius");
}

void c8_reverse(Verdict& v) {
  auto s = OperatorModel::bilateral_shift();
  double prev = HUGE_VAL;
  bool mono = true, below = true;
  for (int k : {4, 8, 16}) {
    auto cert = almost_orthogonal_orbit(s, k, 1.0 / k);
    auto y = orbit_to_approx_eigenvector(s, cert.x, 1.0, k);
    const double res = distance(apply(s, y.vector), y.vector) / y.vector.norm();
    v.note << " k=" << k << ": " << res << " (3/k " << 3.0 / k << ")";
    mono = mono && res < prev;
    below = below && res < 3.0 / k;
    prev = res;
  }
  v.require(mono, "monotone");
  v.require(below, "below 3/k");
}

void c9_refusals(Verdict& v) {
  auto diag = OperatorModel::diagonal_unitary({std::numbers::sqrt2 - 1.0, 0.0});
  auto prof = weak_decay_probe(diag, {e(0), e(3)}, 32);
  const std::string cmd = std::string("\"") + ORBITFORGE_CLI +
                          "\" flatten --model diagonal-unitary --eps 0.25 --d 3 >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  bool dense_refused = false;
  try {
    almost_orthogonal_orbit(OperatorModel::dense(Matrix::Identity(4, 4)), 4, 0.1);
  } catch (const UnsupportedError&) {
    dense_refused = true;
  } catch (const PreconditionError&) {
    dense_refused = true;
  }
  v.note << " diagonal decays: " << (prof.decays ? "yes" : "no") << ", flatten exit " << code
         << ", dense orbit refused: " << (dense_refused ? "yes" : "no");
  v.require(!prof.decays, "decay probe");
  v.require(code == 2, "flatten exit 2");
  v.require(dense_refused, "dense refusal");
}

}  // namespace

int main() {
  criterion(1, "moment matching exactness", 10, c1_moments);
  criterion(2, "zeroing iteration", 30, c2_prop_basic);
  criterion(3, "orbit certificate n=8 eps=0.1", 60, c3_certificate);
  criterion(4, "Rokhlin tower eps=0.25", 30, c4_rokhlin);
  criterion(5, "rotation tower on a 4096 grid", 10, c5_rotation);
  criterion(6, "flat subspace eps=0.25 d=3", 120, c6_flat);
  criterion(7, "numerical range and ||T|| <= 2w(T)", 30, c7_nrange);
  criterion(8, "reverse construction residuals", 60, c8_reverse);
  criterion(9, "hypothesis refusals", 5, c9_refusals);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
