#include "orbitforge/moments_exact.hpp"

#include <cmath>
#include <numbers>

#include "orbitforge/errors.hpp"

namespace orbitforge {

QComplex operator+(const QComplex& a, const QComplex& b) { return {a.re + b.re, a.im + b.im}; }
QComplex operator-(const QComplex& a, const QComplex& b) { return {a.re - b.re, a.im - b.im}; }
QComplex operator*(const QComplex& a, const QComplex& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
QComplex operator*(const mpq_class& s, const QComplex& a) { return {s * a.re, s * a.im}; }

QComplex qpow(const QComplex& z, int k) {
  QComplex r(1, 0);
  for (int i = 0; i < k; ++i) r = r * z;
  return r;
}

QComplex to_qcomplex(cplx z) { return {mpq_class(z.real()), mpq_class(z.imag())}; }

namespace {

mpq_class qpow(const mpq_class& x, int k) {
  mpq_class r(1);
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

bool rational_sqrt(const mpq_class& x, mpq_class& out) {
  if (sgn(x) < 0) return false;
  mpz_class n = x.get_num(), d = x.get_den();
  if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) return false;
  mpz_class sn, sd;
  mpz_sqrt(sn.get_mpz_t(), n.get_mpz_t());
  mpz_sqrt(sd.get_mpz_t(), d.get_mpz_t());
  out = mpq_class(sn, sd);
  out.canonicalize();
  return true;
}

// Rational point of the unit circle at stereographic parameter t.
QComplex stereo(const mpq_class& t) {
  mpq_class den = 1 + t * t;
  return {(1 - t * t) / den, 2 * t / den};
}

QComplex rotate_quarter(const QComplex& z, int q) {
  QComplex r = z;
  q = ((q % 4) + 4) % 4;
  for (int i = 0; i < q; ++i) r = QComplex(-r.im, r.re);
  return r;
}

struct Split {
  QComplex u1, u2;
  mpq_class p, q;
};

// Writes target = p*u1 + q*u2 with rational unit vectors u1, u2 and p, q >= 0.
Split bracket_direction(const QComplex& target) {
  const double theta = std::atan2(target.im.get_d(), target.re.get_d());
  const int quarter = static_cast<int>(std::lround(theta / (std::numbers::pi / 2)));
  const double rest = theta - quarter * (std::numbers::pi / 2);
  const mpz_class denom = mpz_class(1) << 44;
  mpz_class k(std::floor(std::tan(rest / 2) * denom.get_d()));
  for (int widen = 1;; widen *= 2) {
    Split s;
    s.u1 = rotate_quarter(stereo(mpq_class(k - widen + 1, denom)), quarter);
    s.u2 = rotate_quarter(stereo(mpq_class(k + widen, denom)), quarter);
    const mpq_class det = s.u1.re * s.u2.im - s.u2.re * s.u1.im;
    s.p = (target.re * s.u2.im - s.u2.re * target.im) / det;
    s.q = (s.u1.re * target.im - s.u1.im * target.re) / det;
    if (sgn(s.p) >= 0 && sgn(s.q) >= 0) return s;
    if (widen > (1 << 20)) throw NumericalError("could not bracket a residual direction");
  }
}

}  // namespace

mpq_class ExactMeasure::mass() const {
  mpq_class s(0);
  for (const auto& g : groups) s += g.m * g.weight;
  return s;
}

mpq_class ExactMeasure::prepadding_mass() const {
  mpq_class s(0);
  for (std::size_t i = 0; i < prepadding_groups; ++i) s += groups[i].m * groups[i].weight;
  return s;
}

QComplex ExactMeasure::moment(int k) const {
  QComplex s(0, 0);
  for (const auto& g : groups) {
    if (k % g.m != 0) continue;
    s = s + (g.m * g.weight * qpow(rho, k)) * qpow(g.unit, k / g.m);
  }
  return s;
}

std::size_t ExactMeasure::atom_count() const {
  std::size_t c = 0;
  for (const auto& g : groups) c += static_cast<std::size_t>(g.m);
  return c;
}

AtomicMeasure ExactMeasure::to_float() const {
  AtomicMeasure mu;
  mu.rho = rho.get_d();
  const double two_pi = 2.0 * std::numbers::pi;
  for (const auto& g : groups) {
    double a = std::atan2(g.unit.im.get_d(), g.unit.re.get_d());
    if (a < 0) a += two_pi;
    for (int j = 1; j <= g.m; ++j)
      mu.atoms.push_back({std::polar(rho.get_d(), (a + two_pi * j) / g.m), g.weight.get_d()});
  }
  return mu;
}

mpq_class exact_b(const mpq_class& rho, int n) {
  if (sgn(rho) <= 0) throw DomainError("rho must be positive");
  mpq_class b = 1 / rho;
  for (int k = 2; k <= n; ++k) b = 2 * b + 1 / qpow(rho, k);
  return b;
}

ExactMeasure circle_moment_match_exact(const mpq_class& rho, const std::vector<QComplex>& eps) {
  const int n = static_cast<int>(eps.size());
  if (n < 1) throw DomainError("n must be at least 1");
  const mpq_class b = exact_b(rho, n);
  mpq_class worst(0);
  for (const auto& e : eps)
    if (e.abs2() > worst) worst = e.abs2();
  if (worst * b * b > 1)
    throw DomainError("moment vector exceeds the admissible radius", mpq_class(1 / b).get_d());

  ExactMeasure mu;
  mu.rho = rho;
  for (int m = 1; m <= n; ++m) {
    const QComplex resid = eps[static_cast<std::size_t>(m - 1)] - mu.moment(m);
    if (resid.is_zero()) continue;
    const mpq_class scale = 1 / (m * qpow(rho, m));
    mpq_class mod;
    if (rational_sqrt(resid.abs2(), mod)) {
      mu.groups.push_back({m, mod * scale, (1 / mod) * resid});
    } else {
      Split s = bracket_direction(resid);
      if (sgn(s.p) > 0) mu.groups.push_back({m, s.p * scale, s.u1});
      if (sgn(s.q) > 0) mu.groups.push_back({m, s.q * scale, s.u2});
    }
  }
  mu.prepadding_groups = mu.groups.size();
  const mpq_class d = 1 - mu.mass();
  if (sgn(d) < 0) throw DomainError("stage masses exceed one", mpq_class(1 / b).get_d());
  if (sgn(d) > 0) mu.groups.push_back({n + 1, d / (n + 1), QComplex(1, 0)});
  return mu;
}

}  // namespace orbitforge
