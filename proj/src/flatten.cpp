#include "orbitforge/flatten.hpp"

#include <fftw3.h>
#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "orbitforge/errors.hpp"
#include "orbitforge/spectra.hpp"

namespace orbitforge {

namespace {

constexpr double kPi = std::numbers::pi;

bool shift_type(const OperatorModel& op) {
  return op.kind() == OpKind::bilateral_shift || op.kind() == OpKind::unilateral_shift ||
         op.kind() == OpKind::weighted_shift;
}

// T acts on u as f * S when u sits where the weights are constant.
std::optional<double> constant_factor(const OperatorModel& op, const CVector& u) {
  if (op.kind() == OpKind::bilateral_shift || op.kind() == OpKind::unilateral_shift) return 1.0;
  if (op.kind() == OpKind::weighted_shift) {
    auto s = u.support();
    if (s && s->lo >= op.weights().end()) return op.weights().w_plus;
  }
  return std::nullopt;
}

std::vector<cplx> densify(const CVector& u, const Interval& s) {
  std::vector<cplx> out(static_cast<std::size_t>(s.length()));
  u.for_each([&](std::int64_t i, cplx z) { out[static_cast<std::size_t>(i - s.lo)] = z; });
  return out;
}

// g(m) = sum_j U[j] conj(V[j + m]) for m in (-|U|, |V|), stored at m + |U| - 1.
std::vector<cplx> xcorr_fft(const std::vector<cplx>& U, const std::vector<cplx>& V) {
  std::size_t need = U.size() + V.size();
  std::size_t N = 1;
  while (N < need) N <<= 1;
  check_budget(static_cast<std::int64_t>(2 * N), "correlation transform");
  auto* a = fftw_alloc_complex(N);
  auto* b = fftw_alloc_complex(N);
  fftw_plan pa = fftw_plan_dft_1d(static_cast<int>(N), a, a, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan pb = fftw_plan_dft_1d(static_cast<int>(N), b, b, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan pi = fftw_plan_dft_1d(static_cast<int>(N), a, a, FFTW_BACKWARD, FFTW_ESTIMATE);
  auto* ca = reinterpret_cast<cplx*>(a);
  auto* cb = reinterpret_cast<cplx*>(b);
  std::fill(ca, ca + N, cplx{});
  std::fill(cb, cb + N, cplx{});
  std::copy(U.begin(), U.end(), ca);
  std::copy(V.begin(), V.end(), cb);
  fftw_execute(pa);
  fftw_execute(pb);
  for (std::size_t k = 0; k < N; ++k) ca[k] *= std::conj(cb[k]);
  fftw_execute(pi);
  // IFFT(A conj B)[k] = N * g(-k)
  std::vector<cplx> g(U.size() + V.size() - 1);
  const auto lu = static_cast<std::int64_t>(U.size());
  for (std::int64_t m = -(lu - 1); m < static_cast<std::int64_t>(V.size()); ++m) {
    std::size_t k = static_cast<std::size_t>((static_cast<std::int64_t>(N) - m) % static_cast<std::int64_t>(N));
    g[static_cast<std::size_t>(m + lu - 1)] = ca[k] / static_cast<double>(N);
  }
  fftw_destroy_plan(pa);
  fftw_destroy_plan(pb);
  fftw_destroy_plan(pi);
  fftw_free(a);
  fftw_free(b);
  return g;
}

// <T^n u, v> for n >= n_min; zero outside [n_lo, n_lo + vals.size()).
struct Corr {
  std::int64_t n_lo = 0;
  std::vector<cplx> vals;
  cplx at(std::int64_t n) const {
    std::int64_t i = n - n_lo;
    return (i >= 0 && i < static_cast<std::int64_t>(vals.size())) ? vals[static_cast<std::size_t>(i)] : cplx{};
  }
  std::int64_t n_hi() const { return n_lo + static_cast<std::int64_t>(vals.size()) - 1; }
  double sup() const {
    double m = 0.0;
    for (auto z : vals) m = std::max(m, std::abs(z));
    return m;
  }
};

Corr correlate(const OperatorModel& op, const CVector& u, const CVector& v, std::int64_t n_min) {
  auto su = u.support(), sv = v.support();
  Corr c;
  if (!su || !sv) return c;
  std::int64_t nlo = std::max(n_min, sv->lo - (su->hi - 1));
  std::int64_t nhi = (sv->hi - 1) - su->lo;
  if (nhi < nlo) return c;
  c.n_lo = nlo;
  c.vals.resize(static_cast<std::size_t>(nhi - nlo + 1));
  auto f = constant_factor(op, u);
  if (!f) {
    CVector t = apply(op, u, static_cast<int>(nlo));
    for (std::size_t i = 0; i < c.vals.size(); ++i) {
      c.vals[i] = inner(t, v);
      t = apply(op, t, 1);
    }
    return c;
  }
  auto U = densify(u, *su), V = densify(v, *sv);
  const std::int64_t lu = su->length(), lv = sv->length();
  if (static_cast<double>(lu) * static_cast<double>(lv) <= 4e6) {
    for (std::int64_t n = nlo; n <= nhi; ++n) {
      std::int64_t m = n + su->lo - sv->lo;
      cplx acc{};
      for (std::int64_t j = std::max<std::int64_t>(0, -m); j < std::min(lu, lv - m); ++j)
        acc += U[static_cast<std::size_t>(j)] * std::conj(V[static_cast<std::size_t>(j + m)]);
      c.vals[static_cast<std::size_t>(n - nlo)] = acc;
    }
  } else {
    auto g = xcorr_fft(U, V);
    for (std::int64_t n = nlo; n <= nhi; ++n)
      c.vals[static_cast<std::size_t>(n - nlo)] = g[static_cast<std::size_t>(n + su->lo - sv->lo + lu - 1)];
  }
  if (*f != 1.0)
    for (std::int64_t n = nlo; n <= nhi; ++n) c.vals[static_cast<std::size_t>(n - nlo)] *= std::pow(*f, static_cast<double>(n));
  return c;
}

using M3 = std::array<cplx, 9>;

// Largest eigenvalue of a Hermitian 3x3 matrix, trigonometric form of the cubic.
double herm3_max(const M3& h) {
  double a = h[0].real(), b = h[4].real(), c = h[8].real();
  cplx h01 = h[1], h02 = h[2], h12 = h[5];
  double p1 = std::norm(h01) + std::norm(h02) + std::norm(h12);
  if (p1 == 0.0) return std::max({a, b, c});
  double q = (a + b + c) / 3.0;
  double a1 = a - q, b1 = b - q, c1 = c - q;
  double p = std::sqrt((a1 * a1 + b1 * b1 + c1 * c1 + 2.0 * p1) / 6.0);
  double det = a1 * b1 * c1 + 2.0 * (h01 * h12 * std::conj(h02)).real() - a1 * std::norm(h12) -
               b1 * std::norm(h02) - c1 * std::norm(h01);
  double r = std::clamp(det / (2.0 * p * p * p), -1.0, 1.0);
  return q + 2.0 * p * std::cos(std::acos(r) / 3.0);
}

double re_part_max(const M3& c, double theta) {
  cplx e = std::polar(1.0, -theta);
  M3 h;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) h[3 * i + j] = 0.5 * (e * c[3 * i + j] + std::conj(e * c[3 * j + i]));
  return herm3_max(h);
}

double radius3(const M3& c) {
  constexpr int kCoarse = 32;
  std::array<double, kCoarse> f{};
  for (int i = 0; i < kCoarse; ++i) f[i] = re_part_max(c, 2.0 * kPi * i / kCoarse);
  std::array<int, 2> top{-1, -1};
  for (int i = 0; i < kCoarse; ++i) {
    if (f[i] < f[(i + 1) % kCoarse] || f[i] < f[(i + kCoarse - 1) % kCoarse]) continue;
    if (top[0] < 0 || f[i] > f[top[0]]) {
      top[1] = top[0];
      top[0] = i;
    } else if (top[1] < 0 || f[i] > f[top[1]]) {
      top[1] = i;
    }
  }
  double best = *std::max_element(f.begin(), f.end());
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int t : top) {
    if (t < 0) continue;
    double lo = 2.0 * kPi * (t - 1) / kCoarse, hi = 2.0 * kPi * (t + 1) / kCoarse;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = re_part_max(c, x1), f2 = re_part_max(c, x2);
    for (int it = 0; it < 44; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = re_part_max(c, x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = re_part_max(c, x1);
      }
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

double norm3(const M3& c) {
  M3 h{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) h[3 * i + j] += std::conj(c[3 * k + i]) * c[3 * k + j];
  return std::sqrt(std::max(0.0, herm3_max(h)));
}

M3 pad3(const Matrix& c) {
  M3 m{};
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = 0; j < c.cols(); ++j) m[static_cast<std::size_t>(3 * i + j)] = c(i, j);
  return m;
}

CVector chirp(Space sp, std::int64_t start, std::int64_t s) {
  std::vector<cplx> vals(static_cast<std::size_t>(s));
  const double amp = 1.0 / std::sqrt(static_cast<double>(s));
  for (std::int64_t k = 0; k < s; ++k) {
    std::int64_t ph = (k * k) % (2 * s);
    vals[static_cast<std::size_t>(k)] = std::polar(amp, kPi * static_cast<double>(ph) / static_cast<double>(s));
  }
  return CVector::window(sp, start, std::move(vals));
}

std::int64_t first_free_index(const OperatorModel& op, const std::vector<CVector>& A, const Subspace& M) {
  std::int64_t a0 = 0;
  for (const auto& a : A)
    if (auto s = a.support()) a0 = std::max(a0, s->hi);
  if (auto s = M.support()) a0 = std::max(a0, s->hi);
  if (op.kind() == OpKind::weighted_shift) a0 = std::max(a0, op.weights().end());
  return a0;
}

FlatVectorReport flat_vector_at(const OperatorModel& op, const std::vector<CVector>& A, double eps,
                                std::int64_t a0, double K) {
  FlatVectorReport r;
  r.K = K;
  r.eps = eps;
  r.start = a0;
  double amax = 1.0;
  for (const auto& a : A) amax = std::max(amax, a.norm());
  if (eps >= K * amax) {
    r.degenerate = true;
    r.s = 1;
    r.x = CVector::basis(op.space(), a0);
    r.checks.push_back(make_check("degenerate eps >= K max(1, |a|)", K * amax, eps, false));
    return r;
  }
  std::int64_t s = flat_count(K, eps);
  for (;;) {
    check_budget(s, "flat vector window");
    CVector x = chirp(op.space(), a0, s);
    Corr self = correlate(op, x, x, 1);
    double sa = 0.0, sadj = 0.0;
    std::int64_t horizon = self.vals.empty() ? 0 : self.n_hi();
    for (const auto& a : A) {
      Corr c1 = correlate(op, x, a, 1), c2 = correlate(op, a, x, 1);
      sa = std::max(sa, c1.sup());
      sadj = std::max(sadj, c2.sup());
      if (!c1.vals.empty()) horizon = std::max(horizon, c1.n_hi());
      if (!c2.vals.empty()) horizon = std::max(horizon, c2.n_hi());
    }
    r.x = std::move(x);
    r.s = s;
    r.sup_self = self.sup();
    r.sup_a = sa;
    r.sup_a_adj = sadj;
    r.horizon = horizon;
    if (r.sup_self < eps && sa < eps && sadj < eps) break;
    s *= 2;
    ++r.doublings;
  }
  r.checks.push_back(make_check("window count s > 16K^2/eps^2", flat_count_valid(r.s, K, eps) ? 0.0 : 1.0, 0.0, false));
  r.checks.push_back(make_check("sup |<T^n x, x>|", r.sup_self, eps, true));
  r.checks.push_back(make_check("sup |<T^n x, a>|", r.sup_a, eps, true));
  r.checks.push_back(make_check("sup |<T^*n x, a>|", r.sup_a_adj, eps, true));
  return r;
}

double decay_K(const OperatorModel& op, int horizon) {
  Matrix p = Matrix::Identity(op.matrix().rows(), op.matrix().cols());
  double k = 1.0;
  for (int n = 1; n <= horizon; ++n) {
    p = p * op.matrix();
    k = std::max(k, dense_norm_bound(p));
  }
  return k;
}

DecayProfile require_decay(const OperatorModel& op, std::int64_t a0) {
  auto pre = spectral_precondition(op);
  if (!pre.ok) throw PreconditionError("spectral precondition fails: " + pre.reason);
  auto prof = weak_decay_probe(op, {CVector::basis(op.space(), a0)}, 32);
  if (!prof.decays || !prof.K) throw PreconditionError("weak decay hypothesis fails: " + prof.reason);
  if (!shift_type(op)) throw UnsupportedError("flat vectors are built for shift-type models only");
  return prof;
}

}  // namespace

double small_numerical_radius(const Matrix& c) {
  if (c.rows() != c.cols()) throw DimensionError("numerical radius needs a square matrix");
  if (c.rows() <= 3) return radius3(pad3(c));
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  auto f = [&](double th) {
    Matrix h = 0.5 * (std::polar(1.0, -th) * c + std::polar(1.0, th) * c.adjoint());
    es.compute(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
  };
  constexpr int kCoarse = 64;
  double best = 0.0;
  int bi = 0;
  for (int i = 0; i < kCoarse; ++i) {
    double v = f(2.0 * kPi * i / kCoarse);
    if (v > best) best = v, bi = i;
  }
  double lo = 2.0 * kPi * (bi - 1) / kCoarse, hi = 2.0 * kPi * (bi + 1) / kCoarse;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 44; ++it) {
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    if (f(x1) < f(x2)) lo = x1; else hi = x2;
  }
  return std::max(best, f(0.5 * (lo + hi)));
}

std::int64_t flat_count(double K, double eps) {
  if (!(eps > 0.0) || !(K > 0.0)) throw DomainError("flat_count needs K > 0 and eps > 0");
  double x = 16.0 * K * K / (eps * eps);
  if (x > 9e15) throw ResourceError("flat window count overflows", std::numeric_limits<std::int64_t>::max());
  auto s = static_cast<std::int64_t>(std::floor(x)) + 1;
  while (!flat_count_valid(s, K, eps)) ++s;
  while (s > 1 && flat_count_valid(s - 1, K, eps)) --s;
  return s;
}

bool flat_count_valid(std::int64_t s, double K, double eps) {
  mpq_class e(eps), k(K);
  mpq_class lhs = mpq_class(static_cast<double>(s)) * e * e;
  return lhs > 16 * k * k;
}

PreconditionReport spectral_precondition(const OperatorModel& op) {
  if (op.kind() == OpKind::dense) return {false, "essential notions undefined at finite dimension"};
  SpectralDescriptor d;
  try {
    d = analytic_descriptor(op);
  } catch (const UnsupportedError& e) {
    return {false, e.what()};
  }
  if (d.hull_contains_zero) return {true, "0 lies in the hull of sigma_e"};
  if (d.sigma.contains_circle(1.0)) return {true, "unit circle lies in sigma"};
  return {false, "0 is outside the hull of sigma_e and the unit circle is not in sigma"};
}

DecayProfile weak_decay_probe(const OperatorModel& op, const std::vector<CVector>& probes, int horizon) {
  if (horizon < 1) throw DomainError("decay horizon must be positive", 1.0);
  if (probes.empty()) throw DomainError("decay probe needs at least one vector");
  for (const auto& p : probes)
    if (std::abs(p.norm() - 1.0) > 1e-9) throw DomainError("decay probes must be unit vectors", 1.0);
  DecayProfile prof;
  prof.horizon = horizon;
  if (op.kind() == OpKind::dense)
    prof.K = decay_K(op, horizon);
  else
    prof.K = op.power_bound();

  std::vector<CVector> cur = probes;
  for (int n = 0; n <= horizon; ++n) {
    double m = 0.0;
    for (const auto& a : cur)
      for (const auto& b : probes) m = std::max(m, std::abs(inner(a, b)));
    prof.probes.emplace_back(n, m);
    if (n < horizon)
      for (auto& a : cur) a = apply(op, a, 1);
  }

  if (shift_type(op)) {
    std::int64_t hi = std::numeric_limits<std::int64_t>::min(), lo = std::numeric_limits<std::int64_t>::max();
    for (const auto& p : probes)
      if (auto s = p.support()) hi = std::max(hi, s->hi - 1), lo = std::min(lo, s->lo);
    prof.exact_zero_beyond = hi - lo + 1;
    if (prof.K) {
      prof.decays = true;
      prof.reason = "banded shift: <T^n a, b> = 0 for n >= " + std::to_string(*prof.exact_zero_beyond);
    } else {
      prof.reason = "no power bound: weight limits exceed 1";
    }
  } else if (op.kind() == OpKind::dense) {
    Eigen::ComplexEigenSolver<Matrix> es(op.matrix(), false);
    double rho = es.eigenvalues().cwiseAbs().maxCoeff();
    prof.decays = rho < 1.0 - 1e-9;
    prof.reason = prof.decays ? "spectral radius below 1" : "spectral radius " + std::to_string(rho) + " >= 1";
  } else {
    double tail = 0.0;
    for (const auto& [n, v] : prof.probes)
      if (4 * n >= 3 * horizon) tail = std::max(tail, v);
    prof.reason = std::string(to_string(op.kind())) + " is unitary and diagonal: no weak decay, tail value " +
                  std::to_string(tail);
  }
  return prof;
}

bool FlatVectorReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

bool FlatSubspaceReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

FlatVectorReport flat_vector(const OperatorModel& op, const std::vector<CVector>& A, double eps, const Subspace& M) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  for (const auto& a : A)
    if (!(a.space() == op.space())) throw DimensionError("vector in A lives in a different space");
  std::int64_t a0 = first_free_index(op, A, M);
  auto prof = require_decay(op, a0);
  return flat_vector_at(op, A, eps, a0, *prof.K);
}

FlatSubspaceReport flat_subspace(const OperatorModel& op, double eps, int d) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  if (d < 1) throw DomainError("subspace dimension must be at least 1", 1.0);
  const std::int64_t base = first_free_index(op, {}, Subspace::trivial_constraint());
  auto prof = require_decay(op, base);
  const double K = *prof.K;

  FlatSubspaceReport rep;
  auto& sch = rep.schedule;
  sch.eps = eps;
  sch.K = K;
  sch.times.push_back(1);

  std::vector<CVector> ys;
  std::vector<std::vector<Corr>> corr;  // corr[k][k'] = <T^n y_k, y_k'>, n >= 1
  std::int64_t hi_max = base;
  std::int64_t placement_violations = 0;
  for (int r = 0; r < d; ++r) {
    const std::int64_t den = (std::int64_t{1} << (r + 3)) * (r + 1);
    const double theta = eps / static_cast<double>(den);
    const std::int64_t start = r == 0 ? base : hi_max + sch.times.back();
    auto fv = flat_vector_at(op, ys, theta, start, K);
    if (!fv.all_pass()) throw NumericalError("flat vector stage " + std::to_string(r) + " failed its bounds");
    for (const auto& y : ys)
      if (start - (y.support()->hi - 1) < sch.times.back()) ++placement_violations;
    sch.s.push_back(fv.s);
    sch.threshold_den.push_back(den);
    sch.thresholds.push_back(theta);
    ys.push_back(std::move(fv.x));
    hi_max = ys.back().support()->hi;

    const auto k_new = ys.size() - 1;
    corr.resize(ys.size());
    for (std::size_t k = 0; k < ys.size(); ++k) corr[k].resize(ys.size());
    for (std::size_t k = 0; k < ys.size(); ++k) {
      corr[k][k_new] = correlate(op, ys[k], ys[k_new], 1);
      if (k != k_new) corr[k_new][k] = correlate(op, ys[k_new], ys[k], 1);
    }
    const double next = eps / static_cast<double>(2 * den);
    std::int64_t n_next = sch.times.back() + 1;
    for (const auto& row : corr)
      for (const auto& c : row)
        for (std::int64_t i = static_cast<std::int64_t>(c.vals.size()) - 1; i >= 0; --i)
          if (std::abs(c.vals[static_cast<std::size_t>(i)]) > next) {
            n_next = std::max(n_next, c.n_lo + i + 1);
            break;
          }
    sch.times.push_back(n_next);
  }

  std::int64_t n_max = 0;
  for (const auto& row : corr)
    for (const auto& c : row)
      if (!c.vals.empty()) n_max = std::max(n_max, c.n_hi());
  rep.exact_zero_beyond = n_max + 1;

  const auto dd = static_cast<std::size_t>(d);
  rep.norm.resize(static_cast<std::size_t>(n_max));
  rep.w.resize(static_cast<std::size_t>(n_max));
  rep.stage.resize(static_cast<std::size_t>(n_max));
  double ratio_norm = 0.0, ratio_w = 0.0, ratio_2w = 0.0;
  int r = 0;
  Matrix c(static_cast<Eigen::Index>(dd), static_cast<Eigen::Index>(dd));
  for (std::int64_t n = 1; n <= n_max; ++n) {
    while (r < d && n >= sch.times[static_cast<std::size_t>(r + 1)]) ++r;
    double nv, wv;
    if (dd <= 3) {
      M3 m{};
      for (std::size_t k = 0; k < dd; ++k)
        for (std::size_t kp = 0; kp < dd; ++kp) m[3 * kp + k] = corr[k][kp].at(n);
      nv = norm3(m);
      wv = radius3(m);
    } else {
      for (std::size_t k = 0; k < dd; ++k)
        for (std::size_t kp = 0; kp < dd; ++kp)
          c(static_cast<Eigen::Index>(kp), static_cast<Eigen::Index>(k)) = corr[k][kp].at(n);
      nv = spectral_norm(c);
      wv = small_numerical_radius(c);
    }
    const auto i = static_cast<std::size_t>(n - 1);
    rep.norm[i] = nv;
    rep.w[i] = wv;
    rep.stage[i] = r;
    rep.sup_norm = std::max(rep.sup_norm, nv);
    const double bn = std::ldexp(eps, -r);
    ratio_norm = std::max(ratio_norm, nv / bn);
    ratio_w = std::max(ratio_w, wv / (0.5 * bn));
    if (nv > 0.0) ratio_2w = std::max(ratio_2w, nv / (2.0 * wv));
  }

  rep.L.basis = ys;
  rep.L.role = SubspaceRole::span;

  double beyond = 0.0;
  for (std::int64_t n : {n_max + 1, n_max + 2, n_max + 17, 2 * n_max + 5}) {
    if (n > std::numeric_limits<int>::max()) continue;
    beyond = std::max(beyond, compress(op, rep.L, static_cast<int>(n)).cwiseAbs().maxCoeff());
  }

  std::int64_t bad_counts = 0;
  for (std::size_t k = 0; k < sch.s.size(); ++k)
    if (!flat_count_valid(sch.s[k], K, sch.thresholds[k])) ++bad_counts;
  for (std::size_t k = 1; k < sch.times.size(); ++k)
    if (sch.times[k] <= sch.times[k - 1]) ++bad_counts;

  std::int64_t total = 0;
  for (auto s : sch.s) total += s;
  rep.next_stage_required = flat_count(K, eps / static_cast<double>((std::int64_t{1} << (d + 3)) * (d + 1)));
  rep.next_stage_fits = total + rep.next_stage_required <= window_budget();

  rep.checks.push_back(make_check("gram defect", gram_defect(ys), 1e-10, false));
  rep.checks.push_back(make_check("schedule counts and times", static_cast<double>(bad_counts), 0.0, false));
  rep.checks.push_back(make_check("placement orthogonality", static_cast<double>(placement_violations), 0.0, false));
  rep.checks.push_back(make_check("sup_n ||P T^n P||", rep.sup_norm, eps, true));
  rep.checks.push_back(make_check("stagewise ||P T^n P|| / 2^-r eps", ratio_norm, 1.0, false));
  rep.checks.push_back(make_check("stagewise w / 2^-r-1 eps", ratio_w, 1.0, false));
  rep.checks.push_back(make_check("||P T^n P|| / 2w", ratio_2w, 1.0 + 1e-8, false));
  rep.checks.push_back(make_check("zero beyond support span", beyond, 0.0, false));
  return rep;
}

std::string flat_csv(const FlatSubspaceReport& r) {
  std::string out = "n,norm,w,bound\n";
  char buf[128];
  for (std::size_t i = 0; i < r.norm.size(); ++i) {
    double b = std::ldexp(r.schedule.eps, -r.stage[i]);
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i + 1, r.norm[i], r.w[i], b);
    out += buf;
  }
  return out;
}

json to_json(const DecayProfile& p) {
  json j;
  j["horizon"] = p.horizon;
  j["probes"] = json::array();
  for (const auto& [n, v] : p.probes) j["probes"].push_back({n, v});
  j["K"] = p.K ? json(*p.K) : json(nullptr);
  j["exact_zero_beyond"] = p.exact_zero_beyond ? json(*p.exact_zero_beyond) : json(nullptr);
  j["decays"] = p.decays;
  j["reason"] = p.reason;
  return j;
}

json to_json(const FlatVectorReport& r) {
  json j;
  j["s"] = r.s;
  j["start"] = r.start;
  j["K"] = r.K;
  j["eps"] = r.eps;
  j["sup_self"] = r.sup_self;
  j["sup_a"] = r.sup_a;
  j["sup_a_adjoint"] = r.sup_a_adj;
  j["horizon"] = r.horizon;
  j["degenerate"] = r.degenerate;
  j["doublings"] = r.doublings;
  j["checks"] = json::array();
  for (const auto& c : r.checks) j["checks"].push_back(to_json(c));
  j["pass"] = r.all_pass();
  return j;
}

json to_json(const FlatSubspaceReport& r, bool per_n) {
  json j;
  const auto& s = r.schedule;
  j["schedule"] = {{"eps", s.eps}, {"K", s.K}, {"s", s.s}, {"threshold_den", s.threshold_den},
                   {"thresholds", s.thresholds}, {"times", s.times}};
  j["dim"] = r.L.dim();
  j["exact_zero_beyond"] = r.exact_zero_beyond;
  j["sup_norm"] = r.sup_norm;
  j["next_stage_required"] = r.next_stage_required;
  j["next_stage_fits"] = r.next_stage_fits;
  if (per_n) {
    j["per_n"] = json::array();
    for (std::size_t i = 0; i < r.norm.size(); ++i)
      j["per_n"].push_back({{"n", i + 1}, {"w", r.w[i]}, {"norm", r.norm[i]},
                            {"bound", std::ldexp(s.eps, -r.stage[i])}});
  }
  j["checks"] = json::array();
  for (const auto& c : r.checks) j["checks"].push_back(to_json(c));
  j["pass"] = r.all_pass();
  return j;
}

}  // namespace orbitforge
