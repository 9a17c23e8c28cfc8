#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "orbitforge/errors.hpp"
#include "orbitforge/spectra.hpp"

using namespace orbitforge;

namespace {

constexpr double kPi = std::numbers::pi;

// |det(A - z I)| through a hand-rolled partial-pivot LU.
double det_abs(Matrix a, cplx z) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i) a(i, i) -= z;
  double logdet = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index p = c;
    for (Eigen::Index r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
    if (a(p, c) == cplx{}) return 0.0;
    a.row(c).swap(a.row(p));
    logdet += std::log(std::abs(a(c, c)));
    for (Eigen::Index r = c + 1; r < n; ++r) {
      cplx f = a(r, c) / a(c, c);
      for (Eigen::Index k = c; k < n; ++k) a(r, k) -= f * a(c, k);
    }
  }
  return std::exp(logdet);
}

}  // namespace

TEST_CASE("dense spectrum") {
  Matrix n(2, 2);
  n << 0, 1, 0, 0;
  for (cplx z : dense_spectrum(OperatorModel::dense(n))) CHECK(std::abs(z) < 1e-12);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = cplx(0, 1);
  auto ev = dense_spectrum(OperatorModel::dense(d));
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
  CHECK(std::abs(ev[0] - 1.0) < 1e-14);
  CHECK(std::abs(ev[1] - cplx(0, 1)) < 1e-14);

  std::srand(17);
  Matrix a = Matrix::Random(6, 6);
  for (cplx z : dense_spectrum(OperatorModel::dense(a))) CHECK(det_abs(a, z) <= 1e-6);

  Matrix h = Matrix::Random(10, 10);
  h = (h + h.adjoint()).eval();
  for (cplx z : dense_spectrum(OperatorModel::dense(h))) CHECK(std::abs(z.imag()) <= 1e-10);

  CHECK_THROWS_AS(dense_spectrum(OperatorModel::bilateral_shift()), UnsupportedError);
}

TEST_CASE("descriptor catalogue") {
  auto b = analytic_descriptor(OperatorModel::bilateral_shift());
  CHECK(b.sigma.kind == SetKind::circle);
  CHECK(b.sigma_e.kind == SetKind::circle);
  CHECK(b.sigma_pi_e.kind == SetKind::circle);
  CHECK(b.consistent());

  auto u = analytic_descriptor(OperatorModel::unilateral_shift());
  CHECK(u.sigma.kind == SetKind::disk);
  CHECK(u.sigma_pi_e.kind == SetKind::circle);
  CHECK(u.hull_contains_zero);
  CHECK(u.consistent());

  auto irr = analytic_descriptor(OperatorModel::diagonal_unitary({std::numbers::sqrt2 - 1.0, 0.0}));
  CHECK(irr.sigma_pi_e.kind == SetKind::circle);
  CHECK(irr.consistent());

  auto rat = analytic_descriptor(OperatorModel::diagonal_unitary({0.25, 0.0}));
  CHECK(rat.sigma_pi_e.kind == SetKind::points);
  CHECK(rat.sigma_pi_e.points.size() == 4);
  CHECK_FALSE(rat.hull_contains_zero);

  WeightRule w;
  w.values = {3.0};
  w.w_minus = 0.5;
  w.w_plus = 2.0;
  auto ws = analytic_descriptor(OperatorModel::weighted_shift(w));
  CHECK(ws.sigma.kind == SetKind::annulus);
  CHECK(ws.sigma_e.kind == SetKind::circles);
  CHECK(ws.consistent());
  w.w_plus = 0.0;
  CHECK_THROWS_AS(analytic_descriptor(OperatorModel::weighted_shift(w)), UnsupportedError);

  CHECK_THROWS_AS(analytic_descriptor(OperatorModel::dense(Matrix::Identity(2, 2))), UnsupportedError);

  auto j = to_json(b);
  CHECK(j["sigma"]["kind"] == "circle");
  CHECK(j["sigma"]["params"]["radius"] == 1.0);
}

TEST_CASE("irrational rotation phases are dense on the circle") {
  // every arc of length 2*pi/200 is hit within 10^4 indices
  PhaseRule p{std::numbers::sqrt2 - 1.0, 0.0};
  std::vector<bool> hit(200, false);
  for (std::int64_t k = 0; k < 10000; ++k) hit[static_cast<std::size_t>(p.theta(k) / (2 * kPi) * 200) % 200] = true;
  CHECK(std::count(hit.begin(), hit.end(), true) == 200);
}

TEST_CASE("shift approximate eigenvectors") {
  auto s = OperatorModel::bilateral_shift();
  auto e = approx_eigenvector(s, 1.0, 50, 0);
  CHECK(e.residual == doctest::Approx(std::sqrt(2.0 / 50)).epsilon(1e-12));
  CHECK(std::abs(e.vector.norm() - 1.0) <= 1e-12);
  CHECK(e.support_window.lo == 0);
  CHECK(e.support_window.hi == 50);
  CHECK(approx_eigenvector(s, cplx(0, 1), 200, -7).residual <= 0.1 + 1e-12);

  for (std::int64_t m : {16, 256, 4096})
    for (int t = 0; t < 32; ++t) {
      cplx lam = std::polar(1.0, 2 * kPi * t / 32);
      auto f = approx_eigenvector(s, lam, m, 3);
      CHECK(f.residual <= std::sqrt(2.0) / std::sqrt(double(m)) * (1 + 1e-12));
      auto g = approx_eigenvector(s, lam, m, 3, WindowShape::sine);
      CHECK(g.residual == doctest::Approx(sine_window_residual(m)).epsilon(1e-9));
      CHECK(std::abs(g.vector.norm() - 1.0) <= 1e-12);
    }

  CHECK_THROWS_AS(approx_eigenvector(s, 1.1, 16, 0), DomainError);
  CHECK(sine_window_residual(window_length_for(WindowShape::sine, 1e-3)) < 1e-3);
  CHECK(sine_window_residual(window_length_for(WindowShape::sine, 1e-3) - 1) >= 1e-3);
  CHECK(flat_window_residual(window_length_for(WindowShape::flat, 0.2)) < 0.2);

  auto uni = approx_eigenvector(OperatorModel::unilateral_shift(), cplx(0, -1), 64, 0);
  CHECK(uni.residual == doctest::Approx(std::sqrt(2.0 / 64)));
}

TEST_CASE("diagonal and weighted approximate eigenvectors") {
  auto d = OperatorModel::diagonal_unitary({std::numbers::sqrt2 - 1.0, 0.0});
  auto e = approx_eigenvector(d, 1.0, 100, 0);
  CHECK(e.residual == 0.0);
  CHECK(e.support_window.lo == 0);
  auto f = approx_eigenvector(d, std::polar(1.0, 1.0), 10000, 1);
  CHECK(f.residual < 0.01);

  auto rat = OperatorModel::diagonal_unitary({0.25, 0.0});
  CHECK_THROWS_AS(approx_eigenvector(rat, std::polar(1.0, 0.3), 16, 0), DomainError);
  CHECK(approx_eigenvector(rat, cplx(0, 1), 16, 0).residual < 1e-15);

  WeightRule w;
  w.start = 0;
  w.values = {3.0, 0.1};
  w.w_minus = 0.5;
  w.w_plus = 2.0;
  auto ws = OperatorModel::weighted_shift(w);
  auto hi = approx_eigenvector(ws, cplx(0, 2), 100, 2);
  CHECK(hi.residual == doctest::Approx(2.0 * std::sqrt(2.0 / 100)));
  auto lo = approx_eigenvector(ws, -0.5, 100, -100);
  CHECK(lo.residual == doctest::Approx(0.5 * std::sqrt(2.0 / 100)));
  CHECK_THROWS_AS(approx_eigenvector(ws, cplx(0, 2), 100, 1), DomainError);
  CHECK_THROWS_AS(approx_eigenvector(ws, 1.0, 100, 5), DomainError);
}

TEST_CASE("families have exactly orthogonal orbits") {
  auto s = OperatorModel::bilateral_shift();
  std::vector<cplx> roots{1.0, cplx(0, 1), -1.0, cplx(0, -1)};
  Subspace cons{{CVector::window(Space::integers(), -5, std::vector<cplx>(20, 1.0))}, SubspaceRole::span};
  auto fam = approx_eigenvector_family(s, roots, 1000, 8, cons);
  REQUIRE(fam.size() == 4);
  for (const auto& p : fam) {
    CHECK(p.residual <= std::sqrt(2.0 / 1000) * (1 + 1e-12));
    CHECK(inner(p.vector, cons.basis[0]) == cplx{});
  }
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t k2 = 0; k2 < 4; ++k2) {
      if (k == k2) continue;
      for (int j = 0; j <= 8; ++j)
        for (int j2 = 0; j2 <= 8; ++j2) {
          CVector a = j ? apply(s, fam[k].vector, j) : fam[k].vector;
          CVector b = j2 ? apply(s, fam[k2].vector, j2) : fam[k2].vector;
          CHECK(inner(a, b) == cplx{});
        }
    }

  auto one = approx_eigenvector_family(s, {cplx(0, 1)}, 64, 2, Subspace{});
  CHECK(distance(one[0].vector, approx_eigenvector(s, cplx(0, 1), 64, 0).vector) == 0.0);

  setenv("ORBITFORGE_WINDOW_BUDGET", "1000", 1);
  try {
    approx_eigenvector_family(s, roots, 1000, 8, cons);
    FAIL("expected budget refusal");
  } catch (const ResourceError& e) {
    CHECK(e.required == 4 * 1008);
  }
  unsetenv("ORBITFORGE_WINDOW_BUDGET");
}

TEST_CASE("orbit to approximate eigenvector") {
  auto d = OperatorModel::diagonal_unitary({0.25, 0.0});
  auto e1 = CVector::basis(Space::integers(), 1);  // eigenvalue i
  auto y = orbit_to_approx_eigenvector(d, e1, cplx(0, 1), 7);
  CHECK(y.residual < 1e-14);
  CHECK(y.raw_norm == doctest::Approx(7.0));

  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<cplx> v(9);
  for (auto& z : v) z = {g(rng), g(rng)};
  auto x = CVector::window(Space::integers(), 0, v);
  x = x.scaled(1.0 / x.norm());
  auto s = OperatorModel::bilateral_shift();
  auto r = orbit_to_approx_eigenvector(s, x, 1.0, 1);
  CHECK(distance(r.vector, x) < 1e-15);
  CHECK(r.residual == doctest::Approx(distance(apply(s, x), x)));
}
