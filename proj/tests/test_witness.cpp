#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "orbitforge/errors.hpp"
#include "orbitforge/witness.hpp"

using namespace orbitforge;

namespace {

const double kAlpha = std::numbers::sqrt2 - 1.0;

double max_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (cplx z : v) m = std::max(m, std::abs(z));
  return m;
}

CVector e(std::int64_t i) { return CVector::basis(Space::integers(), i); }

}  // namespace

TEST_CASE("zeroing step from the zero vector") {
  auto s = OperatorModel::bilateral_shift();
  auto tup = OperatorTuple::power_tuple_of(s, 3);
  const double r = admissible_radius(1.0, 3).r;
  auto x1 = zero_iteration_step(tup, CVector(Space::integers()), 0, r, Subspace::trivial_constraint());
  CHECK(x1.norm2() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(max_abs(joint_point(tup, x1)) <= r / 4 + 1e-15);
  auto x2 = zero_iteration_step(tup, x1, 1, r, Subspace::trivial_constraint());
  CHECK(x2.norm2() == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(distance(x2, x1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(zero_iteration_step(tup, e(0), 0, r, Subspace::trivial_constraint()), PreconditionError);
}

TEST_CASE("zero tuple vector") {
  auto s = OperatorModel::bilateral_shift();
  auto tup = OperatorTuple::power_tuple_of(s, 4);
  auto res = zero_tuple_vector(tup, Subspace::trivial_constraint(), CVector(Space::integers()), 0, 1e-8);
  REQUIRE(res.stage_norms.size() >= 10);
  for (std::size_t m = 0; m < res.stage_norms.size(); ++m)
    CHECK(std::abs(res.stage_norms[m] - (1.0 - std::ldexp(1.0, -int(m) - 1))) <= 1e-10);
  CHECK(max_abs(res.correlations) <= 1e-8);
  CHECK(max_abs(joint_point(tup, res.w)) <= 1e-8);
  CHECK(std::abs(res.w.norm() - 1.0) <= 1e-12);

  // warm start at stage 4
  auto y = e(0) + e(1).scaled(0.001);
  y = y.scaled(std::sqrt(15.0 / 16.0) / y.norm());
  auto r4 = zero_tuple_vector(tup, Subspace::trivial_constraint(), y, 4, 1e-8);
  CHECK(distance(r4.w, y) <= 3.0 * std::pow(2.0, -4.0 / 2 - 1));
  CHECK(r4.tail_distance <= r4.tail_bound);
  CHECK(max_abs(r4.correlations) <= 1e-8);

  // already a solution
  auto r0 = zero_tuple_vector(tup, Subspace::trivial_constraint(), e(0), 0, 1e-8);
  CHECK(r0.stage_norms.empty());
  CHECK(distance(r0.w, e(0)) == 0.0);

  std::vector<CVector> perp;
  for (int i = 0; i < 10; ++i) perp.push_back(e(i));
  Subspace M{perp, SubspaceRole::finite_codim_complement};
  auto rm = zero_tuple_vector(tup, M, CVector(Space::integers()), 0, 1e-8);
  CHECK(rm.w.support()->lo >= 10);
  CHECK(max_abs(rm.correlations) <= 1e-8);
}

TEST_CASE("diagonal compression subspaces") {
  auto u = OperatorModel::unilateral_shift();
  auto L = diagonal_compression_subspace(u, 2, 0.0, 3, 1e-6);
  REQUIRE(L.dim() == 3);
  CHECK(gram_defect(L.basis) <= 1e-12);
  for (int j = 1; j <= 2; ++j) CHECK(compress(u, L, j).cwiseAbs().maxCoeff() <= 1e-6);

  auto L2 = diagonal_compression_subspace(u, 3, 0.5, 2, 1e-5);
  for (int j = 1; j <= 3; ++j) {
    Matrix c = compress(u, L2, j) - std::pow(0.5, j) * Matrix::Identity(2, 2);
    CHECK(c.cwiseAbs().maxCoeff() <= 1e-5);
  }

  auto L1 = diagonal_compression_subspace(OperatorModel::bilateral_shift(), 2, cplx(0, 0.2), 1, 1e-6);
  auto p = joint_point(OperatorTuple::power_tuple_of(OperatorModel::bilateral_shift(), 2), L1.basis[0]);
  CHECK(std::abs(p[0] - cplx(0, 0.2)) <= 1e-6);
  CHECK(std::abs(p[1] - cplx(-0.04, 0)) <= 1e-6);

  CHECK_THROWS_AS(diagonal_compression_subspace(u, 2, 1.5, 1, 1e-6), DomainError);
}

TEST_CASE("almost orthogonal orbits") {
  auto s = OperatorModel::bilateral_shift();
  auto c = almost_orthogonal_orbit(s, 4, 0.1);
  CHECK(c.all_pass());
  REQUIRE(c.checks.size() == 4);
  CHECK(c.checks[0].measured <= 1e-8);

  // the certificate is a pure function of x
  auto again = certify_orbit(s, c.x, 4, 0.1);
  CHECK((again.gram - c.gram).cwiseAbs().maxCoeff() == 0.0);
  CHECK(again.recurrence == c.recurrence);
  for (int m = 0; m < 4; ++m)
    for (int j = 0; j < 4; ++j) {
      CVector a = m ? apply(s, c.x, m) : c.x;
      CVector b = j ? apply(s, c.x, j) : c.x;
      CHECK(std::abs(inner(a, b) - c.gram(m, j)) <= 1e-15);
    }

  auto one = almost_orthogonal_orbit(s, 1, 0.1);
  CHECK(one.all_pass());
  CHECK(one.recurrence == doctest::Approx(distance(apply(s, one.x), one.x)));

  // scaling coherence
  auto half = almost_orthogonal_orbit(s, 4, 0.05);
  CHECK(half.all_pass());
  for (std::size_t i = 0; i < half.checks.size(); ++i) CHECK(half.checks[i].measured < c.checks[i].bound + (i == 0 ? 1e-30 : 0));

  auto d = almost_orthogonal_orbit(OperatorModel::diagonal_unitary({kAlpha, 0.0}), 8, 0.05);
  CHECK(d.all_pass());
  CHECK(d.recurrence <= 0.025);

  auto uni = almost_orthogonal_orbit(OperatorModel::unilateral_shift(), 3, 0.2);
  CHECK(uni.all_pass());

  CHECK_THROWS_AS(almost_orthogonal_orbit(OperatorModel::dense(Matrix::Identity(3, 3)), 2, 0.1), UnsupportedError);
  CHECK_THROWS_AS(almost_orthogonal_orbit(OperatorModel::diagonal_unitary({0.25, 0.0}), 2, 0.1), PreconditionError);

  auto j = to_json(c, true);
  CHECK_FALSE(j.contains("x"));
  CHECK(j["checks"].size() == 4);
  CHECK(to_json(c, false).contains("x"));
}

TEST_CASE("orbit certificate feeds the reverse construction") {
  auto s = OperatorModel::bilateral_shift();
  auto c = almost_orthogonal_orbit(s, 8, 0.125);
  auto y = orbit_to_approx_eigenvector(s, c.x, 1.0, 8);
  CHECK(y.residual < 3.0 / 8);
  // (T - 1) y = T^n x - x
  CHECK(y.residual == doctest::Approx(c.recurrence / y.raw_norm).epsilon(1e-9));
}

TEST_CASE("rokhlin tower") {
  auto s = OperatorModel::bilateral_shift();
  try {
    rokhlin_tower(s, 16, 0.5, e(0));
    FAIL("expected a refusal");
  } catch (const PreconditionError& err) {
    CHECK(err.minimal == 17);
  }
  auto t = rokhlin_tower(s, 17, 0.5, e(0));
  CHECK(t.all_pass());
  CHECK(t.gram_defect <= 1e-10);
  CHECK(t.mean_defect <= 1e-12);
  for (double r : t.link_residuals) CHECK(r < 0.5);

  // arbitrary unit u with a spread-out support
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<cplx> v(12);
  for (auto& z : v) z = {g(rng), g(rng)};
  auto u = CVector::window(Space::integers(), -6, v);
  u = u.scaled(1.0 / u.norm());
  auto tu = rokhlin_tower(s, 20, 0.5, u);
  CHECK(tu.all_pass());

  auto d = OperatorModel::diagonal_unitary({kAlpha, 0.0});
  auto td = rokhlin_tower(d, 101, 0.2, e(0));
  CHECK(td.all_pass());
  for (double r : td.link_residuals) CHECK(r < 0.2);

  CHECK_THROWS_AS(rokhlin_tower(s, 17, 0.5, e(0).scaled(2.0)), DomainError);
  CHECK(to_json(t, true)["link_residuals"].size() == 17);
}

TEST_CASE("rotation tower") {
  const std::int64_t N = 4096;
  auto mult = OperatorModel::multiplication({N, {}});
  auto w0 = CVector::dense(std::vector<cplx>(N, 1.0 / std::sqrt(double(N))));
  for (int n : {8, 64, 512}) {
    auto t = rotation_tower(mult, n, w0);
    CHECK(t.all_pass());
    for (double r : t.link_residuals) CHECK(r <= 2 * std::numbers::pi / n);
    for (const auto& w : t.w) CHECK(std::abs(w.norm() - 1.0) <= 1e-12);
    CHECK(t.mean_defect <= 1e-12);
  }

  // non-uniform measure and non-constant w0
  std::vector<double> nu(64);
  double tot = 0.0;
  for (int p = 0; p < 64; ++p) tot += nu[static_cast<std::size_t>(p)] = 1.0 + (p % 5);
  for (auto& x : nu) x /= tot;
  auto m2 = OperatorModel::multiplication({64, nu});
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  std::vector<cplx> f(64);
  for (auto& z : f) z = {g(rng), g(rng)};
  auto w = CVector::dense(f);
  w = w.scaled(1.0 / w.norm());
  CHECK(rotation_tower(m2, 16, w, 0.5).all_pass());

  CHECK_THROWS_AS(rotation_tower(OperatorModel::multiplication({4, {}}), 8,
                                 CVector::dense(std::vector<cplx>(4, 0.5))),
                  ResolutionError);
  CHECK_THROWS_AS(rotation_tower(mult, 8, w0, 0.5), PreconditionError);
  CHECK_THROWS_AS(rotation_tower(OperatorModel::bilateral_shift(), 8, e(0)), UnsupportedError);
}
