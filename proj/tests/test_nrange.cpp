#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "orbitforge/errors.hpp"
#include "orbitforge/nrange.hpp"

using namespace orbitforge;

namespace {

Matrix nilpotent2() {
  Matrix n(2, 2);
  n << 0, 1, 0, 0;
  return n;
}

// max |<Tx,x>| over random unit vectors
double sampled_radius(const Matrix& a, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  double best = 0.0;
  for (int t = 0; t < count; ++t) {
    Eigen::VectorXcd x(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) x(i) = {g(rng), g(rng)};
    x.normalize();
    best = std::max(best, std::abs(x.dot(a * x)));
  }
  return best;
}

double max_err(const std::vector<cplx>& p, const std::vector<cplx>& mu) {
  double e = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) e = std::max(e, std::abs(p[j] - mu[j]));
  return e;
}

}  // namespace

TEST_CASE("numerical range boundary") {
  auto b = nr_boundary(OperatorModel::dense(nilpotent2()), 360);
  double mx = 0.0;
  for (cplx z : b.boundary_points) mx = std::max(mx, std::abs(z));
  CHECK(mx >= 0.5 - 1e-6);
  CHECK(mx <= 0.5 + 1e-6);
  double oracle = sampled_radius(nilpotent2(), 1000000, 4);
  CHECK(oracle <= 0.5 + 1e-12);
  CHECK(oracle >= 0.499);

  Matrix d = Matrix::Zero(2, 2);
  d(1, 1) = 1.0;
  for (cplx z : nr_boundary(OperatorModel::dense(d), 64).boundary_points) {
    CHECK(std::abs(z.imag()) < 1e-12);
    CHECK(z.real() >= -1e-12);
    CHECK(z.real() <= 1 + 1e-12);
  }
  for (cplx z : nr_boundary(OperatorModel::dense(Matrix::Identity(3, 3)), 16).boundary_points)
    CHECK(std::abs(z - 1.0) < 1e-12);

  // half-plane invariant and convexity of the traced boundary
  std::srand(3);
  Matrix a = Matrix::Random(5, 5);
  auto r = nr_boundary(OperatorModel::dense(a), 360);
  const std::size_t n = r.angles.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      cplx e = std::polar(1.0, -r.angles[i]);
      CHECK((e * r.boundary_points[k]).real() <= r.support_values[i] + 1e-9);
    }
    cplx p = r.boundary_points[i], q = r.boundary_points[(i + 1) % n], s = r.boundary_points[(i + 2) % n];
    double cross = ((q - p) * std::conj(s - q)).imag();
    CHECK(-cross >= -1e-9);
  }
  CHECK_THROWS_AS(nr_boundary(OperatorModel::bilateral_shift(), 16), UnsupportedError);
}

TEST_CASE("numerical radius") {
  CHECK(numerical_radius(OperatorModel::dense(nilpotent2())) == doctest::Approx(0.5).epsilon(1e-10));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = cplx(0, 1);
  d(1, 1) = cplx(0, -1);
  CHECK(numerical_radius(OperatorModel::dense(d)) == doctest::Approx(1.0).epsilon(1e-12));

  std::srand(11);
  Matrix h = Matrix::Random(6, 6);
  h = (h + h.adjoint()).eval();
  CHECK(numerical_radius(OperatorModel::dense(h)) == doctest::Approx(spectral_norm(h)).epsilon(1e-8));

  for (int t = 0; t < 100; ++t) {
    Matrix a = Matrix::Random(2 + t % 7, 2 + t % 7);
    double w = numerical_radius(OperatorModel::dense(a));
    CHECK(spectral_norm(a) <= 2 * w + 1e-8);
    CHECK(w <= spectral_norm(a) + 1e-8);
    CHECK(sampled_radius(a, 200, static_cast<std::uint64_t>(t)) <= w + 1e-10);
  }
}

TEST_CASE("joint numerical range samples") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -1.0;
  auto tup = OperatorTuple::power_tuple_of(OperatorModel::dense(d), 2);
  auto s = joint_nr_sample(tup, 50, SampleStrategy::random);
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    CHECK(std::abs(s.points[i][1] - 1.0) < 1e-14);
    CHECK(std::abs(s.witnesses[i].norm() - 1.0) < 1e-10);
    CHECK(max_err(joint_point(tup, s.witnesses[i]), s.points[i]) <= 1e-10);
  }

  auto st = OperatorTuple::power_tuple_of(OperatorModel::bilateral_shift(), 2);
  auto p = joint_point(st, CVector::basis(Space::integers(), 0));
  CHECK(p[0] == cplx{});
  CHECK(p[1] == cplx{});

  // random 2x2 samples stay inside the traced boundary's supporting half-planes
  std::srand(21);
  Matrix a = Matrix::Random(2, 2);
  auto b = nr_boundary(OperatorModel::dense(a), 360);
  auto rs = joint_nr_sample(OperatorTuple::power_tuple_of(OperatorModel::dense(a), 1), 500,
                            SampleStrategy::random, 8);
  for (const auto& pt : rs.points)
    for (std::size_t i = 0; i < b.angles.size(); ++i)
      CHECK((std::polar(1.0, -b.angles[i]) * pt[0]).real() <= b.support_values[i] + 1e-9);

  auto wd = joint_nr_sample(st, 20, SampleStrategy::witness_directed, 3);
  for (std::size_t i = 0; i < wd.points.size(); ++i) {
    CHECK(std::abs(std::abs(wd.points[i][0]) - 1.0) < 0.5);
    CHECK(max_err(joint_point(st, wd.witnesses[i]), wd.points[i]) <= 1e-10);
  }
  CHECK(sample_csv(wd).rfind("sample,j,re,im\n", 0) == 0);
  CHECK(to_json(b)["points"].size() == 360);
}

TEST_CASE("essential numerical range witnesses") {
  auto s = OperatorModel::bilateral_shift();
  Subspace cons{{CVector::window(Space::integers(), -3, std::vector<cplx>(10, 1.0))}, SubspaceRole::span};
  for (int n : {1, 3, 6}) {
    std::vector<cplx> mu(static_cast<std::size_t>(n), 0.0);
    auto x = we_membership_witness(s, n, mu, cons, 1e-6);
    CHECK(std::abs(x.norm() - 1.0) < 1e-12);
    CHECK(inner(x, cons.basis[0]) == cplx{});
    CHECK(max_err(joint_point(OperatorTuple::power_tuple_of(s, n), x), mu) < 2e-6);
  }

  // at the radius bound for n = 1
  auto r1 = we_membership_detail(s, 1, {1.0}, std::nullopt, 1e-6);
  CHECK(r1.max_error < 2e-6);
  CHECK_FALSE(r1.poisson);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const int n = 1 + t % 4;
    const double r = admissible_radius(1.0, n).r;
    std::vector<cplx> mu(static_cast<std::size_t>(n));
    for (auto& z : mu) z = std::polar(r * U(rng), 2 * std::numbers::pi * U(rng));
    auto w = we_membership_detail(s, n, mu, std::nullopt, 1e-5);
    CHECK(max_err(w.point, mu) < 2e-5);
    CHECK(max_err(joint_point(OperatorTuple::power_tuple_of(s, n), w.x), mu) == doctest::Approx(w.max_error));
  }

  // power sequence in the disk on the unilateral shift
  cplx lam(0.3, 0.4);
  std::vector<cplx> pw{lam, lam * lam, lam * lam * lam};
  auto u = we_membership_detail(OperatorModel::unilateral_shift(), 3, pw, std::nullopt, 1e-4);
  CHECK(u.poisson);
  CHECK(max_err(u.point, pw) < 2e-4);

  // diagonal unitary with irrational rotation
  auto d = OperatorModel::diagonal_unitary({std::numbers::sqrt2 - 1.0, 0.0});
  auto dw = we_membership_detail(d, 2, {0.0, 0.0}, Interval{0, 50}, 1e-3);
  CHECK(dw.max_error < 2e-3);
  CHECK(dw.x.support()->lo >= 50);

  try {
    we_membership_detail(s, 2, {0.9, 0.1}, std::nullopt, 1e-6);
    FAIL("expected domain refusal");
  } catch (const DomainError& e) {
    CHECK(e.limit == doctest::Approx(admissible_radius(1.0, 2).r));
  }
  CHECK_THROWS_AS(we_membership_detail(OperatorModel::dense(nilpotent2()), 1, {0.0}, std::nullopt, 1e-3),
                  UnsupportedError);
}
