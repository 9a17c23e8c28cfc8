#pragma once
#include <gmpxx.h>

#include <vector>

#include "orbitforge/moments.hpp"

namespace orbitforge {

struct QComplex {
  mpq_class re, im;
  QComplex() = default;
  QComplex(mpq_class r, mpq_class i) : re(std::move(r)), im(std::move(i)) {}
  bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
  mpq_class abs2() const { return re * re + im * im; }
  bool operator==(const QComplex& o) const { return re == o.re && im == o.im; }
};

QComplex operator+(const QComplex& a, const QComplex& b);
QComplex operator-(const QComplex& a, const QComplex& b);
QComplex operator*(const QComplex& a, const QComplex& b);
QComplex operator*(const mpq_class& s, const QComplex& a);
QComplex qpow(const QComplex& z, int k);
QComplex to_qcomplex(cplx z);  // exact: every double is a dyadic rational

// m atoms rho * omega * exp(2*pi*i*j/m), j = 1..m, each of the given weight,
// where omega is the principal m-th root of the rational unit `unit`.
struct ExactGroup {
  int m;
  mpq_class weight;
  QComplex unit;
};

struct ExactMeasure {
  mpq_class rho;
  std::vector<ExactGroup> groups;
  std::size_t prepadding_groups = 0;

  mpq_class mass() const;
  mpq_class prepadding_mass() const;
  // Uses sum_j exp(2*pi*i*j*k/m) = m [m | k], so the value is exact.
  QComplex moment(int k) const;
  AtomicMeasure to_float() const;
  std::size_t atom_count() const;
};

mpq_class exact_b(const mpq_class& rho, int n);

// Rational mode of circle_moment_match. When a stage residual has no rational
// direction it is split over two rational unit directions bracketing it.
ExactMeasure circle_moment_match_exact(const mpq_class& rho, const std::vector<QComplex>& eps);

}  // namespace orbitforge
