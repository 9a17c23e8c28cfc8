#include "orbitforge/subspace.hpp"

#include <algorithm>
#include <string>

#include "orbitforge/errors.hpp"

namespace orbitforge {

Matrix Subspace::gram() const { return gram_matrix(basis); }

std::optional<Interval> Subspace::support() const {
  std::optional<Interval> s;
  for (const auto& b : basis) {
    auto bs = b.support();
    if (!bs) continue;
    if (!s) s = bs;
    else s = Interval{std::min(s->lo, bs->lo), std::max(s->hi, bs->hi)};
  }
  return s;
}

Matrix gram_matrix(const std::vector<CVector>& vs) {
  const auto k = static_cast<Eigen::Index>(vs.size());
  Matrix g = Matrix::Zero(k, k);
  if (k == 0) return g;
  bool shared = true;
  for (const auto& v : vs) {
    if (!(v.space() == vs[0].space())) throw DimensionError("vectors live in different spaces");
    if (v.runs().size() != vs[0].runs().size()) {
      shared = false;
      continue;
    }
    for (std::size_t r = 0; r < v.runs().size() && shared; ++r)
      shared = v.runs()[r].start == vs[0].runs()[r].start && v.runs()[r].len == vs[0].runs()[r].len;
  }
  if (!shared) {
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = i; j < k; ++j) {
        g(i, j) = inner(vs[static_cast<std::size_t>(j)], vs[static_cast<std::size_t>(i)]);
        g(j, i) = std::conj(g(i, j));
      }
    return g;
  }
  // Identical layouts: blocked V^* V over the shared data buffers.
  const std::int64_t total = vs[0].nnz();
  constexpr std::int64_t kBlock = 4096;
  Matrix c(kBlock, k);
  for (std::int64_t b = 0; b < total; b += kBlock) {
    const std::int64_t len = std::min(kBlock, total - b);
    for (Eigen::Index j = 0; j < k; ++j)
      std::copy_n(vs[static_cast<std::size_t>(j)].data().data() + b, len, c.col(j).data());
    g.selfadjointView<Eigen::Lower>().rankUpdate(c.topRows(len).adjoint());
  }
  return g.selfadjointView<Eigen::Lower>();
}

double gram_defect(const std::vector<CVector>& vs) {
  if (vs.empty()) return 0.0;
  Matrix g = gram_matrix(vs);
  return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

namespace {

CVector project_out(const CVector& v, const std::vector<CVector>& basis) {
  std::vector<cplx> coef;
  coef.reserve(basis.size());
  for (const auto& b : basis) coef.push_back(inner(v, b));
  std::vector<std::pair<cplx, const CVector*>> terms{{cplx(1.0), &v}};
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (coef[i] != cplx{}) terms.emplace_back(-coef[i], &basis[i]);
  if (terms.size() == 1) return v;
  return linear_combination(terms);
}

}  // namespace

Subspace orthonormalize(const std::vector<CVector>& vs, const Subspace* against, SubspaceRole role) {
  std::vector<CVector> fixed;
  if (against) fixed = against->basis;
  const std::size_t n_fixed = fixed.size();
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (!fixed.empty()) require_same_space(vs[i], fixed.front());
    const double scale = vs[i].norm();
    CVector w = project_out(project_out(vs[i], fixed), fixed);
    const double nw = w.norm();
    if (scale == 0.0 || nw <= kRankTolerance * std::max(1.0, scale))
      throw DegenerateError("vector " + std::to_string(i) +
                                " is linearly dependent on the preceding vectors (residual norm " +
                                std::to_string(nw) + ")",
                            i);
    fixed.push_back(w.scaled(1.0 / nw));
  }
  Subspace out;
  out.role = role;
  out.basis.assign(fixed.begin() + static_cast<std::ptrdiff_t>(n_fixed), fixed.end());
  return out;
}

Matrix compress(const OperatorModel& op, const Subspace& L, int power) {
  if (L.role != SubspaceRole::span) throw DomainError("compress needs a span subspace");
  const int d = L.dim();
  Matrix c(d, d);
  for (int k = 0; k < d; ++k) {
    CVector ty = apply(op, L.basis[k], power);
    for (int kp = 0; kp < d; ++kp) c(kp, k) = inner(ty, L.basis[kp]);
  }
  return c;
}

}  // namespace orbitforge
