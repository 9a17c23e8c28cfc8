#pragma once
#include <vector>

#include "orbitforge/opmodel.hpp"

namespace orbitforge {

enum class SubspaceRole { span, finite_codim_complement };

// For role finite_codim_complement the basis spans M^perp and M is the complement.
struct Subspace {
  std::vector<CVector> basis;
  SubspaceRole role = SubspaceRole::span;

  int dim() const { return static_cast<int>(basis.size()); }
  Matrix gram() const;
  // Union of the supports of the basis vectors, if any.
  std::optional<Interval> support() const;
  static Subspace trivial_constraint() { return {{}, SubspaceRole::finite_codim_complement}; }
};

inline constexpr double kRankTolerance = 1e-8;

// Twice-repeated classical Gram-Schmidt. Throws DegenerateError naming the
// first vector whose projected norm falls below kRankTolerance.
Subspace orthonormalize(const std::vector<CVector>& vs, const Subspace* against = nullptr,
                        SubspaceRole role = SubspaceRole::span);

// Matrix C with C(k', k) = <T^n y_k, y_k'>, the compression P_L T^n P_L in L's basis.
Matrix compress(const OperatorModel& op, const Subspace& L, int power);

// G(i, j) = <v_j, v_i>. Vectors sharing one run layout use a blocked product.
Matrix gram_matrix(const std::vector<CVector>& vs);

// Largest entrywise deviation of the Gram matrix from the identity.
double gram_defect(const std::vector<CVector>& vs);

}  // namespace orbitforge
