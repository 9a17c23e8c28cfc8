#pragma once
#include <optional>
#include <vector>

#include "orbitforge/cvector.hpp"
#include "orbitforge/regions.hpp"

namespace orbitforge {

struct Atom {
  cplx lambda;
  double weight;
};

struct AtomicMeasure {
  std::vector<Atom> atoms;
  std::optional<double> rho;

  double mass() const;
  cplx moment(int k) const;  // sum_j c_j lambda_j^k
  double max_moment_error(const std::vector<cplx>& target) const;
};

struct RadiusBudget {
  double rho;
  int n;
  double b;
  double r;
};

RadiusBudget admissible_radius(double rho, int n);

double sup_norm(const std::vector<cplx>& v);

// Bookkeeping of one circle_moment_match run.
struct MatchTrace {
  double prepadding_mass = 0.0;
  double mass_bound = 0.0;  // b_n * ||eps||
  int skipped_stages = 0;
  double padding = 0.0;
};

// Stagewise construction on the circle of radius rho; throws DomainError when
// ||eps||_inf exceeds the admissible radius.
AtomicMeasure circle_moment_match(double rho, const std::vector<cplx>& eps, MatchTrace* trace = nullptr);

struct PoissonAtoms {
  AtomicMeasure measure;
  std::vector<double> moment_error;  // |sum c lambda^k - u^k| for k = 1..size
};

PoissonAtoms poisson_atoms(cplx u, double rho, int m_atoms, int n_report = 8);

// Matches eps on a circle inside the hull of K and moves atoms that fall
// outside K onto Poisson sub-measures supported on a circle of K.
AtomicMeasure hull_moment_match(const SetDescriptor& K, const std::vector<cplx>& eps, double delta,
                                std::optional<double> rho = std::nullopt);

}  // namespace orbitforge
