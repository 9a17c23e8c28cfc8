#pragma once
#include <optional>
#include <string>
#include <vector>

#include "orbitforge/nrange.hpp"

namespace orbitforge {

// One inequality of a certificate: pass iff measured <= bound (or < bound when strict).
struct CheckResult {
  std::string label;
  double measured = 0.0;
  double bound = 0.0;
  bool strict = false;
  bool pass = false;
  double slack() const { return bound - measured; }
};

CheckResult make_check(std::string label, double measured, double bound, bool strict);

inline constexpr double kOrthogonalityTol = 1e-8;

struct OrbitCertificate {
  CVector x;
  int n = 0;
  double eps = 0.0;
  Matrix gram;                // gram(m, j) = <T^m x, T^j x>, 0 <= m, j < n
  std::vector<double> norms;  // ||T^j x||, j = 0..n-1
  double recurrence = 0.0;    // ||T^n x - x||
  std::vector<CheckResult> checks;

  // Parameters of the construction, kept for replay.
  std::int64_t window = 0;
  double tau = 0.0;
  int c = 0;
  bool corrected = false;  // the zeroing iteration ran

  bool all_pass() const;
};

// Recomputes everything from x.
OrbitCertificate certify_orbit(const OperatorModel& base, const CVector& x, int n, double eps);

struct Tower {
  std::vector<CVector> w;
  std::optional<CVector> u;
  double eps = 0.0;
  std::vector<double> link_residuals;  // ||T w_j - w_{j+1}||, cyclic
  double gram_defect = 0.0;
  double mean_defect = 0.0;  // ||n^{-1/2} sum w_j - u|| or max_p |sum_j w_j(p)|
  double link_bound = 0.0;
  double eps_prime = 0.0;
  std::vector<CheckResult> checks;
  bool all_pass() const;
};

// Power tuple stage: x' = x + 2^{-(k+1)/2} u.
CVector zero_iteration_step(const OperatorTuple& tuple, const CVector& x, int k, double r, const Subspace& M);

struct ZeroTupleResult {
  CVector w;
  std::vector<double> stage_norms;  // ||x_m||^2 after each stage
  int start_k = 0;
  int final_k = 0;
  std::vector<cplx> correlations;  // <T_j w, w>
  double tail_distance = 0.0;      // ||w - x_start||
  double tail_bound = 0.0;         // 2^{-k/2} / (sqrt 2 - 1)
};

inline constexpr int kStageCap = 60;

ZeroTupleResult zero_tuple_vector(const OperatorTuple& tuple, const Subspace& M, const CVector& start_x,
                                  int start_k, double tol);

Subspace diagonal_compression_subspace(const OperatorModel& base, int n, cplx lambda, int d, double tol);

OrbitCertificate almost_orthogonal_orbit(const OperatorModel& base, int n, double eps);

Tower rokhlin_tower(const OperatorModel& base, int n, double eps, const CVector& u);

// eps, when given, enforces n > 2 pi / eps.
Tower rotation_tower(const OperatorModel& mult, int n, const CVector& w0, std::optional<double> eps = std::nullopt);

json to_json(const CheckResult& c);
json to_json(const OrbitCertificate& c, bool compact);
json to_json(const Tower& t, bool compact);

}  // namespace orbitforge
