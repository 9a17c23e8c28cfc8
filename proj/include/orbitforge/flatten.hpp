#pragma once
#include <optional>
#include <string>
#include <vector>

#include "orbitforge/witness.hpp"

namespace orbitforge {

struct DecayProfile {
  int horizon = 0;
  std::vector<std::pair<int, double>> probes;  // (n, max over probe pairs |<T^n a, b>|)
  std::optional<double> K;                     // certified sup_n ||T^n||
  std::optional<std::int64_t> exact_zero_beyond;
  bool decays = false;
  std::string reason;
};

DecayProfile weak_decay_probe(const OperatorModel& op, const std::vector<CVector>& probes, int horizon);

struct PreconditionReport {
  bool ok = false;
  std::string reason;
};

// 0 in the hull of sigma_e, or the unit circle inside sigma.
PreconditionReport spectral_precondition(const OperatorModel& op);

// Smallest s with s > 16 K^2 / eps^2.
std::int64_t flat_count(double K, double eps);
// Exact rational check of s > 16 K^2 / eps^2.
bool flat_count_valid(std::int64_t s, double K, double eps);

struct FlatVectorReport {
  CVector x;
  std::int64_t s = 0;
  std::int64_t start = 0;
  double K = 1.0;
  double eps = 0.0;
  double sup_self = 0.0;     // sup_{n>=1} |<T^n x, x>|
  double sup_a = 0.0;        // sup_{n>=1, a} |<T^n x, a>|
  double sup_a_adj = 0.0;    // sup_{n>=1, a} |<T^{*n} x, a>|
  std::int64_t horizon = 0;  // all inner products vanish for larger n
  bool degenerate = false;
  int doublings = 0;
  std::vector<CheckResult> checks;
  bool all_pass() const;
};

FlatVectorReport flat_vector(const OperatorModel& op, const std::vector<CVector>& A, double eps, const Subspace& M);

struct FlatSchedule {
  double eps = 0.0;
  double K = 1.0;
  std::vector<std::int64_t> s;              // vector count per stage
  std::vector<std::int64_t> threshold_den;  // 2^{r+3} (r+1)
  std::vector<double> thresholds;           // eps / threshold_den
  std::vector<std::int64_t> times;          // n_0 = 1 < n_1 < ... < n_d
};

struct FlatSubspaceReport {
  Subspace L;
  FlatSchedule schedule;
  std::vector<double> norm;  // ||P_L T^n P_L||, index n - 1
  std::vector<double> w;     // numerical radius, index n - 1
  std::vector<int> stage;    // r with n_r <= n < n_{r+1}
  std::int64_t exact_zero_beyond = 0;
  double sup_norm = 0.0;
  std::int64_t next_stage_required = 0;  // entries for one more stage
  bool next_stage_fits = false;
  std::vector<CheckResult> checks;
  bool all_pass() const;
};

FlatSubspaceReport flat_subspace(const OperatorModel& op, double eps, int d);

// Numerical radius of a small matrix: coarse angle grid plus golden-section refinement.
double small_numerical_radius(const Matrix& c);

std::string flat_csv(const FlatSubspaceReport& r);
json to_json(const DecayProfile& p);
json to_json(const FlatVectorReport& r);
json to_json(const FlatSubspaceReport& r, bool per_n);

}  // namespace orbitforge
