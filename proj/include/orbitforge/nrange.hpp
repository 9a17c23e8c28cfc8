#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "orbitforge/json_io.hpp"
#include "orbitforge/moments.hpp"
#include "orbitforge/spectra.hpp"

namespace orbitforge {

struct NRBoundary {
  std::vector<double> angles;
  std::vector<double> support_values;  // top eigenvalue of Re(e^{-i theta} T)
  std::vector<cplx> boundary_points;   // <T x, x> for the top eigenvector
};

struct JointNRSample {
  std::vector<std::vector<cplx>> points;
  std::vector<CVector> witnesses;  // empty unless retained
};

enum class SampleStrategy { random, witness_directed };

NRBoundary nr_boundary(const OperatorModel& op, int n_angles);

// Point (<T_1 x, x>, ..., <T_n x, x>).
std::vector<cplx> joint_point(const OperatorTuple& tuple, const CVector& x);

JointNRSample joint_nr_sample(const OperatorTuple& tuple, int n_samples, SampleStrategy strategy,
                              std::uint64_t seed = 1, bool keep_witnesses = true);

double numerical_radius(const OperatorModel& op, int n_angles = 360);

struct WeWitness {
  CVector x;
  std::vector<cplx> point;  // <T^j x, x>, j = 1..n
  double max_error = 0.0;   // sup_j |point_j - mu_j|
  double radius = 0.0;      // admissible radius r on the chosen circle
  double rho = 0.0;
  bool poisson = false;     // measure came from Poisson atoms
  std::size_t atoms = 0;
  std::int64_t window = 0;  // length of each approximate eigenvector window
};

CVector we_membership_witness(const OperatorModel& base, int n, const std::vector<cplx>& mu,
                              const Subspace& constraints, double delta);

// Same construction with windows placed beyond `avoid` (plus a margin of n + 1).
WeWitness we_membership_detail(const OperatorModel& base, int n, const std::vector<cplx>& mu,
                               std::optional<Interval> avoid, double delta);

std::string boundary_csv(const NRBoundary& b);
std::string sample_csv(const JointNRSample& s);
json to_json(const NRBoundary& b);
json to_json(const JointNRSample& s);

}  // namespace orbitforge
