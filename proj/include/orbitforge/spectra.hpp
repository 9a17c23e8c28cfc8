#pragma once
#include <vector>

#include "orbitforge/json_io.hpp"
#include "orbitforge/regions.hpp"
#include "orbitforge/subspace.hpp"

namespace orbitforge {

struct SpectralDescriptor {
  SetDescriptor sigma, sigma_e, sigma_pi_e;
  bool hull_contains_zero = false;
  SetDescriptor hull_interior;  // open region; a disk or empty

  // sigma_pi_e within sigma_e within sigma, plus the unit-circle inclusion rule.
  bool consistent() const;
  bool unit_circle_in_pi_e() const { return sigma_pi_e.contains_circle(1.0, 1e-12); }
};

struct ApproxEigenpair {
  cplx lambda;
  CVector vector;
  double residual = 0.0;
  Interval support_window;
  double raw_norm = 1.0;  // norm before normalisation (reverse construction)
};

// flat: constant modulus m^{-1/2}. sine: modulus sqrt(2/(m+1)) sin(pi(k+1)/(m+1)),
// whose exact residual on the shift is 2 sin(pi/(2(m+1))).
enum class WindowShape { flat, sine };

double flat_window_residual(std::int64_t m);
double sine_window_residual(std::int64_t m);
// Smallest window length whose residual is strictly below tau.
std::int64_t window_length_for(WindowShape shape, double tau);

inline constexpr int kDenseCap = 512;

std::vector<cplx> dense_spectrum(const OperatorModel& op);
SpectralDescriptor analytic_descriptor(const OperatorModel& op);

ApproxEigenpair approx_eigenvector(const OperatorModel& op, cplx lambda, std::int64_t m, std::int64_t a,
                                   WindowShape shape = WindowShape::flat);

std::vector<ApproxEigenpair> approx_eigenvector_family(const OperatorModel& op, const std::vector<cplx>& lambdas,
                                                       std::int64_t m, std::int64_t margin,
                                                       const Subspace& constraints,
                                                       WindowShape shape = WindowShape::flat);

// Variant used internally: windows are placed beyond the supports of `avoid`.
std::vector<ApproxEigenpair> approx_eigenvector_family_avoiding(const OperatorModel& op,
                                                                const std::vector<cplx>& lambdas,
                                                                std::int64_t m, std::int64_t margin,
                                                                std::optional<Interval> avoid,
                                                                WindowShape shape);

ApproxEigenpair orbit_to_approx_eigenvector(const OperatorModel& op, const CVector& x, cplx lambda, int n);

double eigen_residual(const OperatorModel& op, const CVector& x, cplx lambda);

json to_json(const SetDescriptor& s);
json to_json(const SpectralDescriptor& d);

}  // namespace orbitforge
