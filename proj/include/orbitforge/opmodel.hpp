#pragma once
#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "orbitforge/cvector.hpp"

namespace orbitforge {

using Matrix = Eigen::MatrixXcd;

enum class OpKind {
  dense,
  bilateral_shift,
  unilateral_shift,
  weighted_shift,
  diagonal_unitary,
  multiplication,
};

const char* to_string(OpKind k);
OpKind op_kind_from_string(const std::string& s);

// Bilateral weighted shift T e_k = w(k) e_{k+1}: explicit real weights on
// [start, start + values.size()), w_minus below and w_plus above.
struct WeightRule {
  std::int64_t start = 0;
  std::vector<double> values;
  double w_minus = 1.0;
  double w_plus = 1.0;
  double at(std::int64_t k) const;
  std::int64_t end() const { return start + static_cast<std::int64_t>(values.size()); }
};

// theta_k = 2*pi*(k*alpha + beta)
struct PhaseRule {
  double alpha = 0.0;
  double beta = 0.0;
  double theta(std::int64_t k) const;  // reduced to [0, 2*pi)
  // Rational detection: q <= 1000 with |q*alpha - round| < 1e-12.
  std::optional<std::int64_t> period() const;
};

// Multiplication by z on L^2(T, nu) sampled on N equispaced nodes
// z_p = exp(2*pi*i*p/N); coordinates are sqrt(nu_p) * f(z_p).
struct GridRule {
  std::int64_t nodes = 0;
  std::vector<double> nu;  // empty means uniform 1/N
  double weight(std::int64_t p) const;
  cplx node(std::int64_t p) const;
  double angle(std::int64_t p) const;
};

class OperatorModel {
 public:
  static OperatorModel dense(const Matrix& a);
  static OperatorModel bilateral_shift();
  static OperatorModel unilateral_shift();
  static OperatorModel weighted_shift(WeightRule w);
  static OperatorModel diagonal_unitary(PhaseRule p);
  static OperatorModel multiplication(GridRule g);

  OpKind kind() const { return kind_; }
  bool is_lazy() const { return kind_ != OpKind::dense; }
  Space space() const;
  double norm_bound() const { return norm_bound_; }
  std::optional<double> power_bound() const { return power_bound_; }
  // Largest index displacement of one application (0 for diagonal kinds).
  int bandwidth() const;

  const Matrix& matrix() const { return matrix_; }
  const WeightRule& weights() const { return weights_; }
  const PhaseRule& phases() const { return phases_; }
  const GridRule& grid() const { return grid_; }

 private:
  OpKind kind_ = OpKind::bilateral_shift;
  Matrix matrix_;
  WeightRule weights_;
  PhaseRule phases_;
  GridRule grid_;
  double norm_bound_ = 1.0;
  std::optional<double> power_bound_;
};

CVector apply(const OperatorModel& op, const CVector& v, int power = 1);
CVector adjoint_apply(const OperatorModel& op, const CVector& v, int power = 1);

// Certified upper bound for the spectral norm of a dense matrix.
double dense_norm_bound(const Matrix& a);
double spectral_norm(const Matrix& a);

struct OperatorTuple {
  std::vector<OperatorModel> ops;
  // When set, ops == (T, T^2, ..., T^n) with T = *base and n = ops.size().
  std::optional<OperatorModel> base;

  static OperatorTuple power_tuple_of(const OperatorModel& t, int n);
  int size() const { return static_cast<int>(ops.size()); }
  Space space() const;
  CVector apply_member(int j, const CVector& v) const;          // j in 1..size()
  CVector adjoint_apply_member(int j, const CVector& v) const;  // j in 1..size()
};

}  // namespace orbitforge
