#include "orbitforge/opmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "orbitforge/errors.hpp"

namespace orbitforge {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double max_run_product(const std::vector<double>& w) {
  // Largest product of |w| over a contiguous block, via logs.
  double best = 0.0, cur = 0.0;
  bool any = false;
  for (double x : w) {
    double a = std::abs(x);
    if (a == 0.0) {
      cur = 0.0;
      continue;
    }
    double l = std::log(a);
    cur = std::max(l, cur + l);
    best = any ? std::max(best, cur) : cur;
    any = true;
  }
  return any ? std::exp(best) : 0.0;
}
}  // namespace

const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::dense: return "dense";
    case OpKind::bilateral_shift: return "bilateral_shift";
    case OpKind::unilateral_shift: return "unilateral_shift";
    case OpKind::weighted_shift: return "weighted_shift";
    case OpKind::diagonal_unitary: return "diagonal_unitary";
    case OpKind::multiplication: return "multiplication";
  }
  return "?";
}

OpKind op_kind_from_string(const std::string& s0) {
  std::string s = s0;
  std::replace(s.begin(), s.end(), '-', '_');
  for (OpKind k : {OpKind::dense, OpKind::bilateral_shift, OpKind::unilateral_shift,
                   OpKind::weighted_shift, OpKind::diagonal_unitary, OpKind::multiplication})
    if (s == to_string(k)) return k;
  throw UnsupportedError("unknown operator kind '" + s0 + "'");
}

double WeightRule::at(std::int64_t k) const {
  if (k < start) return w_minus;
  if (k >= end()) return w_plus;
  return values[static_cast<std::size_t>(k - start)];
}

double PhaseRule::theta(std::int64_t k) const {
  long double t = static_cast<long double>(k) * static_cast<long double>(alpha) +
                  static_cast<long double>(beta);
  t -= std::floor(t);
  return static_cast<double>(t * static_cast<long double>(kTwoPi));
}

std::optional<std::int64_t> PhaseRule::period() const {
  for (std::int64_t q = 1; q <= 1000; ++q) {
    double x = q * alpha;
    if (std::abs(x - std::round(x)) < 1e-12) return q;
  }
  return std::nullopt;
}

double GridRule::weight(std::int64_t p) const {
  if (nu.empty()) return 1.0 / static_cast<double>(nodes);
  return nu[static_cast<std::size_t>(p)];
}

double GridRule::angle(std::int64_t p) const {
  return kTwoPi * static_cast<double>(p) / static_cast<double>(nodes);
}

cplx GridRule::node(std::int64_t p) const { return std::polar(1.0, angle(p)); }

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double dense_norm_bound(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  // Power iteration on A^*A, cross-checked against the SVD value.
  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(a.cols()) / std::sqrt(double(a.cols()));
  double sigma = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Eigen::VectorXcd y = a.adjoint() * (a * x);
    double ny = y.norm();
    if (ny == 0.0) break;
    double s = std::sqrt(ny);
    x = y / ny;
    if (std::abs(s - sigma) <= 1e-15 * std::max(1.0, s)) {
      sigma = s;
      break;
    }
    sigma = s;
  }
  return std::max(sigma, spectral_norm(a)) + 1e-6;
}

OperatorModel OperatorModel::dense(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("dense operator must be square");
  OperatorModel m;
  m.kind_ = OpKind::dense;
  m.matrix_ = a;
  m.norm_bound_ = dense_norm_bound(a);
  return m;
}

OperatorModel OperatorModel::bilateral_shift() {
  OperatorModel m;
  m.kind_ = OpKind::bilateral_shift;
  m.power_bound_ = 1.0;
  return m;
}

OperatorModel OperatorModel::unilateral_shift() {
  OperatorModel m;
  m.kind_ = OpKind::unilateral_shift;
  m.power_bound_ = 1.0;
  return m;
}

OperatorModel OperatorModel::weighted_shift(WeightRule w) {
  OperatorModel m;
  m.kind_ = OpKind::weighted_shift;
  double sup = std::max(std::abs(w.w_minus), std::abs(w.w_plus));
  for (double x : w.values) sup = std::max(sup, std::abs(x));
  m.norm_bound_ = sup;
  if (std::abs(w.w_minus) <= 1.0 && std::abs(w.w_plus) <= 1.0)
    m.power_bound_ = std::max(1.0, max_run_product(w.values));
  m.weights_ = std::move(w);
  return m;
}

OperatorModel OperatorModel::diagonal_unitary(PhaseRule p) {
  OperatorModel m;
  m.kind_ = OpKind::diagonal_unitary;
  m.phases_ = p;
  m.power_bound_ = 1.0;
  return m;
}

OperatorModel OperatorModel::multiplication(GridRule g) {
  if (g.nodes < 1) throw DimensionError("multiplication grid needs at least one node");
  if (!g.nu.empty()) {
    if (static_cast<std::int64_t>(g.nu.size()) != g.nodes)
      throw DimensionError("grid measure has wrong length");
    double s = 0.0;
    for (double x : g.nu) {
      if (x < 0) throw DomainError("grid measure must be non-negative");
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-12) throw DomainError("grid measure must have mass 1");
  }
  OperatorModel m;
  m.kind_ = OpKind::multiplication;
  m.grid_ = std::move(g);
  m.power_bound_ = 1.0;
  return m;
}

Space OperatorModel::space() const {
  switch (kind_) {
    case OpKind::dense: return Space::finite(matrix_.rows());
    case OpKind::multiplication: return Space::finite(grid_.nodes);
    case OpKind::unilateral_shift: return Space::naturals();
    default: return Space::integers();
  }
}

int OperatorModel::bandwidth() const {
  switch (kind_) {
    case OpKind::bilateral_shift:
    case OpKind::unilateral_shift:
    case OpKind::weighted_shift: return 1;
    case OpKind::diagonal_unitary:
    case OpKind::multiplication: return 0;
    case OpKind::dense: return static_cast<int>(std::max<Eigen::Index>(0, matrix_.rows() - 1));
  }
  return 0;
}

namespace {

CVector dense_power(const Matrix& a, const CVector& v, int power) {
  std::vector<cplx> d = v.to_dense();
  Eigen::VectorXcd x = Eigen::Map<Eigen::VectorXcd>(d.data(), static_cast<Eigen::Index>(d.size()));
  for (int p = 0; p < power; ++p) x = a * x;
  return CVector::dense(std::vector<cplx>(x.data(), x.data() + x.size()));
}

CVector weighted_step(const WeightRule& w, const CVector& v, bool adjoint) {
  CVector out = v.shifted(adjoint ? -1 : 1);
  auto& data = out.mutable_data();
  for (const auto& r : out.runs())
    for (std::int64_t k = 0; k < r.len; ++k) {
      std::int64_t i = r.start + k;
      // T e_k = w(k) e_{k+1}; T^* e_{k+1} = w(k) e_k (real weights).
      data[r.offset + k] *= adjoint ? w.at(i) : w.at(i - 1);
    }
  return out;
}

CVector apply_impl(const OperatorModel& op, const CVector& v, int power, bool adjoint) {
  if (power < 1) throw DomainError("power must be positive");
  if (!(v.space() == op.space())) throw DimensionError("vector does not live in the operator's space");
  CVector out;
  switch (op.kind()) {
    case OpKind::dense:
      out = dense_power(adjoint ? Matrix(op.matrix().adjoint()) : op.matrix(), v, power);
      break;
    case OpKind::bilateral_shift:
    case OpKind::unilateral_shift: out = v.shifted(adjoint ? -power : power); break;
    case OpKind::weighted_shift:
      out = v;
      for (int p = 0; p < power; ++p) out = weighted_step(op.weights(), out, adjoint);
      break;
    case OpKind::diagonal_unitary: {
      out = v;
      auto& data = out.mutable_data();
      const double sgn = adjoint ? -1.0 : 1.0;
      for (const auto& r : out.runs())
        for (std::int64_t k = 0; k < r.len; ++k) {
          long double t = static_cast<long double>(r.start + k) * op.phases().alpha + op.phases().beta;
          t = t - std::floor(t);
          t *= power;
          t -= std::floor(t);
          data[r.offset + k] *= std::polar(1.0, sgn * kTwoPi * static_cast<double>(t));
        }
      break;
    }
    case OpKind::multiplication: {
      out = v;
      auto& data = out.mutable_data();
      const std::int64_t n = op.grid().nodes;
      for (const auto& r : out.runs())
        for (std::int64_t k = 0; k < r.len; ++k) {
          std::int64_t q = ((r.start + k) % n) * (power % n) % n;
          double ang = kTwoPi * static_cast<double>(q) / static_cast<double>(n);
          data[r.offset + k] *= std::polar(1.0, adjoint ? -ang : ang);
        }
      break;
    }
  }
  check_budget(out.nnz(), "apply");
  return out;
}

}  // namespace

CVector apply(const OperatorModel& op, const CVector& v, int power) {
  return apply_impl(op, v, power, false);
}

CVector adjoint_apply(const OperatorModel& op, const CVector& v, int power) {
  return apply_impl(op, v, power, true);
}

OperatorTuple OperatorTuple::power_tuple_of(const OperatorModel& t, int n) {
  if (n < 1) throw DomainError("power tuple needs n >= 1");
  OperatorTuple tup;
  tup.ops.assign(static_cast<std::size_t>(n), t);
  tup.base = t;
  return tup;
}

Space OperatorTuple::space() const {
  if (ops.empty()) throw DimensionError("empty operator tuple");
  for (const auto& o : ops)
    if (!(o.space() == ops.front().space())) throw DimensionError("tuple members differ in space");
  return ops.front().space();
}

CVector OperatorTuple::apply_member(int j, const CVector& v) const {
  if (j < 1 || j > size()) throw DimensionError("tuple index out of range");
  if (base) return apply(*base, v, j);
  return apply(ops[static_cast<std::size_t>(j - 1)], v, 1);
}

CVector OperatorTuple::adjoint_apply_member(int j, const CVector& v) const {
  if (j < 1 || j > size()) throw DimensionError("tuple index out of range");
  if (base) return adjoint_apply(*base, v, j);
  return adjoint_apply(ops[static_cast<std::size_t>(j - 1)], v, 1);
}

}  // namespace orbitforge
