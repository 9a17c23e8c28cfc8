#include "orbitforge/nrange.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "orbitforge/errors.hpp"

namespace orbitforge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct TopPair {
  double value;
  Eigen::VectorXcd vec;
};

TopPair top_of_real_part(const Matrix& a, double theta) {
  const cplx e = std::polar(1.0, -theta);
  Matrix h = (e * a + std::conj(e) * a.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolve failed");
  const Eigen::Index last = a.rows() - 1;
  return {es.eigenvalues()(last), es.eigenvectors().col(last)};
}

void require_dense(const OperatorModel& op, const char* what) {
  if (op.kind() != OpKind::dense) throw UnsupportedError(std::string(what) + " needs a dense model");
  if (op.matrix().rows() == 0) throw DimensionError("empty matrix");
}

double golden_max(const Matrix& a, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = top_of_real_part(a, x1).value, f2 = top_of_real_part(a, x2).value;
  for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = top_of_real_part(a, x2).value;
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = top_of_real_part(a, x1).value;
    }
  }
  return std::max(f1, f2);
}

CVector random_unit(std::mt19937_64& rng, Space sp) {
  std::normal_distribution<double> g;
  std::int64_t len = sp.kind == Indexing::finite ? sp.dim : 16;
  std::vector<cplx> v(static_cast<std::size_t>(len));
  for (auto& z : v) z = {g(rng), g(rng)};
  CVector x = CVector::window(sp, 0, v);
  return x.scaled(1.0 / x.norm());
}

}  // namespace

NRBoundary nr_boundary(const OperatorModel& op, int n_angles) {
  require_dense(op, "nr_boundary");
  if (n_angles < 8) throw DomainError("need at least 8 angles");
  const Matrix& a = op.matrix();
  NRBoundary b;
  for (int i = 0; i < n_angles; ++i) {
    double th = kTwoPi * i / n_angles;
    auto tp = top_of_real_part(a, th);
    b.angles.push_back(th);
    b.support_values.push_back(tp.value);
    b.boundary_points.push_back(tp.vec.dot(a * tp.vec));  // dot conjugates the first argument
  }
  return b;
}

std::vector<cplx> joint_point(const OperatorTuple& tuple, const CVector& x) {
  std::vector<cplx> p;
  p.reserve(static_cast<std::size_t>(tuple.size()));
  if (tuple.base) {
    CVector t = x;
    for (int j = 1; j <= tuple.size(); ++j) {
      t = apply(*tuple.base, t);
      p.push_back(inner(t, x));
    }
  } else {
    for (int j = 1; j <= tuple.size(); ++j) p.push_back(inner(tuple.apply_member(j, x), x));
  }
  return p;
}

JointNRSample joint_nr_sample(const OperatorTuple& tuple, int n_samples, SampleStrategy strategy,
                              std::uint64_t seed, bool keep_witnesses) {
  const Space sp = tuple.space();
  const OperatorModel& first = tuple.base ? *tuple.base : tuple.ops.front();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::optional<SpectralDescriptor> desc;
  if (strategy == SampleStrategy::witness_directed && first.is_lazy()) {
    try {
      desc = analytic_descriptor(first);
    } catch (const UnsupportedError&) {
    }
  }
  JointNRSample s;
  for (int i = 0; i < n_samples; ++i) {
    CVector x;
    if (strategy == SampleStrategy::random) {
      x = random_unit(rng, sp);
    } else if (first.kind() == OpKind::dense) {
      auto tp = top_of_real_part(first.matrix(), kTwoPi * U(rng));
      x = CVector::dense(std::vector<cplx>(tp.vec.data(), tp.vec.data() + tp.vec.size()));
    } else if (desc && (desc->sigma_pi_e.kind == SetKind::circle || desc->sigma_pi_e.kind == SetKind::circles)) {
      double rho = desc->sigma_pi_e.radii.back();
      cplx lam = std::polar(rho, kTwoPi * U(rng));
      std::int64_t m = 2 + static_cast<std::int64_t>(U(rng) * 62);
      std::int64_t a = first.kind() == OpKind::weighted_shift
                           ? (rho == std::abs(first.weights().w_plus) ? first.weights().end() : first.weights().start - m)
                           : 0;
      x = approx_eigenvector(first, lam, m, a).vector;
    } else {
      x = random_unit(rng, sp);
    }
    s.points.push_back(joint_point(tuple, x));
    if (keep_witnesses) s.witnesses.push_back(std::move(x));
  }
  return s;
}

double numerical_radius(const OperatorModel& op, int n_angles) {
  require_dense(op, "numerical_radius");
  if (n_angles < 8) throw DomainError("need at least 8 angles");
  const Matrix& a = op.matrix();
  std::vector<double> f(static_cast<std::size_t>(n_angles));
  for (int i = 0; i < n_angles; ++i) f[static_cast<std::size_t>(i)] = top_of_real_part(a, kTwoPi * i / n_angles).value;
  // refine around the four largest local maxima
  std::vector<int> peaks;
  for (int i = 0; i < n_angles; ++i) {
    double l = f[static_cast<std::size_t>((i + n_angles - 1) % n_angles)];
    double r = f[static_cast<std::size_t>((i + 1) % n_angles)];
    if (f[static_cast<std::size_t>(i)] >= l && f[static_cast<std::size_t>(i)] >= r) peaks.push_back(i);
  }
  std::sort(peaks.begin(), peaks.end(),
            [&](int x, int y) { return f[static_cast<std::size_t>(x)] > f[static_cast<std::size_t>(y)]; });
  double w = *std::max_element(f.begin(), f.end());
  const double h = kTwoPi / n_angles;
  for (std::size_t k = 0; k < std::min<std::size_t>(4, peaks.size()); ++k) {
    double c = h * peaks[k];
    w = std::max(w, golden_max(a, c - h, c + h));
  }
  const double nrm = spectral_norm(a);
  if (w > nrm * (1 + 1e-8) + 1e-300 || nrm > 2 * w * (1 + 1e-8))
    throw NumericalError("numerical radius violates w <= ||T|| <= 2w", std::abs(nrm - w));
  return w;
}

WeWitness we_membership_detail(const OperatorModel& base, int n, const std::vector<cplx>& mu,
                               std::optional<Interval> avoid, double delta) {
  if (!base.is_lazy()) throw UnsupportedError("we_membership_witness needs a lazy model");
  if (n < 1 || static_cast<int>(mu.size()) != n) throw DimensionError("target must have n entries");
  if (!(delta > 0)) throw DomainError("delta must be positive");
  const SpectralDescriptor d = analytic_descriptor(base);
  if (d.sigma_pi_e.kind != SetKind::circle && d.sigma_pi_e.kind != SetKind::circles)
    throw UnsupportedError("essential spectrum " + d.sigma_pi_e.describe() + " contains no circle");

  WeWitness out;
  out.rho = d.sigma_pi_e.radii.back();
  out.radius = admissible_radius(out.rho, n).r;

  AtomicMeasure meas;
  if (sup_norm(mu) <= out.radius) {
    meas = circle_moment_match(out.rho, mu);
  } else {
    // A power sequence (u, ..., u^n) with |u| < rho is a Poisson average on the circle.
    const cplx u = mu[0];
    bool power = std::abs(u) < out.rho;
    cplx p = u;
    for (int j = 1; j < n && power; ++j) {
      p *= u;
      power = std::abs(mu[static_cast<std::size_t>(j)] - p) <= 1e-12 * std::max(1.0, std::abs(p));
    }
    if (!power)
      throw DomainError("target norm exceeds admissible radius " + std::to_string(out.radius), out.radius);
    out.poisson = true;
    for (int m = 16;; m *= 2) {
      auto pa = poisson_atoms(u, out.rho, m, n);
      double err = *std::max_element(pa.moment_error.begin(), pa.moment_error.end());
      if (err <= delta / 2) {
        meas = pa.measure;
        break;
      }
      if (m > (1 << 20)) throw NumericalError("Poisson atoms did not reach delta/2", err);
    }
  }

  std::vector<cplx> lambdas;
  std::vector<double> weights;
  for (const auto& a : meas.atoms)
    if (a.weight > 0) {
      lambdas.push_back(a.lambda);
      weights.push_back(a.weight);
    }
  out.atoms = lambdas.size();

  for (std::int64_t m = std::max<std::int64_t>(8 * n, 16);; m *= 2) {
    auto fam = approx_eigenvector_family_avoiding(base, lambdas, m, n + 1, avoid, WindowShape::sine);
    std::vector<std::pair<cplx, const CVector*>> terms;
    for (std::size_t i = 0; i < fam.size(); ++i) terms.push_back({std::sqrt(weights[i]), &fam[i].vector});
    CVector x = linear_combination(terms);
    x = x.scaled(1.0 / x.norm());
    auto pt = joint_point(OperatorTuple::power_tuple_of(base, n), x);
    double err = 0.0;
    for (int j = 0; j < n; ++j) err = std::max(err, std::abs(pt[static_cast<std::size_t>(j)] - mu[static_cast<std::size_t>(j)]));
    if (err < delta) {
      out.x = std::move(x);
      out.point = std::move(pt);
      out.max_error = err;
      out.window = m;
      return out;
    }
  }
}

CVector we_membership_witness(const OperatorModel& base, int n, const std::vector<cplx>& mu,
                              const Subspace& constraints, double delta) {
  if (!constraints.basis.empty() && !(constraints.basis.front().space() == base.space()))
    throw DimensionError("constraints live in a different space");
  return we_membership_detail(base, n, mu, constraints.support(), delta).x;
}

std::string boundary_csv(const NRBoundary& b) {
  std::ostringstream os;
  os.precision(17);
  os << "theta,re,im\n";
  for (std::size_t i = 0; i < b.angles.size(); ++i)
    os << b.angles[i] << ',' << b.boundary_points[i].real() << ',' << b.boundary_points[i].imag() << '\n';
  return os.str();
}

std::string sample_csv(const JointNRSample& s) {
  std::ostringstream os;
  os.precision(17);
  os << "sample,j,re,im\n";
  for (std::size_t i = 0; i < s.points.size(); ++i)
    for (std::size_t j = 0; j < s.points[i].size(); ++j)
      os << i << ',' << j + 1 << ',' << s.points[i][j].real() << ',' << s.points[i][j].imag() << '\n';
  return os.str();
}

json to_json(const NRBoundary& b) {
  json pts = json::array();
  for (cplx z : b.boundary_points) pts.push_back({z.real(), z.imag()});
  return {{"kind", "nr_boundary"}, {"angles", b.angles}, {"support_values", b.support_values}, {"points", pts}};
}

json to_json(const JointNRSample& s) {
  json pts = json::array();
  for (const auto& p : s.points) {
    json row = json::array();
    for (cplx z : p) row.push_back({z.real(), z.imag()});
    pts.push_back(row);
  }
  return {{"kind", "joint_nr_sample"}, {"points", pts}};
}

}  // namespace orbitforge
