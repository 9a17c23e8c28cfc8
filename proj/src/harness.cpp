#include "orbitforge/harness.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "orbitforge/errors.hpp"
#include "orbitforge/json_io.hpp"
#include "orbitforge/moments.hpp"
#include "orbitforge/moments_exact.hpp"

namespace orbitforge {

namespace {

struct Recorder {
  std::vector<InequalityResult>& out;
  void add(std::string label, std::string anchor, double measured, double bound, bool strict) {
    auto c = make_check(label, measured, bound, strict);
    out.push_back({std::move(label), std::move(anchor), measured, bound, strict, c.pass});
  }
};

json model_json(const char* kind, json params = json::object()) { return {{"kind", kind}, {"params", params}}; }

OperatorModel model_of(const json& p) { return operator_from_json(p.at("model")); }

CVector orbit_vector(const OperatorModel& op, const CVector& x, int j) { return j == 0 ? x : apply(op, x, j); }

// |<T^m x, T^j x>| for all pairs with lo <= m, j <= hi.
Matrix orbit_gram(const OperatorModel& op, const CVector& x, int lo, int hi) {
  std::vector<CVector> v;
  CVector t = orbit_vector(op, x, lo);
  for (int j = lo; j <= hi; ++j) {
    v.push_back(t);
    if (j < hi) t = apply(op, t, 1);
  }
  return gram_matrix(v);
}

double off_diagonal_max(const Matrix& g, Eigen::Index from) {
  double m = 0.0;
  for (Eigen::Index i = from; i < g.rows(); ++i)
    for (Eigen::Index j = from; j < g.cols(); ++j)
      if (i != j) m = std::max(m, std::abs(g(i, j)));
  return m;
}

void check_circlegeneral(const json& p, Recorder& rec) {
  auto op = model_of(p);
  const int n = p.at("n");
  const double eps = p.at("eps");
  auto cert = almost_orthogonal_orbit(op, n, eps);
  const CVector& x = cert.x;
  Matrix g = orbit_gram(op, x, 0, n - 1);
  double orth = 0.0;
  for (Eigen::Index j = 1; j < g.cols(); ++j) orth = std::max(orth, std::abs(g(j, 0)));
  double norms = 0.0;
  for (Eigen::Index j = 0; j < g.rows(); ++j) norms = std::max(norms, std::abs(std::sqrt(g(j, j).real()) - 1.0));
  rec.add("orthogonality", "x _|_ T^j x, 1 <= j <= n-1", orth, kOrthogonalityTol, false);
  rec.add("off-diagonal", "|<T^m x, T^j x>| < eps, 1 <= m != j <= n-1", off_diagonal_max(g, 1), eps, true);
  rec.add("norms", "1 - eps < ||T^j x|| < 1 + eps, 0 <= j <= n-1", norms, eps, true);
  rec.add("recurrence", "||T^n x - x|| < eps", distance(apply(op, x, n), x), eps, true);
  const double entries = std::max(static_cast<double>(x.nnz()), static_cast<double>(n) * static_cast<double>(cert.window));
  rec.add("window entries", "n * window <= budget", entries, p.at("budget").get<double>(), false);
}

void check_circlepb(const json& p, Recorder& rec) {
  auto op = model_of(p);
  const int n = p.at("n");
  const double eps = p.at("eps");
  auto pb = op.power_bound();
  if (op.kind() == OpKind::dense) {
    Eigen::ComplexEigenSolver<Matrix> es(op.matrix(), false);
    if (es.eigenvalues().cwiseAbs().maxCoeff() > 1.0 + 1e-12) throw PreconditionError("spectral radius exceeds 1");
  } else if (!pb) {
    throw PreconditionError("no power bound: spectral radius may exceed 1");
  }
  auto cert = almost_orthogonal_orbit(op, n, eps);
  const CVector& x = cert.x;
  Matrix g = orbit_gram(op, x, 0, n - 1);
  rec.add("unit vector", "||x|| = 1", std::abs(x.norm() - 1.0), 1e-12, false);
  rec.add("off-diagonal", "|<T^m x, T^j x>| < eps, 0 <= m != j <= n-1", off_diagonal_max(g, 0), eps, true);
  rec.add("recurrence", "||T^n x - x|| < eps", distance(apply(op, x, n), x), eps, true);
}

void check_circleunitary(const json& p, Recorder& rec) {
  auto op = model_of(p);
  const int n = p.at("n");
  const double eps = p.at("eps");
  if (op.kind() != OpKind::diagonal_unitary && op.kind() != OpKind::bilateral_shift &&
      op.kind() != OpKind::multiplication)
    throw UnsupportedError(std::string("model ") + to_string(op.kind()) + " is not unitary");
  // x _|_ T^j x for j = 1..n makes x, Tx, ..., T^n x mutually orthogonal.
  auto cert = almost_orthogonal_orbit(op, n + 1, eps);
  Matrix g = orbit_gram(op, cert.x, 0, n);
  double norms = 0.0;
  for (Eigen::Index j = 0; j < g.rows(); ++j) norms = std::max(norms, std::abs(g(j, j).real() - 1.0));
  rec.add("mutual orthogonality", "<T^m x, T^j x> = 0, 0 <= m != j <= n", off_diagonal_max(g, 0), kOrthogonalityTol,
          false);
  rec.add("unit orbit", "||T^j x|| = 1, 0 <= j <= n", norms, 1e-12, false);
}

void check_connes(const json& p, Recorder& rec) {
  auto op = model_of(p);
  const int n = p.at("n");
  const double eps = p.at("eps");
  CVector u = p.contains("u") ? vector_from_json(p.at("u")) : CVector::basis(op.space(), 0);
  auto t = rokhlin_tower(op, n, eps, u);
  std::vector<std::pair<cplx, const CVector*>> terms{{-1.0, &u}};
  const double sq = 1.0 / std::sqrt(static_cast<double>(n));
  for (const auto& w : t.w) terms.push_back({sq, &w});
  double links = 0.0;
  for (int j = 0; j < n; ++j)
    links = std::max(links, distance(apply(op, t.w[static_cast<std::size_t>(j)]), t.w[static_cast<std::size_t>((j + 1) % n)]));
  rec.add("gram", "<w_i, w_j> = delta_ij", gram_defect(t.w), 1e-10, false);
  rec.add("mean identity", "n^-1/2 sum_j w_j = u", linear_combination(terms).norm(), 1e-12, false);
  rec.add("links", "||T w_j - w_j+1|| < eps, w_n = w_0", links, eps, true);
}

void check_flatten(const json& p, Recorder& rec) {
  auto op = model_of(p);
  auto r = flat_subspace(op, p.at("eps"), p.at("d"));
  static const char* anchors[] = {
      "<y_k, y_k'> = delta_kk'",
      "s_r > 16 K^2 / eps_r^2, eps_r = eps / (2^{r+3} (r+1)), n_r increasing",
      "y_{r+1} _|_ T^n y_k, T^*n y_k for n < n_r",
      "sup_n ||P_L T^n P_L|| < eps",
      "||P_L T^n P_L|| <= 2^-r eps for n_r <= n < n_{r+1}",
      "w(P_L T^n P_L) <= 2^-r-1 eps for n_r <= n < n_{r+1}",
      "||A|| <= 2 w(A)",
      "P_L T^n P_L = 0 beyond the support span",
  };
  for (std::size_t i = 0; i < r.checks.size(); ++i) {
    const auto& c = r.checks[i];
    rec.add(c.label, i < std::size(anchors) ? anchors[i] : "", c.measured, c.bound, c.strict);
  }
}

void check_prop_basic(const json& p, Recorder& rec) {
  auto op = model_of(p);
  const int n = p.at("n");
  const int stages = p.at("stages");
  const double tol = p.at("tol");
  auto tup = OperatorTuple::power_tuple_of(op, n);
  CVector start(op.space());
  auto z = zero_tuple_vector(tup, Subspace::trivial_constraint(), start, 0, tol);
  double dev = z.stage_norms.size() >= static_cast<std::size_t>(stages) ? 0.0 : HUGE_VAL;
  for (int m = 1; m <= std::min<int>(stages, static_cast<int>(z.stage_norms.size())); ++m)
    dev = std::max(dev, std::abs(z.stage_norms[static_cast<std::size_t>(m - 1)] - (1.0 - std::ldexp(1.0, -m))));
  double corr = 0.0;
  for (cplx c : joint_point(tup, z.w)) corr = std::max(corr, std::abs(c));
  rec.add("stage norms", "||x_m||^2 = 1 - 2^-m", dev, 1e-10, false);
  rec.add("tail", "||w - x_start|| <= 3 * 2^(-k/2-1)", distance(z.w, start), 1.5, false);
  rec.add("zero correlations", "|<T^j w, w>| <= tol, 1 <= j <= n", corr, tol, false);
  rec.add("unit", "||w|| = 1", std::abs(z.w.norm() - 1.0), 1e-12, false);
}

void check_lambdaw(const json& p, Recorder& rec) {
  auto op = model_of(p);
  const int n = p.at("n");
  const int d = p.at("d");
  const double tol = p.at("tol");
  const cplx lambda = complex_from_json(p.at("lambda"));
  auto L = diagonal_compression_subspace(op, n, lambda, d, tol);
  double dev = 0.0;
  cplx lj = 1.0;
  for (int j = 1; j <= n; ++j) {
    lj *= lambda;
    Matrix c = compress(op, L, j) - lj * Matrix::Identity(L.dim(), L.dim());
    dev = std::max(dev, c.cwiseAbs().maxCoeff());
  }
  rec.add("orthonormal basis", "<y_k, y_k'> = delta_kk'", gram_defect(L.basis), 1e-10, false);
  rec.add("diagonal compression", "P_L T^j P_L = lambda^j P_L, 1 <= j <= n", dev, tol, false);
}

mpq_class rational_param(const json& v) {
  if (v.is_string()) {
    mpq_class q(v.get<std::string>());
    q.canonicalize();
    return q;
  }
  return mpq_class(v.get<double>());
}

// Nonzero rationals never report as 0.
double exact_abs(const mpq_class& q) {
  if (q == 0) return 0.0;
  return std::max(std::abs(q.get_d()), std::numeric_limits<double>::denorm_min());
}

void check_moment_exact(const json& p, Recorder& rec, std::uint64_t seed) {
  const int n = p.at("n");
  const int trials = p.at("trials");
  const mpq_class rho = rational_param(p.at("rho"));
  if (rho <= 0) throw DomainError("rho must be positive");
  const double rho_d = rho.get_d();
  mpq_class b = 0;
  for (int k = 1; k <= n; ++k) {
    mpq_class pk = 1;
    for (int i = 0; i < k; ++i) pk /= rho;
    b = 2 * b + pk;
  }
  const mpq_class r_exact = 1 / b;
  const double r = admissible_radius(rho_d, n).r;
  rec.add("admissible radius", "r = 1 / b_n, b_n = 2 b_{n-1} + rho^-n", std::abs(r - r_exact.get_d()) / r_exact.get_d(),
          1e-14, false);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  double exact_err = 0.0, mass_err = 0.0, float_err = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<cplx> eps(static_cast<std::size_t>(n));
    for (auto& e : eps) e = 0.999 * r * std::numbers::sqrt2 / 2 * cplx(unif(rng), unif(rng));
    std::vector<QComplex> q;
    for (cplx e : eps) q.push_back(to_qcomplex(e));
    auto em = circle_moment_match_exact(rho, q);
    for (int k = 1; k <= n; ++k) {
      QComplex d = em.moment(k) - q[static_cast<std::size_t>(k - 1)];
      exact_err = std::max({exact_err, exact_abs(d.re), exact_abs(d.im)});
    }
    mpq_class dm = em.mass() - 1;
    mass_err = std::max(mass_err, exact_abs(dm));
    float_err = std::max(float_err, circle_moment_match(rho_d, eps).max_moment_error(eps));
  }
  rec.add("exact moments", "sum c_i lambda_i^k = eps_k exactly, 1 <= k <= n", exact_err, 0.0, false);
  rec.add("exact mass", "sum c_i = 1 exactly", mass_err, 0.0, false);
  rec.add("float moments", "|sum c_i lambda_i^k - eps_k| <= 1e-10", float_err, 1e-10, false);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

const char* to_string(TheoremId id) {
  switch (id) {
    case TheoremId::circlegeneral_iii: return "circlegeneral_iii";
    case TheoremId::circlepb_ii: return "circlepb_ii";
    case TheoremId::circleunitary_iii: return "circleunitary_iii";
    case TheoremId::connes_ii: return "connes_ii";
    case TheoremId::flatten_main: return "flatten_main";
    case TheoremId::prop_basic: return "prop_basic";
    case TheoremId::lambdaw: return "lambdaw";
    case TheoremId::moment_exact: return "moment_exact";
  }
  return "?";
}

const std::vector<TheoremId>& all_theorems() {
  static const std::vector<TheoremId> ids{TheoremId::circlegeneral_iii, TheoremId::circlepb_ii,
                                          TheoremId::circleunitary_iii, TheoremId::connes_ii,
                                          TheoremId::flatten_main,      TheoremId::prop_basic,
                                          TheoremId::lambdaw,           TheoremId::moment_exact};
  return ids;
}

TheoremId theorem_from_string(const std::string& s) {
  for (auto id : all_theorems())
    if (s == to_string(id)) return id;
  throw DomainError("unknown theorem id '" + s + "'");
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::refused: return "refused";
  }
  return "?";
}

int TheoremCheck::exit_code() const {
  switch (status) {
    case CheckStatus::pass: return 0;
    case CheckStatus::fail: return 1;
    case CheckStatus::refused: return 2;
  }
  return 1;
}

bool TheoremCheck::operator==(const TheoremCheck& o) const {
  return id == o.id && params == o.params && seed == o.seed && results == o.results && status == o.status &&
         diagnostics == o.diagnostics;
}

json default_params(TheoremId id) {
  const json bilateral = model_json("bilateral_shift");
  switch (id) {
    case TheoremId::circlegeneral_iii: return {{"model", bilateral}, {"n", 8}, {"eps", 0.1}, {"budget", 1000000}};
    case TheoremId::circlepb_ii: return {{"model", bilateral}, {"n", 8}, {"eps", 0.1}};
    case TheoremId::circleunitary_iii:
      return {{"model", model_json("diagonal_unitary", {{"alpha", std::numbers::sqrt2 - 1.0}, {"beta", 0.0}})},
              {"n", 8},
              {"eps", 0.05}};
    case TheoremId::connes_ii: return {{"model", bilateral}, {"n", 65}, {"eps", 0.25}};
    case TheoremId::flatten_main: return {{"model", bilateral}, {"eps", 0.25}, {"d", 3}};
    case TheoremId::prop_basic: return {{"model", bilateral}, {"n", 4}, {"stages", 10}, {"tol", 1e-8}};
    case TheoremId::lambdaw:
      return {{"model", model_json("unilateral_shift")}, {"n", 3}, {"d", 2}, {"lambda", complex_to_json(0.5)},
              {"tol", 1e-6}};
    case TheoremId::moment_exact: return {{"rho", "1"}, {"n", 6}, {"trials", 20}};
  }
  return json::object();
}

json complete_params(TheoremId id, const json& given) {
  json p = default_params(id);
  if (given.is_null()) return p;
  if (!given.is_object()) throw DomainError("parameters must be an object");
  for (const auto& [k, v] : given.items()) {
    if (!p.contains(k) && !(id == TheoremId::connes_ii && k == "u"))
      throw DomainError("unknown parameter '" + k + "' for " + to_string(id));
    p[k] = v;
  }
  return p;
}

std::vector<std::string> verified_inequalities(TheoremId id) {
  switch (id) {
    case TheoremId::circlegeneral_iii:
      return {"x _|_ T^j x (1 <= j <= n-1)", "|<T^m x, T^j x>| < eps (1 <= m != j <= n-1)",
              "1 - eps < ||T^j x|| < 1 + eps", "||T^n x - x|| < eps"};
    case TheoremId::circlepb_ii:
      return {"|<T^m x, T^j x>| < eps (0 <= m != j <= n-1)", "||T^n x - x|| < eps"};
    case TheoremId::circleunitary_iii: return {"x, Tx, ..., T^n x mutually orthogonal"};
    case TheoremId::connes_ii:
      return {"<w_i, w_j> = delta_ij", "n^-1/2 sum w_j = u", "||T w_j - w_j+1|| < eps (cyclic)"};
    case TheoremId::flatten_main:
      return {"sup_n ||P_L T^n P_L|| < eps", "||P_L T^n P_L|| <= 2^-r eps on [n_r, n_r+1)", "||A|| <= 2 w(A)"};
    case TheoremId::prop_basic: return {"||x_m||^2 = 1 - 2^-m", "<T_j w, w> = 0", "||w - x_k|| <= 3 * 2^(-k/2-1)"};
    case TheoremId::lambdaw: return {"P_L T^j P_L = lambda^j P_L (1 <= j <= n)"};
    case TheoremId::moment_exact:
      return {"sum c_i lambda_i^k = eps_k (1 <= k <= n)", "sum c_i = 1", "r = 1/b_n, b_n = 2 b_n-1 + rho^-n"};
  }
  return {};
}

TheoremCheck run_check(TheoremId id, const json& params, std::uint64_t seed) {
  TheoremCheck c;
  c.id = id;
  c.seed = seed;
  c.params = complete_params(id, params);
  Recorder rec{c.results};
  try {
    switch (id) {
      case TheoremId::circlegeneral_iii: check_circlegeneral(c.params, rec); break;
      case TheoremId::circlepb_ii: check_circlepb(c.params, rec); break;
      case TheoremId::circleunitary_iii: check_circleunitary(c.params, rec); break;
      case TheoremId::connes_ii: check_connes(c.params, rec); break;
      case TheoremId::flatten_main: check_flatten(c.params, rec); break;
      case TheoremId::prop_basic: check_prop_basic(c.params, rec); break;
      case TheoremId::lambdaw: check_lambdaw(c.params, rec); break;
      case TheoremId::moment_exact: check_moment_exact(c.params, rec, seed); break;
    }
  } catch (const PreconditionError& e) {
    c.status = CheckStatus::refused;
    c.diagnostics = std::string("precondition: ") + e.what();
    return c;
  } catch (const UnsupportedError& e) {
    c.status = CheckStatus::refused;
    c.diagnostics = std::string("unsupported: ") + e.what();
    return c;
  } catch (const Error& e) {
    c.status = CheckStatus::fail;
    c.diagnostics = std::string(to_string(e.kind())) + ": " + e.what();
    return c;
  } catch (const json::exception& e) {
    c.status = CheckStatus::fail;
    c.diagnostics = std::string("parameter: ") + e.what();
    return c;
  }
  const bool ok = std::all_of(c.results.begin(), c.results.end(), [](const auto& r) { return r.pass; });
  c.status = ok ? CheckStatus::pass : CheckStatus::fail;
  return c;
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  if (s == "markdown" || s == "md") return ReportFormat::markdown;
  throw DomainError("unknown report format '" + s + "'");
}

json to_json(const TheoremCheck& c) {
  json j;
  j["theorem_id"] = to_string(c.id);
  j["params"] = c.params;
  j["seed"] = c.seed;
  j["status"] = to_string(c.status);
  j["diagnostics"] = c.diagnostics;
  j["results"] = json::array();
  for (const auto& r : c.results)
    j["results"].push_back({{"label", r.label}, {"anchor", r.anchor}, {"measured", r.measured},
                            {"bound", r.bound}, {"strict", r.strict}, {"pass", r.pass}});
  return j;
}

TheoremCheck theorem_check_from_json(const json& j) {
  TheoremCheck c;
  c.id = theorem_from_string(j.at("theorem_id").get<std::string>());
  c.params = j.at("params");
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto st = j.at("status").get<std::string>();
  c.status = st == "pass" ? CheckStatus::pass : st == "refused" ? CheckStatus::refused : CheckStatus::fail;
  c.diagnostics = j.value("diagnostics", "");
  for (const auto& r : j.at("results"))
    c.results.push_back({r.at("label"), r.at("anchor"), r.at("measured"), r.at("bound"), r.at("strict"), r.at("pass")});
  return c;
}

std::string render_report(const TheoremCheck& c, ReportFormat f) {
  switch (f) {
    case ReportFormat::json: return to_json(c).dump(2) + "\n";
    case ReportFormat::csv: {
      std::string out = "label,anchor,measured,bound,strict,pass\n";
      for (const auto& r : c.results)
        out += csv_field(r.label) + "," + csv_field(r.anchor) + "," + fmt(r.measured) + "," + fmt(r.bound) + "," +
               (r.strict ? "1" : "0") + "," + (r.pass ? "1" : "0") + "\n";
      return out;
    }
    case ReportFormat::markdown: {
      std::string out = std::string("# ") + to_string(c.id) + "\n\n";
      out += std::string("status: ") + to_string(c.status) + "  \nseed: " + std::to_string(c.seed) + "  \nparams: `" +
             c.params.dump() + "`\n";
      if (!c.diagnostics.empty()) out += "diagnostics: " + c.diagnostics + "\n";
      out += "\n| check | inequality | measured | bound | pass |\n|---|---|---|---|---|\n";
      for (const auto& r : c.results)
        out += "| " + r.label + " | `" + r.anchor + "` | " + fmt(r.measured) + " | " + (r.strict ? "< " : "<= ") +
               fmt(r.bound) + " | " + (r.pass ? "yes" : "no") + " |\n";
      return out;
    }
  }
  return {};
}

void emit_report(const TheoremCheck& c, ReportFormat f, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << render_report(c, f);
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace orbitforge
