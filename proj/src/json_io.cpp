#include "orbitforge/json_io.hpp"

#include "orbitforge/errors.hpp"

namespace orbitforge {

namespace {

const char* space_name(Indexing k) {
  switch (k) {
    case Indexing::finite: return "finite";
    case Indexing::integers: return "integers";
    case Indexing::naturals: return "naturals";
  }
  return "?";
}

Space space_from(const json& p) {
  const std::string s = p.at("space").get<std::string>();
  if (s == "finite") return Space::finite(p.at("dim").get<std::int64_t>());
  if (s == "integers") return Space::integers();
  if (s == "naturals") return Space::naturals();
  throw DomainError("unknown space '" + s + "'");
}

}  // namespace

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }
cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json to_json(const CVector& v) {
  json params = {{"space", space_name(v.space().kind)}};
  if (v.space().kind == Indexing::finite) params["dim"] = v.space().dim;
  json entries = json::array();
  v.for_each([&](std::int64_t i, cplx z) { entries.push_back(json::array({i, z.real(), z.imag()})); });
  return {{"kind", "vector"}, {"params", params}, {"entries", entries}};
}

CVector vector_from_json(const json& j) {
  if (j.at("kind").get<std::string>() != "vector") throw DomainError("not a vector document");
  CVector out(space_from(j.at("params")));
  std::int64_t run_start = 0;
  std::vector<cplx> run;
  std::int64_t last = 0;
  bool have = false;
  for (const auto& e : j.at("entries")) {
    std::int64_t i = e.at(0).get<std::int64_t>();
    cplx z(e.at(1).get<double>(), e.at(2).get<double>());
    if (have && i <= last) throw DomainError("vector entries must be strictly increasing");
    if (have && i != last + 1) {
      out.append_run(run_start, run);
      run.clear();
    }
    if (run.empty()) run_start = i;
    run.push_back(z);
    last = i;
    have = true;
  }
  if (!run.empty()) out.append_run(run_start, run);
  return out;
}

json to_json(const OperatorModel& op) {
  json params = json::object();
  json entries = json::array();
  switch (op.kind()) {
    case OpKind::dense: {
      const auto& a = op.matrix();
      params["n"] = a.rows();
      for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
          if (a(r, c) != cplx{})
            entries.push_back(json::array({r * a.cols() + c, a(r, c).real(), a(r, c).imag()}));
      break;
    }
    case OpKind::weighted_shift:
      params = {{"start", op.weights().start},
                {"values", op.weights().values},
                {"w_minus", op.weights().w_minus},
                {"w_plus", op.weights().w_plus}};
      break;
    case OpKind::diagonal_unitary:
      params = {{"alpha", op.phases().alpha}, {"beta", op.phases().beta}};
      break;
    case OpKind::multiplication:
      params = {{"nodes", op.grid().nodes}, {"nu", op.grid().nu}};
      break;
    default: break;
  }
  return {{"kind", to_string(op.kind())}, {"params", params}, {"entries", entries}};
}

OperatorModel operator_from_json(const json& j) {
  const OpKind k = op_kind_from_string(j.at("kind").get<std::string>());
  const json p = j.value("params", json::object());
  switch (k) {
    case OpKind::dense: {
      const Eigen::Index n = p.at("n").get<Eigen::Index>();
      Matrix a = Matrix::Zero(n, n);
      for (const auto& e : j.at("entries")) {
        const Eigen::Index idx = e.at(0).get<Eigen::Index>();
        if (idx < 0 || idx >= n * n) throw DimensionError("dense entry index out of range");
        a(idx / n, idx % n) = cplx(e.at(1).get<double>(), e.at(2).get<double>());
      }
      return OperatorModel::dense(a);
    }
    case OpKind::bilateral_shift: return OperatorModel::bilateral_shift();
    case OpKind::unilateral_shift: return OperatorModel::unilateral_shift();
    case OpKind::weighted_shift: {
      WeightRule w;
      w.start = p.value("start", std::int64_t{0});
      w.values = p.value("values", std::vector<double>{});
      w.w_minus = p.value("w_minus", 1.0);
      w.w_plus = p.value("w_plus", 1.0);
      return OperatorModel::weighted_shift(w);
    }
    case OpKind::diagonal_unitary:
      return OperatorModel::diagonal_unitary(PhaseRule{p.at("alpha").get<double>(), p.value("beta", 0.0)});
    case OpKind::multiplication: {
      GridRule g;
      g.nodes = p.at("nodes").get<std::int64_t>();
      g.nu = p.value("nu", std::vector<double>{});
      return OperatorModel::multiplication(g);
    }
  }
  throw UnsupportedError("unhandled operator kind");
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  const Eigen::Index r = static_cast<Eigen::Index>(j.size());
  const Eigen::Index c = r ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(j.at(i).size()) != c) throw DimensionError("ragged matrix");
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = complex_from_json(j.at(i).at(k));
  }
  return m;
}

json to_json(const Subspace& s) {
  json b = json::array();
  for (const auto& v : s.basis) b.push_back(to_json(v));
  return {{"role", s.role == SubspaceRole::span ? "span" : "finite_codim_complement"}, {"basis", b}};
}

Subspace subspace_from_json(const json& j) {
  Subspace s;
  s.role = j.at("role").get<std::string>() == "span" ? SubspaceRole::span
                                                     : SubspaceRole::finite_codim_complement;
  for (const auto& v : j.at("basis")) s.basis.push_back(vector_from_json(v));
  return s;
}

}  // namespace orbitforge
