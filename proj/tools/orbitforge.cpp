// orbitforge command-line front end.
#include <CLI11.hpp>
#include <gmpxx.h>

#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "orbitforge/config.hpp"
#include "orbitforge/errors.hpp"
#include "orbitforge/harness.hpp"
#include "orbitforge/moments.hpp"
#include "orbitforge/moments_exact.hpp"

using namespace orbitforge;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitConfig = 65;
constexpr int kExitIo = 74;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Outcome {
  std::string text;
  int code = 0;
};

// ---------------------------------------------------------------- flags

struct ModelFlags {
  std::string kind;
  std::optional<double> alpha, beta, w_minus, w_plus;
  std::string weights;
  std::optional<std::int64_t> weights_start, nodes;
  std::string matrix, model_file;

  void attach(CLI::App* app) {
    app->add_option("--model", kind, "bilateral-shift, unilateral-shift, weighted-shift, diagonal-unitary, multiplication, dense");
    app->add_option("--alpha", alpha, "rotation number of a diagonal unitary");
    app->add_option("--beta", beta, "phase offset of a diagonal unitary");
    app->add_option("--w-minus", w_minus, "weighted shift: weight below the explicit block");
    app->add_option("--w-plus", w_plus, "weighted shift: weight above the explicit block");
    app->add_option("--weights", weights, "weighted shift: explicit weights, comma separated");
    app->add_option("--weights-start", weights_start, "weighted shift: index of the first explicit weight");
    app->add_option("--nodes", nodes, "multiplication: grid size");
    app->add_option("--matrix", matrix, "dense: rows separated by ';', entries by ',' (a, a+bi)");
    app->add_option("--model-file", model_file, "operator model as JSON");
  }

  bool given() const { return !kind.empty() || !model_file.empty() || !matrix.empty(); }

  json build(const std::string& fallback) const {
    if (!model_file.empty()) {
      std::ifstream in(model_file);
      if (!in) throw IoError("cannot read " + model_file);
      std::stringstream ss;
      ss << in.rdbuf();
      json j;
      try {
        j = json::parse(ss.str());
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("model file: ") + e.what(), 1, static_cast<int>(e.byte));
      }
      return to_json(operator_from_json(j));
    }
    std::string k = !kind.empty() ? kind : !matrix.empty() ? "dense" : fallback;
    std::replace(k.begin(), k.end(), '-', '_');
    json p = json::object();
    json op = {{"kind", k}};
    if (k == "diagonal_unitary") {
      p["alpha"] = alpha.value_or(std::numbers::sqrt2 - 1.0);
      p["beta"] = beta.value_or(0.0);
    } else if (k == "weighted_shift") {
      std::vector<double> v;
      std::stringstream ss(weights);
      for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) v.push_back(std::stod(item));
      p = {{"start", weights_start.value_or(0)}, {"values", v}, {"w_minus", w_minus.value_or(1.0)},
           {"w_plus", w_plus.value_or(1.0)}};
    } else if (k == "multiplication") {
      if (!nodes) throw UsageError("--nodes is required for the multiplication model");
      p["nodes"] = *nodes;
    } else if (k == "dense") {
      if (matrix.empty()) throw UsageError("--matrix is required for a dense model");
      std::vector<std::vector<cplx>> rows;
      std::stringstream rs(matrix);
      for (std::string row; std::getline(rs, row, ';');) {
        rows.emplace_back();
        std::stringstream es(row);
        for (std::string e; std::getline(es, e, ',');) rows.back().push_back(parse_complex(e));
      }
      const auto n = rows.size();
      op["entries"] = json::array();
      for (std::size_t r = 0; r < n; ++r) {
        if (rows[r].size() != n) throw UsageError("--matrix must be square");
        for (std::size_t c = 0; c < n; ++c) op["entries"].push_back({r * n + c, rows[r][c].real(), rows[r][c].imag()});
      }
      p["n"] = n;
    }
    op["params"] = p;
    return to_json(operator_from_json(op));
  }
};

struct Common {
  std::string config_path;
  std::string out;
  std::string format;
  std::optional<std::uint64_t> seed;
  ModelFlags model;
  std::vector<std::pair<std::string, std::function<std::optional<json>()>>> params;

  void attach(CLI::App* app, bool with_model = true) {
    app->add_option("--config", config_path, "experiment config (key = value sections, or JSON)");
    app->add_option("--out", out, "output path (default: stdout)");
    app->add_option("--format", format, "json, csv or markdown");
    app->add_option("--seed", seed, "random seed recorded in the report");
    if (with_model) model.attach(app);
  }

  template <class T>
  void param(CLI::App* app, const std::string& flag, const std::string& key, std::optional<T>& slot,
             const std::string& help) {
    app->add_option(flag, slot, help);
    params.emplace_back(key, [&slot]() -> std::optional<json> {
      if (slot) return json(*slot);
      return std::nullopt;
    });
  }

  ExperimentConfig build(const std::string& command, const std::string& default_kind) const {
    ExperimentConfig cfg;
    if (!config_path.empty()) {
      cfg = load_config(config_path);
    } else {
      cfg.command = command;
    }
    for (const auto& [key, get] : params)
      if (auto v = get()) cfg.params[key] = *v;
    if (model.given() || (cfg.model.is_null() && !default_kind.empty())) cfg.model = model.build(default_kind);
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.output_path = out;
    if (!format.empty()) cfg.output_format = format;
    return cfg;
  }
};

// ---------------------------------------------------------------- operations

json atoms_json(const AtomicMeasure& m) {
  json a = json::array();
  for (const auto& at : m.atoms) a.push_back({at.lambda.real(), at.lambda.imag(), at.weight});
  return a;
}

std::vector<cplx> complex_list(const json& v) {
  std::vector<cplx> out;
  auto one = [](const json& e) { return e.is_string() ? parse_complex(e.get<std::string>()) : complex_from_json(e); };
  if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_complex(item));
  } else if (v.is_array()) {
    for (const auto& e : v) out.push_back(one(e));
  } else {
    out.push_back(one(v));
  }
  return out;
}

template <class T>
T param_or(const ExperimentConfig& c, const char* key, T fallback) {
  return c.params.contains(key) ? c.params.at(key).get<T>() : fallback;
}

bool all_pass(const std::vector<CheckResult>& cs) {
  return std::all_of(cs.begin(), cs.end(), [](const CheckResult& c) { return c.pass; });
}

Outcome finish(const ExperimentConfig& cfg, json result, bool pass) {
  json j = {{"config", to_json(cfg)}, {"result", std::move(result)}, {"pass", pass}};
  return {j.dump(2) + "\n", pass ? 0 : 1};
}

Outcome run_nrange(const ExperimentConfig& cfg) {
  auto op = operator_from_json(cfg.model);
  const int angles = param_or(cfg, "angles", 360);
  const int samples = param_or(cfg, "samples", 0);
  const int n = param_or(cfg, "n", 2);
  auto b = nr_boundary(op, angles);
  if (cfg.output_format == "csv") return {boundary_csv(b), 0};
  const double w = numerical_radius(op, angles);
  const double nrm = spectral_norm(op.matrix());
  json r = {{"boundary", to_json(b)}, {"numerical_radius", w}, {"norm", nrm}};
  auto check = make_check("||T|| <= 2 w(T)", nrm, 2 * w * (1 + 1e-8), false);
  r["checks"] = json::array({to_json(check)});
  if (samples > 0) {
    const std::string strat = param_or<std::string>(cfg, "strategy", "random");
    auto s = joint_nr_sample(OperatorTuple::power_tuple_of(op, n), samples,
                             strat == "witness_directed" ? SampleStrategy::witness_directed : SampleStrategy::random,
                             cfg.seed, false);
    r["joint_sample"] = to_json(s);
  }
  return finish(cfg, r, check.pass);
}

Outcome run_moments(const ExperimentConfig& cfg) {
  if (!cfg.params.contains("eps")) throw UsageError("moments needs --eps");
  const auto eps = complex_list(cfg.params.at("eps"));
  const json rho_j = cfg.params.value("rho", json("1"));
  const bool exact = param_or(cfg, "exact", false);
  json r;
  if (exact) {
    mpq_class rho = rho_j.is_string() ? mpq_class(rho_j.get<std::string>()) : mpq_class(rho_j.get<double>());
    rho.canonicalize();
    std::vector<QComplex> q;
    for (cplx e : eps) q.push_back(to_qcomplex(e));
    auto m = circle_moment_match_exact(rho, q);
    bool zero = true;
    for (std::size_t k = 1; k <= q.size(); ++k) {
      QComplex d = m.moment(static_cast<int>(k)) - q[k - 1];
      zero = zero && d.re == 0 && d.im == 0;
    }
    const mpq_class mass = m.mass();
    r = {{"mode", "exact"},
         {"atoms", atoms_json(m.to_float())},
         {"moment_error", zero ? 0.0 : 1.0},
         {"moment_error_exact", zero ? "0" : "nonzero"},
         {"mass_exact", mass.get_str()}};
    return finish(cfg, r, zero && mass == 1);
  }
  const double rho = rho_j.is_string() ? mpq_class(rho_j.get<std::string>()).get_d() : rho_j.get<double>();
  auto m = circle_moment_match(rho, eps);
  const double err = m.max_moment_error(eps);
  r = {{"mode", "float"}, {"atoms", atoms_json(m)}, {"moment_error", err}, {"mass", m.mass()}};
  return finish(cfg, r, err <= 1e-10);
}

Outcome run_orbit(const ExperimentConfig& cfg) {
  auto op = operator_from_json(cfg.model);
  auto cert = almost_orthogonal_orbit(op, param_or(cfg, "n", 8), param_or(cfg, "eps", 0.1));
  return finish(cfg, to_json(cert, false), cert.all_pass());
}

Outcome run_tower(const ExperimentConfig& cfg) {
  auto op = operator_from_json(cfg.model);
  const int n = param_or(cfg, "n", 65);
  if (op.kind() == OpKind::multiplication) {
    const auto N = op.grid().nodes;
    std::vector<cplx> w(static_cast<std::size_t>(N));
    for (std::int64_t p = 0; p < N; ++p) w[static_cast<std::size_t>(p)] = std::sqrt(op.grid().weight(p));
    CVector w0 = CVector::dense(w);
    w0 = w0.scaled(1.0 / w0.norm());
    std::optional<double> eps;
    if (cfg.params.contains("eps")) eps = cfg.params.at("eps").get<double>();
    auto t = rotation_tower(op, n, w0, eps);
    return finish(cfg, to_json(t, true), t.all_pass());
  }
  CVector u = cfg.params.contains("u") ? vector_from_json(cfg.params.at("u")) : CVector::basis(op.space(), 0);
  auto t = rokhlin_tower(op, n, param_or(cfg, "eps", 0.25), u);
  return finish(cfg, to_json(t, true), t.all_pass());
}

Outcome run_compress(const ExperimentConfig& cfg) {
  auto op = operator_from_json(cfg.model);
  const int n = param_or(cfg, "n", 3);
  const int d = param_or(cfg, "d", 2);
  const double tol = param_or(cfg, "tol", 1e-6);
  const cplx lambda = cfg.params.contains("lambda") ? complex_list(cfg.params.at("lambda")).at(0) : cplx(0.5);
  auto L = diagonal_compression_subspace(op, n, lambda, d, tol);
  json dev = json::array();
  double worst = 0.0;
  cplx lj = 1.0;
  for (int j = 1; j <= n; ++j) {
    lj *= lambda;
    double e = (compress(op, L, j) - lj * Matrix::Identity(L.dim(), L.dim())).cwiseAbs().maxCoeff();
    dev.push_back(e);
    worst = std::max(worst, e);
  }
  auto check = make_check("max |P_L T^j P_L - lambda^j P_L|", worst, tol, false);
  json r = {{"subspace", to_json(L)}, {"deviation", dev}, {"checks", json::array({to_json(check)})}};
  return finish(cfg, r, check.pass);
}

Outcome run_flatten(const ExperimentConfig& cfg, const std::string& csv_path) {
  auto op = operator_from_json(cfg.model);
  auto r = flat_subspace(op, param_or(cfg, "eps", 0.25), param_or(cfg, "d", 3));
  if (!csv_path.empty()) {
    std::ofstream os(csv_path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + csv_path);
    os << flat_csv(r);
  }
  if (cfg.output_format == "csv") return {flat_csv(r), r.all_pass() ? 0 : 1};
  return finish(cfg, to_json(r, false), r.all_pass());
}

Outcome run_verify(const ExperimentConfig& cfg) {
  auto id = theorem_from_string(cfg.command);
  json params = cfg.params;
  if (!cfg.model.is_null()) params["model"] = cfg.model;
  auto c = run_check(id, params, cfg.seed);
  return {render_report(c, report_format_from_string(cfg.output_format)), c.exit_code()};
}

// Direct operation for a config; theorem ids without a dedicated operation go through the harness.
Outcome execute(const ExperimentConfig& cfg, const std::string& csv_path = {}) {
  if (cfg.command == "nrange") return run_nrange(cfg);
  if (cfg.command == "moments") return run_moments(cfg);
  if (cfg.command == "circlegeneral_iii") return run_orbit(cfg);
  if (cfg.command == "connes_ii") return run_tower(cfg);
  if (cfg.command == "lambdaw") return run_compress(cfg);
  if (cfg.command == "flatten_main") return run_flatten(cfg, csv_path);
  return run_verify(cfg);
}

void write_output(const std::optional<std::string>& path, const std::string& text) {
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream os(*path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + *path + " for writing");
  os << text;
  if (!os) throw IoError("write failed: " + *path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome replay(const std::string& from) {
  const std::string text = read_file(from);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("report is not JSON: ") + e.what(), 1, static_cast<int>(e.byte));
  }
  if (j.contains("theorem_id")) {
    auto orig = theorem_check_from_json(j);
    auto again = run_check(orig.id, orig.params, orig.seed);
    if (!(again == orig)) return {"replay mismatch for " + from + "\n", 1};
    return {"replay identical: " + std::string(to_string(again.id)) + " " + to_string(again.status) + "\n",
            again.exit_code()};
  }
  if (!j.contains("config")) throw ConfigError("report has neither theorem_id nor config", 1, 1);
  auto cfg = parse_config_json(j.at("config").dump());
  auto out = execute(cfg);
  if (out.text != text) return {"replay mismatch for " + from + "\n", 1};
  return {"replay identical: " + cfg.command + "\n", out.code};
}

std::string inequality_help(const std::string& head, TheoremId id) {
  std::string s = head + "\nVerifies:";
  for (const auto& line : verified_inequalities(id)) s += "\n  " + line;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orbitforge: orbit, spectrum and numerical range constructions with certificates"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  Common common;
  std::string csv_path, from, theorem;
  std::optional<int> n, angles, samples, d, budget, stages;
  std::optional<double> eps_d, tol;
  std::optional<std::string> rho, eps_list, lambda, strategy, variant;
  bool exact = false;

  auto* nr = app.add_subcommand("nrange", "numerical range boundary and joint samples of a dense model\nVerifies:\n  "
                                          "||T|| <= 2 w(T)\n  h(theta) = max eig Re(e^{-i theta} T)");
  common.attach(nr);
  common.param(nr, "--angles", "angles", angles, "boundary angles (default 360)");
  common.param(nr, "--samples", "samples", samples, "joint numerical range samples (default 0)");
  common.param(nr, "--n", "n", n, "powers in the joint tuple (default 2)");
  common.param(nr, "--strategy", "strategy", strategy, "random or witness_directed");

  auto* mo = app.add_subcommand("moments", inequality_help("atomic measure on a circle with prescribed moments",
                                                           TheoremId::moment_exact));
  common.attach(mo, false);
  common.param(mo, "--rho", "rho", rho, "circle radius, decimal or p/q (default 1)");
  common.param(mo, "--eps", "eps", eps_list, "target moments, comma separated (a or a+bi)");
  mo->add_flag("--exact", exact, "rational arithmetic");

  auto* orb = app.add_subcommand("orbit", inequality_help("almost orthogonal orbit certificate",
                                                          TheoremId::circlegeneral_iii));
  common.attach(orb);
  common.param(orb, "--n", "n", n, "orbit length (default 8)");
  common.param(orb, "--eps", "eps", eps_d, "tolerance (default 0.1)");

  auto* tow = app.add_subcommand("tower", inequality_help("Rokhlin tower, or the rotation tower on a multiplication "
                                                          "grid",
                                                          TheoremId::connes_ii));
  common.attach(tow);
  common.param(tow, "--n", "n", n, "tower height (default 65)");
  common.param(tow, "--eps", "eps", eps_d, "link tolerance (default 0.25)");

  auto* cmp = app.add_subcommand("compress", inequality_help("subspace with diagonal power compressions",
                                                             TheoremId::lambdaw));
  common.attach(cmp);
  common.param(cmp, "--n", "n", n, "number of powers (default 3)");
  common.param(cmp, "--d", "d", d, "subspace dimension (default 2)");
  common.param(cmp, "--lambda", "lambda", lambda, "target point (default 0.5)");
  common.param(cmp, "--tol", "tol", tol, "compression tolerance (default 1e-6)");

  auto* fl = app.add_subcommand("flatten", inequality_help("flat subspace with decaying power compressions",
                                                           TheoremId::flatten_main));
  common.attach(fl);
  common.param(fl, "--eps", "eps", eps_d, "sup bound (default 0.25)");
  common.param(fl, "--d", "d", d, "subspace dimension (default 3)");
  fl->add_option("--csv", csv_path, "write per-n (n, norm, w, bound) CSV here");

  std::string verify_help = "run a theorem check from a config or --theorem and emit a report\nTheorem ids:";
  for (auto id : all_theorems()) {
    verify_help += "\n  " + std::string(to_string(id)) + ":";
    for (const auto& line : verified_inequalities(id)) verify_help += "\n    " + line;
  }
  auto* ver = app.add_subcommand("verify", verify_help);
  common.attach(ver);
  ver->add_option("--theorem", theorem, "theorem id when no config is given");
  common.param(ver, "--n", "n", n, "n");
  common.param(ver, "--eps", "eps", eps_d, "eps");
  common.param(ver, "--d", "d", d, "d");
  common.param(ver, "--tol", "tol", tol, "tol");
  common.param(ver, "--budget", "budget", budget, "window budget (circlegeneral_iii)");
  common.param(ver, "--stages", "stages", stages, "stages checked (prop_basic)");

  auto* rep = app.add_subcommand("replay", "rerun a report and compare bit for bit");
  rep->add_option("--from", from, "report JSON written by any subcommand")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << (app.get_subcommands().empty() ? app.help() : app.get_subcommands()[0]->help());
    return kExitUsage;
  }
  if (exact) common.params.emplace_back("exact", [] { return std::optional<json>(true); });

  try {
    Outcome out;
    std::optional<std::string> path;
    if (rep->parsed()) {
      out = replay(from);
    } else if (ver->parsed()) {
      if (common.config_path.empty() && theorem.empty()) throw UsageError("verify needs --config or --theorem");
      auto cfg = common.build(theorem, "");
      if (cfg.command == "nrange" || cfg.command == "moments") {
        out = execute(cfg);
      } else {
        theorem_from_string(cfg.command);
        out = run_verify(cfg);
      }
      path = cfg.output_path;
    } else {
      struct Sub {
        CLI::App* app;
        const char* command;
        const char* kind;
      };
      for (Sub s : {Sub{nr, "nrange", "dense"}, Sub{mo, "moments", ""}, Sub{orb, "circlegeneral_iii", "bilateral_shift"},
                    Sub{tow, "connes_ii", "bilateral_shift"}, Sub{cmp, "lambdaw", "unilateral_shift"},
                    Sub{fl, "flatten_main", "bilateral_shift"}}) {
        if (!s.app->parsed()) continue;
        auto cfg = common.build(s.command, s.kind);
        if (cfg.output_format == "markdown") throw UsageError("markdown output is available from verify only");
        out = execute(cfg, csv_path);
        path = cfg.output_path;
      }
    }
    write_output(path, out.text);
    return out.code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const PreconditionError& e) {
    std::cerr << "refused (precondition): " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedError& e) {
    std::cerr << "refused (unsupported): " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << to_string(e.kind()) << " error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
