#include "orbitforge/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "orbitforge/errors.hpp"
#include "orbitforge/harness.hpp"

namespace orbitforge {

namespace {

struct Pos {
  int line = 1;
  int col = 1;
};

std::set<std::string> param_keys(const std::string& command) {
  if (command == "nrange") return {"angles", "samples", "n", "strategy"};
  if (command == "moments") return {"rho", "eps", "exact"};
  std::set<std::string> keys;
  const json defaults = default_params(theorem_from_string(command));
  for (const auto& [k, v] : defaults.items())
    if (k != "model") keys.insert(k);
  if (command == "connes_ii") keys.insert("u");
  return keys;
}

std::set<std::string> model_keys(const std::string& kind) {
  std::string k = kind;
  std::replace(k.begin(), k.end(), '-', '_');
  if (k == "dense") return {"kind", "n", "real", "imag"};
  if (k == "weighted_shift") return {"kind", "start", "values", "w_minus", "w_plus"};
  if (k == "diagonal_unitary") return {"kind", "alpha", "beta"};
  if (k == "multiplication") return {"kind", "nodes", "nu"};
  return {"kind"};
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

// Removes a trailing # or ; comment outside double quotes.
std::string strip_comment(const std::string& s) {
  bool q = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') q = !q;
    if (!q && (s[i] == '#' || s[i] == ';')) return s.substr(0, i);
  }
  return s;
}

json scalar_value(const std::string& t, Pos p) {
  if (t.empty()) throw ConfigError("missing value", p.line, p.col);
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"') throw ConfigError("unterminated string", p.line, p.col);
    return t.substr(1, t.size() - 2);
  }
  if (t == "true") return true;
  if (t == "false") return false;
  const char* b = t.c_str();
  char* end = nullptr;
  errno = 0;
  long long iv = std::strtoll(b, &end, 10);
  if (*end == '\0' && errno == 0) return iv;
  double dv = std::strtod(b, &end);
  if (*end == '\0') return dv;
  for (char c : t)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == '+' || c == '/'))
      throw ConfigError("cannot parse value '" + t + "'", p.line, p.col);
  return t;
}

json parse_value(const std::string& raw, Pos p) {
  std::string t = trim(raw);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') throw ConfigError("unterminated list", p.line, p.col);
    json arr = json::array();
    std::string body = t.substr(1, t.size() - 2);
    if (trim(body).empty()) return arr;
    std::size_t start = 0;
    int col = p.col + 1;
    while (true) {
      std::size_t comma = body.find(',', start);
      std::string item = body.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      arr.push_back(scalar_value(trim(item), {p.line, col + static_cast<int>(item.find_first_not_of(" \t"))}));
      if (comma == std::string::npos) break;
      col += static_cast<int>(comma - start) + 1;
      start = comma + 1;
    }
    return arr;
  }
  return scalar_value(t, p);
}

json build_model(const json& raw, const std::map<std::string, Pos>& where) {
  auto pos = [&](const std::string& k) {
    auto it = where.find(k);
    return it == where.end() ? Pos{} : it->second;
  };
  if (!raw.contains("kind")) throw ConfigError("model section needs 'kind'", pos("").line, pos("").col);
  const std::string kind = raw.at("kind").is_string() ? raw.at("kind").get<std::string>() : "";
  const auto allowed = model_keys(kind);
  for (const auto& [k, v] : raw.items())
    if (!allowed.count(k)) throw ConfigError("unknown model key '" + k + "' for kind " + kind, pos(k).line, pos(k).col);
  try {
    op_kind_from_string(kind);
  } catch (const Error& e) {
    throw ConfigError(e.what(), pos("kind").line, pos("kind").col);
  }
  json op;
  std::string k2 = kind;
  std::replace(k2.begin(), k2.end(), '-', '_');
  op["kind"] = k2;
  if (k2 == "dense") {
    if (!raw.contains("n") || !raw.contains("real"))
      throw ConfigError("dense model needs n and real", pos("kind").line, pos("kind").col);
    const auto n = raw.at("n").get<std::int64_t>();
    const auto re = raw.at("real").get<std::vector<double>>();
    const auto im = raw.value("imag", std::vector<double>(re.size(), 0.0));
    if (static_cast<std::int64_t>(re.size()) != n * n || im.size() != re.size())
      throw ConfigError("dense model needs n*n real (and imag) entries", pos("real").line, pos("real").col);
    op["params"] = {{"n", n}};
    op["entries"] = json::array();
    for (std::size_t i = 0; i < re.size(); ++i) op["entries"].push_back({i, re[i], im[i]});
  } else {
    json p = json::object();
    for (const auto& [k, v] : raw.items())
      if (k != "kind") p[k] = v;
    op["params"] = p;
  }
  try {
    return to_json(operator_from_json(op));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid model: ") + e.what(), pos("kind").line, pos("kind").col);
  }
}

void check_params(const std::string& command, const json& params, const std::map<std::string, Pos>& where) {
  const auto allowed = param_keys(command);
  for (const auto& [k, v] : params.items())
    if (!allowed.count(k)) {
      auto it = where.find(k);
      Pos p = it == where.end() ? Pos{} : it->second;
      throw ConfigError("unknown parameter '" + k + "' for " + command, p.line, p.col);
    }
}

void check_command(const std::string& c, Pos p) {
  if (c == "nrange" || c == "moments") return;
  try {
    theorem_from_string(c);
  } catch (const Error&) {
    throw ConfigError("unknown command '" + c + "'", p.line, p.col);
  }
}

// Position of the first "key" in raw JSON text, for diagnostics.
Pos locate(const std::string& text, const std::string& key) {
  auto at = text.find("\"" + key + "\"");
  Pos p;
  if (at == std::string::npos) return p;
  for (std::size_t i = 0; i < at; ++i) {
    if (text[i] == '\n') {
      ++p.line;
      p.col = 1;
    } else {
      ++p.col;
    }
  }
  return p;
}

std::string fmt_scalar(const json& v) {
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    std::string s = buf;
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
  }
  if (v.is_string()) return "\"" + v.get<std::string>() + "\"";
  return v.dump();
}

std::string fmt_value(const json& v) {
  if (!v.is_array()) return fmt_scalar(v);
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_scalar(v[i]);
  return s + "]";
}

}  // namespace

cplx parse_complex(const std::string& s0) {
  std::string s = trim(s0);
  if (s.empty()) throw DomainError("empty complex number");
  if (s.back() != 'i') {
    std::size_t used = 0;
    double re = std::stod(s, &used);
    if (used != s.size()) throw DomainError("cannot parse complex '" + s0 + "'");
    return {re, 0.0};
  }
  std::string body = s.substr(0, s.size() - 1);
  // split at the last sign that is not part of an exponent
  std::size_t cut = std::string::npos;
  for (std::size_t i = body.size(); i-- > 1;)
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      cut = i;
      break;
    }
  auto num = [&](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    std::size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size()) throw DomainError("cannot parse complex '" + s0 + "'");
    return v;
  };
  if (cut == std::string::npos) return {0.0, num(body)};
  return {num(body.substr(0, cut)), num(body.substr(cut))};
}

ExperimentConfig parse_config_ini(const std::string& text) {
  ExperimentConfig cfg;
  json model_raw = json::object();
  std::map<std::string, Pos> model_pos, param_pos;
  Pos command_pos, section_pos;
  bool have_model = false, have_command = false;
  std::string section;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    std::string body = strip_comment(line);
    std::string t = trim(body);
    if (t.empty()) continue;
    const int indent = static_cast<int>(body.find_first_not_of(" \t")) + 1;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("unterminated section header", ln, indent);
      section = trim(t.substr(1, t.size() - 2));
      if (section != "model" && section != "params" && section != "output")
        throw ConfigError("unknown section '" + section + "'", ln, indent + 1);
      if (!seen.insert("[" + section + "]").second) throw ConfigError("duplicate section '" + section + "'", ln, indent);
      if (section == "model") {
        have_model = true;
        model_pos[""] = {ln, indent};
      }
      continue;
    }
    auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", ln, indent);
    std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ConfigError("empty key", ln, indent);
    Pos kp{ln, indent};
    Pos vp{ln, static_cast<int>(eq) + 2 + static_cast<int>(body.substr(eq + 1).find_first_not_of(" \t"))};
    if (!seen.insert(section + "." + key).second) throw ConfigError("duplicate key '" + key + "'", kp.line, kp.col);
    json v = parse_value(body.substr(eq + 1), vp);
    if (section.empty()) {
      if (key == "command") {
        if (!v.is_string()) throw ConfigError("command must be a name", vp.line, vp.col);
        cfg.command = v.get<std::string>();
        command_pos = vp;
        have_command = true;
      } else if (key == "seed") {
        if (!v.is_number_integer() || v.get<long long>() < 0)
          throw ConfigError("seed must be a non-negative integer", vp.line, vp.col);
        cfg.seed = v.get<std::uint64_t>();
      } else {
        throw ConfigError("unknown key '" + key + "'", kp.line, kp.col);
      }
    } else if (section == "model") {
      model_raw[key] = v;
      model_pos[key] = kp;
    } else if (section == "params") {
      cfg.params[key] = v;
      param_pos[key] = kp;
    } else {
      if (key == "path" && v.is_string()) {
        cfg.output_path = v.get<std::string>();
      } else if (key == "format" && v.is_string()) {
        cfg.output_format = v.get<std::string>();
        if (cfg.output_format != "json" && cfg.output_format != "csv" && cfg.output_format != "markdown")
          throw ConfigError("format must be json, csv or markdown", vp.line, vp.col);
      } else {
        throw ConfigError("unknown output key '" + key + "'", kp.line, kp.col);
      }
    }
  }
  if (!have_command) throw ConfigError("missing 'command'", ln == 0 ? 1 : ln, 1);
  check_command(cfg.command, command_pos);
  check_params(cfg.command, cfg.params, param_pos);
  if (have_model) cfg.model = build_model(model_raw, model_pos);
  return cfg;
}

ExperimentConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports a byte offset; convert it.
    Pos p;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++p.line;
        p.col = 1;
      } else {
        ++p.col;
      }
    }
    throw ConfigError("JSON syntax error", p.line, p.col);
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object", 1, 1);
  ExperimentConfig cfg;
  for (const auto& [k, v] : j.items()) {
    Pos p = locate(text, k);
    if (k == "command") {
      if (!v.is_string()) throw ConfigError("command must be a string", p.line, p.col);
      cfg.command = v.get<std::string>();
    } else if (k == "seed") {
      if (!v.is_number_unsigned()) throw ConfigError("seed must be a non-negative integer", p.line, p.col);
      cfg.seed = v.get<std::uint64_t>();
    } else if (k == "params") {
      if (!v.is_object()) throw ConfigError("params must be an object", p.line, p.col);
      cfg.params = v;
    } else if (k == "model") {
      cfg.model = v;
    } else if (k == "output") {
      for (const auto& [ok, ov] : v.items()) {
        Pos q = locate(text, ok);
        if (ok == "path" && ov.is_string())
          cfg.output_path = ov.get<std::string>();
        else if (ok == "format" && ov.is_string())
          cfg.output_format = ov.get<std::string>();
        else
          throw ConfigError("unknown output key '" + ok + "'", q.line, q.col);
      }
    } else {
      throw ConfigError("unknown key '" + k + "'", p.line, p.col);
    }
  }
  if (cfg.command.empty()) throw ConfigError("missing 'command'", 1, 1);
  check_command(cfg.command, locate(text, "command"));
  std::map<std::string, Pos> where;
  for (const auto& [k, v] : cfg.params.items()) where[k] = locate(text, k);
  check_params(cfg.command, cfg.params, where);
  if (!cfg.model.is_null()) {
    Pos p = locate(text, "model");
    for (const auto& [k, v] : cfg.model.items())
      if (k != "kind" && k != "params" && k != "entries") {
        Pos q = locate(text, k);
        throw ConfigError("unknown model key '" + k + "'", q.line, q.col);
      }
    try {
      cfg.model = to_json(operator_from_json(cfg.model));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("invalid model: ") + e.what(), p.line, p.col);
    }
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& text) {
  auto i = text.find_first_not_of(" \t\r\n");
  if (i != std::string::npos && text[i] == '{') return parse_config_json(text);
  return parse_config_ini(text);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_ini(const ExperimentConfig& c) {
  std::string out = "command = " + c.command + "\nseed = " + std::to_string(c.seed) + "\n";
  if (!c.model.is_null()) {
    out += "\n[model]\nkind = " + c.model.at("kind").get<std::string>() + "\n";
    const json p = c.model.value("params", json::object());
    if (c.model.at("kind") == "dense") {
      const auto n = p.at("n").get<std::size_t>();
      json re = json::array(), im = json::array();
      std::vector<double> r(n * n, 0.0), m(n * n, 0.0);
      for (const auto& e : c.model.at("entries")) {
        r[e.at(0).get<std::size_t>()] = e.at(1).get<double>();
        m[e.at(0).get<std::size_t>()] = e.at(2).get<double>();
      }
      for (std::size_t i = 0; i < n * n; ++i) re.push_back(r[i]), im.push_back(m[i]);
      out += "n = " + std::to_string(n) + "\nreal = " + fmt_value(re) + "\nimag = " + fmt_value(im) + "\n";
    } else {
      for (const auto& [k, v] : p.items()) out += k + " = " + fmt_value(v) + "\n";
    }
  }
  if (!c.params.empty()) {
    out += "\n[params]\n";
    for (const auto& [k, v] : c.params.items()) out += k + " = " + fmt_value(v) + "\n";
  }
  out += "\n[output]\nformat = \"" + c.output_format + "\"\n";
  if (c.output_path) out += "path = \"" + *c.output_path + "\"\n";
  return out;
}

json to_json(const ExperimentConfig& c) {
  json j = {{"command", c.command}, {"seed", c.seed}, {"params", c.params}};
  if (!c.model.is_null()) j["model"] = c.model;
  json o = {{"format", c.output_format}};
  if (c.output_path) o["path"] = *c.output_path;
  j["output"] = o;
  return j;
}

}  // namespace orbitforge
