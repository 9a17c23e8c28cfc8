#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "orbitforge/flatten.hpp"

namespace orbitforge {

enum class TheoremId {
  circlegeneral_iii,
  circlepb_ii,
  circleunitary_iii,
  connes_ii,
  flatten_main,
  prop_basic,
  lambdaw,
  moment_exact,
};

const char* to_string(TheoremId id);
TheoremId theorem_from_string(const std::string& s);
const std::vector<TheoremId>& all_theorems();

enum class CheckStatus { pass, fail, refused };
const char* to_string(CheckStatus s);

struct InequalityResult {
  std::string label;
  std::string anchor;  // the inequality in symbols
  double measured = 0.0;
  double bound = 0.0;
  bool strict = false;
  bool pass = false;
  bool operator==(const InequalityResult&) const = default;
};

struct TheoremCheck {
  TheoremId id = TheoremId::circlegeneral_iii;
  json params;  // complete, defaults filled in
  std::uint64_t seed = 1;
  std::vector<InequalityResult> results;
  CheckStatus status = CheckStatus::fail;
  std::string diagnostics;

  int exit_code() const;  // 0 pass, 1 fail, 2 refused
  bool operator==(const TheoremCheck& o) const;
};

// Parameter defaults per theorem; unknown keys throw DomainError.
json default_params(TheoremId id);
json complete_params(TheoremId id, const json& given);
// One line per inequality the check verifies.
std::vector<std::string> verified_inequalities(TheoremId id);

TheoremCheck run_check(TheoremId id, const json& params, std::uint64_t seed = 1);

enum class ReportFormat { json, csv, markdown };
ReportFormat report_format_from_string(const std::string& s);

std::string render_report(const TheoremCheck& c, ReportFormat f);
void emit_report(const TheoremCheck& c, ReportFormat f, const std::string& path);

json to_json(const TheoremCheck& c);
TheoremCheck theorem_check_from_json(const json& j);

}  // namespace orbitforge
