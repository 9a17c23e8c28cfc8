#include <doctest.h>

#include <numbers>
#include <sstream>

#include "orbitforge/errors.hpp"
#include "orbitforge/harness.hpp"

using namespace orbitforge;

namespace {

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

json diagonal_model() {
  return {{"kind", "diagonal_unitary"}, {"params", {{"alpha", std::numbers::sqrt2 - 1.0}}}};
}

}  // namespace

TEST_CASE("moment check is exact and replayable") {
  auto c = run_check(TheoremId::moment_exact, {{"n", 4}, {"trials", 5}, {"rho", "1/2"}}, 11);
  INFO(c.diagnostics);
  CHECK(c.status == CheckStatus::pass);
  CHECK(c.exit_code() == 0);
  for (const auto& r : c.results)
    if (r.label.rfind("exact", 0) == 0) CHECK(r.measured == 0.0);
  auto again = run_check(c.id, c.params, c.seed);
  CHECK(again == c);
  auto other = run_check(c.id, c.params, 12);
  CHECK(other.status == CheckStatus::pass);
}

TEST_CASE("report formats") {
  auto c = run_check(TheoremId::prop_basic, json::object(), 1);
  INFO(c.diagnostics);
  REQUIRE(c.status == CheckStatus::pass);
  auto back = theorem_check_from_json(json::parse(render_report(c, ReportFormat::json)));
  CHECK(back == c);
  CHECK(count_lines(render_report(c, ReportFormat::csv)) == static_cast<int>(c.results.size()) + 1);
  auto md = render_report(c, ReportFormat::markdown);
  for (const auto& r : c.results) CHECK(md.find(r.anchor) != std::string::npos);
  CHECK(render_report(c, ReportFormat::markdown) == md);
}

TEST_CASE("orbit checks") {
  auto g = run_check(TheoremId::circlegeneral_iii, {{"n", 4}, {"eps", 0.2}});
  INFO(g.diagnostics);
  CHECK(g.status == CheckStatus::pass);
  auto pb = run_check(TheoremId::circlepb_ii, {{"n", 4}, {"eps", 0.2}});
  CHECK(pb.status == CheckStatus::pass);
  auto u = run_check(TheoremId::circleunitary_iii, json::object());
  INFO(u.diagnostics);
  CHECK(u.status == CheckStatus::pass);
  CHECK(u.results.at(0).measured <= 1e-8);
}

TEST_CASE("tower, compression and refusals") {
  auto t = run_check(TheoremId::connes_ii, {{"n", 17}, {"eps", 0.5}});
  INFO(t.diagnostics);
  CHECK(t.status == CheckStatus::pass);
  auto low = run_check(TheoremId::connes_ii, {{"n", 16}, {"eps", 0.5}});
  CHECK(low.status == CheckStatus::refused);
  CHECK(low.exit_code() == 2);
  auto l = run_check(TheoremId::lambdaw, json::object());
  INFO(l.diagnostics);
  CHECK(l.status == CheckStatus::pass);

  auto f = run_check(TheoremId::flatten_main, {{"model", diagonal_model()}, {"eps", 0.25}, {"d", 1}});
  CHECK(f.status == CheckStatus::refused);
  CHECK(f.diagnostics.find("weak decay") != std::string::npos);
  json dense = {{"kind", "dense"}, {"params", {{"n", 2}}}, {"entries", json::array({{0, 1.0, 0.0}, {3, 1.0, 0.0}})}};
  auto d = run_check(TheoremId::circlegeneral_iii, {{"model", dense}});
  CHECK(d.status == CheckStatus::refused);
  CHECK_THROWS_AS(run_check(TheoremId::prop_basic, {{"colour", 3}}), DomainError);
}
