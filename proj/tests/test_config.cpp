#include <doctest.h>

#include "orbitforge/config.hpp"

using namespace orbitforge;

namespace {

const char* kOrbit = R"(# certificate run
command = circlegeneral_iii
seed = 7

[model]
kind = bilateral-shift

[params]
n = 8
eps = 0.1   ; target

[output]
path = "cert.json"
format = "json"
)";

int error_line(const std::string& text, int* col) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    *col = e.column;
    return e.line;
  }
  return 0;
}

}  // namespace

TEST_CASE("ini config") {
  auto c = parse_config(kOrbit);
  CHECK(c.command == "circlegeneral_iii");
  CHECK(c.seed == 7);
  CHECK(c.model.at("kind") == "bilateral_shift");
  CHECK(c.params.at("n") == 8);
  CHECK(c.params.at("eps").get<double>() == 0.1);
  CHECK(*c.output_path == "cert.json");
  CHECK(parse_config(to_ini(c)) == c);
  CHECK(parse_config(to_json(c).dump(2)) == c);
}

TEST_CASE("models round trip") {
  auto w = parse_config(
      "command = flatten_main\n[model]\nkind = weighted_shift\nstart = -2\nvalues = [0.5, 0.25]\nw_minus = 0.5\n"
      "w_plus = 0.75\n");
  CHECK(w.model.at("params").at("values").size() == 2);
  CHECK(parse_config(to_ini(w)) == w);
  auto d = parse_config("command = circlepb_ii\n[model]\nkind = dense\nn = 2\nreal = [0, 1, 0, 0]\nimag = [0, 0, 0.5, 0]\n");
  CHECK(d.model.at("entries").size() == 2);
  CHECK(parse_config(to_ini(d)) == d);
  CHECK(parse_config(to_json(d).dump()) == d);
  auto m = parse_config("command = moments\n[params]\nrho = 1/2\neps = [0, 0.1]\nexact = true\n");
  CHECK(m.params.at("rho") == "1/2");
  CHECK(parse_config(to_ini(m)) == m);
}

TEST_CASE("strict parsing with positions") {
  int col = 0;
  CHECK(error_line("command = prop_basic\n[params]\nn = 3\n  colour = 2\n", &col) == 4);
  CHECK(col == 3);
  CHECK(error_line("command = prop_basic\n[extras]\n", &col) == 2);
  CHECK(error_line("command = prop_basic\nverbose = 1\n", &col) == 2);
  CHECK(error_line("command = nope\n", &col) == 1);
  CHECK(col == 11);
  CHECK(error_line("command = prop_basic\nn 3\n", &col) == 2);
  CHECK(error_line("command = prop_basic\n[model]\nkind = bilateral_shift\nalpha = 0.3\n", &col) == 4);
  CHECK(error_line("{\n  \"command\": \"prop_basic\",\n  \"bogus\": 1\n}\n", &col) == 3);
  CHECK(col == 3);
  CHECK(error_line("{\n  \"command\": \"prop_basic\",\n  \"seed\": \n}\n", &col) == 4);
  CHECK(error_line("[params]\nn = 2\n", &col) > 0);
}

TEST_CASE("complex literals") {
  CHECK(parse_complex("0.5") == cplx(0.5, 0));
  CHECK(parse_complex("-0.2i") == cplx(0, -0.2));
  CHECK(parse_complex("0.1+0.3i") == cplx(0.1, 0.3));
  CHECK(parse_complex("1e-3-2e-3i") == cplx(1e-3, -2e-3));
  CHECK(parse_complex("i") == cplx(0, 1));
  CHECK_THROWS(parse_complex("0.1+x"));
}
