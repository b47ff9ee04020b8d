#include <doctest.h>

#include <algorithm>
#include <string>
#include <variant>

#include "nsch/config.hpp"
#include "nsch/errors.hpp"
#include "support/oracles.hpp"

using namespace nsch;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config fills documented defaults") {
  const RunConfig c = parse_config("grid.cells = 64\nmode.kind = run\n");
  CHECK(c.cells == 64);
  CHECK(c.params.nu == 1.0);
  CHECK(c.params.epsilon == 0.1);
  CHECK(c.params.a == 1.0);
  CHECK(c.params.gamma == 2.0);
  CHECK(c.params.lambda == 1e-3);
  CHECK(c.controls.step.cfl == 0.5);
  CHECK(c.controls.step.picard_tol == 1e-10);
  CHECK(c.bc == Boundary::Periodic);
}

TEST_CASE("full config parses every section") {
  const RunConfig c = parse_config(R"(
# comment
grid.length = 2
grid.cells = 32   # trailing comment
grid.bc = mixed
params.lambda = 0.01
controls.dt_max = 5e-4
initial.kind = perturbed
initial.chi = 0.8
initial.modes = chi:1:0.01:0 u:2:0.5:1.5
run.t_end = 0.5
output.directory = results
output.snapshot_times = 0, 0.25,0.5
)");
  CHECK(c.length == 2.0);
  CHECK(c.bc == Boundary::Mixed);
  CHECK(c.params.lambda == 0.01);
  CHECK(c.controls.dt_max == 5e-4);
  REQUIRE(c.initial.modes.size() == 2);
  CHECK(c.initial.modes[1].field == FieldId::U);
  CHECK(c.initial.modes[1].wave == 2);
  CHECK(c.initial.modes[1].phase == 1.5);
  CHECK(c.snapshot_times == std::vector<double>{0, 0.25, 0.5});
  CHECK(c.directory == "results");
  CHECK(std::holds_alternative<PerturbedIC>(c.initial.build()));
}

TEST_CASE("config errors name the offending line or key") {
  CHECK(error_of("params.gamma = 0.5\n").find("gamma must be ≥ 1") != std::string::npos);
  const std::string dup = error_of("grid.cells = 32\n\nparams.nu = 2\ngrid.cells = 64\n");
  CHECK(dup.find("line 4") != std::string::npos);
  CHECK(dup.find("line 1") != std::string::npos);
  CHECK(error_of("grid.colour = red\n").find("line 1: unknown key") != std::string::npos);
  CHECK(error_of("grid.cells 32\n").find("line 1") != std::string::npos);
  CHECK(error_of("grid.cells = abc\n").find("grid.cells") != std::string::npos);
  CHECK(error_of("grid.cells = 4\n").find("grid") != std::string::npos);
  CHECK(error_of("initial.modes = chi:1:0.01\n").find("initial.modes") != std::string::npos);
  CHECK(error_of("run.t_end = 1\noutput.snapshot_times = 2\n").find("snapshot") != std::string::npos);
  CHECK(error_of("mode.kind = scenario\nmode.scenario = nope\n").find("nope") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/missing.cfg"), ConfigError);
}

TEST_CASE("set_config_value applies sweep overrides") {
  RunConfig c = parse_config("");
  set_config_value(c, "params.lambda", "0.01");
  CHECK(c.params.lambda == 0.01);
  CHECK_THROWS_AS(set_config_value(c, "params.bogus", "1"), ConfigError);
  const auto keys = config_keys();
  CHECK(std::find(keys.begin(), keys.end(), "params.lambda") != keys.end());
}

TEST_CASE("property: echo_config round-trips random configs") {
  oracle::Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    RunConfig c;
    c.length = rng.uniform(0.5, 3.0);
    c.cells = rng.integer(8, 600);
    c.bc = rng.integer(0, 1) ? Boundary::Mixed : Boundary::Periodic;
    c.params.nu = rng.uniform(0.1, 3.0);
    c.params.epsilon = rng.uniform(0.01, 1.0);
    c.params.gamma = rng.uniform(1.0, 3.0);
    c.params.lambda = rng.uniform(1e-4, 0.5);
    c.controls.dt_max = rng.uniform(1e-5, 1e-2);
    c.controls.step.picard_max = rng.integer(1, 100);
    c.initial.kind = InitialKind::Perturbed;
    c.initial.base.chi = rng.uniform(-1, 1);
    c.initial.modes = {Mode{FieldId::Rho, rng.integer(1, 5), rng.uniform(0, 0.3), rng.uniform(0, 6)}};
    c.initial.seed = static_cast<std::uint64_t>(rng.integer(0, 1 << 30));
    c.t_end = rng.uniform(0.1, 2.0);
    c.snapshot_times = {0.0, c.t_end};
    c.record_every = rng.integer(1, 20);

    const std::string text = echo_config(c);
    const RunConfig back = parse_config(text);
    CAPTURE(text);
    CHECK(echo_config(back) == text);
    CHECK(back.length == c.length);
    CHECK(back.params.lambda == c.params.lambda);
    CHECK(back.initial.modes[0].amplitude == c.initial.modes[0].amplitude);
    CHECK(back.snapshot_times == c.snapshot_times);
  }
}
