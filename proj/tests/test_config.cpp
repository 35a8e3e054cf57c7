#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dpl/config.hpp"
#include "dpl/output.hpp"
#include "oracles.hpp"

using namespace dpl;
using doctest::Approx;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, std::string_view part) {
  return s.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("preset catalog") {
  const auto& names = preset_names();
  REQUIRE(names.size() == 5);
  for (const auto& name : names) {
    CAPTURE(name);
    const ExperimentConfig c = preset(name);
    CHECK(c.preset == name);
    CHECK(c.cascade.size() == 3);
    CHECK_FALSE(preset_description(name).empty());
    CHECK_NOTHROW(validate(c));
  }
  CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("serialize round-trips every preset") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const ExperimentConfig c = preset(name);
    const std::string text = serialize(c);
    const ExperimentConfig back = parse_config(text);
    CHECK(back == c);
    CHECK(serialize(back) == text);
  }
  ExperimentConfig odd = preset("stefan");
  odd.solver.dt = 0.1 / 3.0;
  odd.solver.horizon = 1.0 / 3.0;
  odd.seed = 123456789;
  odd.cascade.clear();
  odd.preset.clear();
  CHECK(parse_config(serialize(odd)) == odd);
}

TEST_CASE("stefan preset builds the stated graph and pi") {
  const ExperimentConfig c = preset("stefan");
  const auto beta = c.graph.build();
  const auto pi = c.pi.build();
  for (int k = 0; k < 100; ++k) {
    const double r = -2.0 + 5.0 * k / 99.0;
    const double expected_beta = r < 0 ? r : (r <= 1 ? 0.0 : r - 1);
    const double expected_pi = std::clamp(0.5 - r, -0.5, 0.5);
    CHECK(beta.value(r) == Approx(expected_beta).epsilon(1e-15));
    CHECK(pi.value(r) == Approx(expected_pi).epsilon(1e-15));
  }
  CHECK(c.solver.epsilon == 0.1);
  CHECK(c.solver.lambda == 0.01);
}

TEST_CASE("preset key seeds defaults and later keys override") {
  const ExperimentConfig c = parse_config(
      "# comment\npreset = hele-shaw\n[regularization]\nlambda = 0.005  # x\n"
      "[grid]\nnx = 16\nny = 9\n");
  ExperimentConfig expected = preset("hele-shaw");
  expected.solver.lambda = 0.005;
  expected.nx = 16;
  expected.ny = 9;
  CHECK(c == expected);
}

TEST_CASE("syntax errors carry line numbers") {
  CHECK(error_of("[graph]\nkind = stefan\nfoo\n") ==
        "line 3: expected 'key = value', got 'foo'");
  CHECK(error_of("[graph\n") == "line 1: malformed section header '[graph'");
  CHECK(error_of("\n[nope]\n") == "line 2: unknown section [nope]");
  CHECK(contains(error_of("[grid]\nnx = 8\nnx = 9\n"),
                 "line 3: duplicate key 'grid.nx' (first set on line 2)"));
  CHECK(error_of("[grid]\nnx = eight\n") ==
        "line 2: invalid integer for grid.nx: 'eight'");
  CHECK(error_of("preset = nope\n") == "line 1: unknown preset 'nope'");
  try {
    parse_config("[grid]\nnx = 8\n = 3\n");
    FAIL("accepted");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("unknown keys are named") {
  CHECK(error_of("[graph]\nkidn = stefan\n") ==
        "line 2: unknown key 'graph.kidn'");
  CHECK(contains(error_of("[graph]\nkind = steffan\n"), "steffan"));
  ExperimentConfig c;
  try {
    apply_override(c, "time.dtt=1");
    FAIL("accepted");
  } catch (const ConfigError& e) {
    CHECK(contains(e.what(), "time.dtt"));
  }
}

TEST_CASE("compatibility of the initial datum") {
  const std::string base =
      "preset = hele-shaw\n[initial]\nprofile = x-mode\n";
  // Mean on the boundary of D(beta) = [0, 1].
  const std::string at_edge = error_of(base + "mean = 1\namplitude = 0\n");
  CHECK(contains(at_edge, "(A3)"));
  CHECK(contains(at_edge, "m0 = 1"));
  CHECK(contains(at_edge, "not interior to D(beta) = [0,1]"));
  // Partly outside [0, 1].
  const std::string outside = error_of(base + "mean = 0.5\namplitude = 0.8\n");
  CHECK(contains(outside, "(A3)"));
  CHECK(contains(outside, "outside D(beta)"));
  CHECK(error_of(base + "mean = 0.5\namplitude = 0.3\n").empty());
}

TEST_CASE("semantic checks") {
  CHECK(contains(error_of("preset = stefan\n[source]\ntime_dependent = true\n"),
                 "time-dependent sources are not implemented"));
  CHECK(contains(error_of("preset = stefan\n[regularization]\nlambda = 0\n"),
                 "lambda"));
  CHECK(contains(error_of("preset = stefan\n[cascade]\nmembers = 0.1,0,1e-3,8x5\n"),
                 "cascade member 0: "));
  CHECK(contains(error_of("preset = stefan\n[initial]\nprofile = csv\n"),
                 "initial.path"));
  CHECK(contains(error_of("preset = stefan\n[output]\nsnapshot_every = -1\n"),
                 "snapshot_every"));
  // eps above eps0 = 1/4 for the Stefan pi while monitoring.
  CHECK_FALSE(
      error_of("preset = stefan\n[regularization]\nepsilon = 0.5\n").empty());
}

TEST_CASE("overrides") {
  ExperimentConfig c = preset("stefan");
  apply_override(c, "regularization.epsilon = 0.05");
  apply_override(c, "grid.nx=64");
  apply_override(c, "seed=7");
  CHECK(c.solver.epsilon == 0.05);
  CHECK(c.nx == 64);
  CHECK(c.seed == 7);
  apply_override(c, "preset=heat");
  CHECK(c == preset("heat"));
  CHECK_THROWS_AS(apply_override(c, "grid.nx"), ConfigError);
}

TEST_CASE("grid and member syntax") {
  CHECK(parse_grid("32x17") == std::pair{32, 17});
  CHECK_THROWS_AS(parse_grid("32,17"), ConfigError);
  const auto members = parse_members(" 0.1,0.01,2e-3,32x17 ; 0.05,0,1e-3,8x5;");
  REQUIRE(members.size() == 2);
  CHECK(members[0] == CascadeMember{0.1, 0.01, 2e-3, 32, 17});
  CHECK(members[1] == CascadeMember{0.05, 0.0, 1e-3, 8, 5});
  CHECK(parse_members(format_members(members)) == members);
  CHECK_THROWS_AS(parse_members("0.1,0.01,32x17"), ConfigError);
  CHECK(parse_members("").empty());
}

TEST_CASE("layered profile") {
  for (double height : {1.0, 0.5, 2.0}) {
    const double c = layered_rate(height);
    CHECK(c > 0.0);
    CHECK(c < std::numbers::pi / height);
    CHECK(std::cos(0.5 * c * height) / std::sin(0.5 * c * height) ==
          Approx(c).epsilon(1e-12));
  }
  CHECK(layered_rate(1.0) == Approx(1.3065423741888094).epsilon(1e-14));

  ExperimentConfig cfg = preset("stefan");
  const StripGrid g = StripGrid::make(8, 5);
  const auto u0 = initial_field(cfg, g);
  // S(0) = -1 and S(Y) = 1; the x perturbation adds 0.015 at x = 0.
  CHECK(u0(0, 0) == Approx(0.5 - 1.2 + 0.015).epsilon(1e-14));
  CHECK(u0(0, 4) == Approx(0.5 + 1.2 + 0.015).epsilon(1e-14));
  CHECK(u0(2, 2) == Approx(0.5).epsilon(1e-14));
}

TEST_CASE("field CSV round-trip and import") {
  const StripGrid g = StripGrid::make(8, 5);
  std::mt19937_64 rng(3);
  const auto u = oracle::random_field(g, rng, 0.2, 0.8);
  std::stringstream ss;
  write_field_csv(ss, u);
  const auto back = read_field_csv(ss);
  CHECK(back.grid() == g);
  CHECK(back.values() == u.values());

  std::istringstream bad("nx,ny,hx,hy\n8,5,0.125,0.25\n1,2\n");
  try {
    read_field_csv(bad);
    FAIL("accepted");
  } catch (const std::invalid_argument& e) {
    CHECK(contains(e.what(), "line 3"));
  }

  const auto path =
      std::filesystem::temp_directory_path() / "dpl_test_config_u0.csv";
  {
    std::ofstream os(path);
    write_field_csv(os, u);
  }
  ExperimentConfig c = preset("hele-shaw");
  c.nx = 8;
  c.ny = 5;
  c.cascade.clear();
  c.initial.kind = "csv";
  c.initial.path = path.string();
  CHECK_NOTHROW(validate(c));
  CHECK(initial_field(c, g).values() == u.values());
  const Problem p = make_problem(c);
  REQUIRE(p.initial_field);
  CHECK(p.initial_field->values() == u.values());
  c.nx = 16;
  CHECK_THROWS_AS(validate(c), ConfigError);
  std::filesystem::remove(path);
}
