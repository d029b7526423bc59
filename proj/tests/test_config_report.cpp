#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "anisodiff/config.hpp"
#include "anisodiff/report.hpp"

using namespace anisodiff;

namespace {

nlohmann::ordered_json minimal_config() {
  return nlohmann::ordered_json::parse(R"({
    "problem": {
      "p": [2.5, 3.0],
      "delta": [0.5, 0.5],
      "lambda": 1.0,
      "domain": {"lo": [-1, -1], "hi": [1, 1], "t_end": 1.0}
    },
    "grid": {"counts": [8, 8]},
    "scheme": {"scheme": "euler", "boundary": "dirichlet-from-initial"},
    "initial": {"family": "affine", "slopes": [0.4, 0.3]},
    "seed": 7
  })");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config round trip") {
  ExperimentConfig c = parse_config(minimal_config());
  CHECK_NOTHROW(validate_config(c));
  CHECK(c.p == std::vector<double>{2.5, 3.0});
  CHECK(c.delta == std::vector<double>{0.5, 0.5});
  CHECK(c.seed == 7);
  CHECK(c.scheme.scheme == Scheme::ExplicitEuler);
  CHECK(c.scheme.boundary == BoundaryRule::DirichletFromInitial);
  CHECK(c.scheme.cfl_safety == 0.4);   // default
  CHECK(c.scheme.eps_reg == 1e-8);     // default
  ProblemSpec spec = c.problem();
  CHECK(spec.n() == 2);
  Grid g = c.grid();
  CHECK(g.size() == 64);
  // initial data families
  CHECK(c.initial.eval({1.0, 1.0}) == doctest::Approx(0.7).epsilon(1e-14));
  InitialData sine{"sine", {}, 0.0, 2.0, {1.0, 1.0}};
  CHECK(sine.eval({M_PI / 2, M_PI / 2}) == doctest::Approx(2.0).epsilon(1e-12));
  InitialData cst{"constant", {}, 1.25, 1.0, {}};
  CHECK(cst.eval({0.3, -0.4}) == 1.25);
  InitialData zero{"zero", {}, 5.0, 1.0, {}};
  CHECK(zero.eval({0.3, -0.4}) == 0.0);
}

TEST_CASE("parse errors vs validation errors are distinct") {
  // missing required field -> parse error
  auto j = minimal_config();
  j["problem"].erase("p");
  CHECK_THROWS_AS(parse_config(j), ConfigParseError);
  // bad scheme name -> parse error
  auto j2 = minimal_config();
  j2["scheme"]["scheme"] = "implicit";
  CHECK_THROWS_AS(parse_config(j2), ConfigParseError);
  // bad boundary name -> parse error
  auto j3 = minimal_config();
  j3["scheme"]["boundary"] = "neumann";
  CHECK_THROWS_AS(parse_config(j3), ConfigParseError);
  // well-formed but inconsistent -> validation error
  auto j4 = minimal_config();
  j4["problem"]["delta"] = std::vector<double>{0.5};
  CHECK_THROWS_AS(validate_config(parse_config(j4)), ConfigValidationError);
  auto j5 = minimal_config();
  j5["problem"]["p"] = std::vector<double>{0.5, 3.0};
  CHECK_THROWS_AS(validate_config(parse_config(j5)), ConfigValidationError);
  auto j6 = minimal_config();
  j6["problem"]["domain"]["t_end"] = -1.0;
  CHECK_THROWS_AS(validate_config(parse_config(j6)), ConfigValidationError);
  auto j7 = minimal_config();
  j7["grid"]["counts"] = std::vector<int>{1, 8};
  CHECK_THROWS_AS(validate_config(parse_config(j7)), ConfigValidationError);
  auto j8 = minimal_config();
  j8["scheme"]["cfl_safety"] = 2.0;
  CHECK_THROWS_AS(validate_config(parse_config(j8)), ConfigValidationError);
  // unreadable file -> parse error
  CHECK_THROWS_AS(load_config("/nonexistent/really/not/here.json"), ConfigParseError);
}

TEST_CASE("run report json and csv are deterministic") {
  RunReport rep;
  rep.config_echo = minimal_config();
  VerificationReport a;
  a.name = "probe-a";
  a.regime = "supercritical";
  a.lhs = 1.0 / 3.0;
  a.rhs = 0.5;
  a.ratio = a.lhs / a.rhs;
  a.margin = a.rhs - a.lhs;
  a.verdict = "pass";
  VerificationReport b = a;
  b.name = "probe-b";
  b.verdict = "skipped";
  rep.probes = {a, b};
  rep.total_steps = 42;

  CHECK(rep.all_pass());  // skipped probes do not fail the run
  json j = rep.to_json();
  CHECK(j["schema"] == "anisodiff-report/1");
  CHECK(j["global_verdict"] == "pass");
  CHECK(j["probes"].size() == 2);
  CHECK(j["metrics"]["total_steps"] == 42);
  // field order is fixed by ordered_json
  std::string dumped = j.dump();
  CHECK(dumped.find("\"schema\"") < dumped.find("\"config\""));
  CHECK(dumped.find("\"config\"") < dumped.find("\"probes\""));

  // byte determinism of the serialized artifacts
  const std::string p1 = "/tmp/anisodiff_test_rep1.json";
  const std::string p2 = "/tmp/anisodiff_test_rep2.json";
  rep.write_json(p1);
  rep.write_json(p2);
  CHECK(slurp(p1) == slurp(p2));
  const std::string c1 = "/tmp/anisodiff_test_rep1.csv";
  rep.write_csv(c1);
  const std::string csv = slurp(c1);
  CHECK(csv.find("probe,regime,lhs,rhs,ratio,margin,verdict") == 0);
  CHECK(csv.find("probe-a") != std::string::npos);
  CHECK(csv.find("skipped") != std::string::npos);
  std::remove(p1.c_str());
  std::remove(p2.c_str());
  std::remove(c1.c_str());

  // a failing probe flips the global verdict
  VerificationReport f = a;
  f.name = "probe-f";
  f.verdict = "fail";
  rep.probes.push_back(f);
  CHECK_FALSE(rep.all_pass());
  CHECK(rep.to_json()["global_verdict"] == "fail");
}

TEST_CASE("frozen constants round trip") {
  FrozenConstants c;
  c.energy_C = 3.25;
  c.supbound_C = 7.5;
  c.gamma = 1e-4;
  c.gamma_star = 2.0;
  const std::string path = "/tmp/anisodiff_test_constants.json";
  c.save(path);
  FrozenConstants d = FrozenConstants::load(path);
  CHECK(d.loaded);
  CHECK(d.energy_C == c.energy_C);
  CHECK(d.supbound_C == c.supbound_C);
  CHECK(d.gamma == c.gamma);
  CHECK(d.gamma_star == c.gamma_star);
  CHECK(d.to_json()["schema"] == "anisodiff-constants/1");
  std::remove(path.c_str());
  CHECK_THROWS_AS(FrozenConstants::load("/nonexistent/constants.json"),
                  std::runtime_error);
}
