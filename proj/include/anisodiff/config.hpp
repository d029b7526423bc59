#pragma once

// Experiment configuration: a single JSON file mirroring the type fields of
// the library.  Parse errors and validation errors are distinct exception
// types so the CLI can map them to its exit-code contract.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "anisodiff/flux_core.hpp"
#include "anisodiff/grid.hpp"
#include "anisodiff/solver.hpp"

namespace anisodiff {

struct ConfigParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Named initial-data families (a grid cannot take arbitrary closures).
struct InitialData {
  std::string family = "affine";      // affine | sine | constant | zero
  std::vector<double> slopes;         // affine: u0 = offset + sum slopes_i x_i
  double offset = 0.0;
  double amplitude = 1.0;             // sine: amplitude * prod sin(freq_i x_i)
  std::vector<double> freqs;

  double eval(const std::vector<double>& x) const {
    if (family == "affine") {
      double u = offset;
      for (std::size_t i = 0; i < x.size(); ++i)
        u += (i < slopes.size() ? slopes[i] : 0.0) * x[i];
      return u;
    }
    if (family == "sine") {
      double u = amplitude;
      for (std::size_t i = 0; i < x.size(); ++i)
        u *= std::sin((i < freqs.size() ? freqs[i] : 1.0) * x[i]);
      return u;
    }
    if (family == "constant") return offset;
    return 0.0;  // zero
  }
};

struct ExperimentConfig {
  // problem
  std::vector<double> p, delta;
  double lambda = 1.0;
  std::string coeff_family = "constant";  // constant | separable-trig | checkerboard
  std::vector<double> dom_lo, dom_hi;
  double t_end = 1.0;
  std::optional<double> extra_integrability_m;
  // grid
  std::vector<int> counts;
  // scheme
  SchemeConfig scheme;
  // initial data
  InitialData initial;
  // probes (free-form, interpreted by the CLI)
  nlohmann::ordered_json probes = nlohmann::ordered_json::array();
  // misc
  std::uint64_t seed = 1;
  nlohmann::ordered_json raw;  // full parsed config, echoed into reports

  ProblemSpec problem() const {
    CoefficientField cf;
    if (coeff_family == "constant")
      cf.family = CoeffFamily::Constant;
    else if (coeff_family == "separable-trig")
      cf.family = CoeffFamily::SeparableTrig;
    else if (coeff_family == "checkerboard")
      cf.family = CoeffFamily::Checkerboard;
    else
      throw ConfigValidationError("unknown coeff family: " + coeff_family);
    cf.lambda = lambda;
    return ProblemSpec(ExponentVector(p), DegeneracyVector(delta), lambda, cf,
                       Box{dom_lo, dom_hi, t_end});
  }

  Grid grid() const { return Grid(dom_lo, dom_hi, counts); }
};

inline ExperimentConfig parse_config(const nlohmann::ordered_json& j) {
  ExperimentConfig c;
  c.raw = j;
  try {
    const auto& prob = j.at("problem");
    c.p = prob.at("p").get<std::vector<double>>();
    c.delta = prob.at("delta").get<std::vector<double>>();
    c.lambda = prob.value("lambda", 1.0);
    c.coeff_family = prob.value("coeff_family", std::string("constant"));
    const auto& dom = prob.at("domain");
    c.dom_lo = dom.at("lo").get<std::vector<double>>();
    c.dom_hi = dom.at("hi").get<std::vector<double>>();
    c.t_end = dom.at("t_end").get<double>();
    if (prob.contains("m")) c.extra_integrability_m = prob["m"].get<double>();

    c.counts = j.at("grid").at("counts").get<std::vector<int>>();

    if (j.contains("scheme")) {
      const auto& s = j["scheme"];
      const std::string name = s.value("scheme", std::string("euler"));
      if (name == "euler")
        c.scheme.scheme = Scheme::ExplicitEuler;
      else if (name == "rk2")
        c.scheme.scheme = Scheme::ExplicitRK2;
      else
        throw ConfigParseError("scheme.scheme must be euler or rk2");
      c.scheme.cfl_safety = s.value("cfl_safety", 0.4);
      c.scheme.dt_max = s.value("dt_max", 1e-2);
      c.scheme.eps_reg = s.value("eps_reg", 1e-8);
      c.scheme.fixed_dt = s.value("fixed_dt", 0.0);
      c.scheme.max_stored_slices = s.value("max_stored_slices", 201);
      const std::string bc = s.value("boundary", std::string("dirichlet-from-initial"));
      if (bc == "dirichlet-from-initial")
        c.scheme.boundary = BoundaryRule::DirichletFromInitial;
      else if (bc == "periodic")
        c.scheme.boundary = BoundaryRule::Periodic;
      else
        throw ConfigParseError("scheme.boundary must be dirichlet-from-initial or periodic");
    }

    if (j.contains("initial")) {
      const auto& ini = j["initial"];
      c.initial.family = ini.value("family", std::string("zero"));
      if (ini.contains("slopes"))
        c.initial.slopes = ini["slopes"].get<std::vector<double>>();
      c.initial.offset = ini.value("offset", 0.0);
      c.initial.amplitude = ini.value("amplitude", 1.0);
      if (ini.contains("freqs"))
        c.initial.freqs = ini["freqs"].get<std::vector<double>>();
    }

    if (j.contains("probes")) c.probes = j["probes"];
    c.seed = j.value("seed", std::uint64_t{1});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigParseError(std::string("config parse: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open config file: " + path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigParseError(std::string("config parse (") + path + "): " + e.what());
  }
  return parse_config(j);
}

/// Cross-field validation: dimension agreement, grid sanity, exponent range.
inline void validate_config(const ExperimentConfig& c) {
  const std::size_t n = c.p.size();
  if (n < 2) throw ConfigValidationError("problem.p needs at least 2 exponents");
  if (c.delta.size() != n || c.dom_lo.size() != n || c.dom_hi.size() != n ||
      c.counts.size() != n)
    throw ConfigValidationError("dimension mismatch across p/delta/domain/grid");
  for (double pi : c.p)
    if (!(pi > 1.0)) throw ConfigValidationError("every exponent must exceed 1");
  for (double di : c.delta)
    if (!(di >= 0.0)) throw ConfigValidationError("thresholds must be >= 0");
  if (!(c.lambda >= 1.0)) throw ConfigValidationError("lambda must be >= 1");
  if (!(c.t_end > 0.0)) throw ConfigValidationError("t_end must be > 0");
  for (std::size_t i = 0; i < n; ++i)
    if (!(c.dom_hi[i] > c.dom_lo[i]))
      throw ConfigValidationError("empty domain extent on axis " + std::to_string(i));
  for (int cnt : c.counts)
    if (cnt < 2) throw ConfigValidationError("grid.counts entries must be >= 2");
  try {
    c.scheme.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigValidationError(e.what());
  }
}

}  // namespace anisodiff
