#pragma once

// Machine-readable verification reports: one VerificationReport per probe,
// aggregated into a RunReport serialized as JSON (schema
// "anisodiff-report/1") plus a one-row-per-probe summary CSV.  Reports are
// deterministic: fixed probe order, fixed reduction order upstream, and
// shortest-round-trip float formatting (nlohmann's default).

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace anisodiff {

using json = nlohmann::ordered_json;

struct VerificationReport {
  std::string name;       // probe identifier
  std::string regime;     // free-form regime / parameter tag
  json params;            // probe parameters, echoed
  double lhs = 0.0;       // quantity that must be small / bounded
  double rhs = 0.0;       // the bound
  double ratio = 0.0;
  double margin = 0.0;    // rhs - lhs
  std::string verdict;    // "pass" | "fail" | "skipped"

  json to_json() const {
    json j;
    j["name"] = name;
    j["regime"] = regime;
    j["params"] = params.is_null() ? json::object() : params;
    j["lhs"] = lhs;
    j["rhs"] = rhs;
    j["ratio"] = ratio;
    j["margin"] = margin;
    j["verdict"] = verdict;
    return j;
  }
};

struct RunReport {
  json config_echo;
  std::vector<VerificationReport> probes;
  long total_steps = 0;

  /// Conjunction of probe verdicts; "skipped" (precondition-failed) probes
  /// do not fail the run.
  bool all_pass() const {
    for (const auto& p : probes)
      if (p.verdict == "fail") return false;
    return true;
  }

  json to_json() const {
    json j;
    j["schema"] = "anisodiff-report/1";
    j["config"] = config_echo.is_null() ? json::object() : config_echo;
    j["probes"] = json::array();
    for (const auto& p : probes) j["probes"].push_back(p.to_json());
    j["global_verdict"] = all_pass() ? "pass" : "fail";
    j["metrics"] = {{"total_steps", total_steps},
                    {"probe_count", probes.size()}};
    return j;
  }

  void write_json(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_json: cannot open " + path);
    out << to_json().dump(2) << "\n";
  }

  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    out << "probe,regime,lhs,rhs,ratio,margin,verdict\n";
    char buf[32];
    for (const auto& p : probes) {
      out << p.name << "," << p.regime << ",";
      std::snprintf(buf, sizeof buf, "%.17g", p.lhs);
      out << buf << ",";
      std::snprintf(buf, sizeof buf, "%.17g", p.rhs);
      out << buf << ",";
      std::snprintf(buf, sizeof buf, "%.17g", p.ratio);
      out << buf << ",";
      std::snprintf(buf, sizeof buf, "%.17g", p.margin);
      out << buf << "," << p.verdict << "\n";
    }
  }
};

/// Frozen fitted constants: calibrated once by the `calibrate` subcommand,
/// then read-only for every verification subcommand.
struct FrozenConstants {
  double energy_C = 0.0;     // Caccioppoli ratio bound
  double supbound_C = 0.0;   // sup-estimate constant
  double gamma = 0.0;        // critical-mass recursion constant
  double gamma_star = 2.0;   // safety divisor for nu-
  bool loaded = false;

  json to_json() const {
    return json{{"schema", "anisodiff-constants/1"},
                {"energy_C", energy_C},
                {"supbound_C", supbound_C},
                {"gamma", gamma},
                {"gamma_star", gamma_star}};
  }

  static FrozenConstants from_json(const json& j) {
    FrozenConstants c;
    c.energy_C = j.at("energy_C").get<double>();
    c.supbound_C = j.at("supbound_C").get<double>();
    c.gamma = j.at("gamma").get<double>();
    c.gamma_star = j.value("gamma_star", 2.0);
    c.loaded = true;
    return c;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("FrozenConstants: cannot open " + path);
    out << to_json().dump(2) << "\n";
  }

  static FrozenConstants load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("FrozenConstants: cannot open " + path);
    json j;
    in >> j;
    return from_json(j);
  }
};

}  // namespace anisodiff
