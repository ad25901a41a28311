#pragma once

// Run configuration read from JSON with a strict schema: unknown fields,
// wrong types and non-positive counts are rejected with the offending path.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "abclab/abc_engine.hpp"
#include "abclab/errors.hpp"
#include "abclab/geometry.hpp"

namespace abclab {

enum class RunMode { Ergodic, Emergence, Diagnose, TransportCheck };

inline std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::Ergodic: return "ergodic";
    case RunMode::Emergence: return "emergence";
    case RunMode::Diagnose: return "diagnose";
    case RunMode::TransportCheck: return "transport-check";
  }
  return "ergodic";
}

struct DiagnosticsConfig {
  std::size_t report_samples = 100;
  std::size_t report_resolution = 32;
  std::size_t emergence_samples = 64;
  std::size_t emergence_atoms = 64;
  std::vector<double> scales;  // empty: eta_n / 2 per stage plus a sweep
  bool ergodicity = true;
  bool emergence = true;
};

struct RunConfig {
  RunMode mode = RunMode::Ergodic;
  SurfaceKind surface = SurfaceKind::Annulus;
  int stages = 3;
  std::uint64_t engine_seed = 1;
  std::uint64_t diagnostics_seed = 2;
  EngineParams engine;
  DiagnosticsConfig diagnostics;
  std::string output = "abclab_out";

  /// Engine parameters with mode, surface, stages and seed filled in.
  EngineParams engine_params() const {
    EngineParams p = engine;
    p.mode = mode == RunMode::Emergence ? SchemeMode::Emergence : SchemeMode::Ergodic;
    p.kind = surface;
    p.stages = stages;
    p.seed = engine_seed;
    return p;
  }
};

namespace detail {

using CfgJson = nlohmann::json;

inline void reject_unknown(const CfgJson& j, const std::string& path, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw ParseError(path + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ParseError(path + "." + it.key() + ": unknown field");
  }
}

template <class T>
void read(const CfgJson& j, const char* key, const std::string& path, T& out) {
  if (!j.contains(key)) return;
  const CfgJson& v = j.at(key);
  const std::string where = path + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ParseError(where + ": expected a boolean");
    out = v.get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ParseError(where + ": expected a string");
    out = v.get<std::string>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ParseError(where + ": expected a number");
    out = v.get<T>();
  } else {
    if (!v.is_number_integer()) throw ParseError(where + ": expected an integer");
    if (v.is_number_unsigned() ? false : v.get<std::int64_t>() < 0) throw ParseError(where + ": must not be negative");
    out = v.get<T>();
  }
}

template <class T>
void read_positive(const CfgJson& j, const char* key, const std::string& path, T& out) {
  read(j, key, path, out);
  if (j.contains(key) && !(out > 0)) throw ParseError(path + "." + key + ": must be positive");
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  detail::CfgJson j;
  try {
    j = detail::CfgJson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  RunConfig c;
  detail::reject_unknown(j, "config",
                         {"mode", "surface", "stages", "seeds", "resolutions", "policy", "diagnostics", "output"});
  std::string mode = "ergodic";
  detail::read(j, "mode", "config", mode);
  if (mode == "ergodic") c.mode = RunMode::Ergodic;
  else if (mode == "emergence") c.mode = RunMode::Emergence;
  else if (mode == "diagnose") c.mode = RunMode::Diagnose;
  else if (mode == "transport-check") c.mode = RunMode::TransportCheck;
  else throw ParseError("config.mode: unknown mode '" + mode + "'");
  std::string surface = "annulus";
  detail::read(j, "surface", "config", surface);
  try {
    c.surface = surface_from_string(surface);
  } catch (const std::exception&) {
    throw ParseError("config.surface: unknown surface '" + surface + "'");
  }
  detail::read(j, "stages", "config", c.stages);
  if (c.stages < 0 || c.stages > 16) throw ParseError("config.stages: must lie in [0, 16]");
  detail::read(j, "output", "config", c.output);

  if (j.contains("seeds")) {
    const auto& s = j["seeds"];
    detail::reject_unknown(s, "config.seeds", {"engine", "diagnostics"});
    detail::read(s, "engine", "config.seeds", c.engine_seed);
    detail::read(s, "diagnostics", "config.seeds", c.diagnostics_seed);
  }
  EngineParams& e = c.engine;
  if (j.contains("resolutions")) {
    const auto& r = j["resolutions"];
    const std::string p = "config.resolutions";
    detail::reject_unknown(r, p,
                           {"kicker_box_cap", "kicker_y_grid", "kicker_check_k_theta", "kicker_check_k_y", "leb_grid",
                            "orbit_samples", "exact_orbit_terms", "c0_samples", "q_samples", "y_grid", "eta_grid",
                            "support", "colors", "separation_y_grid", "separation_support"});
    detail::read_positive(r, "kicker_box_cap", p, e.kicker_box_cap);
    detail::read_positive(r, "kicker_y_grid", p, e.kicker_y_grid);
    detail::read_positive(r, "kicker_check_k_theta", p, e.kicker_check_k_theta);
    detail::read_positive(r, "kicker_check_k_y", p, e.kicker_check_k_y);
    detail::read_positive(r, "leb_grid", p, e.leb_grid);
    detail::read_positive(r, "orbit_samples", p, e.orbit_samples);
    detail::read_positive(r, "exact_orbit_terms", p, e.exact_orbit_terms);
    detail::read_positive(r, "c0_samples", p, e.c0_samples);
    detail::read_positive(r, "q_samples", p, e.q_samples);
    detail::read_positive(r, "y_grid", p, e.y_grid);
    detail::read_positive(r, "eta_grid", p, e.eta_grid);
    detail::read_positive(r, "support", p, e.support);
    detail::read_positive(r, "colors", p, e.colors);
    detail::read_positive(r, "separation_y_grid", p, e.separation_y_grid);
    detail::read_positive(r, "separation_support", p, e.separation_support);
    if (e.colors < 2) throw ParseError(p + ".colors: must be at least 2");
    if (e.kicker_box_cap < 4) throw ParseError(p + ".kicker_box_cap: must be at least 4");
    if (e.leb_grid < 2) throw ParseError(p + ".leb_grid: must be at least 2");
  }
  if (j.contains("policy")) {
    const auto& r = j["policy"];
    const std::string p = "config.policy";
    detail::reject_unknown(r, p, {"resolution_retries", "max_halvings", "continue_on_failure"});
    detail::read(r, "resolution_retries", p, e.resolution_retries);
    detail::read_positive(r, "max_halvings", p, e.max_halvings);
    detail::read(r, "continue_on_failure", p, e.continue_on_failure);
  }
  if (j.contains("diagnostics")) {
    const auto& d = j["diagnostics"];
    const std::string p = "config.diagnostics";
    detail::reject_unknown(d, p,
                           {"report_samples", "report_resolution", "emergence_samples", "emergence_atoms", "scales",
                            "ergodicity", "emergence"});
    DiagnosticsConfig& g = c.diagnostics;
    detail::read_positive(d, "report_samples", p, g.report_samples);
    detail::read_positive(d, "report_resolution", p, g.report_resolution);
    detail::read_positive(d, "emergence_samples", p, g.emergence_samples);
    detail::read_positive(d, "emergence_atoms", p, g.emergence_atoms);
    detail::read(d, "ergodicity", p, g.ergodicity);
    detail::read(d, "emergence", p, g.emergence);
    if (d.contains("scales")) {
      const auto& s = d["scales"];
      if (!s.is_array()) throw ParseError(p + ".scales: expected an array");
      for (std::size_t k = 0; k < s.size(); ++k) {
        if (!s[k].is_number() || !(s[k].get<double>() > 0.0 && s[k].get<double>() < 1.0))
          throw ParseError(p + ".scales[" + std::to_string(k) + "]: expected a number in (0,1)");
        g.scales.push_back(s[k].get<double>());
        if (k && g.scales[k] > g.scales[k - 1]) throw ParseError(p + ".scales: must be descending");
      }
    }
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Every field, so a manifest records the full run.
inline nlohmann::ordered_json config_to_json(const RunConfig& c) {
  const EngineParams& e = c.engine;
  nlohmann::ordered_json j;
  j["mode"] = to_string(c.mode);
  j["surface"] = to_string(c.surface);
  j["stages"] = c.stages;
  j["seeds"] = {{"engine", c.engine_seed}, {"diagnostics", c.diagnostics_seed}};
  j["resolutions"] = {{"kicker_box_cap", e.kicker_box_cap},
                      {"kicker_y_grid", e.kicker_y_grid},
                      {"kicker_check_k_theta", e.kicker_check_k_theta},
                      {"kicker_check_k_y", e.kicker_check_k_y},
                      {"leb_grid", e.leb_grid},
                      {"orbit_samples", e.orbit_samples},
                      {"exact_orbit_terms", e.exact_orbit_terms},
                      {"c0_samples", e.c0_samples},
                      {"q_samples", e.q_samples},
                      {"y_grid", e.y_grid},
                      {"eta_grid", e.eta_grid},
                      {"support", e.support},
                      {"colors", e.colors},
                      {"separation_y_grid", e.separation_y_grid},
                      {"separation_support", e.separation_support}};
  j["policy"] = {{"resolution_retries", e.resolution_retries},
                 {"max_halvings", e.max_halvings},
                 {"continue_on_failure", e.continue_on_failure}};
  const DiagnosticsConfig& g = c.diagnostics;
  j["diagnostics"] = {{"report_samples", g.report_samples},       {"report_resolution", g.report_resolution},
                      {"emergence_samples", g.emergence_samples}, {"emergence_atoms", g.emergence_atoms},
                      {"scales", g.scales},                       {"ergodicity", g.ergodicity},
                      {"emergence", g.emergence}};
  j["output"] = c.output;
  return j;
}

}  // namespace abclab
