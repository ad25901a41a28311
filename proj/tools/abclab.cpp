// abclab: run AbC schemes, compute Kantorovich distances, diagnose maps.
//
// Exit codes: 0 success, 1 configuration or parse error, 2 a stage or
// property check failed.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "abclab/abc_engine.hpp"
#include "abclab/config.hpp"
#include "abclab/diagnostics.hpp"
#include "abclab/parallel.hpp"
#include "abclab/serialization.hpp"
#include "abclab/transport.hpp"

namespace fs = std::filesystem;
using namespace abclab;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kFailed = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string output_dir(const RunConfig& c, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("ABCLAB_OUT"); env && *env) return env;
  return c.output;
}

/// eta_n / 2 for every stage with a positive eta, then a geometric sweep.
std::vector<double> default_scales(const std::vector<SchemeState>& states) {
  std::vector<double> s;
  for (const auto& st : states)
    if (st.eta > 0.0 && st.eta / 2.0 < 1.0) s.push_back(st.eta / 2.0);
  for (double x = 0.25; x >= 1.0 / 256.0; x /= 2.0) s.push_back(x);
  std::sort(s.begin(), s.end(), std::greater<>());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

void write_diagnostics(const fs::path& dir, const RunConfig& c, const MapExpr& f, const std::vector<SchemeState>& states) {
  const DiagnosticsConfig& g = c.diagnostics;
  const auto conj = as_conjugated_rotation(f);
  if (!conj) return;
  const std::int64_t q = to_int64(conj->alpha.den());
  Json bundle;
  if (g.ergodicity && c.mode != RunMode::Emergence) {
    const double region = states.empty() ? 0.0 : states.back().eps;
    ErgodicityReport r = ergodicity_report(f, q, region, g.report_samples, g.report_resolution, c.diagnostics_seed);
    Json j = ergodicity_to_json(r);
    if (states.size() > 1) {
      double t = detail::raw_distance(f.kind(), states[1].eps);
      j["threshold"] = t;
      j["fraction_below_threshold"] = r.fraction_below(t);
    }
    bundle["ergodicity"] = j;
    std::ofstream csv(dir / "ergodicity.csv");
    write_ergodicity_csv(csv, r);
  }
  if (g.emergence) {
    std::vector<double> scales = g.scales.empty() ? default_scales(states) : g.scales;
    auto reps = emergence_order_estimate(f, q, scales, g.emergence_samples, c.diagnostics_seed + 1, g.emergence_atoms);
    bundle["emergence"] = emergence_to_json(reps);
    std::ofstream csv(dir / "emergence.csv");
    write_emergence_csv(csv, reps);
  }
  bundle["proxy"] = "e^f replaced by the q-periodic orbit measure of the final map";
  write_json(dir / "diagnostics.json", bundle);
}

int cmd_run(const std::string& config_path, const std::string& out_flag) {
  RunConfig c = load_config(config_path);
  if (c.mode == RunMode::TransportCheck || c.mode == RunMode::Diagnose)
    throw ParseError("config.mode: 'run' needs mode ergodic or emergence");
  const fs::path dir = output_dir(c, out_flag);
  fs::create_directories(dir);
  Json manifest;
  manifest["tool"] = "abclab";
  manifest["config"] = config_to_json(c);
  manifest["files"] = {"manifest.json", "ledger.json", "timings.json", "map.json", "diagnostics.json"};
  write_json(dir / "manifest.json", manifest);

  EngineParams p = c.engine_params();
  p.log = [](const std::string& line) { std::cerr << line << '\n'; };
  const SchemeMode mode = p.mode;
  try {
    SchemeRun run = run_scheme(p);
    write_json(dir / "ledger.json", ledger_to_json(run, mode, c.surface));
    write_json(dir / "timings.json", timings_to_json(run.ledger()));
    write_json(dir / "map.json", map_to_json(run.f));
    write_diagnostics(dir, c, run.f, run.states);
    std::cout << (run.passed() ? "PASS" : "FAIL") << " " << to_string(mode) << " " << to_string(c.surface) << " stages "
              << c.stages << "\n";
    return run.passed() ? kOk : kFailed;
  } catch (const StageFailed& e) {
    write_json(dir / "ledger.json", ledger_to_json(mode, c.surface, e.states, {}, {}, 0.0, e.condition));
    std::vector<LedgerEntry> all;
    for (const auto& s : e.states) all.insert(all.end(), s.ledger.begin(), s.ledger.end());
    write_json(dir / "timings.json", timings_to_json(all));
    if (!e.states.empty()) write_json(dir / "map.json", map_to_json(e.states.back().f()));
    std::cout << "FAIL " << e.condition << "\n";
    return kFailed;
  }
}

int cmd_kantorovich(const std::string& a, const std::string& b, const std::string& plan_path) {
  DiscreteMeasure mu = measure_from_json(read_json(a));
  DiscreteMeasure nu = measure_from_json(read_json(b));
  if (mu.kind() != nu.kind()) throw ParseError("measures live on different surfaces");
  KantorovichResult r = kantorovich(mu, nu);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", r.value);
  std::cout << buf << "\n";
  if (!plan_path.empty()) {
    Json plan = Json::array();
    for (const auto& e : r.plan.entries) plan.push_back({{"source", e.source}, {"target", e.target}, {"mass", e.mass}});
    write_json(plan_path, {{"value", r.value}, {"plan", plan}});
  }
  return kOk;
}

int cmd_diagnose(const std::string& map_path, const std::string& config_path, const std::string& out_flag) {
  RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
  MapExpr f = map_from_json(read_json(map_path));
  const fs::path dir = output_dir(c, out_flag);
  fs::create_directories(dir);
  const DiagnosticsConfig& g = c.diagnostics;
  const auto conj = as_conjugated_rotation(f);
  const std::int64_t q = conj ? to_int64(conj->alpha.den()) : 1;
  Json bundle;
  if (g.ergodicity) {
    ErgodicityReport r = ergodicity_report(f, q, 0.0, g.report_samples, g.report_resolution, c.diagnostics_seed);
    bundle["ergodicity"] = ergodicity_to_json(r);
    std::ofstream csv(dir / "ergodicity.csv");
    write_ergodicity_csv(csv, r);
  }
  if (g.emergence) {
    std::vector<double> scales = g.scales.empty() ? default_scales({}) : g.scales;
    auto reps = emergence_order_estimate(f, q, scales, g.emergence_samples, c.diagnostics_seed + 1, g.emergence_atoms);
    bundle["emergence"] = emergence_to_json(reps);
    std::ofstream csv(dir / "emergence.csv");
    write_emergence_csv(csv, reps);
  }
  write_json(dir / "diagnostics.json", bundle);
  std::cout << "diagnostics written to " << dir.string() << "\n";
  return kOk;
}

/// Quick property suite: metric axioms of the solver, rotation invariance,
/// the latitude closed form and serialization round trips.
int cmd_check(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, double value) {
    std::printf("%s %-40s %.3e\n", ok ? "PASS" : "FAIL", name.c_str(), value);
    if (!ok) ++failures;
  };
  for (SurfaceKind kind : kAllSurfaces) {
    const std::string tag(to_string(kind));
    auto random_measure = [&](std::size_t n) {
      auto pts = lebesgue_sample(kind, n, rng());
      std::vector<double> w(n);
      double total = 0.0;
      for (auto& x : w) total += (x = 0.1 + uniform01(rng));
      for (auto& x : w) x /= total;
      return DiscreteMeasure(std::move(pts), std::move(w));
    };
    double worst_sym = 0.0, worst_tri = 0.0, worst_self = 0.0;
    for (int t = 0; t < 20; ++t) {
      DiscreteMeasure a = random_measure(6), b = random_measure(7), c2 = random_measure(5);
      double ab = kantorovich_value(a, b), ba = kantorovich_value(b, a);
      double ac = kantorovich_value(a, c2), cb = kantorovich_value(c2, b);
      worst_sym = std::max(worst_sym, std::abs(ab - ba));
      worst_tri = std::max(worst_tri, ab - (ac + cb));
      worst_self = std::max(worst_self, kantorovich_value(a, a));
    }
    report(tag + " symmetry", worst_sym <= 1e-9, worst_sym);
    report(tag + " triangle inequality", worst_tri <= 1e-9, worst_tri);
    report(tag + " identity of indiscernibles", worst_self <= 1e-12, worst_self);
    double worst_rot = 0.0;
    for (int t = 0; t < 10; ++t) {
      DiscreteMeasure a = random_measure(6), b = random_measure(6);
      MapExpr r = MapExpr::rotation(kind, uniform01(rng));
      worst_rot = std::max(worst_rot, std::abs(kantorovich_value(a, b) -
                                               kantorovich_value(pushforward(r, a), pushforward(r, b))));
    }
    report(tag + " rotation invariance", worst_rot <= 1e-9, worst_rot);
    MapExpr f = MapExpr::conjugate(MapExpr::rotation(kind, Rational(1, 3)), MapExpr::rotation(kind, Rational(2, 7)));
    bool same = map_from_json(map_to_json(f)) == f;
    report(tag + " map round trip", same, 0.0);
    DiscreteMeasure m = random_measure(5);
    DiscreteMeasure m2 = measure_from_json(measure_to_json(m));
    report(tag + " measure round trip", m2.points() == m.points() && m2.weights() == m.weights(), 0.0);
  }
  return failures ? kFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"abclab: finite-stage AbC laboratory"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (default: all cores)");

  std::string config, out, plan, mu, nu, map_file;
  std::uint64_t check_seed = 7;
  auto* run = app.add_subcommand("run", "run an ergodic or emergence scheme");
  run->add_option("--config", config, "JSON run configuration")->required();
  run->add_option("--out", out, "output directory");
  auto* kant = app.add_subcommand("kantorovich", "d_K between two measure files");
  kant->add_option("mu", mu, "first measure (JSON)")->required();
  kant->add_option("nu", nu, "second measure (JSON)")->required();
  kant->add_option("--plan", plan, "write the optimal plan to this file");
  auto* diag = app.add_subcommand("diagnose", "ergodicity and emergence reports for a map");
  diag->add_option("map", map_file, "serialized map (JSON)")->required();
  diag->add_option("--config", config, "JSON configuration for the diagnostics section");
  diag->add_option("--out", out, "output directory");
  auto* check = app.add_subcommand("check", "quick property suite");
  check->add_option("--seed", check_seed, "seed for random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }
  set_thread_count(threads);
  try {
    if (*run) return cmd_run(config, out);
    if (*kant) return cmd_kantorovich(mu, nu, plan);
    if (*diag) return cmd_diagnose(map_file, config, out);
    if (*check) return cmd_check(check_seed);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const KindMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kOk;
}
