#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "abclab/config.hpp"
#include "abclab/serialization.hpp"
#include "support/oracles.hpp"

using namespace abclab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("abclab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, std::string* out = nullptr) {
  fs::path log = fs::temp_directory_path() / "abclab_cli_stdout.txt";
  std::string cmd = std::string(ABCLAB_CLI_PATH) + " " + args + " > " + log.string() + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  if (out) {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    *out = ss.str();
  }
  return WEXITSTATUS(status);
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  RunConfig c = parse_config(R"({"mode":"emergence","surface":"disk","stages":2,
    "seeds":{"engine":7},"resolutions":{"leb_grid":16},"policy":{"continue_on_failure":true},
    "diagnostics":{"scales":[0.2,0.1]},"output":"x"})");
  EXPECT_EQ(c.mode, RunMode::Emergence);
  EXPECT_EQ(c.surface, SurfaceKind::Disk);
  EXPECT_EQ(c.stages, 2);
  EXPECT_EQ(c.engine_seed, 7u);
  EXPECT_EQ(c.diagnostics_seed, 2u);
  EXPECT_EQ(c.engine.leb_grid, 16u);
  EXPECT_TRUE(c.engine.continue_on_failure);
  EXPECT_EQ(c.diagnostics.scales.size(), 2u);
  EngineParams p = c.engine_params();
  EXPECT_EQ(p.mode, SchemeMode::Emergence);
  EXPECT_EQ(p.seed, 7u);
}

TEST(Config, ErrorsNameTheField) {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message(R"({"stagez":3})").find("config.stagez"), std::string::npos);
  EXPECT_NE(message(R"({"resolutions":{"leb_grid":0}})").find("config.resolutions.leb_grid"), std::string::npos);
  EXPECT_NE(message(R"({"resolutions":{"support":-4}})").find("config.resolutions.support"), std::string::npos);
  EXPECT_NE(message(R"({"surface":"torus"})").find("config.surface"), std::string::npos);
  EXPECT_NE(message(R"({"stages":"three"})").find("config.stages"), std::string::npos);
  EXPECT_NE(message(R"({"diagnostics":{"scales":[0.1,0.2]}})").find("descending"), std::string::npos);
  EXPECT_NE(message("{not json").find("config"), std::string::npos);
}

TEST(Config, ManifestRoundTrip) {
  RunConfig c = parse_config(R"({"surface":"sphere","stages":1})");
  RunConfig back = parse_config(config_to_json(c).dump());
  EXPECT_EQ(config_to_json(back), config_to_json(c));
}

TEST(Serialization, MapRoundTripIsExact) {
  std::mt19937_64 rng(3);
  for (SurfaceKind k : kAllSurfaces) {
    BoxExchangeSpec spec(3, 2, 2, -0.7, 0.7, {2, 3, 0, 1});
    MapExpr box = MapExpr::box_exchange(k, spec);
    MapExpr h = MapExpr::compose(box, MapExpr::inverse(box));
    MapExpr f = MapExpr::conjugate(h, MapExpr::rotation(k, Rational(BigInt("12345678901234567891"), BigInt("98765432109876543211"))));
    MapExpr g = MapExpr::compose(f, MapExpr::rotation(k, 0.1 + 1e-17 * static_cast<double>(rng() % 7)));
    Json j = map_to_json(g);
    MapExpr back = map_from_json(Json::parse(j.dump()));
    EXPECT_TRUE(back == g);
    EXPECT_EQ(map_to_json(back).dump(), j.dump());
  }
}

TEST(Serialization, MalformedMapsThrow) {
  EXPECT_THROW(map_from_json(Json::parse(R"({"surface":"disk","root":0,"nodes":[{"op":"spin"}]})")), ParseError);
  EXPECT_THROW(map_from_json(Json::parse(R"({"surface":"disk","root":3,"nodes":[{"op":"identity"}]})")), ParseError);
  EXPECT_THROW(map_from_json(Json::parse(R"({"surface":"disk","root":0,"nodes":[{"op":"inverse","a":0}]})")),
               ParseError);
  EXPECT_THROW(map_from_json(Json::parse(
                   R"({"surface":"disk","root":0,"nodes":[{"op":"box_exchange","q":1,"cols":2,"rows":1,"y_lo":0,"y_hi":1,"perm":[0,0]}]})")),
               ParseError);
}

TEST(Serialization, MeasureRoundTrip) {
  std::mt19937_64 rng(4);
  for (SurfaceKind k : kAllSurfaces) {
    DiscreteMeasure m = oracle::random_measure(k, 9, rng);
    DiscreteMeasure back = measure_from_json(Json::parse(measure_to_json(m).dump()));
    EXPECT_EQ(back.points(), m.points());
    EXPECT_EQ(back.weights(), m.weights());
  }
  EXPECT_THROW(measure_from_json(Json::parse(R"({"surface":"sphere","points":[[1,1,0]],"weights":[1]})")),
               ParseError);
}

TEST(Serialization, CsvHeaders) {
  std::ostringstream a, b;
  write_matrix_csv(a, {0.0, 0.5}, {{0.0, 0.1}, {0.1, 0.0}});
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "y,y_prime,d_k");
  const std::string text = a.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  EmergenceReport r;
  r.scale = 0.1;
  r.masses = {0.5};
  r.integrand = {0.2};
  r.floored = {false};
  r.saturated = {false};
  write_emergence_csv(b, {r});
  EXPECT_EQ(b.str().substr(0, b.str().find('\n')), "scale,sample_id,mass,integrand,floored,saturated");
}

TEST(Cli, KantorovichSubcommand) {
  fs::path dir = scratch("kant");
  write(dir / "a.json", R"({"surface":"annulus","points":[[0.1,0.0,0.0]],"weights":[1.0]})");
  write(dir / "b.json", R"({"surface":"annulus","points":[[0.1,0.5,0.0],[0.1,-0.5,0.0]],"weights":[0.5,0.5]})");
  std::string out;
  EXPECT_EQ(run_cli("kantorovich " + (dir / "a.json").string() + " " + (dir / "b.json").string() + " --plan " +
                        (dir / "plan.json").string(),
                    &out),
            0);
  EXPECT_EQ(out, "0.5\n");
  Json plan = Json::parse(std::ifstream(dir / "plan.json"));
  EXPECT_EQ(plan["plan"].size(), 2u);
}

TEST(Cli, ConfigErrorsExitWithOne) {
  fs::path dir = scratch("badcfg");
  write(dir / "c.json", R"({"mode":"ergodic","stages":1,"bogus":true})");
  EXPECT_EQ(run_cli("run --config " + (dir / "c.json").string() + " --out " + (dir / "out").string()), 1);
  EXPECT_EQ(run_cli("run --config " + (dir / "missing.json").string()), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
}

TEST(Cli, RunWritesLedgerAndDiagnostics) {
  fs::path dir = scratch("run");
  write(dir / "c.json", R"({"mode":"ergodic","surface":"annulus","stages":1,
    "resolutions":{"orbit_samples":10,"c0_samples":300,"q_samples":100},
    "diagnostics":{"report_samples":8,"report_resolution":8,"emergence_samples":8,"emergence_atoms":8}})");
  EXPECT_EQ(run_cli("--threads 1 run --config " + (dir / "c.json").string() + " --out " + (dir / "out").string()), 0);
  for (const char* f : {"manifest.json", "ledger.json", "timings.json", "map.json", "diagnostics.json",
                        "ergodicity.csv", "emergence.csv"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  Json ledger = Json::parse(std::ifstream(dir / "out" / "ledger.json"));
  EXPECT_TRUE(ledger["passed"].get<bool>());
  MapExpr f = map_from_json(Json::parse(std::ifstream(dir / "out" / "map.json")));
  EXPECT_EQ(f.kind(), SurfaceKind::Annulus);
  EXPECT_EQ(run_cli("diagnose " + (dir / "out" / "map.json").string() + " --out " + (dir / "diag").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "diag" / "diagnostics.json"));
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  fs::path dir = scratch("env");
  write(dir / "c.json", R"({"mode":"ergodic","stages":0,"diagnostics":{"ergodicity":false,"emergence":false}})");
  std::string cmd = "ABCLAB_OUT=" + (dir / "envout").string() + " " + std::string(ABCLAB_CLI_PATH) +
                    " run --config " + (dir / "c.json").string() + " > /dev/null 2>&1";
  EXPECT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);
  EXPECT_TRUE(fs::exists(dir / "envout" / "ledger.json"));
}
