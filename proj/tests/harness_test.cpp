#include "weightlab/harness.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <random>
#include <sstream>
#include <sys/wait.h>

namespace weightlab {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("weightlab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_config(const fs::path& dir) {
  ExperimentConfig c;
  c.epsilon = 0.5;
  c.terms = 2;
  c.grid_exponent = 5;
  c.indices = {1, 3};
  c.t_values = {0.0, 0.5, 1.0};
  c.pair_budget = 1 << 16;
  c.angles = 64;
  c.output_dir = dir.string();
  return c;
}

std::vector<fs::path> run_all(const ExperimentConfig& c) {
  std::ostringstream log;
  std::vector<fs::path> out;
  for (auto batch : {cmd_build_weight(c, log), cmd_diagnose(c), cmd_welding(c), cmd_curve(c), cmd_report(c, {})}) {
    out.insert(out.end(), batch.begin(), batch.end());
  }
  return out;
}

// Minimal JSON Schema check covering the keywords the report schema uses.
void check_schema(const Json& v, const Json& s, const std::string& at) {
  if (s.contains("enum")) {
    bool hit = false;
    for (const auto& e : s["enum"]) hit = hit || e == v;
    EXPECT_TRUE(hit) << at << " = " << v.dump();
  }
  if (s.contains("type")) {
    auto ok = [&](const std::string& t) {
      return (t == "object" && v.is_object()) || (t == "array" && v.is_array()) || (t == "string" && v.is_string()) ||
             (t == "number" && v.is_number()) || (t == "integer" && v.is_number_integer());
    };
    bool hit = false;
    if (s["type"].is_array()) {
      for (const auto& t : s["type"]) hit = hit || ok(t.get<std::string>());
    } else {
      hit = ok(s["type"].get<std::string>());
    }
    EXPECT_TRUE(hit) << at << " has type " << v.type_name();
  }
  if (v.is_object()) {
    if (s.contains("required")) {
      for (const auto& k : s["required"]) EXPECT_TRUE(v.contains(k.get<std::string>())) << at << "." << k;
    }
    for (const auto& [k, child] : v.items()) {
      if (s.contains("properties") && s["properties"].contains(k)) {
        check_schema(child, s["properties"][k], at + "." + k);
      } else if (s.contains("additionalProperties")) {
        const Json& extra = s["additionalProperties"];
        if (extra.is_boolean()) {
          EXPECT_TRUE(extra.get<bool>()) << at << " has unexpected key " << k;
        } else {
          check_schema(child, extra, at + "." + k);
        }
      }
    }
  }
  if (v.is_array() && s.contains("items")) {
    for (std::size_t i = 0; i < v.size(); ++i) check_schema(v[i], s["items"], at + "[" + std::to_string(i) + "]");
  }
}

TEST(Io, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> e(-300, 300);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::pow(10.0, e(rng)) * (i % 2 ? -1 : 1);
    EXPECT_EQ(parse_double(format_double(v), "v"), v);
  }
  EXPECT_EQ(format_double(kInfinity), "inf");
  EXPECT_EQ(parse_double("inf", "v"), kInfinity);
  EXPECT_THROW(parse_double("1.5x", "v"), ValidationError);
  EXPECT_THROW(parse_unsigned("-3", "v"), ValidationError);
}

TEST(Io, WeightArchiveIsBitExact) {
  Provenance p;
  p.epsilon = 0.9;
  p.terms = 2;
  p.selected_indices = {2, 4};
  const auto f = build_ftilde(FtildeSpec::from_indices(0.9, {2, 4}), desk_grid(5));
  for (double t : {0.3, 1.0}) {
    const auto w = build_omega(f, t, p);
    const std::string text = weight_archive_text(w);
    const auto back = parse_weight_archive(text);
    EXPECT_EQ(back, w);
    EXPECT_EQ(weight_archive_text(back), text);
  }
}

TEST(Io, ArchiveParseErrors) {
  const std::string good = weight_archive_text(make_weight(SampledFunction::constant(4, 1.0)));
  EXPECT_NO_THROW(parse_weight_archive(good));
  std::string short_grid = good;
  short_grid.replace(short_grid.find("#grid=4"), 7, "#grid=5");
  EXPECT_THROW(parse_weight_archive(short_grid), ValidationError);
  std::string no_eps = good;
  no_eps.erase(no_eps.find("#epsilon"), no_eps.find('\n', no_eps.find("#epsilon")) - no_eps.find("#epsilon") + 1);
  EXPECT_THROW(parse_weight_archive(no_eps), ValidationError);
  std::string negative = good;
  negative.replace(negative.rfind("1\n"), 1, "-1");
  EXPECT_THROW(parse_weight_archive(negative), ValidationError);
  EXPECT_THROW(parse_weight_archive("#grid=1\n"), ValidationError);
  EXPECT_THROW(load_weight("/nonexistent/weight.csv"), NotFoundError);
}

TEST(Io, WeldingTableRoundTrips) {
  const auto w = build_omega(build_ftilde(FtildeSpec::from_indices(0.5, {1, 3}), desk_grid(5)), 1.0);
  const auto m = build_welding(w, 0.5);
  const auto back = parse_welding_csv(welding_csv_text(m));
  EXPECT_EQ(back.g_values, m.g_values);
  EXPECT_EQ(back.total_mass, m.total_mass);
  EXPECT_EQ(back.t, m.t);
}

TEST(Config, DefaultsAndOverrides) {
  const auto c = ExperimentConfig::from_json(Json::parse(R"({"epsilon":0.1,"t_values":[0.5]})"));
  EXPECT_EQ(c.epsilon, 0.1);
  EXPECT_EQ(c.terms, 2u);
  EXPECT_EQ(c.grid_exponent, 8u);
  EXPECT_EQ(c.archive_ts(), (std::vector<double>{0.5, 1.0}));
  EXPECT_EQ(ExperimentConfig::from_json(c.to_json()).to_json(), c.to_json());
}

TEST(Config, ErrorsNameTheField) {
  auto message = [](const std::string& text) -> std::string {
    try {
      ExperimentConfig::from_json(Json::parse(text)).validate();
    } catch (const ValidationError& e) {
      return e.what();
    }
    return "";
  };
  EXPECT_NE(message(R"({"epsilon":1.5})").find("config.epsilon"), std::string::npos);
  EXPECT_NE(message(R"({"epsilon":"big"})").find("config.epsilon"), std::string::npos);
  EXPECT_NE(message(R"({"terms":-1})").find("config.terms"), std::string::npos);
  EXPECT_NE(message(R"({"t_values":[2]})").find("config.t_values"), std::string::npos);
  EXPECT_NE(message(R"({"indices":[1,2,3]})").find("config.indices"), std::string::npos);
  EXPECT_NE(message(R"({"family":"dyadic"})").find("config.family"), std::string::npos);
  EXPECT_NE(message(R"({"grid_exponent":20})").find("config.grid_exponent"), std::string::npos);
  EXPECT_NE(message(R"({"colour":1})").find("'colour'"), std::string::npos);
  EXPECT_NE(message("[1]").find("object"), std::string::npos);
  EXPECT_THROW(ExperimentConfig::load("/nonexistent/config.json"), NotFoundError);
}

TEST(Pipeline, MissingArchiveAndUnresolvedSchedule) {
  auto c = small_config(scratch("missing"));
  EXPECT_THROW(cmd_diagnose(c), NotFoundError);
  EXPECT_THROW(cmd_curve(c), NotFoundError);
  std::ostringstream log;
  c.indices = {1, 6};  // P_6 needs G > 3^7
  EXPECT_THROW(cmd_build_weight(c, log), ValidationError);
  c.indices.clear();
  c.epsilon = 0.1;
  c.n_max = 8;  // the 4^n rule needs N_1 ~ 187 at this epsilon
  EXPECT_THROW(cmd_build_weight(c, log), NotFoundError);
}

TEST(Pipeline, RunsAreByteIdentical) {
  const auto a = small_config(scratch("det_a"));
  const auto b = small_config(scratch("det_b"));
  const auto files_a = run_all(a);
  const auto files_b = run_all(b);
  ASSERT_EQ(files_a.size(), files_b.size());
  for (std::size_t i = 0; i < files_a.size(); ++i) {
    EXPECT_EQ(files_a[i].filename(), files_b[i].filename());
    EXPECT_EQ(read_text(files_a[i]), read_text(files_b[i])) << files_a[i];
  }
}

TEST(Pipeline, DiagnosticsMatchSchema) {
  const auto c = small_config(scratch("schema"));
  std::ostringstream log;
  cmd_build_weight(c, log);
  const Json schema = Json::parse(read_text(fs::path(WEIGHTLAB_SOURCE_DIR) / "schema/diagnostics_report.schema.json"));
  for (const auto& path : cmd_diagnose(c)) check_schema(Json::parse(read_text(path)), schema, path.filename().string());
}

TEST(Pipeline, ZeroPowerWeldingIsIdentity) {
  const auto c = small_config(scratch("identity"));
  std::ostringstream log;
  cmd_build_weight(c, log);
  cmd_welding(c);
  const auto m = parse_welding_csv(read_text(welding_path(c.output_dir, 0.0)));
  for (std::size_t i = 0; i <= m.grid_size(); ++i) {
    EXPECT_NEAR(m.g_values[i], SampledFunction::node(i, m.grid_size()), 1e-13);
  }
  const Json j = Json::parse(read_text(fs::path(c.output_dir) / "welding.json"));
  EXPECT_EQ(j["maps"][0]["t"], 0.0);
  EXPECT_NEAR(j["maps"][0]["quasisymmetry_constant"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(j["maps"][0]["closure_gap"], 0.0);
}

TEST(Pipeline, UnitWeightReports) {
  auto c = small_config(scratch("unit"));
  c.grid_exponent = 7;
  const auto dir = fs::path(c.output_dir);
  for (double t : c.archive_ts()) save_weight(weight_path(dir, t), make_weight(SampledFunction::constant(c.grid(), 1.0), t));
  cmd_diagnose(c);
  cmd_curve(c);
  const Json d = Json::parse(read_text(diagnostics_path(dir, 1.0)));
  for (const auto& [k, v] : d["doubling_by_scale"].items()) EXPECT_EQ(v, 1.0) << k;
  for (const auto& [k, v] : d["ap_char"].items()) EXPECT_NEAR(v.get<double>(), 1.0, 1e-14) << k;
  EXPECT_EQ(d["a1_char"], 1.0);
  EXPECT_EQ(d["bmo_lognorm"], 0.0);
  const Json cj = Json::parse(read_text(dir / "curve.json"));
  EXPECT_NEAR(cj["chord_arc"].get<double>(), std::numbers::pi / 2, 1e-6);
  EXPECT_EQ(cj["length"], cj["l1_norm"]);
  EXPECT_EQ(cj["bloch"], 0.0);
  EXPECT_TRUE(cj["jensen_h1"]["jensen_holds"].get<bool>());
}

TEST(Report, CollatesRunsAndFlagsTrends) {
  std::vector<fs::path> runs;
  for (std::size_t k = 1; k <= 3; ++k) {
    auto c = small_config(scratch("report_k" + std::to_string(k)));
    c.terms = k;
    c.indices = std::vector<unsigned>{1, 2, 3};
    c.indices.resize(k);
    c.t_values = {1.0};
    run_all(c);
    runs.push_back(c.output_dir);
  }
  auto c = small_config(scratch("report_all"));
  cmd_report(c, runs);
  const Json s = Json::parse(read_text(fs::path(c.output_dir) / "summary.json"));
  ASSERT_EQ(s["rows"].size(), 3u);
  for (const auto& row : s["rows"]) {
    for (const char* col : {"doubling_max", "ap2", "rh_0.25", "a1", "bmo_log", "quasisymmetry", "chord_arc", "bloch"}) {
      EXPECT_TRUE(row.contains(col)) << col;
    }
  }
  ASSERT_EQ(s["trends"].size(), 1u);
  EXPECT_TRUE(s["trends"][0].contains("ap2_increasing_in_terms"));
  const std::string csv = read_text(fs::path(c.output_dir) / "summary.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_THROW(cmd_report(c, {"/nonexistent/run"}), NotFoundError);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WEIGHTLAB_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  const std::string out = "--out " + dir.string();
  EXPECT_EQ(run_cli("build-weight " + out + " --epsilon 1.5"), 2);
  EXPECT_EQ(run_cli("build-weight " + out + " --grid-exponent 4"), 2);  // literal indices need a finer grid
  EXPECT_EQ(run_cli("diagnose " + out), 3);
  EXPECT_EQ(run_cli("build-weight " + out + " --config /nonexistent.json"), 3);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("build-weight " + out + " --grid-exponent 5 --epsilon 0.5 --indices 1,3 --t 0.5"), 0);
  EXPECT_EQ(run_cli("diagnose " + out + " --grid-exponent 5 --epsilon 0.5 --t 0.5"), 0);
  EXPECT_TRUE(fs::exists(diagnostics_path(dir, 0.5)));
}

}  // namespace
}  // namespace weightlab
