// weightlab: build the counterexample weight and run its diagnostics.
//
//   weightlab build-weight --config run.json
//   weightlab diagnose     --config run.json
//   weightlab welding      --config run.json --t 0.25,0.5,1
//   weightlab curve        --config run.json
//   weightlab report       --out summary run_k1 run_k2 run_k3
//
// Precedence: built-in defaults < --config file < command-line flags.
// Failures print one line `error: <kind>: <message>` to stderr and exit with
// 2 (validation), 3 (not found) or 4 (numeric).

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "weightlab/harness.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<unsigned> grid_exponent;
  std::optional<double> epsilon;
  std::optional<std::size_t> terms;
  std::optional<std::vector<double>> t;
  std::optional<std::vector<unsigned>> indices;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON experiment config");
  cmd->add_option("--out", o.out, "output directory (config key output_dir)");
  cmd->add_option("--grid-exponent", o.grid_exponent, "m in G = 2*3^m");
  cmd->add_option("--epsilon", o.epsilon, "Riesz product parameter in (0,1)");
  cmd->add_option("--terms", o.terms, "number of terms K in f~");
  cmd->add_option("--t", o.t, "comma-separated powers t in [0,1]")->delimiter(',');
  cmd->add_option("--indices", o.indices, "explicit comma-separated N_1..N_K")->delimiter(',');
  cmd->add_option("--seed", o.seed, "seed of the chord-arc pair schedule");
}

weightlab::ExperimentConfig resolve(const Overrides& o) {
  weightlab::ExperimentConfig c;
  if (!o.config.empty()) c = weightlab::ExperimentConfig::load(o.config);
  if (o.out) c.output_dir = *o.out;
  if (o.grid_exponent) c.grid_exponent = *o.grid_exponent;
  if (o.epsilon) c.epsilon = *o.epsilon;
  if (o.terms) c.terms = *o.terms;
  if (o.t) c.t_values = *o.t;
  if (o.indices) c.indices = *o.indices;
  if (o.seed) c.seed = *o.seed;
  c.validate();
  return c;
}

std::string one_line(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

int fail(weightlab::ErrorCode code, const std::string& message) {
  std::cerr << "error: " << weightlab::error_code_name(code) << ": " << one_line(message) << "\n";
  return static_cast<int>(code);
}

void list(const std::vector<std::filesystem::path>& paths) {
  for (const auto& p : paths) std::cout << "wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for a doubling weight with log in BMO that is not A-infinity"};
  app.require_subcommand(1);
  Overrides o;
  std::vector<std::string> runs;

  auto* build = app.add_subcommand("build-weight", "select indices, build f~ and write weight archives");
  auto* diagnose = app.add_subcommand("diagnose", "doubling, A_p, A_1, BMO and reverse Hoelder report per archive");
  auto* welding = app.add_subcommand("welding", "welding maps h_t and their quasisymmetry tables");
  auto* curve = app.add_subcommand("curve", "boundary curve, chord-arc, Bloch and Jensen/H1 probes");
  auto* report = app.add_subcommand("report", "collate JSON reports of run directories into one summary");
  for (auto* cmd : {build, diagnose, welding, curve, report}) add_common(cmd, o);
  report->add_option("runs", runs, "run directories (default: the output directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(weightlab::ErrorCode::validation, e.what());
  }

  try {
    const weightlab::ExperimentConfig cfg = resolve(o);
    if (build->parsed()) {
      list(weightlab::cmd_build_weight(cfg, std::cout));
    } else if (diagnose->parsed()) {
      list(weightlab::cmd_diagnose(cfg));
    } else if (welding->parsed()) {
      list(weightlab::cmd_welding(cfg));
    } else if (curve->parsed()) {
      list(weightlab::cmd_curve(cfg));
    } else if (report->parsed()) {
      list(weightlab::cmd_report(cfg, {runs.begin(), runs.end()}));
    }
  } catch (const weightlab::Error& e) {
    return fail(e.code(), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(weightlab::ErrorCode::validation, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(weightlab::ErrorCode::not_found, e.what());
  } catch (const std::exception& e) {
    return fail(weightlab::ErrorCode::numeric, e.what());
  }
  return 0;
}
