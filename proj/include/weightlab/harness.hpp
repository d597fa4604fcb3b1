#pragma once

// Experiment pipeline behind the CLI: config -> weight archives -> reports.
// Every command is a function of the config and the files it reads, so two
// runs from one config write byte-identical outputs.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "weightlab/conformal.hpp"
#include "weightlab/diagnostics.hpp"
#include "weightlab/errors.hpp"
#include "weightlab/io.hpp"
#include "weightlab/riesz.hpp"
#include "weightlab/weight.hpp"
#include "weightlab/welding.hpp"

namespace weightlab {

struct ExperimentConfig {
  double epsilon = 0.9;
  std::size_t terms = 2;
  unsigned grid_exponent = 8;  // G = 2·3^m
  std::vector<double> t_values{1.0};
  std::vector<double> p_values{1.5, 2.0, 3.0};
  std::vector<double> delta_values{0.1, 0.25, 0.5};
  unsigned scales = 0;  // 0: every triadic scale the grid supports
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  // Extensions.
  std::vector<unsigned> indices;  // explicit N_1..N_K; empty = select by the 4^n rule
  unsigned n_max = 64;
  double threshold_base = 4.0;
  std::vector<double> radii{0.5, 0.9, 0.99};
  std::size_t pair_budget = std::size_t{1} << 22;
  std::size_t angles = 512;
  std::string family = "triadic";
  std::string convention = "rotated";

  std::size_t grid() const { return desk_grid(grid_exponent); }

  /// t_values plus t = 1 (the base weight), ascending and unique.
  std::vector<double> archive_ts() const {
    std::set<double> ts(t_values.begin(), t_values.end());
    ts.insert(1.0);
    return {ts.begin(), ts.end()};
  }

  void validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
      throw ValidationError("config." + field + " " + why);
    };
    if (!(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon", "must lie in (0,1), got " + format_double(epsilon));
    if (terms < 1) fail("terms", "must be >= 1");
    if (grid_exponent < 1 || grid_exponent > 12) {
      fail("grid_exponent", "must lie in [1,12], got " + std::to_string(grid_exponent));
    }
    if (t_values.empty()) fail("t_values", "must be non-empty");
    for (double t : t_values) {
      if (!(t >= 0.0 && t <= 1.0)) fail("t_values", "entries must lie in [0,1], got " + format_double(t));
    }
    for (double p : p_values) {
      if (!(p > 1.0)) fail("p_values", "entries must be > 1, got " + format_double(p));
    }
    for (double d : delta_values) {
      if (!(d > 0.0)) fail("delta_values", "entries must be > 0, got " + format_double(d));
    }
    if (scales > grid_exponent) fail("scales", "must not exceed grid_exponent");
    if (!indices.empty()) {
      if (indices.size() != terms) {
        fail("indices", "has " + std::to_string(indices.size()) + " entries but terms = " + std::to_string(terms));
      }
      for (unsigned v : indices) {
        if (v == 0) fail("indices", "entries must be >= 1");
      }
    }
    if (n_max < 1) fail("n_max", "must be >= 1");
    if (!(threshold_base > 1.0)) fail("threshold_base", "must be > 1");
    if (!std::is_sorted(radii.begin(), radii.end())) fail("radii", "must be ascending");
    for (double r : radii) {
      if (!(r >= 0.0 && r < 1.0)) fail("radii", "entries must lie in [0,1), got " + format_double(r));
    }
    if (pair_budget < 1) fail("pair_budget", "must be >= 1");
    if (angles < 1) fail("angles", "must be >= 1");
    if (family != "all" && family != "triadic") fail("family", "must be all|triadic, got '" + family + "'");
    if (convention != "rotated" && convention != "raw") {
      fail("convention", "must be rotated|raw, got '" + convention + "'");
    }
  }

  Json to_json() const {
    Json j;
    j["epsilon"] = epsilon;
    j["terms"] = terms;
    j["grid_exponent"] = grid_exponent;
    j["t_values"] = t_values;
    j["p_values"] = p_values;
    j["delta_values"] = delta_values;
    j["scales"] = scales;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["indices"] = indices;
    j["n_max"] = n_max;
    j["threshold_base"] = threshold_base;
    j["radii"] = radii;
    j["pair_budget"] = pair_budget;
    j["angles"] = angles;
    j["family"] = family;
    j["convention"] = convention;
    return j;
  }

  /// Keys absent from `j` keep their defaults; unknown keys are rejected.
  static ExperimentConfig from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("config: top level must be a JSON object");
    ExperimentConfig c;
    const Json defaults = c.to_json();
    for (const auto& [key, value] : j.items()) {
      if (!defaults.contains(key)) throw ValidationError("config: unknown key '" + key + "'");
      try {
        if (key == "epsilon") c.epsilon = value.get<double>();
        else if (key == "terms") c.terms = value.get<std::size_t>();
        else if (key == "grid_exponent") c.grid_exponent = value.get<unsigned>();
        else if (key == "t_values") c.t_values = value.get<std::vector<double>>();
        else if (key == "p_values") c.p_values = value.get<std::vector<double>>();
        else if (key == "delta_values") c.delta_values = value.get<std::vector<double>>();
        else if (key == "scales") c.scales = value.get<unsigned>();
        else if (key == "seed") c.seed = value.get<std::uint64_t>();
        else if (key == "output_dir") c.output_dir = value.get<std::string>();
        else if (key == "indices") c.indices = value.get<std::vector<unsigned>>();
        else if (key == "n_max") c.n_max = value.get<unsigned>();
        else if (key == "threshold_base") c.threshold_base = value.get<double>();
        else if (key == "radii") c.radii = value.get<std::vector<double>>();
        else if (key == "pair_budget") c.pair_budget = value.get<std::size_t>();
        else if (key == "angles") c.angles = value.get<std::size_t>();
        else if (key == "family") c.family = value.get<std::string>();
        else if (key == "convention") c.convention = value.get<std::string>();
      } catch (const nlohmann::json::exception&) {
        throw ValidationError("config." + key + " has the wrong type (expected " +
                              std::string(defaults[key].type_name()) + ")");
      }
      if (key == "terms" || key == "grid_exponent" || key == "scales" || key == "n_max" || key == "seed" ||
          key == "pair_budget" || key == "angles") {
        if (!value.is_number_unsigned()) throw ValidationError("config." + key + " must be a non-negative integer");
      }
    }
    return c;
  }

  static ExperimentConfig load(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    Json j;
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
  }
};

// ---------------------------------------------------------------- paths

inline std::filesystem::path weight_path(const std::filesystem::path& dir, double t) {
  return dir / ("weight_t" + format_double(t) + ".csv");
}
inline std::filesystem::path diagnostics_path(const std::filesystem::path& dir, double t) {
  return dir / ("diagnostics_t" + format_double(t) + ".json");
}
inline std::filesystem::path welding_path(const std::filesystem::path& dir, double t) {
  return dir / ("welding_t" + format_double(t) + ".csv");
}

inline WeightBundle load_archive(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw NotFoundError("missing weight archive '" + path.string() + "' (run build-weight first)");
  }
  return load_weight(path);
}

// ---------------------------------------------------------------- build-weight

struct SelectedSchedule {
  FtildeSpec spec;
  std::string selection;  // "explicit" or "literal"
};

inline SelectedSchedule resolve_schedule(const ExperimentConfig& cfg) {
  if (!cfg.indices.empty()) return {FtildeSpec::from_indices(cfg.epsilon, cfg.indices), "explicit"};
  try {
    return {select_ftilde_spec(cfg.epsilon, cfg.terms, cfg.n_max, cfg.threshold_base), "literal"};
  } catch (const NotFoundError& e) {
    throw NotFoundError(std::string(e.what()) + " (config keys: n_max, indices)");
  }
}

/// Table of selected indices: n, p_n, N_n, ‖P_{N_n}‖_{p_n}, base^n.
inline std::string selection_table(const FtildeSpec& spec, double base) {
  std::string s = "n\tp_n\tN_n\tnorm\tthreshold\n";
  for (std::size_t n = 1; n <= spec.terms(); ++n) {
    const double p = spec.p_exponents[n - 1];
    const unsigned idx = spec.selected_indices[n - 1];
    s += std::to_string(n) + "\t" + format_double(p) + "\t" + std::to_string(idx) + "\t" +
         format_double(riesz_lp_norm(spec.epsilon, idx, p)) + "\t" +
         format_double(std::pow(base, static_cast<double>(n))) + "\n";
  }
  return s;
}

inline std::vector<std::filesystem::path> cmd_build_weight(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto schedule = resolve_schedule(cfg);
  const std::size_t g = cfg.grid();
  if (schedule.spec.max_index() + 1 >= 40 || g <= pow3(schedule.spec.max_index() + 1)) {
    throw ValidationError("grid 2*3^" + std::to_string(cfg.grid_exponent) + " = " + std::to_string(g) +
                          " does not resolve P_" + std::to_string(schedule.spec.max_index()) + " (" +
                          schedule.selection + " indices " + join_indices(schedule.spec.selected_indices) +
                          "); raise grid_exponent or give explicit 'indices'");
  }
  log << selection_table(schedule.spec, cfg.threshold_base);
  const SampledFunction f = build_ftilde(schedule.spec, g);
  Provenance prov;
  prov.epsilon = cfg.epsilon;
  prov.terms = schedule.spec.terms();
  prov.selected_indices = schedule.spec.selected_indices;
  prov.selection = schedule.selection;
  std::vector<std::filesystem::path> written;
  for (double t : cfg.archive_ts()) {
    const auto path = weight_path(cfg.output_dir, t);
    save_weight(path, build_omega(f, t, prov));
    written.push_back(path);
  }
  return written;
}

// ---------------------------------------------------------------- diagnose

inline DiagnosticsOptions diagnostics_options(const ExperimentConfig& cfg) {
  DiagnosticsOptions o;
  o.max_scale = cfg.scales == 0 ? cfg.grid_exponent : cfg.scales;
  o.p_values = cfg.p_values;
  o.delta_values = cfg.delta_values;
  o.family = IntervalFamily::parse(cfg.family);
  return o;
}

inline std::vector<std::filesystem::path> cmd_diagnose(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::filesystem::path> written;
  for (double t : cfg.archive_ts()) {
    const WeightBundle w = load_archive(weight_path(cfg.output_dir, t));
    DiagnosticsOptions o = diagnostics_options(cfg);
    o.max_scale = std::min<unsigned>(o.max_scale, triadic_valuation(w.grid_size()));
    const auto path = diagnostics_path(cfg.output_dir, t);
    write_text(path, dump_json(diagnostics_json(run_diagnostics(w, o))));
    written.push_back(path);
  }
  return written;
}

// ---------------------------------------------------------------- welding

inline std::vector<std::filesystem::path> cmd_welding(const ExperimentConfig& cfg) {
  cfg.validate();
  const WeightBundle base = load_archive(weight_path(cfg.output_dir, 1.0));
  const unsigned scales = std::min<unsigned>(cfg.scales == 0 ? cfg.grid_exponent : cfg.scales,
                                             triadic_valuation(base.grid_size()));
  const IntervalFamily family = IntervalFamily::parse(cfg.family);
  const double bmo_log = bmo_norm(base.omega.map([](double v) { return std::log(v); }), family);
  Json report;
  report["kind"] = "welding";
  report["provenance"] = provenance_json(base.provenance);
  report["family"] = family.name();
  report["bmo_log_omega"] = bmo_log;
  Json maps = Json::array();
  std::vector<std::filesystem::path> written;
  for (double t : cfg.t_values) {
    const WeldingMap m = build_welding(base, t);
    const auto path = welding_path(cfg.output_dir, t);
    write_text(path, welding_csv_text(m));
    written.push_back(path);
    const auto [re, im] = log_derivative_parts(m, base);
    const auto qs = quasisymmetry_by_scale(m, scales);
    double qmax = 1.0;
    for (const auto& [k, v] : qs) qmax = std::max(qmax, v);
    Json row;
    row["t"] = t;
    row["total_mass"] = m.total_mass;
    row["quasisymmetry_by_scale"] = json_map(qs);
    row["quasisymmetry_constant"] = qmax;
    row["quasisymmetry_bound"] = doubling_bound(base.provenance.epsilon, t);
    row["bmo_log_derivative"] = bmo_norm(re, family);
    row["t_times_bmo_log_omega"] = t * bmo_log;
    row["closure_gap"] = m.g_values.back() - kTwoPi;
    maps.push_back(row);
  }
  report["maps"] = maps;
  const auto path = std::filesystem::path(cfg.output_dir) / "welding.json";
  write_text(path, dump_json(report));
  written.push_back(path);
  return written;
}

// ---------------------------------------------------------------- curve

inline std::vector<std::filesystem::path> cmd_curve(const ExperimentConfig& cfg) {
  cfg.validate();
  const WeightBundle w = load_archive(weight_path(cfg.output_dir, 1.0));
  const std::filesystem::path dir = cfg.output_dir;
  const SampledFunction log_w = w.omega.map([](double v) { return std::log(v); });
  const CurveTrace c = trace_curve(w, parse_convention(cfg.convention));
  const SampledFunction b = conjugate_function(log_w);
  std::vector<double> radii = cfg.radii;
  radii.push_back(bloch_radius_limit(w.grid_size()));
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  const auto jensen = jensen_h1_probe(w, radii);
  const IntervalFamily family = IntervalFamily::parse(cfg.family);

  Json report;
  report["kind"] = "curve";
  report["provenance"] = provenance_json(w.provenance);
  report["convention"] = cfg.convention;
  report["length"] = c.length();
  report["l1_norm"] = lp_norm(w.omega, 1.0);
  report["closure_defect"] = c.closure_defect;
  report["closure_defect_relative"] = c.closure_defect / c.length();
  report["chord_arc"] = json_number(chord_arc_scan(c, cfg.pair_budget, cfg.seed));
  report["bloch"] = bloch_norm_probe(w, radii, cfg.angles);
  report["bmo_beta"] = bmo_norm(arclength_reparam(c, b), family);
  Json j;
  j["radii"] = jensen.radii;
  j["min_gap"] = jensen.min_gap;
  j["h1_means"] = jensen.h1_means;
  j["jensen_holds"] = jensen.jensen_holds;
  j["means_nondecreasing"] = jensen.means_nondecreasing;
  j["means_bounded"] = jensen.means_bounded;
  report["jensen_h1"] = j;

  std::vector<std::filesystem::path> written{dir / "curve.csv", dir / "fourier.csv", dir / "curve.json"};
  write_text(written[0], curve_csv_text(c));
  write_text(written[1], fourier_csv_text(fourier_series(log_w)));
  write_text(written[2], dump_json(report));
  return written;
}

// ---------------------------------------------------------------- report

namespace detail {

inline Json lookup(const Json& j, const std::string& key) { return j.contains(key) ? j.at(key) : Json(); }

inline Json row_key(const Json& prov, double t) {
  Json k;
  k["epsilon"] = prov.at("epsilon");
  k["terms"] = prov.at("terms");
  k["grid"] = prov.at("grid");
  k["t"] = t;
  return k;
}

}  // namespace detail

/// Collates the JSON reports of each run directory into one table keyed by
/// (epsilon, terms, grid, t), plus trend flags across terms at fixed
/// (epsilon, grid, t).
inline std::vector<std::filesystem::path> cmd_report(const ExperimentConfig& cfg,
                                                     std::vector<std::filesystem::path> runs) {
  if (runs.empty()) runs.push_back(cfg.output_dir);
  std::map<std::string, Json> rows;  // keyed by the dumped row key, so ordering is deterministic
  for (const auto& dir : runs) {
    if (!std::filesystem::is_directory(dir)) throw NotFoundError("missing run directory '" + dir.string() + "'");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      if (e.path().extension() == ".json" && e.path().filename() != "summary.json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      const Json j = Json::parse(read_text(file));
      const std::string kind = j.value("kind", "");
      if (kind == "diagnostics") {
        const Json& prov = j.at("provenance");
        const Json key = detail::row_key(prov, prov.at("t").get<double>());
        Json& row = rows[key.dump()];
        row["key"] = key;
        double dmax = 1.0;
        for (const auto& [k, v] : j.at("doubling_by_scale").items()) {
          dmax = v.is_number() ? std::max(dmax, v.get<double>()) : kInfinity;
        }
        row["doubling_max"] = json_number(dmax);
        row["ap2"] = detail::lookup(j.at("ap_char"), "2");
        row["rh_0.25"] = detail::lookup(j.at("rh_probe"), "0.25");
        row["a1"] = j.at("a1_char");
        row["bmo_log"] = j.at("bmo_lognorm");
      } else if (kind == "curve") {
        const Json& prov = j.at("provenance");
        const Json key = detail::row_key(prov, 1.0);
        Json& row = rows[key.dump()];
        row["key"] = key;
        row["chord_arc"] = j.at("chord_arc");
        row["bloch"] = j.at("bloch");
      } else if (kind == "welding") {
        const Json& prov = j.at("provenance");
        for (const auto& m : j.at("maps")) {
          const Json key = detail::row_key(prov, m.at("t").get<double>());
          Json& row = rows[key.dump()];
          row["key"] = key;
          row["quasisymmetry"] = m.at("quasisymmetry_constant");
        }
      }
    }
  }

  // Trends across terms at fixed (epsilon, grid, t).
  std::map<std::string, std::vector<Json>> groups;
  for (const auto& [k, row] : rows) {
    const Json& key = row.at("key");
    Json g = key;
    g.erase("terms");
    groups[g.dump()].push_back(row);
  }
  Json trends = Json::array();
  for (auto& [g, members] : groups) {
    std::sort(members.begin(), members.end(), [](const Json& a, const Json& b) {
      return a.at("key").at("terms").get<std::size_t>() < b.at("key").at("terms").get<std::size_t>();
    });
    if (members.size() < 2) continue;
    Json t;
    t["group"] = Json::parse(g);
    for (const char* column : {"ap2", "rh_0.25", "chord_arc"}) {
      bool present = true, increasing = true;
      for (std::size_t i = 0; i < members.size(); ++i) {
        const Json v = detail::lookup(members[i], column);
        if (!v.is_number()) {
          present = false;
          break;
        }
        if (i > 0 && !(v.get<double>() > members[i - 1].at(column).get<double>())) increasing = false;
      }
      if (present) t[std::string(column) + "_increasing_in_terms"] = increasing;
    }
    trends.push_back(t);
  }

  Json summary;
  summary["kind"] = "summary";
  Json table = Json::array();
  for (const auto& [k, row] : rows) table.push_back(row);
  summary["rows"] = table;
  summary["trends"] = trends;

  const std::vector<std::string> columns{"doubling_max", "ap2", "rh_0.25", "a1", "bmo_log", "quasisymmetry",
                                         "chord_arc", "bloch"};
  std::string csv = "epsilon,terms,grid,t";
  for (const auto& c : columns) csv += "," + c;
  csv += "\n";
  auto cell = [](const Json& v) -> std::string {
    if (v.is_number()) return format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return "";
  };
  for (const auto& [k, row] : rows) {
    const Json& key = row.at("key");
    csv += cell(key.at("epsilon")) + "," + std::to_string(key.at("terms").get<std::size_t>()) + "," +
           std::to_string(key.at("grid").get<std::size_t>()) + "," + cell(key.at("t"));
    for (const auto& c : columns) csv += "," + cell(detail::lookup(row, c));
    csv += "\n";
  }
  const std::filesystem::path dir = cfg.output_dir;
  std::vector<std::filesystem::path> written{dir / "summary.json", dir / "summary.csv"};
  write_text(written[0], dump_json(summary));
  write_text(written[1], csv);
  return written;
}

}  // namespace weightlab
