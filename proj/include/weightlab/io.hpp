#pragma once

// Plain-text artifacts: CSV archives with `#key=value` headers and JSON
// reports. Every double is written in shortest round-trip form, so
// load(save(x)) == x bit for bit and identical inputs give identical bytes.

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "weightlab/conformal.hpp"
#include "weightlab/diagnostics.hpp"
#include "weightlab/errors.hpp"
#include "weightlab/weight.hpp"
#include "weightlab/welding.hpp"

namespace weightlab {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& what) {
  if (s == "inf") return kInfinity;
  if (s == "-inf") return -kInfinity;
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw ValidationError(what + ": cannot parse '" + s + "' as a number");
  return v;
}

inline unsigned long parse_unsigned(const std::string& s, const std::string& what) {
  unsigned long v = 0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw ValidationError(what + ": cannot parse '" + s + "' as an integer");
  return v;
}

inline std::string join_indices(const std::vector<unsigned>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

/// JSON number, or the string "inf" for values JSON cannot carry.
inline Json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

template <class K>
Json json_map(const std::map<K, double>& m) {
  Json out = Json::object();
  for (const auto& [k, v] : m) {
    if constexpr (std::is_floating_point_v<K>) {
      out[format_double(k)] = json_number(v);
    } else {
      out[std::to_string(k)] = json_number(v);
    }
  }
  return out;
}

// ---------------------------------------------------------------- files

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw NumericError("write failed for '" + path.string() + "'");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

struct CsvDocument {
  std::map<std::string, std::string> header;
  std::vector<std::vector<std::string>> rows;  // data rows after the column line
  std::string columns;
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline CsvDocument parse_csv(const std::string& text, const std::string& where) {
  CsvDocument doc;
  std::istringstream in(text);
  std::string line;
  bool have_columns = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) doc.header[line.substr(1, eq - 1)] = line.substr(eq + 1);
      continue;
    }
    if (!have_columns) {
      doc.columns = line;
      have_columns = true;
      continue;
    }
    doc.rows.push_back(split(line, ','));
  }
  if (!have_columns) throw ValidationError(where + ": missing column line");
  return doc;
}

inline const std::string& require_key(const CsvDocument& doc, const std::string& key, const std::string& where) {
  const auto it = doc.header.find(key);
  if (it == doc.header.end()) throw ValidationError(where + ": header lacks '" + key + "'");
  return it->second;
}

}  // namespace detail

// ---------------------------------------------------------------- weight archive

inline std::string weight_archive_text(const WeightBundle& w) {
  w.validate();
  std::string s = "#format=weightlab-weight-v1\n";
  s += "#grid=" + std::to_string(w.grid_size()) + "\n";
  s += "#epsilon=" + format_double(w.provenance.epsilon) + "\n";
  s += "#terms=" + std::to_string(w.provenance.terms) + "\n";
  s += "#indices=" + join_indices(w.provenance.selected_indices) + "\n";
  s += "#t=" + format_double(w.t) + "\n";
  s += "#selection=" + w.provenance.selection + "\n";
  s += "#measure=" + w.provenance.measure + "\n";
  s += "omega\n";
  for (double v : w.omega.values()) s += format_double(v) + "\n";
  return s;
}

inline WeightBundle parse_weight_archive(const std::string& text, const std::string& where = "weight archive") {
  const auto doc = detail::parse_csv(text, where);
  if (doc.columns != "omega") throw ValidationError(where + ": expected column 'omega'");
  WeightBundle w;
  auto& p = w.provenance;
  p.grid = parse_unsigned(detail::require_key(doc, "grid", where), where + " grid");
  p.epsilon = parse_double(detail::require_key(doc, "epsilon", where), where + " epsilon");
  p.terms = parse_unsigned(detail::require_key(doc, "terms", where), where + " terms");
  const std::string& idx = detail::require_key(doc, "indices", where);
  if (!idx.empty()) {
    for (const auto& part : detail::split(idx, ',')) {
      p.selected_indices.push_back(static_cast<unsigned>(parse_unsigned(part, where + " indices")));
    }
  }
  w.t = parse_double(detail::require_key(doc, "t", where), where + " t");
  p.t = w.t;
  p.selection = detail::require_key(doc, "selection", where);
  p.measure = detail::require_key(doc, "measure", where);
  std::vector<double> values;
  values.reserve(doc.rows.size());
  for (const auto& row : doc.rows) {
    if (row.size() != 1) throw ValidationError(where + ": expected one value per line");
    values.push_back(parse_double(row[0], where + " sample"));
  }
  if (values.size() != p.grid) {
    throw ValidationError(where + ": header grid " + std::to_string(p.grid) + " but " + std::to_string(values.size()) +
                          " samples");
  }
  w.omega = SampledFunction(std::move(values));
  w.validate();
  return w;
}

inline void save_weight(const std::filesystem::path& path, const WeightBundle& w) {
  write_text(path, weight_archive_text(w));
}

inline WeightBundle load_weight(const std::filesystem::path& path) {
  return parse_weight_archive(read_text(path), path.string());
}

// ---------------------------------------------------------------- other tables

inline std::string welding_csv_text(const WeldingMap& m) {
  std::string s = "#format=weightlab-welding-v1\n";
  s += "#t=" + format_double(m.t) + "\n";
  s += "#total_mass=" + format_double(m.total_mass) + "\n";
  s += "x,g\n";
  for (std::size_t i = 0; i <= m.grid_size(); ++i) {
    s += format_double(SampledFunction::node(i, m.grid_size())) + "," + format_double(m.g_values[i]) + "\n";
  }
  return s;
}

inline WeldingMap parse_welding_csv(const std::string& text, const std::string& where = "welding table") {
  const auto doc = detail::parse_csv(text, where);
  WeldingMap m;
  m.t = parse_double(detail::require_key(doc, "t", where), where + " t");
  m.total_mass = parse_double(detail::require_key(doc, "total_mass", where), where + " total_mass");
  for (const auto& row : doc.rows) {
    if (row.size() != 2) throw ValidationError(where + ": expected rows x,g");
    m.g_values.push_back(parse_double(row[1], where + " g"));
  }
  return m;
}

inline std::string curve_csv_text(const CurveTrace& c) {
  std::string s = "#format=weightlab-curve-v1\n";
  s += std::string("#closed=") + (c.closed ? "true" : "false") + "\n";
  s += "#closure_defect=" + format_double(c.closure_defect) + "\n";
  s += "x,re,im,s\n";
  for (std::size_t i = 0; i <= c.size(); ++i) {
    s += format_double(SampledFunction::node(i, c.size())) + "," + format_double(c.points[i].real()) + "," +
         format_double(c.points[i].imag()) + "," + format_double(c.cumulative_length[i]) + "\n";
  }
  return s;
}

inline std::string fourier_csv_text(const FourierSeries& f) {
  std::string s = "#format=weightlab-fourier-v1\n";
  s += "#grid=" + std::to_string(f.grid) + "\n";
  s += "k,re,im\n";
  for (long k = f.min_k(); k <= f.max_k(); ++k) {
    const Complex c = f.at(k);
    s += std::to_string(k) + "," + format_double(c.real()) + "," + format_double(c.imag()) + "\n";
  }
  return s;
}

// ---------------------------------------------------------------- JSON

inline Json provenance_json(const Provenance& p) {
  Json j;
  j["epsilon"] = p.epsilon;
  j["terms"] = p.terms;
  j["indices"] = p.selected_indices;
  j["grid"] = p.grid;
  j["t"] = p.t;
  j["selection"] = p.selection;
  j["measure"] = p.measure;
  return j;
}

/// Layout is documented in schema/diagnostics_report.schema.json.
inline Json diagnostics_json(const DiagnosticsReport& r) {
  Json j;
  j["kind"] = "diagnostics";
  j["provenance"] = provenance_json(r.provenance);
  j["family"] = r.family;
  j["measure"] = "dx";
  j["doubling_by_scale"] = json_map(r.doubling_by_scale);
  j["doubling_bound"] = json_number(r.doubling_bound);
  j["ap_char"] = json_map(r.ap_char);
  j["a1_char"] = json_number(r.a1_char);
  j["bmo_lognorm"] = json_number(r.bmo_lognorm);
  j["rh_probe"] = json_map(r.rh_probe);
  j["norm_table"] = json_map(r.norm_table);
  return j;
}

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace weightlab
