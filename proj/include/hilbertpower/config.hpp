#pragma once

// Run configuration: JSON tables with unit-suffixed keys. Unknown keys are
// rejected. `to_json` writes the fully resolved form, which reads back to
// the same configuration.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hilbertpower/analytic.hpp"
#include "hilbertpower/circuit.hpp"
#include "hilbertpower/pipeline.hpp"
#include "hilbertpower/presets.hpp"
#include "hilbertpower/signals.hpp"
#include "hilbertpower/spectral.hpp"

namespace hilbertpower::config {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputConfig {
  std::string name = "run";
  std::string dir = ".";
  bool series = true;
  bool summary = true;
  bool filter_response = false;
};

struct RunConfig {
  signals::ScenarioSpec scenario;
  pipeline::CircuitConfig circuit;
  spectral::FtConfig ft;
  pipeline::HtConfig ht;
  OutputConfig output;
};

static_assert(std::is_same_v<std::size_t, std::uint64_t>, "size_t config fields are read as uint64");

namespace detail {

// Reads keys from one JSON object and rejects the ones nobody asked for.
class Table {
 public:
  Table(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json* raw(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const std::string& key, double& out) {
    if (const json* v = raw(key)) {
      if (!v->is_number()) throw ConfigError(where(key) + ": expected a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (const json* v = raw(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(where(key) + ": expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void get(const std::string& key, int& out) {
    if (const json* v = raw(key)) {
      if (!v->is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
      out = v->get<int>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const json* v = raw(key)) {
      if (!v->is_string()) throw ConfigError(where(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  void get(const std::string& key, bool& out) {
    if (const json* v = raw(key)) {
      if (!v->is_boolean()) throw ConfigError(where(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }

  std::optional<Table> sub(const std::string& key) {
    if (const json* v = raw(key)) return Table(*v, where(key));
    return std::nullopt;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline std::optional<double> parse_snr(const json& v, const std::string& where) {
  if (v.is_null()) return std::nullopt;
  if (v.is_string() && v.get<std::string>() == "off") return std::nullopt;
  if (v.is_number()) return v.get<double>();
  throw ConfigError(where + ": expected a number or \"off\"");
}

inline signals::SegmentSpec read_segment(Table t) {
  signals::SegmentSpec s;
  std::string kind;
  t.get("kind", kind);
  if (kind.empty()) throw ConfigError(t.where("kind") + ": required");
  auto k = signals::segment_kind_from_string(kind);
  if (!k) throw ConfigError(t.where("kind") + ": unknown segment kind '" + kind + "'");
  s.kind = *k;
  t.get("t_start_s", s.t_start_s);
  t.get("t_end_s", s.t_end_s);
  t.get("ka", s.ka);
  t.get("fa_hz", s.fa_hz);
  t.get("ramp_rate_hz_per_s", s.ramp_rate_hz_per_s);
  t.get("ks", s.ks);
  t.get("t_step_s", s.t_step_s);
  t.finish();
  return s;
}

inline void read_scenario(Table t, signals::ScenarioSpec& s) {
  std::string preset;
  t.get("preset", preset);
  if (!preset.empty()) {
    auto p = signals::preset(preset);
    if (!p) throw ConfigError(t.where("preset") + ": unknown preset '" + preset + "'");
    s = *p;
  }
  t.get("f0_hz", s.f0_hz);
  t.get("a0_v", s.a0);
  t.get("phi0_rad", s.phi0_rad);
  t.get("duration_s", s.duration_s);
  t.get("rate_hz", s.rate_hz);
  t.get("seed", s.seed);
  if (const json* v = t.raw("snr_db")) s.snr_db = parse_snr(*v, t.where("snr_db"));
  if (const json* v = t.raw("segments")) {
    if (!v->is_array()) throw ConfigError(t.where("segments") + ": expected an array");
    s.segments.clear();
    for (std::size_t i = 0; i < v->size(); ++i)
      s.segments.push_back(read_segment(Table((*v)[i], t.where("segments") + "[" + std::to_string(i) + "]")));
  }
  t.finish();
}

inline void read_circuit(Table t, pipeline::CircuitConfig& c) {
  std::string mode;
  t.get("mode", mode);
  if (mode == "two_bus") c.mode = pipeline::CircuitMode::two_bus;
  else if (mode == "bypass") c.mode = pipeline::CircuitMode::bypass;
  else if (!mode.empty()) throw ConfigError(t.where("mode") + ": expected \"two_bus\" or \"bypass\"");
  std::string init;
  t.get("initialization", init);
  if (init == "steady_state") c.init = pipeline::Initialization::steady_state;
  else if (init == "zero") c.init = pipeline::Initialization::zero;
  else if (!init.empty()) throw ConfigError(t.where("initialization") + ": expected \"steady_state\" or \"zero\"");
  t.get("warmup_s", c.warmup_s);
  if (auto l = t.sub("line")) {
    l->get("r_ohm_per_m", c.line.r_ohm_per_m);
    l->get("x_ohm_per_m", c.line.x_ohm_per_m);
    l->get("c_f_per_m", c.line.c_f_per_m);
    l->get("length_m", c.line.length_m);
    l->get("f_nom_hz", c.line.f_nom_hz);
    l->finish();
  }
  if (auto l = t.sub("load")) {
    l->get("p_w", c.load.p_w);
    l->get("pf", c.load.pf);
    l->get("v_ll_rms_v", c.load.v_ll_rms_v);
    l->get("f_nom_hz", c.load.f_nom_hz);
    l->finish();
  }
  t.finish();
}

inline void read_ft(Table t, spectral::FtConfig& f) {
  t.get("window_s", f.window_s);
  t.get("stride_samples", f.stride_samples);
  t.get("search_lo_hz", f.search_lo_hz);
  t.get("search_hi_hz", f.search_hi_hz);
  std::string method;
  t.get("method", method);
  if (method == "compensated") f.method = spectral::IpdftMethod::compensated;
  else if (method == "two_point") f.method = spectral::IpdftMethod::two_point;
  else if (!method.empty()) throw ConfigError(t.where("method") + ": expected \"compensated\" or \"two_point\"");
  t.get("refine_iterations", f.refine_iterations);
  t.finish();
}

inline void read_ht(Table t, pipeline::HtConfig& h) {
  t.get("order", h.order);
  t.get("passband_lo_hz", h.passband_lo_hz);
  t.get("passband_hi_hz", h.passband_hi_hz);
  t.get("transition_hz", h.transition_hz);
  t.get("stop_target_db", h.stop_target_db);
  t.finish();
}

inline void read_output(Table t, OutputConfig& o) {
  t.get("name", o.name);
  t.get("dir", o.dir);
  if (const json* v = t.raw("emit")) {
    if (!v->is_array()) throw ConfigError(t.where("emit") + ": expected an array of strings");
    o.series = o.summary = o.filter_response = false;
    for (const auto& e : *v) {
      const std::string s = e.is_string() ? e.get<std::string>() : "";
      if (s == "series") o.series = true;
      else if (s == "summary") o.summary = true;
      else if (s == "filter_response") o.filter_response = true;
      else throw ConfigError(t.where("emit") + ": unknown item " + e.dump());
    }
  }
  t.finish();
}

}  // namespace detail

/// Applies `emit` items (series, summary, filter_response); throws on unknown.
inline void set_emit(OutputConfig& o, const std::vector<std::string>& items) {
  json arr = json::array();
  for (const auto& s : items) arr.push_back(s);
  json j = {{"emit", arr}};
  detail::read_output(detail::Table(j, "emit"), o);
}

/// Rejects parameter values the pipeline cannot run with.
inline void check(const RunConfig& c) {
  try {
    signals::validate(c.scenario);
    if (c.scenario.snr_db) require(!std::isnan(*c.scenario.snr_db), "snr_db must not be NaN");
    spectral::window_samples(c.ft, c.scenario.rate_hz);
    require(c.ft.search_lo_hz < c.ft.search_hi_hz, "ft search band must satisfy lo < hi");
    pipeline::HtConfig ht = c.ht;
    ht.rate_hz = c.scenario.rate_hz;
    analytic::design_analytic_filter(ht);
    if (c.circuit.mode == pipeline::CircuitMode::two_bus) {
      circuit::build_network(c.circuit.line, c.circuit.load);
      require(c.circuit.warmup_s >= 0.0, "warmup_s must be non-negative");
    } else {
      circuit::derive_load(c.circuit.load);
    }
    require(!c.output.name.empty(), "output name must not be empty");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline RunConfig from_json(const json& j) {
  RunConfig c;
  detail::Table root(j, "");
  if (auto t = root.sub("scenario")) detail::read_scenario(std::move(*t), c.scenario);
  else throw ConfigError("scenario: required");
  if (auto t = root.sub("circuit")) detail::read_circuit(std::move(*t), c.circuit);
  if (auto t = root.sub("ft")) detail::read_ft(std::move(*t), c.ft);
  if (auto t = root.sub("ht")) detail::read_ht(std::move(*t), c.ht);
  if (auto t = root.sub("output")) detail::read_output(std::move(*t), c.output);
  root.finish();
  return c;
}

inline json to_json(const RunConfig& c) {
  const auto& s = c.scenario;
  json segs = json::array();
  for (const auto& g : s.segments) {
    json x = {{"kind", signals::to_string(g.kind)}, {"t_start_s", g.t_start_s}, {"t_end_s", g.t_end_s}};
    switch (g.kind) {
      case signals::SegmentKind::amplitude_modulation: x["ka"] = g.ka; x["fa_hz"] = g.fa_hz; break;
      case signals::SegmentKind::frequency_ramp: x["ramp_rate_hz_per_s"] = g.ramp_rate_hz_per_s; break;
      case signals::SegmentKind::amplitude_step: x["ks"] = g.ks; x["t_step_s"] = g.t_step_s; break;
      case signals::SegmentKind::steady: break;
    }
    segs.push_back(x);
  }
  json snr = signals::noise_enabled(s) ? json(*s.snr_db) : json("off");
  json emit = json::array();
  if (c.output.series) emit.push_back("series");
  if (c.output.summary) emit.push_back("summary");
  if (c.output.filter_response) emit.push_back("filter_response");
  const auto& cc = c.circuit;
  return json{
      {"scenario",
       {{"f0_hz", s.f0_hz}, {"a0_v", s.a0}, {"phi0_rad", s.phi0_rad}, {"duration_s", s.duration_s},
        {"rate_hz", s.rate_hz}, {"snr_db", snr}, {"seed", s.seed}, {"segments", segs}}},
      {"circuit",
       {{"mode", cc.mode == pipeline::CircuitMode::bypass ? "bypass" : "two_bus"},
        {"initialization", cc.init == pipeline::Initialization::zero ? "zero" : "steady_state"},
        {"warmup_s", cc.warmup_s},
        {"line",
         {{"r_ohm_per_m", cc.line.r_ohm_per_m}, {"x_ohm_per_m", cc.line.x_ohm_per_m},
          {"c_f_per_m", cc.line.c_f_per_m}, {"length_m", cc.line.length_m}, {"f_nom_hz", cc.line.f_nom_hz}}},
        {"load",
         {{"p_w", cc.load.p_w}, {"pf", cc.load.pf}, {"v_ll_rms_v", cc.load.v_ll_rms_v},
          {"f_nom_hz", cc.load.f_nom_hz}}}}},
      {"ft",
       {{"window_s", c.ft.window_s}, {"stride_samples", c.ft.stride_samples},
        {"search_lo_hz", c.ft.search_lo_hz}, {"search_hi_hz", c.ft.search_hi_hz},
        {"method", c.ft.method == spectral::IpdftMethod::two_point ? "two_point" : "compensated"},
        {"refine_iterations", c.ft.refine_iterations}}},
      {"ht",
       {{"order", c.ht.order}, {"passband_lo_hz", c.ht.passband_lo_hz}, {"passband_hi_hz", c.ht.passband_hi_hz},
        {"transition_hz", c.ht.transition_hz}, {"stop_target_db", c.ht.stop_target_db}}},
      {"output", {{"name", c.output.name}, {"dir", c.output.dir}, {"emit", emit}}},
  };
}

inline constexpr std::size_t kPresetStride = 10;

inline RunConfig preset_config(const std::string& name) {
  auto p = signals::preset(name);
  if (!p) throw ConfigError("unknown preset '" + name + "'");
  RunConfig c;
  c.scenario = *p;
  c.ft.stride_samples = kPresetStride;
  c.output.name = name;
  return c;
}

/// One configuration (object) or several (array). Output names default to
/// the file stem, suffixed by the index for arrays.
inline std::vector<RunConfig> load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  auto one = [&](const json& x, const std::string& fallback) {
    RunConfig c;
    try {
      c = from_json(x);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    const bool named = x.contains("output") && x["output"].is_object() && x["output"].contains("name");
    if (!named) c.output.name = fallback;
    return c;
  };
  std::vector<RunConfig> out;
  const std::string stem = path.stem().string();
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(one(j[i], stem + "_" + std::to_string(i)));
  } else {
    out.push_back(one(j, stem));
  }
  return out;
}

}  // namespace hilbertpower::config
