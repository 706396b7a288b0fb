#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage or configuration
// error, 2 runtime failure.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "hilbertpower/config.hpp"
#include "hilbertpower/io.hpp"
#include "hilbertpower/pipeline.hpp"
#include "hilbertpower/presets.hpp"

namespace hilbertpower::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> stride;
  std::optional<std::string> snr_db;
  std::optional<std::string> out_dir;
  std::vector<std::string> emit;
};

inline void apply(const Overrides& o, config::RunConfig& c) {
  if (o.seed) c.scenario.seed = *o.seed;
  if (o.stride) c.ft.stride_samples = *o.stride;
  if (o.snr_db) {
    if (*o.snr_db == "off") {
      c.scenario.snr_db.reset();
    } else {
      double v = 0.0;
      const char* b = o.snr_db->data();
      const char* e = b + o.snr_db->size();
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc{} || p != e) throw config::ConfigError("--snr-db: expected a number or 'off'");
      c.scenario.snr_db = v;
    }
  }
  if (o.out_dir) c.output.dir = *o.out_dir;
  if (!o.emit.empty()) config::set_emit(c.output, o.emit);
}

struct JobResult {
  std::string report;
  std::string error;
  int code = kExitOk;
};

inline JobResult run_one(const config::RunConfig& c) {
  JobResult r;
  try {
    const auto cmp = pipeline::run_scenario(c.scenario, c.circuit, c.ft, c.ht);
    const std::filesystem::path dir = c.output.dir;
    const std::string& name = c.output.name;
    if (c.output.series) io::write_series(cmp, dir / (name + "_series.csv"));
    if (c.output.summary) {
      const std::string snr = signals::noise_enabled(c.scenario) ? io::fmt(*c.scenario.snr_db) : "off";
      io::write_text(dir / (name + "_summary.txt"),
                     io::summary_kv(cmp, name, {{"seed", std::to_string(c.scenario.seed)}, {"snr_db", snr}}));
    }
    if (c.output.filter_response) {
      pipeline::HtConfig ht = c.ht;
      ht.rate_hz = c.scenario.rate_hz;
      io::write_text(dir / (name + "_filter_response.csv"),
                     io::filter_response_csv(analytic::design_analytic_filter(ht)));
    }
    r.report = io::summary_human(cmp, name);
  } catch (const std::exception& e) {
    r.error = c.output.name + ": " + e.what();
    r.code = kExitRuntime;
  }
  return r;
}

/// Runs independent configurations on up to `jobs` threads; reports are
/// printed in input order.
inline int run_all(const std::vector<config::RunConfig>& cfgs, std::size_t jobs, std::ostream& out,
                   std::ostream& err) {
  std::vector<JobResult> results(cfgs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < cfgs.size();) results[k] = run_one(cfgs[k]);
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(jobs, cfgs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  int code = kExitOk;
  for (const auto& r : results) {
    if (r.code != kExitOk) {
      err << "error: " << r.error << '\n';
      code = std::max(code, r.code);
    } else {
      out << r.report;
    }
  }
  return code;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Fourier vs Hilbert instantaneous power estimation during transients", "hilbertpower"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides ov;
  std::size_t jobs = 1;
  bool dump = false;
  app.add_option("--seed", ov.seed, "noise seed (u64)");
  app.add_option("--stride", ov.stride, "FT window stride in samples")->check(CLI::PositiveNumber);
  app.add_option("--snr-db", ov.snr_db, "measurement SNR in dB, or 'off'");
  app.add_option("--jobs", jobs, "scenarios run concurrently")->check(CLI::PositiveNumber);
  app.add_option("--out", ov.out_dir, "output directory");
  app.add_option("--emit", ov.emit, "outputs: series, summary, filter_response")->delimiter(',');
  app.add_flag("--dump-config", dump, "print the resolved configuration as JSON and exit");

  auto* run = app.add_subcommand("run", "run scenarios from JSON config files");
  std::vector<std::string> files;
  run->add_option("config", files, "config file(s)")->required();

  auto* pre = app.add_subcommand("preset", "run built-in scenarios");
  std::vector<std::string> names;
  pre->add_option("name", names, "preset name(s)")->required();

  auto* fr = app.add_subcommand("filter-response", "export the analytic filter magnitude response");
  analytic::FilterRequest freq;
  fr->add_option("--rate", freq.rate_hz, "sampling rate in Hz");
  fr->add_option("--order", freq.order, "filter order");
  fr->add_option("--passband-lo", freq.passband_lo_hz, "passband lower edge in Hz");
  fr->add_option("--passband-hi", freq.passband_hi_hz, "passband upper edge in Hz");
  fr->add_option("--transition", freq.transition_hz, "transition width in Hz");
  fr->add_option("--stop-db", freq.stop_target_db, "stopband attenuation target in dB");

  auto* lp = app.add_subcommand("list-presets", "list built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitConfig;
  }

  if (*lp) {
    for (const auto& p : signals::preset_catalog()) out << p.name << "  " << p.description << '\n';
    return kExitOk;
  }

  if (*fr) {
    try {
      const auto f = analytic::design_analytic_filter(freq);
      const std::filesystem::path dir = ov.out_dir.value_or(".");
      io::write_text(dir / "filter_response.csv", io::filter_response_csv(f));
      out << io::filter_report(f);
      return kExitOk;
    } catch (const std::invalid_argument& e) {
      err << "error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitRuntime;
    }
  }

  std::vector<config::RunConfig> cfgs;
  try {
    if (*run) {
      for (const auto& f : files) {
        auto v = config::load_file(f);
        cfgs.insert(cfgs.end(), v.begin(), v.end());
      }
    } else {
      for (const auto& n : names) cfgs.push_back(config::preset_config(n));
    }
    for (auto& c : cfgs) {
      apply(ov, c);
      config::check(c);
    }
  } catch (const config::ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (dump) {
    if (cfgs.size() == 1) {
      out << config::to_json(cfgs.front()).dump(2) << '\n';
    } else {
      auto arr = config::json::array();
      for (const auto& c : cfgs) arr.push_back(config::to_json(c));
      out << arr.dump(2) << '\n';
    }
    return kExitOk;
  }
  return run_all(cfgs, jobs, out, err);
}

}  // namespace hilbertpower::cli
