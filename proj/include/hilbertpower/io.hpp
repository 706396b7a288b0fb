#pragma once

// CSV and key=value writers. Floats use the shortest round-trip form.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "hilbertpower/analytic.hpp"
#include "hilbertpower/pipeline.hpp"

namespace hilbertpower::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path.string() + ": write failed");
}

inline std::string series_csv(const pipeline::PowerComparison& c) {
  std::string s = "time_s,p_true_w,p_ft_w,p_ht_w,err_ft_w,err_ht_w\n";
  s.reserve(s.size() + c.p_true.size() * 110);
  for (std::size_t k = 0; k < c.p_true.size(); ++k) {
    s += fmt(c.p_true.time(k));
    for (const auto* x : {&c.p_true, &c.p_ft, &c.p_ht, &c.err_ft, &c.err_ht}) {
      s += ',';
      s += fmt(x->samples[k]);
    }
    s += '\n';
  }
  return s;
}

inline void write_series(const pipeline::PowerComparison& c, const std::filesystem::path& path) {
  write_text(path, series_csv(c));
}

/// Flat key=value lines; extra entries are appended verbatim.
inline std::string summary_kv(const pipeline::PowerComparison& c, const std::string& name,
                              const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  const auto& s = c.summary;
  const auto& m = c.meta;
  std::ostringstream o;
  o << "name=" << name << '\n'
    << "max_abs_ft_w=" << fmt(s.max_abs_ft_w) << '\n'
    << "rms_ft_w=" << fmt(s.rms_ft_w) << '\n'
    << "max_abs_ht_w=" << fmt(s.max_abs_ht_w) << '\n'
    << "rms_ht_w=" << fmt(s.rms_ht_w) << '\n'
    << "error_ratio=" << fmt(s.error_ratio) << '\n'
    << "t_max_ft_s=" << fmt(s.t_max_ft_s) << '\n'
    << "t_max_ht_s=" << fmt(s.t_max_ht_s) << '\n'
    << "samples=" << s.samples << '\n'
    << "valid_start_s=" << fmt(m.valid_start_s) << '\n'
    << "valid_end_s=" << fmt(m.valid_end_s) << '\n'
    << "mean_true_power_w=" << fmt(m.mean_true_power_w) << '\n'
    << "a0_v=" << fmt(m.a0_v) << '\n'
    << "a0_convention=phase_peak=v_ll_rms*sqrt(2/3)\n"
    << "ft_window_samples=" << m.ft_window_samples << '\n'
    << "ft_stride_samples=" << m.ft_stride_samples << '\n'
    << "ht_requested_order=" << m.ht_requested_order << '\n'
    << "ht_order=" << m.ht_order << '\n'
    << "ht_required_order=" << m.ht_required_order << '\n'
    << "ht_feasible=" << (m.ht_feasible ? "true" : "false") << '\n'
    << "ht_design_attenuation_db=" << fmt(m.ht_design_attenuation_db) << '\n';
  for (const auto& [k, v] : extra) o << k << '=' << v << '\n';
  return o.str();
}

inline std::string format_power(double w) {
  char buf[64];
  const double a = std::abs(w);
  if (a >= 1e6) std::snprintf(buf, sizeof buf, "%.4g MW", w / 1e6);
  else if (a >= 1e3) std::snprintf(buf, sizeof buf, "%.4g kW", w / 1e3);
  else std::snprintf(buf, sizeof buf, "%.4g W", w);
  return buf;
}

inline std::string summary_human(const pipeline::PowerComparison& c, const std::string& name) {
  const auto& s = c.summary;
  char ratio[32];
  std::snprintf(ratio, sizeof ratio, "%.3g", s.error_ratio);
  std::ostringstream o;
  o << name << ": " << s.samples << " samples over [" << fmt(c.meta.valid_start_s) << ", "
    << fmt(c.meta.valid_end_s) << "] s, mean power " << format_power(c.meta.mean_true_power_w) << '\n'
    << "  FT  max |err| " << format_power(s.max_abs_ft_w) << " at t=" << fmt(s.t_max_ft_s)
    << " s, rms " << format_power(s.rms_ft_w) << '\n'
    << "  HT  max |err| " << format_power(s.max_abs_ht_w) << " at t=" << fmt(s.t_max_ht_s)
    << " s, rms " << format_power(s.rms_ht_w) << '\n'
    << "  error ratio HT/FT " << ratio << '\n';
  return o.str();
}

inline std::string filter_response_csv(const analytic::AnalyticFilterSpec& f, std::size_t grid = 4096) {
  std::string s = "frequency_hz,magnitude_db\n";
  for (const auto& [fr, db] : analytic::response_curve(f, grid)) {
    s += fmt(fr);
    s += ',';
    s += fmt(db);
    s += '\n';
  }
  return s;
}

inline std::string filter_report(const analytic::AnalyticFilterSpec& f) {
  const auto m = analytic::measure_response(f);
  std::ostringstream o;
  o << "requested_order=" << f.request.order << '\n'
    << "order=" << f.order << '\n'
    << "taps=" << f.coefficients.size() << '\n'
    << "group_delay_samples=" << f.group_delay_samples << '\n'
    << "rate_hz=" << fmt(f.request.rate_hz) << '\n'
    << "passband_lo_hz=" << fmt(f.request.passband_lo_hz) << '\n'
    << "passband_hi_hz=" << fmt(f.request.passband_hi_hz) << '\n'
    << "transition_hz=" << fmt(f.request.transition_hz) << '\n'
    << "stop_target_db=" << fmt(f.request.stop_target_db) << '\n'
    << "feasible=" << (f.feasible ? "true" : "false") << '\n'
    << "required_order=" << f.required_order << '\n'
    << "design_attenuation_db=" << fmt(f.design_attenuation_db) << '\n'
    << "kaiser_beta=" << fmt(f.kaiser_beta) << '\n'
    << "measured_passband_ripple_db=" << fmt(m.passband_ripple_db) << '\n'
    << "measured_negative_attenuation_db=" << fmt(m.negative_attenuation_db) << '\n';
  return o.str();
}

}  // namespace hilbertpower::io
