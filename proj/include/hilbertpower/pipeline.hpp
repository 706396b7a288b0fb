#pragma once

// End-to-end comparison: scenario -> circuit -> noisy measurements -> both
// power estimators -> errors against the noise-free truth.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hilbertpower/analytic.hpp"
#include "hilbertpower/circuit.hpp"
#include "hilbertpower/signals.hpp"
#include "hilbertpower/spectral.hpp"
#include "hilbertpower/types.hpp"

namespace hilbertpower::pipeline {

class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

enum class CircuitMode { two_bus, bypass };
enum class Initialization { steady_state, zero };

struct CircuitConfig {
  CircuitMode mode = CircuitMode::two_bus;
  circuit::PiLineParams line;
  circuit::LoadParams load;
  Initialization init = Initialization::steady_state;
  double warmup_s = 0.5;  // ignored in bypass mode
};

using HtConfig = analytic::FilterRequest;

struct Summary {
  double max_abs_ft_w = 0.0;
  double rms_ft_w = 0.0;
  double max_abs_ht_w = 0.0;
  double rms_ht_w = 0.0;
  double error_ratio = 0.0;  // max_abs_ht / max_abs_ft
  double t_max_ft_s = 0.0;
  double t_max_ht_s = 0.0;
  std::size_t samples = 0;
};

struct Metadata {
  double valid_start_s = 0.0;
  double valid_end_s = 0.0;
  double a0_v = 0.0;
  std::size_t ft_window_samples = 0;
  std::size_t ft_stride_samples = 0;
  std::size_t ht_requested_order = 0;
  std::size_t ht_order = 0;
  std::size_t ht_required_order = 0;
  bool ht_feasible = false;
  double ht_design_attenuation_db = 0.0;
  double mean_true_power_w = 0.0;
};

struct PowerComparison {
  PowerSeries p_true, p_ft, p_ht, err_ft, err_ht;
  Summary summary;
  Metadata meta;
};

/// sum_abc v(t) i(t)
inline PowerSeries true_power(const ThreePhaseSet& v, const ThreePhaseSet& i) {
  require(is_aligned(v, i), "voltage and current sets must share timing and length");
  PowerSeries p{v.a.rate_hz, v.a.t0_s, std::vector<double>(v.a.size(), 0.0)};
  for (std::size_t ph = 0; ph < 3; ++ph)
    for (std::size_t k = 0; k < p.size(); ++k) p.samples[k] += v[ph].samples[k] * i[ph].samples[k];
  return p;
}

namespace detail {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

struct Measurements {
  ThreePhaseSet v, i;
};

inline Measurements drive(const signals::ScenarioSpec& spec, const CircuitConfig& cfg) {
  const ThreePhaseSet src = signals::three_phase(spec);
  Measurements m;
  if (cfg.mode == CircuitMode::bypass) {
    const double r = circuit::derive_load(cfg.load).r_ohm;
    m.v = src;
    m.i = src;
    for (std::size_t p = 0; p < 3; ++p)
      for (double& x : m.i[p].samples) x /= r;
    return m;
  }
  const auto net = circuit::build_network(cfg.line, cfg.load);
  circuit::SimulationOptions opt;
  if (cfg.init == Initialization::steady_state) {
    circuit::InitialPhasors ip;
    ip.f_hz = spec.f0_hz;
    const double amp = signals::initial_amplitude(spec);
    const auto phis = signals::phase_offsets(spec.phi0_rad);
    for (std::size_t p = 0; p < 3; ++p) ip.source[p] = std::polar(amp, phis[p]);
    opt.initial = ip;
  }
  auto sim = circuit::simulate(net, src, opt);
  m.v = std::move(sim.v_load);
  m.i = std::move(sim.i_line);
  return m;
}

inline ThreePhaseSet noisy(const ThreePhaseSet& x, const signals::ScenarioSpec& spec, std::uint32_t first_stream) {
  if (!signals::noise_enabled(spec)) return x;
  ThreePhaseSet out;
  for (std::uint32_t p = 0; p < 3; ++p) out[p] = signals::add_noise(x[p], *spec.snr_db, spec.seed, first_stream + p);
  return out;
}

inline void summarize(PowerComparison& c) {
  Summary& s = c.summary;
  s.samples = c.err_ft.size();
  long double sft = 0.0L, sht = 0.0L, sp = 0.0L;
  for (std::size_t k = 0; k < s.samples; ++k) {
    const double eft = std::abs(c.err_ft.samples[k]);
    const double eht = std::abs(c.err_ht.samples[k]);
    if (eft > s.max_abs_ft_w) { s.max_abs_ft_w = eft; s.t_max_ft_s = c.err_ft.time(k); }
    if (eht > s.max_abs_ht_w) { s.max_abs_ht_w = eht; s.t_max_ht_s = c.err_ht.time(k); }
    sft += static_cast<long double>(eft) * eft;
    sht += static_cast<long double>(eht) * eht;
    sp += c.p_true.samples[k];
  }
  if (s.samples > 0) {
    const auto n = static_cast<long double>(s.samples);
    s.rms_ft_w = static_cast<double>(std::sqrt(sft / n));
    s.rms_ht_w = static_cast<double>(std::sqrt(sht / n));
    c.meta.mean_true_power_w = static_cast<double>(sp / n);
  }
  s.error_ratio = s.max_abs_ft_w > 0.0 ? s.max_abs_ht_w / s.max_abs_ft_w
                                       : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// Runs the full comparison. Series are reported on the Fourier window-centre
/// grid (rate / stride) restricted to the common valid interval: full FT
/// windows, HT samples clear of the filter edges, and past the circuit
/// warm-up. Failures carry the stage name: scenario, circuit, noise, ft,
/// ht or align.
inline PowerComparison run_scenario(const signals::ScenarioSpec& spec, const CircuitConfig& circuit_cfg,
                                    const spectral::FtConfig& ft_cfg, const HtConfig& ht_cfg) {
  detail::stage("scenario", [&] { signals::validate(spec); return 0; });
  const auto meas = detail::stage("circuit", [&] { return detail::drive(spec, circuit_cfg); });
  const PowerSeries p_true = true_power(meas.v, meas.i);

  const auto measured = detail::stage("noise", [&] {
    return detail::Measurements{detail::noisy(meas.v, spec, 0), detail::noisy(meas.i, spec, 3)};
  });
  const ThreePhaseSet& v_n = measured.v;
  const ThreePhaseSet& i_n = measured.i;

  const std::size_t N = detail::stage("ft", [&] { return spectral::window_samples(ft_cfg, spec.rate_hz); });
  const PowerSeries p_ft = detail::stage("ft", [&] { return spectral::ft_power(v_n, i_n, ft_cfg); });

  HtConfig ht = ht_cfg;
  ht.rate_hz = spec.rate_hz;
  const auto filt = detail::stage("ht", [&] { return analytic::design_analytic_filter(ht); });
  const auto pp = detail::stage("ht", [&] {
    std::array<AnalyticSignal, 3> va, ia;
    for (std::size_t p = 0; p < 3; ++p) {
      va[p] = analytic::to_analytic(v_n[p], filt);
      ia[p] = analytic::to_analytic(i_n[p], filt);
    }
    return analytic::power_products(va, ia);
  });
  const PowerSeries p_ht = analytic::ht_power(pp);

  return detail::stage("align", [&] {
    const std::size_t L = p_true.size();
    const std::size_t stride = ft_cfg.stride_samples;
    std::size_t lo = pp.edge_samples;
    if (circuit_cfg.mode == CircuitMode::two_bus)
      lo = std::max(lo, static_cast<std::size_t>(std::ceil(circuit_cfg.warmup_s * spec.rate_hz - 1e-9)));
    const std::size_t hi_excl = L > pp.edge_samples ? L - pp.edge_samples : 0;

    PowerComparison c;
    for (auto* s : {&c.p_true, &c.p_ft, &c.p_ht, &c.err_ft, &c.err_ht}) s->rate_hz = p_ft.rate_hz;
    bool first = true;
    for (std::size_t j = 0; j < p_ft.size(); ++j) {
      const std::size_t idx = N / 2 + j * stride;
      if (idx < lo || idx >= hi_excl) continue;
      const double ft = p_ft.samples[j];
      if (!std::isfinite(ft))
        throw PipelineError("ft", "no valid spectral peak in window centred at t=" + std::to_string(p_true.time(idx)));
      if (first) {
        for (auto* s : {&c.p_true, &c.p_ft, &c.p_ht, &c.err_ft, &c.err_ht}) s->t0_s = p_true.time(idx);
        c.meta.valid_start_s = p_true.time(idx);
        first = false;
      }
      c.meta.valid_end_s = p_true.time(idx);
      c.p_true.samples.push_back(p_true.samples[idx]);
      c.p_ft.samples.push_back(ft);
      c.p_ht.samples.push_back(p_ht.samples[idx]);
      c.err_ft.samples.push_back(ft - p_true.samples[idx]);
      c.err_ht.samples.push_back(p_ht.samples[idx] - p_true.samples[idx]);
    }
    if (first) throw std::runtime_error("empty common valid interval");

    c.meta.a0_v = spec.a0;
    c.meta.ft_window_samples = N;
    c.meta.ft_stride_samples = stride;
    c.meta.ht_requested_order = filt.request.order;
    c.meta.ht_order = filt.order;
    c.meta.ht_required_order = filt.required_order;
    c.meta.ht_feasible = filt.feasible;
    c.meta.ht_design_attenuation_db = filt.design_attenuation_db;
    detail::summarize(c);
    return c;
  });
}

}  // namespace hilbertpower::pipeline
