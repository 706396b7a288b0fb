#pragma once

// Closed-form dynamic test waveforms, multi-segment scenario composition,
// balanced three-phase extension and additive measurement noise.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hilbertpower/types.hpp"

namespace hilbertpower::signals {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Per-phase peak amplitude of a system given its line-to-line RMS voltage.
inline double phase_peak_from_line_rms(double v_ll_rms) {
  return v_ll_rms * std::sqrt(2.0) / std::sqrt(3.0);
}

enum class SegmentKind { steady, amplitude_modulation, frequency_ramp, amplitude_step };

inline const char* to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::steady: return "steady";
    case SegmentKind::amplitude_modulation: return "amplitude_modulation";
    case SegmentKind::frequency_ramp: return "frequency_ramp";
    case SegmentKind::amplitude_step: return "amplitude_step";
  }
  return "?";
}

inline std::optional<SegmentKind> segment_kind_from_string(const std::string& s) {
  if (s == "steady") return SegmentKind::steady;
  if (s == "amplitude_modulation") return SegmentKind::amplitude_modulation;
  if (s == "frequency_ramp") return SegmentKind::frequency_ramp;
  if (s == "amplitude_step") return SegmentKind::amplitude_step;
  return std::nullopt;
}

/// One piece of a scenario. Fields not used by `kind` are ignored.
/// `t_step_s` is relative to the segment start.
struct SegmentSpec {
  SegmentKind kind = SegmentKind::steady;
  double t_start_s = 0.0;
  double t_end_s = 0.0;
  double ka = 0.0;
  double fa_hz = 0.0;
  double ramp_rate_hz_per_s = 0.0;
  double ks = 0.0;
  double t_step_s = 0.0;
};

struct ScenarioSpec {
  double f0_hz = 50.0;
  double a0 = phase_peak_from_line_rms(380e3);
  double phi0_rad = 0.0;
  double duration_s = 4.0;
  double rate_hz = 10'000.0;
  std::vector<SegmentSpec> segments;
  /// Disabled when empty or +inf.
  std::optional<double> snr_db;
  std::uint64_t seed = 0;
};

inline bool noise_enabled(const ScenarioSpec& s) {
  return s.snr_db.has_value() && std::isfinite(*s.snr_db);
}

namespace detail {

inline std::size_t sample_count(double duration_s, double rate_hz) {
  require(rate_hz > 0.0 && std::isfinite(rate_hz), "sampling rate must be positive");
  require(duration_s > 0.0 && std::isfinite(duration_s), "duration must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * rate_hz));
  require(n > 0, "duration shorter than one sample");
  return n;
}

inline double sample_time(std::size_t n, double rate_hz) {
  return static_cast<double>(n) / rate_hz;
}

// Shared evaluation kernels so single-segment composition and the direct
// synthesizers produce bit-identical samples.
inline double tone(double amp, double f_hz, double theta, double tau) {
  return amp * std::cos(kTwoPi * (f_hz * tau) + theta);
}

inline double am_factor(double ka, double fa_hz, double tau) {
  return 1.0 + ka * std::cos(kTwoPi * (fa_hz * tau));
}

inline double chirp_phase(double f_hz, double rate, double theta, double tau) {
  return kTwoPi * (f_hz * tau + 0.5 * rate * tau * tau) + theta;
}

inline double step_factor(double ks, double t_step, double tau) {
  return tau >= t_step ? 1.0 + ks : 1.0;  // h(0) = 1
}

inline void check_band(double f_lo, double f_hi, double rate_hz) {
  const double nyq = 0.5 * rate_hz;
  require(f_lo > 0.0 && f_hi > 0.0, "instantaneous frequency must stay positive");
  require(f_lo < nyq && f_hi < nyq, "instantaneous frequency exceeds Nyquist");
}

}  // namespace detail

/// a0 (1 + ka cos(2 pi fa t)) cos(2 pi f0 t + phi0)
inline SampledSignal synth_am(double a0, double f0_hz, double phi0_rad, double ka, double fa_hz,
                              double duration_s, double rate_hz) {
  const std::size_t n = detail::sample_count(duration_s, rate_hz);
  require(ka >= 0.0, "modulation factor must be non-negative");
  require(fa_hz > 0.0 && fa_hz < f0_hz, "modulation frequency must lie in (0, f0)");
  detail::check_band(f0_hz, f0_hz, rate_hz);
  SampledSignal out{rate_hz, 0.0, std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const double t = detail::sample_time(k, rate_hz);
    out.samples[k] = detail::am_factor(ka, fa_hz, t) * detail::tone(a0, f0_hz, phi0_rad, t);
  }
  return out;
}

/// a0 cos(2 pi f0 t + phi0 + R pi t^2); instantaneous frequency f0 + R t.
inline SampledSignal synth_ramp(double a0, double f0_hz, double phi0_rad, double ramp_rate,
                                double duration_s, double rate_hz) {
  const std::size_t n = detail::sample_count(duration_s, rate_hz);
  const double f_end = f0_hz + ramp_rate * duration_s;
  detail::check_band(std::min(f0_hz, f_end), std::max(f0_hz, f_end), rate_hz);
  SampledSignal out{rate_hz, 0.0, std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const double t = detail::sample_time(k, rate_hz);
    out.samples[k] = a0 * std::cos(detail::chirp_phase(f0_hz, ramp_rate, phi0_rad, t));
  }
  return out;
}

/// a0 (1 + ks h(t - t_step)) cos(2 pi f0 t + phi0), with h(0) = 1.
inline SampledSignal synth_step(double a0, double f0_hz, double phi0_rad, double ks,
                                double t_step_s, double duration_s, double rate_hz) {
  const std::size_t n = detail::sample_count(duration_s, rate_hz);
  require(t_step_s >= 0.0 && t_step_s <= duration_s, "step instant outside the record");
  detail::check_band(f0_hz, f0_hz, rate_hz);
  SampledSignal out{rate_hz, 0.0, std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const double t = detail::sample_time(k, rate_hz);
    out.samples[k] = detail::step_factor(ks, t_step_s, t) * detail::tone(a0, f0_hz, phi0_rad, t);
  }
  return out;
}

/// Throws std::invalid_argument describing the first violated constraint.
inline void validate(const ScenarioSpec& spec) {
  require(spec.rate_hz > 0.0 && std::isfinite(spec.rate_hz), "rate_hz must be positive");
  require(spec.duration_s > 0.0 && std::isfinite(spec.duration_s), "duration_s must be positive");
  require(spec.f0_hz > 0.0, "f0_hz must be positive");
  require(spec.rate_hz >= 20.0 * spec.f0_hz, "rate_hz must be at least 20 * f0_hz");
  require(!spec.segments.empty(), "scenario needs at least one segment");
  constexpr double kTol = 1e-9;
  double expect_start = 0.0;
  double f = spec.f0_hz;
  for (std::size_t i = 0; i < spec.segments.size(); ++i) {
    const SegmentSpec& s = spec.segments[i];
    const std::string where = "segment " + std::to_string(i) + ": ";
    require(std::abs(s.t_start_s - expect_start) <= kTol,
            where + (s.t_start_s > expect_start ? "gap before segment" : "segments overlap"));
    require(s.t_end_s > s.t_start_s, where + "t_end_s must exceed t_start_s");
    const double len = s.t_end_s - s.t_start_s;
    switch (s.kind) {
      case SegmentKind::amplitude_modulation:
        require(s.ka >= 0.0, where + "ka must be non-negative");
        require(s.fa_hz > 0.0 && s.fa_hz < spec.f0_hz, where + "fa_hz must lie in (0, f0_hz)");
        break;
      case SegmentKind::frequency_ramp: {
        const double f_end = f + s.ramp_rate_hz_per_s * len;
        detail::check_band(std::min(f, f_end), std::max(f, f_end), spec.rate_hz);
        f = f_end;
        break;
      }
      case SegmentKind::amplitude_step:
        require(s.t_step_s >= 0.0 && s.t_step_s <= len, where + "t_step_s outside segment");
        break;
      case SegmentKind::steady: break;
    }
    expect_start = s.t_end_s;
  }
  require(std::abs(expect_start - spec.duration_s) <= kTol,
          "segments must end exactly at duration_s");
  detail::check_band(spec.f0_hz, spec.f0_hz, spec.rate_hz);
}

/// Renders the scenario. Amplitude, instantaneous frequency and phase are
/// chained across segment boundaries so the waveform is continuous except
/// at explicitly requested steps.
inline SampledSignal compose(const ScenarioSpec& spec) {
  validate(spec);
  const std::size_t n = detail::sample_count(spec.duration_s, spec.rate_hz);
  SampledSignal out{spec.rate_hz, 0.0, std::vector<double>(n)};

  double amp = spec.a0;
  double f = spec.f0_hz;
  double theta = spec.phi0_rad;
  std::size_t k = 0;
  for (std::size_t i = 0; i < spec.segments.size(); ++i) {
    const SegmentSpec& s = spec.segments[i];
    const bool last = i + 1 == spec.segments.size();
    for (; k < n; ++k) {
      const double t = detail::sample_time(k, spec.rate_hz);
      if (!last && t >= s.t_end_s) break;
      const double tau = t - s.t_start_s;
      double v = 0.0;
      switch (s.kind) {
        case SegmentKind::steady: v = detail::tone(amp, f, theta, tau); break;
        case SegmentKind::amplitude_modulation:
          v = detail::am_factor(s.ka, s.fa_hz, tau) * detail::tone(amp, f, theta, tau);
          break;
        case SegmentKind::frequency_ramp:
          v = amp * std::cos(detail::chirp_phase(f, s.ramp_rate_hz_per_s, theta, tau));
          break;
        case SegmentKind::amplitude_step:
          v = detail::step_factor(s.ks, s.t_step_s, tau) * detail::tone(amp, f, theta, tau);
          break;
      }
      out.samples[k] = v;
    }
    // Terminal state feeds the next segment.
    const double len = s.t_end_s - s.t_start_s;
    switch (s.kind) {
      case SegmentKind::steady: theta += kTwoPi * (f * len); break;
      case SegmentKind::amplitude_modulation:
        amp *= detail::am_factor(s.ka, s.fa_hz, len);
        theta += kTwoPi * (f * len);
        break;
      case SegmentKind::frequency_ramp:
        theta = detail::chirp_phase(f, s.ramp_rate_hz_per_s, theta, len);
        f += s.ramp_rate_hz_per_s * len;
        break;
      case SegmentKind::amplitude_step:
        amp *= detail::step_factor(s.ks, s.t_step_s, len);
        theta += kTwoPi * (f * len);
        break;
    }
    theta = std::remainder(theta, kTwoPi);
  }
  return out;
}

/// Amplitude of the first segment at t = 0 (the initial phasor magnitude).
inline double initial_amplitude(const ScenarioSpec& spec) {
  if (spec.segments.empty()) return spec.a0;
  const SegmentSpec& s = spec.segments.front();
  switch (s.kind) {
    case SegmentKind::amplitude_modulation: return spec.a0 * (1.0 + s.ka);
    case SegmentKind::amplitude_step: return spec.a0 * (s.t_step_s <= 0.0 ? 1.0 + s.ks : 1.0);
    default: return spec.a0;
  }
}

inline std::array<double, 3> phase_offsets(double phi0_rad) {
  return {phi0_rad, phi0_rad - kTwoPi / 3.0, phi0_rad + kTwoPi / 3.0};
}

/// Balanced set: b and c carry phi0 shifted by -2pi/3 and +2pi/3; every
/// dynamic parameter is shared.
inline ThreePhaseSet three_phase(const ScenarioSpec& spec) {
  const auto phis = phase_offsets(spec.phi0_rad);
  ThreePhaseSet out;
  for (std::size_t p = 0; p < 3; ++p) {
    ScenarioSpec s = spec;
    s.phi0_rad = phis[p];
    out[p] = compose(s);
  }
  return out;
}

inline double rms(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  long double acc = 0.0L;
  for (double v : x) acc += static_cast<long double>(v) * v;
  return static_cast<double>(std::sqrt(acc / static_cast<long double>(x.size())));
}

/// Additive white Gaussian noise with sigma = RMS(x) 10^(-snr/20). `stream`
/// selects an independent substream of `seed`. +inf disables noise.
inline SampledSignal add_noise(const SampledSignal& x, double snr_db, std::uint64_t seed,
                               std::uint32_t stream = 0) {
  require(!std::isnan(snr_db), "snr_db must not be NaN");
  if (snr_db == std::numeric_limits<double>::infinity()) return x;
  require(std::isfinite(snr_db), "snr_db must be finite or +inf");
  const double sigma = rms(x.samples) * std::pow(10.0, -snr_db / 20.0);
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), stream, 0x6e6f6973u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SampledSignal out = x;
  for (double& v : out.samples) v += sigma * gauss(rng);
  return out;
}

}  // namespace hilbertpower::signals
