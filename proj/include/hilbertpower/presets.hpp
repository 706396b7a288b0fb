#pragma once

// Built-in scenarios. `australia` and `europe` are parametric approximations
// of the recorded events, not replays of the recordings.

#include <optional>
#include <string>
#include <vector>

#include "hilbertpower/signals.hpp"

namespace hilbertpower::signals {

struct PresetInfo {
  std::string name;
  std::string description;
};

inline const std::vector<PresetInfo>& preset_catalog() {
  static const std::vector<PresetInfo> catalog = {
      {"steady", "balanced 50 Hz sinusoid, 4 s"},
      {"am", "amplitude modulation fa=5 Hz ka=0.1, 4 s"},
      {"ramp", "frequency ramp -6 Hz/s from 50 to 46 Hz (t=1.5 s .. 2.167 s), 4 s"},
      {"step", "amplitude step ks=0.1 at t=2.0 s, 4 s"},
      {"australia", "step ks=0.1 at 1.6 s, then -6.25 Hz/s frequency drop from 2.7 s (4 Hz), 4 s"},
      {"europe", "inter-area oscillation: amplitude modulation fa=0.15 Hz ka=0.1, 10 s"},
  };
  return catalog;
}

inline SegmentSpec make_segment(SegmentKind kind, double t0, double t1) {
  SegmentSpec s;
  s.kind = kind;
  s.t_start_s = t0;
  s.t_end_s = t1;
  return s;
}

inline std::optional<ScenarioSpec> preset(const std::string& name) {
  ScenarioSpec spec;  // 380 kV, 50 Hz, 10 kHz, 4 s
  spec.snr_db = 80.0;
  const double T = spec.duration_s;
  if (name == "steady") {
    spec.segments = {make_segment(SegmentKind::steady, 0.0, T)};
  } else if (name == "am") {
    SegmentSpec s = make_segment(SegmentKind::amplitude_modulation, 0.0, T);
    s.ka = 0.1;
    s.fa_hz = 5.0;
    spec.segments = {s};
  } else if (name == "ramp") {
    constexpr double t_ramp = 1.5;
    constexpr double rate = -6.0;
    const double t_end = t_ramp + 4.0 / 6.0;  // 50 -> 46 Hz
    SegmentSpec r = make_segment(SegmentKind::frequency_ramp, t_ramp, t_end);
    r.ramp_rate_hz_per_s = rate;
    spec.segments = {make_segment(SegmentKind::steady, 0.0, t_ramp), r,
                     make_segment(SegmentKind::steady, t_end, T)};
  } else if (name == "step") {
    SegmentSpec s = make_segment(SegmentKind::amplitude_step, 0.0, T);
    s.ks = 0.1;
    s.t_step_s = 2.0;
    spec.segments = {s};
  } else if (name == "australia") {
    constexpr double t_step = 1.6;
    constexpr double t_drop = 2.7;
    constexpr double rate = -6.25;
    const double t_end = t_drop + 4.0 / 6.25;
    SegmentSpec st = make_segment(SegmentKind::amplitude_step, t_step, t_drop);
    st.ks = 0.1;
    st.t_step_s = 0.0;
    SegmentSpec r = make_segment(SegmentKind::frequency_ramp, t_drop, t_end);
    r.ramp_rate_hz_per_s = rate;
    spec.segments = {make_segment(SegmentKind::steady, 0.0, t_step), st, r,
                     make_segment(SegmentKind::steady, t_end, T)};
  } else if (name == "europe") {
    spec.duration_s = 10.0;
    SegmentSpec s = make_segment(SegmentKind::amplitude_modulation, 0.0, spec.duration_s);
    s.ka = 0.1;
    s.fa_hz = 0.15;
    spec.segments = {s};
  } else {
    return std::nullopt;
  }
  return spec;
}

}  // namespace hilbertpower::signals
