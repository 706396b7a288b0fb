#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hilbertpower {

/// Uniformly sampled real waveform. Sample n sits at t0_s + n / rate_hz.
struct SampledSignal {
  double rate_hz = 0.0;
  double t0_s = 0.0;
  std::vector<double> samples;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double time(std::size_t n) const noexcept {
    return t0_s + static_cast<double>(n) / rate_hz;
  }
};

/// Power series share the sampled-signal timing semantics; values in watts.
using PowerSeries = SampledSignal;

struct ThreePhaseSet {
  SampledSignal a, b, c;

  SampledSignal& operator[](std::size_t k) { return k == 0 ? a : (k == 1 ? b : c); }
  const SampledSignal& operator[](std::size_t k) const {
    return k == 0 ? a : (k == 1 ? b : c);
  }
};

/// Complex counterpart of SampledSignal produced by the analytic-signal path.
/// `edge_samples` at each end are filter start-up transients.
struct AnalyticSignal {
  double rate_hz = 0.0;
  double t0_s = 0.0;
  std::vector<std::complex<double>> samples;
  std::size_t edge_samples = 0;

  std::size_t size() const noexcept { return samples.size(); }
  double time(std::size_t n) const noexcept {
    return t0_s + static_cast<double>(n) / rate_hz;
  }
};

inline bool same_timing(const SampledSignal& x, const SampledSignal& y) {
  return x.rate_hz == y.rate_hz && x.t0_s == y.t0_s && x.size() == y.size();
}

inline bool same_timing(const AnalyticSignal& x, const AnalyticSignal& y) {
  return x.rate_hz == y.rate_hz && x.t0_s == y.t0_s && x.size() == y.size();
}

inline bool is_aligned(const ThreePhaseSet& s) {
  return same_timing(s.a, s.b) && same_timing(s.a, s.c);
}

inline bool is_aligned(const ThreePhaseSet& x, const ThreePhaseSet& y) {
  return is_aligned(x) && is_aligned(y) && same_timing(x.a, y.a);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace hilbertpower
