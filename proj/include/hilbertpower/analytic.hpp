#pragma once

// Hilbert branch: complex FIR analytic filter, FFT reference transform and
// the complex power products whose real part recovers instantaneous power.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "hilbertpower/spectral.hpp"
#include "hilbertpower/types.hpp"

namespace hilbertpower::analytic {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;

struct FilterRequest {
  double rate_hz = 10e3;
  std::size_t order = 31;
  double passband_lo_hz = 700.0;
  double passband_hi_hz = 4300.0;
  double transition_hz = 1400.0;
  double stop_target_db = 100.0;
};

/// Designed filter plus its design report. `order` is the realized
/// (even) order; taps = order + 1; group delay = order / 2 samples.
struct AnalyticFilterSpec {
  FilterRequest request;
  std::size_t order = 0;
  std::vector<cplx> coefficients;
  std::size_t group_delay_samples = 0;

  bool feasible = false;
  std::size_t required_order = 0;
  double design_attenuation_db = 0.0;
  double kaiser_beta = 0.0;

  double rate_hz() const { return request.rate_hz; }
};

namespace detail {

inline double kaiser_beta(double atten_db) {
  if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
  if (atten_db >= 21.0) return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
  return 0.0;
}

// sin(pi x) / (pi x) with exact zeros at non-zero integers.
inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  if (x == std::nearbyint(x)) return 0.0;
  return std::sin(kPi * x) / (kPi * x);
}

// exp(j 2 pi f m / fs); exact when f is a multiple of fs/4.
inline cplx modulator(double f_hz, double rate_hz, long m) {
  const double q = 4.0 * f_hz / rate_hz;
  if (q == std::nearbyint(q)) {
    static constexpr std::array<cplx, 4> quarter = {cplx{1, 0}, cplx{0, 1}, cplx{-1, 0}, cplx{0, -1}};
    const long r = ((static_cast<long>(q) * m) % 4 + 4) % 4;
    return quarter[static_cast<std::size_t>(r)];
  }
  return std::polar(1.0, 2.0 * kPi * f_hz * static_cast<double>(m) / rate_hz);
}

}  // namespace detail

/// Kaiser-windowed lowpass prototype shifted to the passband centre. With
/// the default band (centred on rate/4) the real part is an exact delay,
/// so the real branch passes the input unchanged. Odd orders are realized
/// as the next lower even order. An infeasible request still returns the
/// best design at the realized order with the achieved attenuation.
inline AnalyticFilterSpec design_analytic_filter(const FilterRequest& req) {
  require(req.rate_hz > 0.0, "filter rate must be positive");
  require(req.order >= 8, "filter order must be at least 8");
  require(req.passband_lo_hz > 0.0 && req.passband_hi_hz > req.passband_lo_hz &&
              req.passband_hi_hz < req.rate_hz / 2.0,
          "passband must satisfy 0 < lo < hi < rate/2");
  require(req.transition_hz > 0.0, "transition width must be positive");
  require(req.stop_target_db > 0.0, "stopband target must be positive");

  AnalyticFilterSpec f;
  f.request = req;
  f.order = req.order - (req.order % 2);
  f.group_delay_samples = f.order / 2;

  const double dw = 2.0 * kPi * req.transition_hz / req.rate_hz;
  const double achievable = 2.285 * static_cast<double>(f.order) * dw + 7.95;
  f.design_attenuation_db = std::min(req.stop_target_db, achievable);
  auto required = static_cast<std::size_t>(std::ceil((req.stop_target_db - 7.95) / (2.285 * dw)));
  required += required % 2;
  f.required_order = required;
  f.feasible = required <= f.order;
  f.kaiser_beta = detail::kaiser_beta(f.design_attenuation_db);

  const double fc = 0.5 * (req.passband_hi_hz - req.passband_lo_hz) + 0.5 * req.transition_hz;
  const double fm = 0.5 * (req.passband_lo_hz + req.passband_hi_hz);
  const double i0_beta = std::cyl_bessel_i(0.0, f.kaiser_beta);
  const long D = static_cast<long>(f.group_delay_samples);
  f.coefficients.resize(f.order + 1);
  for (long n = 0; n <= static_cast<long>(f.order); ++n) {
    const long m = n - D;
    const double r = static_cast<double>(m) / static_cast<double>(D);
    const double w = std::cyl_bessel_i(0.0, f.kaiser_beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    const double g = (2.0 * fc / req.rate_hz) * detail::sinc(2.0 * fc * static_cast<double>(m) / req.rate_hz) * w;
    f.coefficients[static_cast<std::size_t>(n)] = 2.0 * g * detail::modulator(fm, req.rate_hz, m);
  }
  return f;
}

/// Delay-compensated response normalised to the ideal analytic gain of 2.
inline cplx frequency_response(const AnalyticFilterSpec& f, double f_hz) {
  cplx acc{};
  const double D = static_cast<double>(f.group_delay_samples);
  for (std::size_t n = 0; n < f.coefficients.size(); ++n)
    acc += f.coefficients[n] * std::polar(1.0, -2.0 * kPi * f_hz * (static_cast<double>(n) - D) / f.rate_hz());
  return 0.5 * acc;
}

inline double magnitude_db(const AnalyticFilterSpec& f, double f_hz) {
  return 20.0 * std::log10(std::max(std::abs(frequency_response(f, f_hz)), 1e-300));
}

struct ResponseMetrics {
  double passband_ripple_db = 0.0;   // max - min over [lo, hi]
  double negative_attenuation_db = 0.0;  // -max over [-hi, -lo]
  double passband_lo_hz = 0.0;
  double passband_hi_hz = 0.0;
};

/// Measured on `grid` uniformly spaced frequencies per band. The band
/// defaults to the design passband.
inline ResponseMetrics measure_response(const AnalyticFilterSpec& f, std::size_t grid = 4096,
                                        std::optional<std::pair<double, double>> band = std::nullopt) {
  require(grid >= 2, "grid needs at least 2 points");
  const auto [lo, hi] = band.value_or(std::pair{f.request.passband_lo_hz, f.request.passband_hi_hz});
  ResponseMetrics m;
  m.passband_lo_hz = lo;
  m.passband_hi_hz = hi;
  double pmax = -1e300, pmin = 1e300, nmax = -1e300;
  for (std::size_t k = 0; k < grid; ++k) {
    const double fr = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid - 1);
    const double p = magnitude_db(f, fr);
    pmax = std::max(pmax, p);
    pmin = std::min(pmin, p);
    nmax = std::max(nmax, magnitude_db(f, -fr));
  }
  m.passband_ripple_db = pmax - pmin;
  m.negative_attenuation_db = -nmax;
  return m;
}

/// (frequency_hz, magnitude_db) on `grid` points spanning [-rate/2, rate/2).
inline std::vector<std::pair<double, double>> response_curve(const AnalyticFilterSpec& f, std::size_t grid = 4096) {
  require(grid >= 2, "grid needs at least 2 points");
  std::vector<std::pair<double, double>> out(grid);
  for (std::size_t k = 0; k < grid; ++k) {
    const double fr = -f.rate_hz() / 2.0 + f.rate_hz() * static_cast<double>(k) / static_cast<double>(grid);
    out[k] = {fr, magnitude_db(f, fr)};
  }
  return out;
}

/// Filters x and shifts by the group delay so the output aligns with the
/// input. Missing samples beyond the record are treated as zero; the first
/// and last `order` samples are marked as edge.
inline AnalyticSignal to_analytic(const SampledSignal& x, const AnalyticFilterSpec& f) {
  require(x.rate_hz == f.rate_hz(), "signal rate differs from filter design rate");
  const std::size_t n = x.size();
  const auto D = static_cast<std::ptrdiff_t>(f.group_delay_samples);
  const auto taps = static_cast<std::ptrdiff_t>(f.coefficients.size());
  AnalyticSignal out{x.rate_hz, x.t0_s, std::vector<cplx>(n), std::min(n, f.order)};
  for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(n); ++m) {
    double re = 0.0, im = 0.0;
    for (std::ptrdiff_t k = 0; k < taps; ++k) {
      const std::ptrdiff_t idx = m + D - k;
      if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(n)) continue;
      const double s = x.samples[static_cast<std::size_t>(idx)];
      re += f.coefficients[static_cast<std::size_t>(k)].real() * s;
      im += f.coefficients[static_cast<std::size_t>(k)].imag() * s;
    }
    out.samples[static_cast<std::size_t>(m)] = {re, im};
  }
  return out;
}

/// Whole-record analytic signal: negative bins zeroed, positive bins
/// doubled, DC and Nyquist kept.
inline AnalyticSignal hilbert_fft_oracle(const SampledSignal& x) {
  const std::size_t n = x.size();
  std::vector<cplx> X = spectral::dft(x.samples);
  for (std::size_t k = 1; k < n; ++k) {
    if (2 * k < n) X[k] *= 2.0;
    else if (2 * k > n) X[k] = 0.0;
  }
  return AnalyticSignal{x.rate_hz, x.t0_s, spectral::idft(X), 0};
}

struct PowerProducts {
  double rate_hz = 0.0;
  double t0_s = 0.0;
  std::vector<cplx> p1;  // sum v_hat * i_hat
  std::vector<cplx> p2;  // sum v_hat * conj(i_hat)
  std::vector<cplx> p3;  // p1 + p2
  std::size_t edge_samples = 0;
};

inline PowerProducts power_products(const std::array<AnalyticSignal, 3>& v, const std::array<AnalyticSignal, 3>& i) {
  for (std::size_t p = 0; p < 3; ++p)
    require(same_timing(v[p], v[0]) && same_timing(i[p], v[0]), "analytic signals must be aligned");
  const std::size_t n = v[0].size();
  PowerProducts out{v[0].rate_hz, v[0].t0_s, std::vector<cplx>(n), std::vector<cplx>(n), std::vector<cplx>(n), 0};
  for (std::size_t p = 0; p < 3; ++p) out.edge_samples = std::max({out.edge_samples, v[p].edge_samples, i[p].edge_samples});
  for (std::size_t k = 0; k < n; ++k) {
    cplx a{}, b{};
    for (std::size_t p = 0; p < 3; ++p) {
      a += v[p].samples[k] * i[p].samples[k];
      b += v[p].samples[k] * std::conj(i[p].samples[k]);
    }
    out.p1[k] = a;
    out.p2[k] = b;
    out.p3[k] = a + b;
  }
  return out;
}

/// Instantaneous three-phase power, real(p3) / 2.
inline PowerSeries ht_power(const PowerProducts& pp) {
  PowerSeries out{pp.rate_hz, pp.t0_s, std::vector<double>(pp.p3.size())};
  for (std::size_t k = 0; k < pp.p3.size(); ++k) out.samples[k] = 0.5 * pp.p3[k].real();
  return out;
}

}  // namespace hilbertpower::analytic
