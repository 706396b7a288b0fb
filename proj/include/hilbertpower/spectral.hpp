#pragma once

// Fourier branch: sliding Hann-windowed DFT, interpolated-DFT tone
// estimation and window-center waveform reconstruction.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "hilbertpower/types.hpp"

namespace hilbertpower::spectral {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;

enum class IpdftMethod {
  /// Classic two-bin Hann interpolation.
  two_point,
  /// Two-bin interpolation refined with negative-frequency image removal
  /// and the exact discrete Hann kernel.
  compensated,
};

struct FtConfig {
  double window_s = 0.2;
  std::size_t stride_samples = 1;
  double search_lo_hz = 25.0;
  double search_hi_hz = 75.0;
  IpdftMethod method = IpdftMethod::compensated;
  int refine_iterations = 3;
};

struct WindowEstimate {
  double f_hz = 0.0;
  double amp = 0.0;
  /// Phase at the first sample of the window, in (-pi, pi].
  double phase_rad = 0.0;
  double t_center_s = 0.0;
  bool valid = false;
};

/// Periodic (DFT-even) Hann window.
inline std::vector<double> hann(std::size_t n) {
  require(n >= 2, "Hann window needs at least 2 points");
  std::vector<double> w(n);
  const double N = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k)
    w[k] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(k) / N));
  return w;
}

namespace detail {

// Eigen::FFT caches plans and is not safe to share across threads.
inline Eigen::FFT<double>& thread_fft() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

inline double wrap_phase(double p) {
  double r = std::remainder(p, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

// sum_{n<N} exp(j 2 pi nu n / N)
inline cplx dirichlet(double nu, std::size_t n_points) {
  const double N = static_cast<double>(n_points);
  const cplx rot = std::polar(1.0, kPi * nu * (N - 1.0) / N);
  const double den = std::sin(kPi * nu / N);
  if (std::abs(den) < 1e-300 || std::abs(nu) < 1e-12) return rot * N;
  return rot * (std::sin(kPi * nu) / den);
}

// Response of the periodic Hann window at a (fractional) bin offset nu:
// sum_n w[n] exp(j 2 pi nu n / N).
inline cplx hann_kernel(double nu, std::size_t n_points) {
  return 0.5 * dirichlet(nu, n_points) - 0.25 * dirichlet(nu + 1.0, n_points) -
         0.25 * dirichlet(nu - 1.0, n_points);
}

// Noise floor of the one-sided spectrum: the median magnitude, but never
// below round-off relative to the largest bin.
inline double noise_floor(std::span<const cplx> x) {
  std::vector<double> m(x.size() / 2 + 1);
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = std::abs(x[k]);
  const double top = *std::max_element(m.begin(), m.end());
  auto mid = m.begin() + static_cast<std::ptrdiff_t>(m.size() / 2);
  std::nth_element(m.begin(), mid, m.end());
  return std::max(*mid, 1e-10 * top);
}

// Solves |W(delta - side)| / |W(delta)| = rho for delta, where side = +-1
// picks the neighbouring bin. The ratio is monotone in side*delta on (-1, 1).
inline double invert_bin_ratio(double rho, int side, double guess, std::size_t n_points) {
  auto ratio = [&](double d) {
    return std::abs(hann_kernel(d - side, n_points)) / std::abs(hann_kernel(d, n_points));
  };
  // Work in u = side * delta so the ratio increases with u.
  auto g = [&](double u) { return ratio(side * u) - rho; };
  double lo = -0.95, hi = 0.999;
  double glo = g(lo), ghi = g(hi);
  if (glo >= 0.0) return side * lo;
  if (ghi <= 0.0) return side * hi;
  double a = std::clamp(side * guess, lo, hi);
  double ga = g(a);
  double b = std::clamp(a + 1e-4, lo, hi);
  double gb = g(b);
  for (int it = 0; it < 80; ++it) {
    if (ga < 0.0) { lo = a; glo = ga; } else { hi = a; ghi = ga; }
    if (gb < 0.0) { lo = std::max(lo, b); } else { hi = std::min(hi, b); }
    if (hi - lo < 1e-15 || gb == 0.0) break;
    double c = (gb != ga) ? b - gb * (b - a) / (gb - ga) : 0.5 * (lo + hi);
    if (!(c > lo && c < hi)) c = 0.5 * (lo + hi);
    a = b; ga = gb;
    b = c; gb = g(b);
    if (std::abs(b - a) < 1e-15) break;
  }
  return side * b;
}

}  // namespace detail

/// Full-length DFT, X[k] = sum_n x[n] exp(-j 2 pi k n / N).
inline std::vector<cplx> dft(std::span<const double> x) {
  require(x.size() >= 2, "DFT needs at least 2 samples");
  std::vector<double> in(x.begin(), x.end());
  std::vector<cplx> out;
  detail::thread_fft().fwd(out, in);
  return out;
}

inline std::vector<cplx> dft(std::span<const cplx> x) {
  require(x.size() >= 2, "DFT needs at least 2 samples");
  std::vector<cplx> in(x.begin(), x.end());
  std::vector<cplx> out;
  detail::thread_fft().fwd(out, in);
  return out;
}

/// Inverse of dft(), including the 1/N scaling.
inline std::vector<cplx> idft(std::span<const cplx> x) {
  require(x.size() >= 2, "DFT needs at least 2 samples");
  std::vector<cplx> in(x.begin(), x.end());
  std::vector<cplx> out;
  detail::thread_fft().inv(out, in);
  return out;
}

/// Frequency, amplitude and start-of-window phase of the dominant tone in
/// the search band of a Hann-windowed spectrum. `t_center_s` is left for the
/// caller. An estimate is invalid when the in-band peak does not rise 10x
/// above the spectrum noise floor.
inline WindowEstimate ipdft(std::span<const cplx> spectrum, double rate_hz, const FtConfig& cfg) {
  const std::size_t N = spectrum.size();
  require(N >= 16, "IpDFT needs at least 16 bins");
  require(rate_hz > 0.0, "rate_hz must be positive");
  const double df = rate_hz / static_cast<double>(N);
  const auto k_lo = std::max<std::ptrdiff_t>(1, static_cast<std::ptrdiff_t>(std::ceil(cfg.search_lo_hz / df)));
  const auto k_hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(N / 2) - 1,
                                             static_cast<std::ptrdiff_t>(std::floor(cfg.search_hi_hz / df)));
  WindowEstimate est;
  if (k_lo > k_hi) return est;

  std::ptrdiff_t kp = k_lo;
  double peak = -1.0;
  for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k) {
    const double m = std::abs(spectrum[static_cast<std::size_t>(k)]);
    if (m > peak) { peak = m; kp = k; }
  }
  if (!(peak > 0.0) || !std::isfinite(peak) || peak < 10.0 * detail::noise_floor(spectrum))
    return est;

  const double left = std::abs(spectrum[static_cast<std::size_t>(kp - 1)]);
  const double right = std::abs(spectrum[static_cast<std::size_t>(kp + 1)]);
  const double Nd = static_cast<double>(N);

  double delta = 0.0;
  int side = 1;
  if (right > left) {
    side = 1;
    const double a = right / peak;
    delta = (2.0 * a - 1.0) / (1.0 + a);
  } else if (left > right) {
    side = -1;
    const double a = left / peak;
    delta = -(2.0 * a - 1.0) / (1.0 + a);
  }  // tie: bin-centred

  const cplx Xp = spectrum[static_cast<std::size_t>(kp)];
  const double sinc_corr = delta == 0.0 ? 1.0 : std::abs(kPi * delta / std::sin(kPi * delta));
  double amp = 2.0 * peak * sinc_corr * (1.0 - delta * delta) / (0.5 * Nd);
  double phase = std::arg(Xp) - kPi * delta * (Nd - 1.0) / Nd;

  if (cfg.method == IpdftMethod::compensated) {
    const std::ptrdiff_t ks = kp + side;
    const cplx Xs = spectrum[static_cast<std::size_t>(ks)];
    for (int it = 0; it < cfg.refine_iterations; ++it) {
      const double kappa = static_cast<double>(kp) + delta;
      // X[k] = A/2 e^{j phi} W(kappa - k) + A/2 e^{-j phi} W(-kappa - k)
      const cplx image_amp = std::polar(0.5 * amp, -phase);
      const cplx yp = Xp - image_amp * detail::hann_kernel(-kappa - static_cast<double>(kp), N);
      const cplx ys = Xs - image_amp * detail::hann_kernel(-kappa - static_cast<double>(ks), N);
      if (std::abs(yp) == 0.0) break;
      delta = detail::invert_bin_ratio(std::abs(ys) / std::abs(yp), side, delta, N);
      const cplx c = yp / detail::hann_kernel(delta, N);
      amp = 2.0 * std::abs(c);
      phase = std::arg(c);
    }
  }

  est.f_hz = (static_cast<double>(kp) + delta) * df;
  est.amp = amp;
  est.phase_rad = detail::wrap_phase(phase);
  est.valid = std::isfinite(est.f_hz) && std::isfinite(amp) && std::isfinite(est.phase_rad);
  return est;
}

/// Fitted sinusoid evaluated at the window centre.
inline double reconstruct_center(const WindowEstimate& est, double window_s) {
  if (!est.valid) return std::numeric_limits<double>::quiet_NaN();
  return est.amp * std::cos(2.0 * kPi * est.f_hz * window_s / 2.0 + est.phase_rad);
}

/// Window length in samples; must be an even integer number of samples so
/// the centre falls on a sample.
inline std::size_t window_samples(const FtConfig& cfg, double rate_hz) {
  const double exact = cfg.window_s * rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(exact));
  require(std::abs(exact - static_cast<double>(n)) < 1e-6, "window_s * rate_hz must be an integer");
  require(n >= 16, "window must hold at least 16 samples");
  require(n % 2 == 0, "window must hold an even number of samples");
  require(cfg.stride_samples >= 1, "stride must be at least 1");
  return n;
}

/// One estimate per window position. Window j starts at sample j * stride;
/// its centre sits at sample j * stride + N/2.
inline std::vector<WindowEstimate> sliding_estimates(const SampledSignal& x, const FtConfig& cfg) {
  const std::size_t N = window_samples(cfg, x.rate_hz);
  require(x.size() >= N, "signal shorter than one window");
  const std::vector<double> w = hann(N);
  const std::size_t count = (x.size() - N) / cfg.stride_samples + 1;
  std::vector<WindowEstimate> out(count);
  std::vector<double> buf(N);
  std::vector<cplx> spec;
  auto& fft = detail::thread_fft();
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t s = j * cfg.stride_samples;
    for (std::size_t n = 0; n < N; ++n) buf[n] = x.samples[s + n] * w[n];
    fft.fwd(spec, buf);
    out[j] = ipdft(spec, x.rate_hz, cfg);
    out[j].t_center_s = x.time(s + N / 2);
  }
  return out;
}

/// Reconstructed waveform on the window-centre grid (rate / stride). Invalid
/// windows leave NaN gaps.
inline SampledSignal sliding_reconstruct(const SampledSignal& x, const FtConfig& cfg) {
  const std::size_t N = window_samples(cfg, x.rate_hz);
  const auto est = sliding_estimates(x, cfg);
  SampledSignal out;
  out.rate_hz = x.rate_hz / static_cast<double>(cfg.stride_samples);
  out.t0_s = x.time(N / 2);
  out.samples.resize(est.size());
  for (std::size_t j = 0; j < est.size(); ++j) out.samples[j] = reconstruct_center(est[j], cfg.window_s);
  return out;
}

/// Fourier-path three-phase instantaneous power, sum_abc v_F(t) i_F(t), on the
/// window-centre grid. The first and last half windows are trimmed.
inline PowerSeries ft_power(const ThreePhaseSet& v, const ThreePhaseSet& i, const FtConfig& cfg) {
  require(is_aligned(v, i), "voltage and current sets must share timing and length");
  PowerSeries p;
  for (std::size_t ph = 0; ph < 3; ++ph) {
    const SampledSignal vr = sliding_reconstruct(v[ph], cfg);
    const SampledSignal ir = sliding_reconstruct(i[ph], cfg);
    if (ph == 0) {
      p.rate_hz = vr.rate_hz;
      p.t0_s = vr.t0_s;
      p.samples.assign(vr.size(), 0.0);
    }
    for (std::size_t k = 0; k < vr.size(); ++k) p.samples[k] += vr.samples[k] * ir.samples[k];
  }
  return p;
}

}  // namespace hilbertpower::spectral
