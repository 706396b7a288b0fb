#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <vector>

#include "hilbertpower/circuit.hpp"
#include "hilbertpower/signals.hpp"
#include "hilbertpower/spectral.hpp"
#include "oracles.hpp"

using namespace hilbertpower;
using namespace hilbertpower::spectral;

namespace {

constexpr double kRate = 10e3;
constexpr std::size_t kN = 2000;

std::vector<double> tone(double amp, double f, double phi, std::size_t n, double rate = kRate) {
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = amp * std::cos(2.0 * oracle::kPi * f * k / rate + phi);
  return x;
}

std::vector<cplx> windowed_spectrum(const std::vector<double>& x) {
  const auto w = hann(x.size());
  std::vector<double> xw(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) xw[k] = x[k] * w[k];
  return dft(xw);
}

double max_rel(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double scale = 0.0, err = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    scale = std::max(scale, std::abs(b[k]));
    err = std::max(err, std::abs(a[k] - b[k]));
  }
  return err / scale;
}

FtConfig config(IpdftMethod m = IpdftMethod::compensated) {
  FtConfig c;
  c.method = m;
  return c;
}

}  // namespace

TEST(Hann, ClosedFormAndCoherentGain) {
  const auto w = hann(4);
  ASSERT_EQ(w.size(), 4u);
  EXPECT_DOUBLE_EQ(w[0], 0.0);
  EXPECT_NEAR(w[1], 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(w[2], 1.0);
  EXPECT_NEAR(w[3], 0.5, 1e-15);
  for (std::size_t n : {16u, 2000u, 2001u}) {
    const auto v = hann(n);
    EXPECT_EQ(v[0], 0.0);
    EXPECT_NEAR(oracle::mean(v), 0.5, 1e-14) << n;
  }
  EXPECT_THROW(hann(1), std::invalid_argument);
}

TEST(Dft, ConstantInput) {
  const std::vector<double> x(kN, 3.25);
  const auto X = dft(x);
  EXPECT_NEAR(X[0].real(), kN * 3.25, 1e-12 * kN * 3.25);
  for (std::size_t k = 1; k < kN; ++k) ASSERT_LT(std::abs(X[k]), 1e-12 * kN * 3.25) << k;
}

TEST(Dft, BinCentredCosine) {
  const auto X = dft(tone(1.0, 50.0, 0.0, kN));
  EXPECT_NEAR(std::abs(X[10] - cplx(kN / 2.0, 0.0)) / (kN / 2.0), 0.0, 1e-9);
  EXPECT_NEAR(kRate / kN, 5.0, 0.0);
}

TEST(Dft, MatchesNaiveSum) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (std::size_t n : {16u, 128u, 2000u}) {
    std::vector<double> xr(n);
    std::vector<cplx> xc(n);
    for (std::size_t k = 0; k < n; ++k) {
      xr[k] = g(rng);
      xc[k] = {g(rng), g(rng)};
    }
    EXPECT_LT(max_rel(dft(xr), oracle::naive_dft(xr)), 1e-9) << n;
    EXPECT_LT(max_rel(dft(xc), oracle::naive_dft(xc)), 1e-9) << n;
    const auto back = idft(dft(xc));
    EXPECT_LT(max_rel(back, xc), 1e-12) << n;
  }
}

TEST(Ipdft, OnBinToneIsExact) {
  const auto est = ipdft(windowed_spectrum(tone(2.0, 50.0, 0.3, kN)), kRate, config());
  ASSERT_TRUE(est.valid);
  EXPECT_NEAR(est.f_hz, 50.0, 1e-12);
  EXPECT_NEAR(est.amp, 2.0, 1e-9 * 2.0);
  EXPECT_NEAR(est.phase_rad, 0.3, 1e-9);
}

TEST(Ipdft, MidpointToneWithinTolerance) {
  const double phi = -1.1;
  const auto est = ipdft(windowed_spectrum(tone(1.0, 52.5, phi, kN)), kRate, config());
  ASSERT_TRUE(est.valid);
  EXPECT_LT(std::abs(est.f_hz - 52.5), 1e-6);
  EXPECT_LT(std::abs(est.amp - 1.0), 1e-6);
  EXPECT_LT(std::abs(std::remainder(est.phase_rad - phi, 2.0 * oracle::kPi)), 1e-5);
}

TEST(Ipdft, OffsetSweepAcrossHalfBin) {
  for (int s = -50; s <= 50; ++s) {
    const double delta = s / 100.0;
    const double f = 50.0 + 5.0 * delta;
    for (double phi : {0.0, 0.7, 2.9}) {
      const auto est = ipdft(windowed_spectrum(tone(1.0, f, phi, kN)), kRate, config());
      ASSERT_TRUE(est.valid);
      ASSERT_LT(std::abs(est.f_hz - f), 1e-6) << "delta=" << delta << " phi=" << phi;
      ASSERT_LT(std::abs(est.amp - 1.0), 1e-6) << "delta=" << delta << " phi=" << phi;
    }
  }
}

TEST(Ipdft, TwoPointEstimateCarriesImageBias) {
  // The plain two-bin formula ignores the negative-frequency image; its
  // error at an off-bin tone is larger than the refined estimate's.
  double worst_two = 0.0, worst_ref = 0.0;
  for (double phi : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
    const auto X = windowed_spectrum(tone(1.0, 51.3, phi, kN));
    worst_two = std::max(worst_two, std::abs(ipdft(X, kRate, config(IpdftMethod::two_point)).f_hz - 51.3));
    worst_ref = std::max(worst_ref, std::abs(ipdft(X, kRate, config()).f_hz - 51.3));
  }
  EXPECT_GT(worst_two, 10.0 * worst_ref);
  EXPECT_LT(worst_two, 0.05);
}

TEST(Ipdft, MonteCarloAtEightyDb) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uphi(-oracle::kPi, oracle::kPi);
  const double sigma = (1.0 / std::sqrt(2.0)) * std::pow(10.0, -80.0 / 20.0);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<double> err;
  for (int trial = 0; trial < 1000; ++trial) {
    auto x = tone(1.0, 52.5, uphi(rng), kN);
    for (double& v : x) v += noise(rng);
    const auto est = ipdft(windowed_spectrum(x), kRate, config());
    ASSERT_TRUE(est.valid);
    err.push_back(std::abs(est.f_hz - 52.5));
  }
  EXPECT_LT(oracle::percentile(err, 0.95), 1e-3);
}

TEST(Ipdft, InvalidWithoutDominantTone) {
  const std::vector<double> zero(kN, 0.0);
  EXPECT_FALSE(ipdft(windowed_spectrum(zero), kRate, config()).valid);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> noise(kN);
  for (double& v : noise) v = g(rng);
  EXPECT_FALSE(ipdft(windowed_spectrum(noise), kRate, config()).valid);

  // A strong tone outside the search band does not count.
  EXPECT_FALSE(ipdft(windowed_spectrum(tone(1.0, 400.0, 0.0, kN)), kRate, config()).valid);
}

TEST(ReconstructCenter, Cases) {
  WindowEstimate e{50.0, 2.0, 0.4, 0.0, true};
  EXPECT_NEAR(reconstruct_center(e, 0.2), 2.0 * std::cos(2.0 * oracle::kPi * 50.0 * 0.1 + 0.4), 1e-15);
  e.amp = 0.0;
  EXPECT_EQ(reconstruct_center(e, 0.2), 0.0);
  e.valid = false;
  EXPECT_TRUE(std::isnan(reconstruct_center(e, 0.2)));

  const auto x = tone(1.5, 50.0, 0.9, kN);
  const auto est = ipdft(windowed_spectrum(x), kRate, config());
  EXPECT_NEAR(reconstruct_center(est, 0.2), 1.5 * std::cos(2.0 * oracle::kPi * 50.0 * 0.1 + 0.9), 1e-9 * 1.5);
}

TEST(Sliding, ReconstructionTracksOffBinTone) {
  const std::size_t L = 6000;
  const SampledSignal x{kRate, 0.0, tone(1.0, 52.5, 0.25, L)};
  const auto r = sliding_reconstruct(x, config());
  ASSERT_EQ(r.size(), L - kN + 1);
  EXPECT_DOUBLE_EQ(r.rate_hz, kRate);
  EXPECT_DOUBLE_EQ(r.t0_s, 0.1);
  double worst = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    const double truth = std::cos(2.0 * oracle::kPi * 52.5 * r.time(j) + 0.25);
    worst = std::max(worst, std::abs(r.samples[j] - truth));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Sliding, StrideGridAndTimestamps) {
  const std::size_t L = 5003;
  const SampledSignal x{kRate, 1.0, tone(1.0, 50.0, 0.0, L)};
  FtConfig cfg = config();
  cfg.stride_samples = 7;
  const auto est = sliding_estimates(x, cfg);
  ASSERT_EQ(est.size(), (L - kN) / 7 + 1);
  for (std::size_t j = 0; j < est.size(); ++j)
    ASSERT_NEAR(est[j].t_center_s, 1.0 + (j * 7 + kN / 2) / kRate, 1e-12);
  const auto r = sliding_reconstruct(x, cfg);
  EXPECT_DOUBLE_EQ(r.rate_hz, kRate / 7.0);
  EXPECT_NEAR(r.t0_s, 1.1, 1e-12);
  for (std::size_t j = 0; j < r.size(); ++j) ASSERT_NEAR(r.time(j), est[j].t_center_s, 1e-9);
}

TEST(Sliding, InvalidWindowsLeaveGaps) {
  SampledSignal x{kRate, 0.0, std::vector<double>(3000, 0.0)};
  const auto r = sliding_reconstruct(x, config());
  for (double v : r.samples) ASSERT_TRUE(std::isnan(v));
}

TEST(FtPower, RatedSteadyCase) {
  const auto net = circuit::build_network({}, {});
  const double vph = signals::phase_peak_from_line_rms(380e3);
  const auto ref = oracle::two_bus_phasors(1.0, 50.0, net.r_line_ohm, net.l_line_h, net.c_shunt_f, net.load.r_ohm,
                                           *net.load.l_h);
  const double amp = vph / std::abs(ref.v_recv);
  signals::ScenarioSpec s;
  s.a0 = amp;
  s.duration_s = 1.0;
  s.segments = {{signals::SegmentKind::steady, 0.0, 1.0}};
  const auto src = signals::three_phase(s);
  circuit::SimulationOptions opt;
  circuit::InitialPhasors ip;
  const auto phis = signals::phase_offsets(0.0);
  for (std::size_t p = 0; p < 3; ++p) ip.source[p] = std::polar(amp, phis[p]);
  opt.initial = ip;
  const auto r = circuit::simulate(net, src, opt);
  FtConfig cfg = config();
  cfg.stride_samples = 10;
  const auto p = ft_power(r.v_load, r.i_load, cfg);
  for (double v : p.samples) ASSERT_NEAR(v, 100e6, 0.005 * 100e6);
}

TEST(FtPower, InputValidation) {
  SampledSignal a{kRate, 0.0, tone(1.0, 50.0, 0.0, 3000)};
  ThreePhaseSet v{a, a, a};
  ThreePhaseSet i = v;
  i.b.samples.pop_back();
  EXPECT_THROW(ft_power(v, i, config()), std::invalid_argument);

  FtConfig bad = config();
  bad.window_s = 0.20005;
  EXPECT_THROW(window_samples(bad, kRate), std::invalid_argument);
  bad.window_s = 0.0015;
  EXPECT_THROW(window_samples(bad, kRate), std::invalid_argument);
  bad.window_s = 0.2;
  bad.stride_samples = 0;
  EXPECT_THROW(window_samples(bad, kRate), std::invalid_argument);
  SampledSignal short_x{kRate, 0.0, std::vector<double>(100, 1.0)};
  EXPECT_THROW(sliding_estimates(short_x, config()), std::invalid_argument);
}
