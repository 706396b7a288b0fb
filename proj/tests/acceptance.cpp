// Acceptance suite. Prints one PASS/FAIL line per criterion; `--criterion N`
// runs a single one. Exit status is non-zero if any selected criterion fails.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hilbertpower/analytic.hpp"
#include "hilbertpower/circuit.hpp"
#include "hilbertpower/cli.hpp"
#include "hilbertpower/config.hpp"
#include "hilbertpower/pipeline.hpp"
#include "hilbertpower/presets.hpp"
#include "hilbertpower/spectral.hpp"
#include "oracles.hpp"

using namespace hilbertpower;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream o;
  o << std::setprecision(4) << v;
  return o.str();
}

pipeline::PowerComparison run_preset(const std::string& name) {
  const auto c = config::preset_config(name);
  return pipeline::run_scenario(c.scenario, c.circuit, c.ft, c.ht);
}

Outcome ratio_case(const std::string& name, double ft_lo, double ft_hi) {
  const auto s = run_preset(name).summary;
  const bool ok = s.error_ratio < 1e-3 && s.max_abs_ft_w >= ft_lo && s.max_abs_ft_w <= ft_hi;
  return {ok, "ratio=" + num(s.error_ratio) + " (< 1e-3), max|err_ft|=" + num(s.max_abs_ft_w / 1e6) + " MW (in [" +
                  num(ft_lo / 1e6) + ", " + num(ft_hi / 1e6) + "]), max|err_ht|=" + num(s.max_abs_ht_w / 1e6) + " MW"};
}

Outcome c1() { return ratio_case("am", 5e6, 200e6); }
Outcome c2() { return ratio_case("ramp", 1e6, 100e6); }

Outcome c3() {
  const auto cfg = config::preset_config("step");
  const auto c = pipeline::run_scenario(cfg.scenario, cfg.circuit, cfg.ft, cfg.ht);
  const auto& seg = cfg.scenario.segments.front();
  const double t_step = seg.t_start_s + seg.t_step_s;
  const auto& s = c.summary;
  // Burst: contiguous span around the peak where the |err_ft| envelope (running
  // max over one nominal cycle) stays above -20 dB of the peak.
  const auto& e = c.err_ft.samples;
  std::size_t kmax = 0;
  for (std::size_t k = 0; k < e.size(); ++k)
    if (std::abs(e[k]) > std::abs(e[kmax])) kmax = k;
  const auto half = static_cast<std::size_t>(std::llround(0.5 / cfg.scenario.f0_hz * c.err_ft.rate_hz));
  std::vector<double> env(e.size());
  for (std::size_t k = 0; k < e.size(); ++k)
    for (std::size_t m = k > half ? k - half : 0; m <= std::min(e.size() - 1, k + half); ++m)
      env[k] = std::max(env[k], std::abs(e[m]));
  const double thr = 0.1 * std::abs(e[kmax]);
  std::size_t a = kmax, b = kmax;
  while (a > 0 && env[a - 1] >= thr) --a;
  while (b + 1 < e.size() && env[b + 1] >= thr) ++b;
  const double width = c.err_ft.time(b) - c.err_ft.time(a);
  const double dt_peak = s.t_max_ft_s - t_step;
  const bool ok = s.error_ratio < 1e-3 && std::abs(dt_peak) <= 0.020 && std::abs(width - 0.2) <= 0.010;
  return {ok, "ratio=" + num(s.error_ratio) + " (< 1e-3), FT peak at t=" + num(s.t_max_ft_s) + " s (step " +
                  num(t_step) + " s, |dt| <= 20 ms), burst width=" + num(width * 1e3) + " ms (200 +- 10 ms)"};
}

Outcome c4() {
  double worst_identity = 0.0, worst_p2 = 0.0;
  bool sum_exact = true;
  for (const auto& info : signals::preset_catalog()) {
    const auto cfg = config::preset_config(info.name);
    const auto m = pipeline::detail::drive(cfg.scenario, cfg.circuit);
    const auto p_true = pipeline::true_power(m.v, m.i);
    std::array<AnalyticSignal, 3> va, ia;
    for (std::size_t p = 0; p < 3; ++p) {
      va[p] = analytic::hilbert_fft_oracle(m.v[p]);
      ia[p] = analytic::hilbert_fft_oracle(m.i[p]);
    }
    const auto pp = analytic::power_products(va, ia);
    double scale = 0.0, err = 0.0;
    for (std::size_t k = 0; k < pp.p3.size(); ++k) {
      if (pp.p3[k] != pp.p1[k] + pp.p2[k]) sum_exact = false;
      scale = std::max(scale, std::abs(p_true.samples[k]));
      err = std::max(err, std::abs(0.5 * pp.p3[k].real() - p_true.samples[k]));
    }
    worst_identity = std::max(worst_identity, err / scale);
    if (info.name == "steady") {
      const auto ref = pp.p2[pp.p2.size() / 2];
      for (const auto& v : pp.p2) worst_p2 = std::max(worst_p2, std::abs(v - ref) / std::abs(ref));
    }
  }
  const bool ok = worst_identity < 1e-9 && sum_exact && worst_p2 < 1e-9;
  return {ok, "worst |real(p3)/2 - p|/max|p|=" + num(worst_identity) + " (< 1e-9), p3==p1+p2: " +
                  (sum_exact ? "exact" : "NOT exact") + ", steady p2 spread=" + num(worst_p2) + " (< 1e-9)"};
}

std::vector<spectral::cplx> hann_spectrum(const std::vector<double>& x) {
  const auto w = spectral::hann(x.size());
  std::vector<double> xw(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) xw[k] = x[k] * w[k];
  return spectral::dft(xw);
}

Outcome c5() {
  constexpr double rate = 10e3, f = 52.5;
  constexpr std::size_t N = 2000;
  const spectral::FtConfig cfg;
  std::vector<double> x(N);
  for (std::size_t k = 0; k < N; ++k) x[k] = std::cos(2.0 * oracle::kPi * f * k / rate + 0.3);
  const auto clean = spectral::ipdft(hann_spectrum(x), rate, cfg);
  const double ferr = std::abs(clean.f_hz - f), aerr = std::abs(clean.amp - 1.0);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uphi(-oracle::kPi, oracle::kPi);
  std::normal_distribution<double> noise(0.0, std::pow(10.0, -80.0 / 20.0) / std::sqrt(2.0));
  std::vector<double> errs;
  for (int t = 0; t < 1000; ++t) {
    const double phi = uphi(rng);
    for (std::size_t k = 0; k < N; ++k) x[k] = std::cos(2.0 * oracle::kPi * f * k / rate + phi) + noise(rng);
    const auto est = spectral::ipdft(hann_spectrum(x), rate, cfg);
    errs.push_back(est.valid ? std::abs(est.f_hz - f) : 1e9);
  }
  const double p95 = oracle::percentile(errs, 0.95);
  const bool ok = clean.valid && ferr < 1e-6 && aerr < 1e-6 && p95 < 1e-3;
  return {ok, "noiseless |df|=" + num(ferr) + " Hz (< 1e-6), |dA|/A=" + num(aerr) + " (< 1e-6), 80 dB p95 |df|=" +
                  num(p95 * 1e3) + " mHz (< 1) over 1000 windows"};
}

Outcome c6() {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (std::size_t n : {16u, 128u, 2000u}) {
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<double> x(n);
      for (double& v : x) v = g(rng);
      const auto fast = spectral::dft(x);
      const auto slow = oracle::naive_dft(x);
      double scale = 0.0, err = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        scale = std::max(scale, std::abs(slow[k]));
        err = std::max(err, std::abs(fast[k] - slow[k]));
      }
      worst = std::max(worst, err / scale);
    }
  }
  return {worst < 1e-9, "worst relative deviation=" + num(worst) + " (< 1e-9), N in {16,128,2000} x 10"};
}

Outcome c7() {
  const auto net = circuit::build_network({}, {});
  const double rate = 10e3;
  const double vph = signals::phase_peak_from_line_rms(380e3);
  auto oracle_for = [&](std::complex<double> v) {
    return oracle::two_bus_phasors(v, 50.0, net.r_line_ohm, net.l_line_h, net.c_shunt_f, net.load.r_ohm,
                                   *net.load.l_h);
  };
  auto run = [&](double amp) {
    signals::ScenarioSpec s;
    s.a0 = amp;
    s.duration_s = 1.0;
    s.segments = {signals::make_segment(signals::SegmentKind::steady, 0.0, 1.0)};
    circuit::SimulationOptions opt;
    circuit::InitialPhasors ip;
    const auto phis = signals::phase_offsets(0.0);
    for (std::size_t p = 0; p < 3; ++p) ip.source[p] = std::polar(amp, phis[p]);
    opt.initial = ip;
    return circuit::simulate(net, signals::three_phase(s), opt);
  };

  // Fidelity at the rated source amplitude.
  const auto r = run(vph);
  const auto phis = signals::phase_offsets(0.0);
  double worst_v = 0.0, worst_i = 0.0;
  for (std::size_t p = 0; p < 3; ++p) {
    const auto ref = oracle_for(std::polar(vph, phis[p]));
    std::vector<double> dv(r.v_load[p].size()), di(dv.size());
    for (std::size_t k = 0; k < dv.size(); ++k) {
      const auto rot = std::polar(1.0, 2.0 * oracle::kPi * 50.0 * k / rate);
      dv[k] = r.v_load[p].samples[k] - (ref.v_recv * rot).real();
      di[k] = r.i_line[p].samples[k] - (ref.i_line * rot).real();
    }
    worst_v = std::max(worst_v, oracle::rms(dv) / (std::abs(ref.v_recv) / std::sqrt(2.0)));
    worst_i = std::max(worst_i, oracle::rms(di) / (std::abs(ref.i_line) / std::sqrt(2.0)));
  }

  // Load power at rated receiving voltage.
  const double amp = vph / std::abs(oracle_for(1.0).v_recv);
  const auto q = run(amp);
  double p_load = 0.0;
  std::complex<double> s1;
  auto fundamental = [&](const std::vector<double>& x) {
    std::complex<double> acc;
    for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * std::polar(1.0, -2.0 * oracle::kPi * 50.0 * k / rate);
    return 2.0 * acc / static_cast<double>(x.size());
  };
  for (std::size_t p = 0; p < 3; ++p) {
    std::vector<double> vi(q.v_load[p].size());
    for (std::size_t k = 0; k < vi.size(); ++k) vi[k] = q.v_load[p].samples[k] * q.i_load[p].samples[k];
    p_load += oracle::mean(vi);
    s1 += 0.5 * fundamental(q.v_load[p].samples) * std::conj(fundamental(q.i_load[p].samples));
  }
  const double pf = s1.real() / std::abs(s1);
  const bool ok = worst_v < 1e-3 && worst_i < 1e-3 && std::abs(p_load - 100e6) <= 2e6 && std::abs(pf - 0.9) <= 0.01;
  return {ok, "load-voltage RMS dev=" + num(worst_v * 100) + "%, line-current RMS dev=" + num(worst_i * 100) +
                  "% (< 0.1%), P=" + num(p_load / 1e6) + " MW (100 +- 2), pf=" + num(pf) + " (0.9 +- 0.01)"};
}

struct ExportedResponse {
  std::vector<std::pair<double, double>> rows;
};

ExportedResponse export_response(std::size_t order, const fs::path& dir) {
  const std::string o = std::to_string(order), d = dir.string();
  const char* argv[] = {"hilbertpower", "filter-response", "--order", o.c_str(), "--out", d.c_str()};
  std::ostringstream out, err;
  if (cli::run_cli(6, argv, out, err) != 0) throw std::runtime_error("filter-response failed: " + err.str());
  std::ifstream in(dir / "filter_response.csv");
  std::string line;
  std::getline(in, line);
  ExportedResponse r;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    r.rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return r;
}

Outcome c8() {
  const fs::path dir = fs::temp_directory_path() / "hilbertpower_acceptance_filter";
  fs::remove_all(dir);
  const analytic::FilterRequest req;
  const double lo = req.passband_lo_hz, hi = req.passband_hi_hz;
  std::vector<double> atten;
  double ripple = 0.0;
  for (std::size_t order : {31u, 63u, 127u}) {
    const auto r = export_response(order, dir);
    double pmax = -1e300, pmin = 1e300, nmax = -1e300;
    for (const auto& [f, db] : r.rows) {
      if (f >= lo && f <= hi) { pmax = std::max(pmax, db); pmin = std::min(pmin, db); }
      if (f >= -hi && f <= -lo) nmax = std::max(nmax, db);
    }
    if (order == 31) ripple = pmax - pmin;
    atten.push_back(-nmax);
  }
  const bool mono = atten[0] < atten[1] && atten[1] < atten[2];
  const bool ok = ripple <= 0.1 && atten[0] >= 60.0 && mono;
  return {ok, "band " + num(lo) + "-" + num(hi) + " Hz, order 31 ripple=" + num(ripple) +
                  " dB (<= 0.1), negative attenuation 31/63/127=" + num(atten[0]) + "/" + num(atten[1]) + "/" +
                  num(atten[2]) + " dB (>= 60 at 31, increasing)"};
}

Outcome c9() {
  // One-second single tone sweeping down from 50 Hz at -6.25 Hz/s.
  signals::ScenarioSpec s;
  s.duration_s = 1.0;
  s.a0 = 1.0;
  auto seg = signals::make_segment(signals::SegmentKind::frequency_ramp, 0.0, 1.0);
  seg.ramp_rate_hz_per_s = -6.25;
  s.segments = {seg};
  const auto x = signals::compose(s);
  const auto X = spectral::dft(x.samples);
  const double df = x.rate_hz / static_cast<double>(X.size());
  double total = 0.0, inside = 0.0;
  for (std::size_t k = 1; 2 * k < X.size(); ++k) {
    const double e = std::norm(X[k]);
    total += e;
    const double f = k * df;
    if (f >= 48.0 && f <= 52.0) inside += e;
  }
  const double outside = 1.0 - inside / total;
  return {outside > 0.5, "energy outside 48-52 Hz=" + num(outside * 100) + "% (> 50%), inside=" +
                             num(inside / total * 100) + "%"};
}

Outcome c10() {
  const fs::path base = fs::temp_directory_path() / "hilbertpower_acceptance_determinism";
  fs::remove_all(base);
  std::vector<std::string> bytes;
  for (const char* sub : {"first", "second"}) {
    const std::string d = (base / sub).string();
    const char* argv[] = {"hilbertpower", "preset", "step", "--seed", "12345", "--out", d.c_str()};
    std::ostringstream out, err;
    if (cli::run_cli(7, argv, out, err) != 0) return {false, "run failed: " + err.str()};
    std::ifstream in(base / sub / "step_series.csv", std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    bytes.push_back(ss.str());
  }
  const bool ok = !bytes[0].empty() && bytes[0] == bytes[1];
  return {ok, "step preset, seed 12345: " + std::to_string(bytes[0].size()) + " bytes, " +
                  (ok ? "identical" : "DIFFERENT")};
}

const std::vector<std::pair<const char*, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<const char*, std::function<Outcome()>>> list = {
      {"AM error ratio", c1},
      {"ramp error ratio", c2},
      {"step error ratio, peak time and burst width", c3},
      {"power identity with the FFT analytic signal", c4},
      {"IpDFT accuracy", c5},
      {"DFT oracle equivalence", c6},
      {"two-bus circuit fidelity and rated load", c7},
      {"analytic filter response", c8},
      {"spectral spread of a frequency ramp", c9},
      {"byte-identical reruns", c10},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int a = 1; a < argc; ++a) {
    if (std::string(argv[a]) == "--criterion" && a + 1 < argc) only = std::atoi(argv[++a]);
  }
  const auto& list = criteria();
  if (only < 0 || only > static_cast<int>(list.size())) {
    std::cerr << "criterion must be between 1 and " << list.size() << '\n';
    return 2;
  }
  bool all = true;
  for (std::size_t k = 0; k < list.size(); ++k) {
    if (only != 0 && static_cast<int>(k + 1) != only) continue;
    Outcome o;
    try {
      o = list[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << k + 1 << " (" << list[k].first
              << "): " << o.detail << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
