#pragma once

// Two-bus network: ideal three-phase source, single-pi line, RL load (one
// uncoupled circuit per phase). Time-domain solution by trapezoidal
// companion models.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hilbertpower/types.hpp"

namespace hilbertpower::circuit {

using cplx = std::complex<double>;

struct PiLineParams {
  double r_ohm_per_m = 0.02e-3;
  double x_ohm_per_m = 0.268e-3;  // at f_nom_hz
  double c_f_per_m = 13.7e-10;
  double length_m = 100e3;
  double f_nom_hz = 50.0;
};

struct LoadParams {
  double p_w = 100e6;
  double pf = 0.9;
  double v_ll_rms_v = 380e3;
  double f_nom_hz = 50.0;
};

/// Parallel RL equivalent per phase. No inductor at unity power factor.
struct LoadBranch {
  double r_ohm = 0.0;
  std::optional<double> l_h;
};

inline double omega(double f_hz) { return 2.0 * 3.14159265358979323846 * f_hz; }

/// Parallel R || L that draws p_w at power factor pf (lagging) from the
/// rated line-to-line voltage.
inline LoadBranch derive_load(const LoadParams& p) {
  require(p.p_w > 0.0, "load power must be positive");
  require(p.pf > 0.0 && p.pf <= 1.0, "load power factor must lie in (0, 1]");
  require(p.v_ll_rms_v > 0.0, "rated voltage must be positive");
  require(p.f_nom_hz > 0.0, "nominal frequency must be positive");
  LoadBranch b;
  const double v2 = p.v_ll_rms_v * p.v_ll_rms_v;
  b.r_ohm = v2 / p.p_w;
  if (p.pf < 1.0) {
    const double q = p.p_w * std::sqrt(1.0 - p.pf * p.pf) / p.pf;
    b.l_h = v2 / q / omega(p.f_nom_hz);
  }
  return b;
}

/// Per-phase lumped elements. Pi shunt capacitance is split evenly between
/// the sending and receiving bus.
struct NetworkDescription {
  double r_line_ohm = 0.0;
  double l_line_h = 0.0;
  double c_shunt_f = 0.0;  // per line end
  LoadBranch load;

  static constexpr std::size_t nodes_per_phase = 2;
  bool direct_connection() const { return r_line_ohm == 0.0 && l_line_h == 0.0; }
};

inline NetworkDescription build_network(const PiLineParams& line, const LoadParams& load) {
  require(line.r_ohm_per_m >= 0.0 && line.x_ohm_per_m >= 0.0 && line.c_f_per_m >= 0.0,
          "line parameters must be non-negative");
  require(line.length_m >= 0.0, "line length must be non-negative");
  require(line.f_nom_hz > 0.0, "line nominal frequency must be positive");
  NetworkDescription n;
  n.r_line_ohm = line.r_ohm_per_m * line.length_m;
  n.l_line_h = line.x_ohm_per_m * line.length_m / omega(line.f_nom_hz);
  n.c_shunt_f = 0.5 * line.c_f_per_m * line.length_m;
  n.load = derive_load(load);
  return n;
}

struct SteadyState {
  cplx v_load;
  cplx i_line;
  cplx i_shunt_recv;
  cplx i_load_l;
  cplx i_shunt_send;
};

/// Sinusoidal steady state for source phasor v_src (peak convention,
/// v(t) = Re(V e^{jwt})). With dt > 0 the reactances are the ones the
/// trapezoidal rule realizes at that step, so the discrete recursion started
/// from this state stays periodic.
inline SteadyState steady_state(const NetworkDescription& net, cplx v_src, double f_hz, double dt_s = 0.0) {
  const double w = omega(f_hz);
  const double s = dt_s > 0.0 ? (2.0 / dt_s) * std::tan(w * dt_s / 2.0) : w;  // warped j*omega
  const cplx jw{0.0, s};
  const cplx y_c = jw * net.c_shunt_f;
  const cplx y_l = net.load.l_h ? 1.0 / (jw * *net.load.l_h) : cplx{};
  const cplx y_recv = y_c + y_l + 1.0 / net.load.r_ohm;
  SteadyState st;
  if (net.direct_connection()) {
    st.v_load = v_src;
  } else {
    const cplx z_s = net.r_line_ohm + jw * net.l_line_h;
    st.v_load = v_src / (1.0 + z_s * y_recv);
  }
  st.i_shunt_recv = y_c * st.v_load;
  st.i_load_l = y_l * st.v_load;
  st.i_line = y_recv * st.v_load;
  st.i_shunt_send = y_c * v_src;
  return st;
}

/// Initial condition from a sinusoidal steady state at f_hz. `source[p]` is
/// the complex peak phasor of phase p such that the source equals
/// Re(V e^{jwt}) around t = t0.
struct InitialPhasors {
  double f_hz = 50.0;
  std::array<cplx, 3> source{};
};

struct SimulationOptions {
  /// Empty: all states start at zero (energization transient included).
  std::optional<InitialPhasors> initial;
};

struct SimulationResult {
  ThreePhaseSet v_load;
  ThreePhaseSet i_line;
  ThreePhaseSet i_source;
  ThreePhaseSet i_load;  // into the R || L load
};

namespace detail {

struct PhaseState {
  double vs = 0, vr = 0, i_line = 0, i_cr = 0, i_ll = 0, i_cs = 0;
};

inline PhaseState state_at(const SteadyState& st, cplx v_src, double w, double t) {
  const cplx rot = std::polar(1.0, w * t);
  PhaseState ps;
  ps.vs = (v_src * rot).real();
  ps.vr = (st.v_load * rot).real();
  ps.i_line = (st.i_line * rot).real();
  ps.i_cr = (st.i_shunt_recv * rot).real();
  ps.i_ll = (st.i_load_l * rot).real();
  ps.i_cs = (st.i_shunt_send * rot).real();
  return ps;
}

}  // namespace detail

/// Drives the network with an ideal source and returns receiving-bus
/// voltage, line current (into the receiving bus), source current and load
/// current.
inline SimulationResult simulate(const NetworkDescription& net, const ThreePhaseSet& source,
                                 const SimulationOptions& opt = {}) {
  require(is_aligned(source), "source phases must share timing");
  require(source.a.rate_hz > 0.0, "source rate must be positive");
  require(net.load.r_ohm > 0.0, "load resistance must be positive");
  const double dt = 1.0 / source.a.rate_hz;
  const std::size_t n = source.a.size();

  const double gc = 2.0 * net.c_shunt_f / dt;
  const double gl = net.load.l_h ? dt / (2.0 * *net.load.l_h) : 0.0;
  const double gr = 1.0 / net.load.r_ohm;
  const bool direct = net.direct_connection();
  const double zs = net.r_line_ohm + 2.0 * net.l_line_h / dt;
  const double gs = direct ? 0.0 : 1.0 / zs;
  const double gs_hist = direct ? 0.0 : gs * (2.0 * net.l_line_h / dt - net.r_line_ohm);
  const double g_total = gs + gc + gl + gr;
  if (!(g_total > 0.0) || !std::isfinite(g_total)) throw std::runtime_error("singular nodal matrix");

  SimulationResult out;
  for (auto* set : {&out.v_load, &out.i_line, &out.i_source, &out.i_load})
    for (std::size_t p = 0; p < 3; ++p) (*set)[p] = SampledSignal{source.a.rate_hz, source.a.t0_s, std::vector<double>(n)};

  for (std::size_t p = 0; p < 3; ++p) {
    detail::PhaseState prev;
    if (opt.initial) {
      const cplx vsrc = opt.initial->source[p];
      const SteadyState st = steady_state(net, vsrc, opt.initial->f_hz, dt);
      prev = detail::state_at(st, vsrc, omega(opt.initial->f_hz), -dt);
    }
    const auto& vs = source[p].samples;
    auto& vr_out = out.v_load[p].samples;
    auto& il_out = out.i_line[p].samples;
    auto& is_out = out.i_source[p].samples;
    auto& ild_out = out.i_load[p].samples;
    for (std::size_t k = 0; k < n; ++k) {
      detail::PhaseState cur;
      cur.vs = vs[k];
      const double h_c = -gc * prev.vr - prev.i_cr;
      const double h_l = prev.i_ll + gl * prev.vr;
      if (direct) {
        cur.vr = cur.vs;
      } else {
        const double h_s = gs * (prev.vs - prev.vr) + gs_hist * prev.i_line;
        cur.vr = (gs * cur.vs + h_s - h_c - h_l) / g_total;
        cur.i_line = gs * (cur.vs - cur.vr) + h_s;
      }
      cur.i_cr = gc * cur.vr + h_c;
      cur.i_ll = gl * cur.vr + h_l;
      if (direct) cur.i_line = cur.i_cr + cur.i_ll + gr * cur.vr;
      const double h_cs = -gc * prev.vs - prev.i_cs;
      cur.i_cs = gc * cur.vs + h_cs;
      vr_out[k] = cur.vr;
      il_out[k] = cur.i_line;
      is_out[k] = cur.i_line + cur.i_cs;
      ild_out[k] = gr * cur.vr + cur.i_ll;
      prev = cur;
    }
  }
  return out;
}

}  // namespace hilbertpower::circuit
