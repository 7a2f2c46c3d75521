#pragma once

#include <string>

#include "hmg/sstate.hpp"

namespace hmg {

/// Interlinking converter: swing-equation power control over a dq power
/// circuit with a DC-link capacitor; inner loops reuse the VSC structure.
struct IcParams {
    double r_f = 0.01, l_f = 0.03, c_f = 20e-6; ///< AC-side filter
    double c_dc = 0.01;                         ///< DC-link capacitance, F
    double j = 0.2;      ///< virtual inertia (2J appears in denominators)
    double k_d = 10.0;   ///< damping, W s/rad
    double p_ref = 0.0;  ///< power order, W
    double w_g_star = 314.15926535897931; ///< frequency setpoint, rad/s
    double m_d0 = 0.0, m_q0 = 0.0; ///< modulation indices at the point (derived when an equilibrium is solved)
    double k_pv = 1.0, k_iv = 33.0, k_pc = 0.2, k_ic = 120.0, h_ff = 0.75; ///< reused inner loops
    double v_nom = 380.0; ///< AC voltage setpoint for the inner voltage loop, V
};

struct IcOperatingPoint {
    double v_dc0 = 800.0;
    double i_icd0 = 0.0, i_icq0 = 0.0;
    double v_icd0 = 380.0, v_icq0 = 0.0;
    double i_od0 = 0.0, i_oq0 = 0.0;
    double w0 = 314.15926535897931;
};

struct IcSpec {
    IcParams params;
    IcOperatingPoint op;
    std::string name;
    std::string ac_bus;
    std::string dc_bus;
    double r_link_ac = 0.05; ///< resistive coupling of the AC port to its bus, ohm
    double r_link_dc = 0.05; ///< resistive coupling of the DC link to its bus, ohm
};

void validate(const IcParams& p);

/// 5-state power circuit with exogenous modulation. States
/// [i_icd, i_icq, v_icd, v_icq, v_dc], inputs [m_d, m_q, i_od, i_oq, w, i_odc].
Lti build_ic_power_circuit(const IcParams& p, const IcOperatingPoint& op);

/// 11-state converter: power circuit + swing states [w_vsm, delta] + reused
/// voltage/current loops [phi_d, phi_q, gamma_d, gamma_q]; the modulation is
/// closed through the inner loops and the circuit frequency input is the
/// swing frequency. Inputs [i_od, i_oq, i_odc], all states as outputs.
Lti build_ic(const IcParams& p, const IcOperatingPoint& op);

} // namespace hmg
