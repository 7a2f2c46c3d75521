#pragma once

#include <string>

#include "hmg/sstate.hpp"

namespace hmg {

/// dq-frame voltage-source converter parameters (per phase).
struct VscParams {
    double r_f = 0.01, l_f = 0.03, c_f = 20e-6; ///< LCL filter, converter side
    double r_o = 0.01, l_o = 0.05;              ///< coupling to the PCC
    double k_pv = 1.0, k_iv = 33.0;             ///< voltage PI
    double k_pc = 0.2, k_ic = 120.0;            ///< current PI
    double h_ff = 0.75;                         ///< output-current feedforward
    double w_f = 62.83185307179586;             ///< power filter cutoff, rad/s
    double m_p = 1e-4;                          ///< frequency droop, rad/s/W
    double n_q = 1e-3;                          ///< voltage droop, V/var
    double w_n = 314.15926535897931;            ///< nominal frequency, rad/s
    double v_nom = 380.0;                       ///< d-axis voltage setpoint, V
};

struct VscOperatingPoint {
    double v_od0 = 380.0, v_oq0 = 0.0;
    double i_od0 = 0.0, i_oq0 = 0.0;
    double i_invd0 = 0.0, i_invq0 = 0.0;
    double w0 = 314.15926535897931;
};

struct VscSpec {
    VscParams params;
    VscOperatingPoint op;
    std::string name;
    std::string bus;
};

void validate(const VscParams& p);

/// 6-state LCL circuit in the rotating frame. States
/// [i_invd, i_invq, i_od, i_oq, v_od, v_oq], inputs
/// [v_invd, v_invq, v_gd, v_gq, w], all states as outputs.
Lti build_vsc_power_circuit(const VscParams& p, const VscOperatingPoint& op);

/// Full 13-state converter: droop power controller (three filtered/integrated
/// states theta, P, Q), cascaded voltage and current loops, LCL circuit.
/// States [theta, P, Q, phi_d, phi_q, gamma_d, gamma_q, i_invd, i_invq,
/// i_od, i_oq, v_od, v_oq]; inputs [v_bd, v_bq, w_com]; outputs all states
/// plus [w, i_od_out, i_oq_out].
Lti build_vsc(const VscSpec& spec);

} // namespace hmg
