#pragma once

#include <string>

#include "hmg/sstate.hpp"

namespace hmg {

/// Filter and connector elements of one DC-DC converter.
struct DcFilterParams {
    double r_f = 0.01;  ///< filter resistance, ohm
    double l_f = 0.03;  ///< filter inductance, H
    double c_f = 20e-6; ///< filter capacitance, F
    double r_o = 0.01;  ///< connector resistance, ohm
    double l_o = 0.05;  ///< connector inductance, H
};

struct DcControllerParams {
    double k_pv = 1.0;   ///< voltage PI, proportional
    double k_iv = 33.0;  ///< voltage PI, integral
    double k_pc = 0.2;   ///< current PI, proportional
    double k_ic = 120.0; ///< current PI, integral
    double h_ff = 0.75;  ///< feedforward gain on the output current
    double w_f = 62.83185307179586; ///< power filter cutoff, rad/s
    double m_dc = 1e-3;  ///< voltage-power droop gain, V/W
};

/// Linearization point (capacitor voltage, output current).
struct DcOperatingPoint {
    double v_o0 = 0.0;
    double i_o0 = 0.0;
};

struct DcConverterSpec {
    DcFilterParams filter;
    DcControllerParams ctrl;
    DcOperatingPoint op;
    std::string name;
    std::string bus;       ///< attachment bus (network assembly)
    double v_ref = 400.0;  ///< voltage setpoint feeding the droop, V
};

void validate(const DcFilterParams& p);
void validate(const DcControllerParams& p);

/// 3-state filter + connector circuit. States [i_v, i_o, V_o], inputs
/// [V_t, V_dc], all states as outputs.
Lti build_dc_power_circuit(const DcFilterParams& p);

/// Full 6-state converter: power circuit, low-pass power filter with
/// voltage-power droop, voltage PI with output-current feedforward, and the
/// inner current PI whose output (the terminal voltage) is eliminated
/// algebraically. States [i_v, i_o, V_o, P_dc, zeta_v, eta_c], inputs
/// [V_ref, V_dc], all states as outputs.
Lti build_dc_converter(const DcConverterSpec& spec);

} // namespace hmg
