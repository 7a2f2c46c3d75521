#include "hmg/dcconv.hpp"

#include <cmath>

namespace hmg {

void validate(const DcFilterParams& p) {
    if (!(p.r_f > 0 && p.l_f > 0 && p.c_f > 0 && p.r_o > 0 && p.l_o > 0))
        throw InvalidSpec("dc filter parameters must be positive");
}

void validate(const DcControllerParams& p) {
    if (p.k_pv < 0 || p.k_iv < 0 || p.k_pc < 0 || p.k_ic < 0)
        throw InvalidSpec("dc controller gains must be nonnegative");
    if (!(p.w_f > 0)) throw InvalidSpec("power filter cutoff must be positive");
    if (p.m_dc < 0) throw InvalidSpec("droop gain must be nonnegative");
}

Lti build_dc_power_circuit(const DcFilterParams& p) {
    validate(p);
    Mat a(3, 3), b(3, 2);
    // filter KVL: L_f i_v' = V_t - V_o - R_f i_v
    a(0, 0) = -p.r_f / p.l_f;
    a(0, 2) = -1.0 / p.l_f;
    b(0, 0) = 1.0 / p.l_f;
    // connector KVL: L_o i_o' = V_o - V_dc - R_o i_o
    a(1, 1) = -p.r_o / p.l_o;
    a(1, 2) = 1.0 / p.l_o;
    b(1, 1) = -1.0 / p.l_o;
    // capacitor KCL: C_f V_o' = i_v - i_o
    a(2, 0) = 1.0 / p.c_f;
    a(2, 1) = -1.0 / p.c_f;
    return make_lti(std::move(a), std::move(b), {"i_v", "i_o", "V_o"}, {"V_t", "V_dc"});
}

Lti build_dc_converter(const DcConverterSpec& spec) {
    validate(spec.filter);
    validate(spec.ctrl);
    if (!std::isfinite(spec.op.v_o0) || !std::isfinite(spec.op.i_o0))
        throw InvalidSpec("dc operating point must be finite");

    const auto& f = spec.filter;
    const auto& c = spec.ctrl;
    const double v0 = spec.op.v_o0, i0 = spec.op.i_o0;

    // Voltage loop error: e_v = V_ref - m_dc P - V_dc (droop lowers the
    // reference; the measured quantity is the bus voltage).
    //   i_v* = K_pv e_v + zeta_v + H i_o,     zeta_v' = K_iv e_v
    // Current loop: V_t = K_pc (i_v* - i_v) + eta_c,  eta_c' = K_ic (i_v* - i_v)
    // V_t is algebraic and is eliminated into the i_v row.
    Mat a(6, 6), b(6, 2);

    // i_v row: L_f i_v' = V_t - V_o - R_f i_v
    a(0, 0) = (-f.r_f - c.k_pc) / f.l_f;
    a(0, 1) = c.k_pc * c.h_ff / f.l_f;
    a(0, 2) = -1.0 / f.l_f;
    a(0, 3) = -c.k_pc * c.k_pv * c.m_dc / f.l_f;
    a(0, 4) = c.k_pc / f.l_f;
    a(0, 5) = 1.0 / f.l_f;
    b(0, 0) = c.k_pc * c.k_pv / f.l_f;
    b(0, 1) = -c.k_pc * c.k_pv / f.l_f;

    // i_o row
    a(1, 1) = -f.r_o / f.l_o;
    a(1, 2) = 1.0 / f.l_o;
    b(1, 1) = -1.0 / f.l_o;

    // V_o row
    a(2, 0) = 1.0 / f.c_f;
    a(2, 1) = -1.0 / f.c_f;

    // filtered power: P' = w_f (v_o0 i_o + i_o0 V_o - P)
    a(3, 1) = c.w_f * v0;
    a(3, 2) = c.w_f * i0;
    a(3, 3) = -c.w_f;

    // voltage integrator
    a(4, 3) = -c.k_iv * c.m_dc;
    b(4, 0) = c.k_iv;
    b(4, 1) = -c.k_iv;

    // current integrator
    a(5, 0) = -c.k_ic;
    a(5, 1) = c.k_ic * c.h_ff;
    a(5, 3) = -c.k_ic * c.k_pv * c.m_dc;
    a(5, 4) = c.k_ic;
    b(5, 0) = c.k_ic * c.k_pv;
    b(5, 1) = -c.k_ic * c.k_pv;

    return make_lti(std::move(a), std::move(b),
                    {"i_v", "i_o", "V_o", "P_dc", "zeta_v", "eta_c"},
                    {"V_ref", "V_dc"});
}

} // namespace hmg
