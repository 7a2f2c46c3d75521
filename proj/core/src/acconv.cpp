#include "hmg/acconv.hpp"

#include <array>
#include <cmath>

namespace hmg {

void validate(const VscParams& p) {
    if (!(p.r_f > 0 && p.l_f > 0 && p.c_f > 0 && p.r_o > 0 && p.l_o > 0))
        throw InvalidSpec("vsc filter parameters must be positive");
    if (p.k_pv < 0 || p.k_iv < 0 || p.k_pc < 0 || p.k_ic < 0)
        throw InvalidSpec("vsc controller gains must be nonnegative");
    if (!(p.w_f > 0)) throw InvalidSpec("vsc power filter cutoff must be positive");
    if (p.m_p < 0 || p.n_q < 0) throw InvalidSpec("vsc droop gains must be nonnegative");
}

Lti build_vsc_power_circuit(const VscParams& p, const VscOperatingPoint& op) {
    validate(p);
    const double w = op.w0;
    Mat a(6, 6), b(6, 5);

    // converter-side inductor, +-w cross coupling
    a(0, 0) = -p.r_f / p.l_f; a(0, 1) = w;  a(0, 4) = -1.0 / p.l_f;
    a(1, 1) = -p.r_f / p.l_f; a(1, 0) = -w; a(1, 5) = -1.0 / p.l_f;
    // coupling inductor toward the grid port
    a(2, 2) = -p.r_o / p.l_o; a(2, 3) = w;  a(2, 4) = 1.0 / p.l_o;
    a(3, 3) = -p.r_o / p.l_o; a(3, 2) = -w; a(3, 5) = 1.0 / p.l_o;
    // shunt capacitor
    a(4, 0) = 1.0 / p.c_f; a(4, 2) = -1.0 / p.c_f; a(4, 5) = w;
    a(5, 1) = 1.0 / p.c_f; a(5, 3) = -1.0 / p.c_f; a(5, 4) = -w;

    b(0, 0) = 1.0 / p.l_f;
    b(1, 1) = 1.0 / p.l_f;
    b(2, 2) = -1.0 / p.l_o;
    b(3, 3) = -1.0 / p.l_o;
    // frequency column: sensitivity of the cross-coupling terms at the point
    b(0, 4) = op.i_invq0;
    b(1, 4) = -op.i_invd0;
    b(2, 4) = op.i_oq0;
    b(3, 4) = -op.i_od0;
    b(4, 4) = op.v_oq0;
    b(5, 4) = -op.v_od0;

    return make_lti(std::move(a), std::move(b),
                    {"i_invd", "i_invq", "i_od", "i_oq", "v_od", "v_oq"},
                    {"v_invd", "v_invq", "v_gd", "v_gq", "w"});
}

Lti build_vsc(const VscSpec& spec) {
    const VscParams& p = spec.params;
    const VscOperatingPoint& op = spec.op;
    validate(p);

    enum { TH, P, Q, PHD, PHQ, GAD, GAQ, IID, IIQ, IOD, IOQ, VOD, VOQ, N };
    const double w0 = op.w0;
    Mat a(N, N), b(N, 3);

    // droop outputs: w = -m_p P (relative to nominal), v*_od = -n_q Q, v*_oq = 0
    a(TH, P) = -p.m_p;
    b(TH, 2) = -1.0; // w_com

    a(P, IOD) = p.w_f * 1.5 * op.v_od0;
    a(P, IOQ) = p.w_f * 1.5 * op.v_oq0;
    a(P, VOD) = p.w_f * 1.5 * op.i_od0;
    a(P, VOQ) = p.w_f * 1.5 * op.i_oq0;
    a(P, P) = -p.w_f;

    // q = 1.5 (v_oq i_od - v_od i_oq), low-pass filtered
    a(Q, IOD) = p.w_f * 1.5 * op.v_oq0;
    a(Q, IOQ) = -p.w_f * 1.5 * op.v_od0;
    a(Q, VOQ) = p.w_f * 1.5 * op.i_od0;
    a(Q, VOD) = -p.w_f * 1.5 * op.i_oq0;
    a(Q, Q) = -p.w_f;

    // voltage loop (integral gain folded into the integrator state)
    a(PHD, Q) = -p.k_iv * p.n_q;
    a(PHD, VOD) = -p.k_iv;
    a(PHQ, VOQ) = -p.k_iv;

    // current references, feedforward row as printed (measured-voltage gain
    // k_pc, +-w C_f decoupling, H on the output current)
    std::array<double, N> istar_d{}, istar_q{};
    istar_d[PHD] = 1.0;
    istar_d[Q] = -p.k_pv * p.n_q;
    istar_d[IOD] = p.h_ff;
    istar_d[VOD] = -p.k_pc;
    istar_d[VOQ] = -w0 * p.c_f;
    istar_q[PHQ] = 1.0;
    istar_q[IOQ] = p.h_ff;
    istar_q[VOD] = w0 * p.c_f;
    istar_q[VOQ] = -p.k_pc;

    for (int j = 0; j < N; ++j) a(GAD, j) = p.k_ic * istar_d[j];
    a(GAD, IID) += -p.k_ic;
    for (int j = 0; j < N; ++j) a(GAQ, j) = p.k_ic * istar_q[j];
    a(GAQ, IIQ) += -p.k_ic;

    // bridge voltage references with +-w L_f decoupling and v_o feedforward
    std::array<double, N> vinv_d{}, vinv_q{};
    vinv_d[GAD] = 1.0;
    for (int j = 0; j < N; ++j) vinv_d[j] += p.k_pc * istar_d[j];
    vinv_d[IID] += -p.k_pc;
    vinv_d[IIQ] += -w0 * p.l_f;
    vinv_d[VOD] += 1.0;
    vinv_q[GAQ] = 1.0;
    for (int j = 0; j < N; ++j) vinv_q[j] += p.k_pc * istar_q[j];
    vinv_q[IIQ] += -p.k_pc;
    vinv_q[IID] += w0 * p.l_f;
    vinv_q[VOQ] += 1.0;

    // LCL rows; the local frequency deviation -m_p dP modulates the cross
    // coupling at the operating currents/voltages
    for (int j = 0; j < N; ++j) a(IID, j) += vinv_d[j] / p.l_f;
    a(IID, IID) += -p.r_f / p.l_f;
    a(IID, IIQ) += w0;
    a(IID, VOD) += -1.0 / p.l_f;
    a(IID, P) += -p.m_p * op.i_invq0;

    for (int j = 0; j < N; ++j) a(IIQ, j) += vinv_q[j] / p.l_f;
    a(IIQ, IIQ) += -p.r_f / p.l_f;
    a(IIQ, IID) += -w0;
    a(IIQ, VOQ) += -1.0 / p.l_f;
    a(IIQ, P) += -p.m_p * (-op.i_invd0);

    a(IOD, IOD) = -p.r_o / p.l_o;
    a(IOD, IOQ) = w0;
    a(IOD, VOD) += 1.0 / p.l_o;
    a(IOD, P) += -p.m_p * op.i_oq0;
    b(IOD, 0) = -1.0 / p.l_o;

    a(IOQ, IOQ) = -p.r_o / p.l_o;
    a(IOQ, IOD) = -w0;
    a(IOQ, VOQ) += 1.0 / p.l_o;
    a(IOQ, P) += -p.m_p * (-op.i_od0);
    b(IOQ, 1) = -1.0 / p.l_o;

    a(VOD, IID) = 1.0 / p.c_f;
    a(VOD, IOD) = -1.0 / p.c_f;
    a(VOD, VOQ) = w0;
    a(VOD, P) += -p.m_p * op.v_oq0;

    a(VOQ, IIQ) = 1.0 / p.c_f;
    a(VOQ, IOQ) = -1.0 / p.c_f;
    a(VOQ, VOD) = -w0;
    a(VOQ, P) += -p.m_p * (-op.v_od0);

    // outputs: all states, then [w, i_od, i_oq] for the network
    Mat c(N + 3, N), d(N + 3, 3);
    for (int i = 0; i < N; ++i) c(i, i) = 1.0;
    c(N, P) = -p.m_p;
    c(N + 1, IOD) = 1.0;
    c(N + 2, IOQ) = 1.0;

    return make_lti(std::move(a), std::move(b), std::move(c), std::move(d),
                    {"theta", "P", "Q", "phi_d", "phi_q", "gamma_d", "gamma_q",
                     "i_invd", "i_invq", "i_od", "i_oq", "v_od", "v_oq"},
                    {"v_bd", "v_bq", "w_com"},
                    {"theta", "P", "Q", "phi_d", "phi_q", "gamma_d", "gamma_q",
                     "i_invd", "i_invq", "i_od", "i_oq", "v_od", "v_oq",
                     "w", "i_od_out", "i_oq_out"});
}

} // namespace hmg
