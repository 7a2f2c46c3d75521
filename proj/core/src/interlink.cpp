#include "hmg/interlink.hpp"

#include <array>
#include <cmath>

namespace hmg {

void validate(const IcParams& p) {
    if (!(p.r_f > 0 && p.l_f > 0 && p.c_f > 0))
        throw InvalidSpec("ic filter parameters must be positive");
    if (!(p.c_dc > 0)) throw InvalidSpec("ic dc-link capacitance must be positive");
    if (!(p.j > 0)) throw InvalidSpec("ic virtual inertia must be positive");
    if (p.k_d < 0) throw InvalidSpec("ic damping must be nonnegative");
    if (std::abs(p.m_d0) > 1.0 || std::abs(p.m_q0) > 1.0)
        throw InvalidSpec("ic modulation indices must stay within [-1, 1]");
}

Lti build_ic_power_circuit(const IcParams& p, const IcOperatingPoint& op) {
    validate(p);
    const double w = op.w0;
    Mat a(5, 5), b(5, 6);

    // AC-side inductor: bridge voltage m v_dc drives the filter current
    a(0, 0) = -p.r_f / p.l_f; a(0, 1) = w;  a(0, 2) = -1.0 / p.l_f; a(0, 4) = p.m_d0 / p.l_f;
    a(1, 1) = -p.r_f / p.l_f; a(1, 0) = -w; a(1, 3) = -1.0 / p.l_f; a(1, 4) = p.m_q0 / p.l_f;
    // AC-side capacitor; the port current i_o is exogenous here
    a(2, 0) = 1.0 / p.c_f; a(2, 3) = w;
    a(3, 1) = 1.0 / p.c_f; a(3, 2) = -w;
    // DC link: bridge draw balances the delivered DC current
    a(4, 0) = -1.5 * p.m_d0 / p.c_dc;
    a(4, 1) = -1.5 * p.m_q0 / p.c_dc;

    b(0, 0) = op.v_dc0 / p.l_f;
    b(1, 1) = op.v_dc0 / p.l_f;
    b(2, 2) = -1.0 / p.c_f;
    b(3, 3) = -1.0 / p.c_f;
    b(0, 4) = op.i_icq0;
    b(1, 4) = -op.i_icd0;
    b(2, 4) = op.v_icq0;
    b(3, 4) = -op.v_icd0;
    b(4, 5) = -1.0 / p.c_dc;
    // modulation also perturbs the bridge DC draw at the operating current
    b(4, 0) = -1.5 * op.i_icd0 / p.c_dc;
    b(4, 1) = -1.5 * op.i_icq0 / p.c_dc;

    return make_lti(std::move(a), std::move(b),
                    {"i_icd", "i_icq", "v_icd", "v_icq", "v_dc"},
                    {"m_d", "m_q", "i_od", "i_oq", "w", "i_odc"});
}

Lti build_ic(const IcParams& p, const IcOperatingPoint& op) {
    validate(p);
    enum { IID, IIQ, VID, VIQ, VDC, WV, DL, PHD, PHQ, GAD, GAQ, N };
    const double w0 = op.w0;
    const double twoJ = 2.0 * p.j;
    Mat a(N, N), b(N, 3);

    // swing: w' = (P_ref - P_ic - K_d (w - w_g*)) / 2J, linearized
    a(WV, IID) = -1.5 * op.v_icd0 / twoJ;
    a(WV, IIQ) = -1.5 * op.v_icq0 / twoJ;
    a(WV, VID) = -1.5 * op.i_icd0 / twoJ;
    a(WV, VIQ) = -1.5 * op.i_icq0 / twoJ;
    a(WV, WV) = -p.k_d / twoJ;
    a(DL, WV) = 1.0;

    // reused voltage loop, constant references
    a(PHD, VID) = -p.k_iv;
    a(PHQ, VIQ) = -p.k_iv;

    std::array<double, N> istar_d{}, istar_q{};
    std::array<double, 3> istar_d_u{}, istar_q_u{};
    istar_d[PHD] = 1.0;
    istar_d[VID] = -p.k_pc;
    istar_d[VIQ] = -w0 * p.c_f;
    istar_d_u[0] = p.h_ff; // H on the exogenous port current
    istar_q[PHQ] = 1.0;
    istar_q[VID] = w0 * p.c_f;
    istar_q[VIQ] = -p.k_pc;
    istar_q_u[1] = p.h_ff;

    for (int j2 = 0; j2 < N; ++j2) a(GAD, j2) = p.k_ic * istar_d[j2];
    a(GAD, IID) += -p.k_ic;
    for (int j2 = 0; j2 < 3; ++j2) b(GAD, j2) = p.k_ic * istar_d_u[j2];
    for (int j2 = 0; j2 < N; ++j2) a(GAQ, j2) = p.k_ic * istar_q[j2];
    a(GAQ, IIQ) += -p.k_ic;
    for (int j2 = 0; j2 < 3; ++j2) b(GAQ, j2) = p.k_ic * istar_q_u[j2];

    std::array<double, N> vinv_d{}, vinv_q{};
    std::array<double, 3> vinv_d_u{}, vinv_q_u{};
    vinv_d[GAD] = 1.0;
    for (int j2 = 0; j2 < N; ++j2) vinv_d[j2] += p.k_pc * istar_d[j2];
    for (int j2 = 0; j2 < 3; ++j2) vinv_d_u[j2] += p.k_pc * istar_d_u[j2];
    vinv_d[IID] += -p.k_pc;
    vinv_d[IIQ] += -w0 * p.l_f;
    vinv_d[VID] += 1.0;
    vinv_q[GAQ] = 1.0;
    for (int j2 = 0; j2 < N; ++j2) vinv_q[j2] += p.k_pc * istar_q[j2];
    for (int j2 = 0; j2 < 3; ++j2) vinv_q_u[j2] += p.k_pc * istar_q_u[j2];
    vinv_q[IIQ] += -p.k_pc;
    vinv_q[IID] += w0 * p.l_f;
    vinv_q[VIQ] += 1.0;

    // bridge: v_inv = m v_dc, so dm = (dv_inv - m0 dv_dc) / v_dc0
    if (!(op.v_dc0 > 0)) throw InvalidSpec("ic dc-link operating voltage must be positive");
    std::array<double, N> md_row{}, mq_row{};
    std::array<double, 3> md_u{}, mq_u{};
    for (int j2 = 0; j2 < N; ++j2) md_row[j2] = vinv_d[j2] / op.v_dc0;
    md_row[VDC] += -p.m_d0 / op.v_dc0;
    for (int j2 = 0; j2 < 3; ++j2) md_u[j2] = vinv_d_u[j2] / op.v_dc0;
    for (int j2 = 0; j2 < N; ++j2) mq_row[j2] = vinv_q[j2] / op.v_dc0;
    mq_row[VDC] += -p.m_q0 / op.v_dc0;
    for (int j2 = 0; j2 < 3; ++j2) mq_u[j2] = vinv_q_u[j2] / op.v_dc0;

    // power circuit rows; the frequency input is the swing state w_vsm
    a(IID, IID) += -p.r_f / p.l_f;
    a(IID, IIQ) += w0;
    a(IID, VID) += -1.0 / p.l_f;
    a(IID, VDC) += p.m_d0 / p.l_f;
    a(IID, WV) += op.i_icq0;
    for (int j2 = 0; j2 < N; ++j2) a(IID, j2) += (op.v_dc0 / p.l_f) * md_row[j2];
    for (int j2 = 0; j2 < 3; ++j2) b(IID, j2) += (op.v_dc0 / p.l_f) * md_u[j2];

    a(IIQ, IIQ) += -p.r_f / p.l_f;
    a(IIQ, IID) += -w0;
    a(IIQ, VIQ) += -1.0 / p.l_f;
    a(IIQ, VDC) += p.m_q0 / p.l_f;
    a(IIQ, WV) += -op.i_icd0;
    for (int j2 = 0; j2 < N; ++j2) a(IIQ, j2) += (op.v_dc0 / p.l_f) * mq_row[j2];
    for (int j2 = 0; j2 < 3; ++j2) b(IIQ, j2) += (op.v_dc0 / p.l_f) * mq_u[j2];

    a(VID, IID) += 1.0 / p.c_f;
    a(VID, VIQ) += w0;
    a(VID, WV) += op.v_icq0;
    b(VID, 0) += -1.0 / p.c_f;

    a(VIQ, IIQ) += 1.0 / p.c_f;
    a(VIQ, VID) += -w0;
    a(VIQ, WV) += -op.v_icd0;
    b(VIQ, 1) += -1.0 / p.c_f;

    a(VDC, IID) += -1.5 * p.m_d0 / p.c_dc;
    a(VDC, IIQ) += -1.5 * p.m_q0 / p.c_dc;
    for (int j2 = 0; j2 < N; ++j2)
        a(VDC, j2) += (-1.5 / p.c_dc) * (op.i_icd0 * md_row[j2] + op.i_icq0 * mq_row[j2]);
    for (int j2 = 0; j2 < 3; ++j2)
        b(VDC, j2) += (-1.5 / p.c_dc) * (op.i_icd0 * md_u[j2] + op.i_icq0 * mq_u[j2]);
    b(VDC, 2) += -1.0 / p.c_dc;

    return make_lti(std::move(a), std::move(b),
                    {"i_icd", "i_icq", "v_icd", "v_icq", "v_dc", "w_vsm", "delta",
                     "phi_d", "phi_q", "gamma_d", "gamma_q"},
                    {"i_od", "i_oq", "i_odc"});
}

} // namespace hmg
