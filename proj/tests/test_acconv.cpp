#include <doctest.h>

#include <cmath>

#include "hmg/acconv.hpp"
#include "test_util.hpp"

using namespace hmg;

namespace {

VscSpec base_spec() {
    VscSpec s;
    s.name = "ac1";
    s.op.v_od0 = 380.0;
    s.op.v_oq0 = 0.0;
    s.op.i_od0 = 10.0;
    s.op.i_oq0 = 0.0;
    s.op.i_invd0 = 10.0;
    s.op.i_invq0 = s.op.i_oq0 + s.op.w0 * s.params.c_f * s.op.v_od0;
    return s;
}

constexpr int TH = 0, P = 1, Q = 2, IID = 7, IIQ = 8, IOD = 9, IOQ = 10, VOD = 11, VOQ = 12;

} // namespace

TEST_CASE("vsc power circuit cross-coupling at 50 Hz") {
    VscSpec s = base_spec();
    const Lti pc = build_vsc_power_circuit(s.params, s.op);
    CHECK(pc.n() == 6);
    CHECK(pc.a(0, 1) == doctest::Approx(314.1592653589793).epsilon(1e-12));
    CHECK(pc.a(1, 0) == doctest::Approx(-314.1592653589793).epsilon(1e-12));
}

TEST_CASE("vsc power circuit frequency column at the printed operating point") {
    VscSpec s = base_spec();
    s.op.i_invq0 = 0.0;
    s.op.i_invd0 = 10.0;
    s.op.i_oq0 = 0.0;
    s.op.i_od0 = 10.0;
    s.op.v_oq0 = 0.0;
    s.op.v_od0 = 380.0;
    const Lti pc = build_vsc_power_circuit(s.params, s.op);
    const double expected[6] = {0.0, -10.0, 0.0, -10.0, 0.0, -380.0};
    for (std::size_t i = 0; i < 6; ++i) CHECK(pc.b(i, 4) == doctest::Approx(expected[i]));
}

TEST_CASE("vsc power circuit decouples into two chains without rotation") {
    VscSpec s = base_spec();
    s.op.w0 = 0.0;
    const Lti pc = build_vsc_power_circuit(s.params, s.op);
    // d states {0, 2, 4}, q states {1, 3, 5}: no cross terms at w = 0
    for (std::size_t i : {0u, 2u, 4u})
        for (std::size_t j : {1u, 3u, 5u}) {
            CHECK(pc.a(i, j) == 0.0);
            CHECK(pc.a(j, i) == 0.0);
        }
    // each chain carries the series-filter structure
    CHECK(pc.a(0, 4) == doctest::Approx(-1.0 / s.params.l_f));
    CHECK(pc.a(2, 4) == doctest::Approx(1.0 / s.params.l_o));
    CHECK(pc.a(4, 0) == doctest::Approx(1.0 / s.params.c_f));
    CHECK(pc.a(4, 2) == doctest::Approx(-1.0 / s.params.c_f));
}

TEST_CASE("vsc has thirteen states, three inputs, all states plus w and port currents out") {
    const Lti m = build_vsc(base_spec());
    CHECK(m.n() == 13);
    CHECK(m.m() == 3);
    CHECK(m.p() == 16);
    CHECK(m.state_names ==
          std::vector<std::string>{"theta", "P", "Q", "phi_d", "phi_q", "gamma_d", "gamma_q",
                                   "i_invd", "i_invq", "i_od", "i_oq", "v_od", "v_oq"});
    CHECK(m.input_names == std::vector<std::string>{"v_bd", "v_bq", "w_com"});
}

TEST_CASE("vsc active-power row coefficient on the d-axis current") {
    const Lti m = build_vsc(base_spec());
    CHECK(m.a(P, IOD) == doctest::Approx(1.5 * 62.831853071795862 * 380.0).epsilon(1e-12));
    CHECK(m.a(P, P) == doctest::Approx(-62.831853071795862));
}

TEST_CASE("vsc droop gains decouple P and Q when zeroed") {
    VscSpec s = base_spec();
    s.params.m_p = 0.0;
    s.params.n_q = 0.0;
    const Lti m = build_vsc(s);
    // column P: only the filter row keeps it
    for (std::size_t i = 0; i < 13; ++i) {
        if (i == P) continue;
        CHECK(m.a(i, P) == 0.0);
    }
    // column Q: zero outside the Q filter row
    for (std::size_t i = 0; i < 13; ++i) {
        if (i == Q) continue;
        CHECK(m.a(i, Q) == 0.0);
    }
}

TEST_CASE("vsc reactive-power droop enters only through n_q") {
    VscSpec s = base_spec();
    s.params.n_q = 0.0;
    const Lti m = build_vsc(s);
    for (std::size_t i = 0; i < 13; ++i) {
        if (i == Q) continue;
        CHECK(m.a(i, Q) == 0.0);
    }
}

TEST_CASE("vsc d/q mirror symmetry with droops disabled") {
    VscSpec s = base_spec();
    s.params.m_p = 0.0;
    s.params.n_q = 0.0;
    s.op.v_od0 = 380.0;
    s.op.v_oq0 = 5.0;
    s.op.i_od0 = 10.0;
    s.op.i_oq0 = 2.0;
    s.op.i_invd0 = s.op.i_od0 - s.op.w0 * s.params.c_f * s.op.v_oq0;
    s.op.i_invq0 = s.op.i_oq0 + s.op.w0 * s.params.c_f * s.op.v_od0;
    const Lti m1 = build_vsc(s);

    VscSpec sm = s;
    sm.op.w0 = -s.op.w0;
    std::swap(sm.op.v_od0, sm.op.v_oq0);
    std::swap(sm.op.i_od0, sm.op.i_oq0);
    sm.op.i_invd0 = sm.op.i_od0 + sm.op.w0 * sm.params.c_f * sm.op.v_oq0;
    sm.op.i_invq0 = sm.op.i_oq0 - sm.op.w0 * sm.params.c_f * sm.op.v_od0;
    std::swap(sm.op.i_invd0, sm.op.i_invq0);
    sm.op.i_invd0 = s.op.i_invq0;
    sm.op.i_invq0 = s.op.i_invd0;
    const Lti m2 = build_vsc(sm);

    // signed permutation: swap each d/q pair, negate Q (chirality-odd)
    const int perm[13] = {0, 1, 2, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11};
    double sign[13];
    for (int i = 0; i < 13; ++i) sign[i] = 1.0;
    sign[Q] = -1.0;
    for (int i = 0; i < 13; ++i)
        for (int j = 0; j < 13; ++j) {
            const double mapped = sign[i] * sign[j] * m1.a(static_cast<std::size_t>(perm[i]),
                                                           static_cast<std::size_t>(perm[j]));
            CHECK(mapped == doctest::Approx(m2.a(i, j)).epsilon(1e-12));
        }
}

TEST_CASE("vsc omega coupling entries appear in skew pairs") {
    const Lti m = build_vsc(base_spec());
    CHECK(m.a(IID, IIQ) == doctest::Approx(-m.a(IIQ, IID)));
    CHECK(m.a(IOD, IOQ) == doctest::Approx(-m.a(IOQ, IOD)));
    CHECK(m.a(VOD, VOQ) == doctest::Approx(-m.a(VOQ, VOD)));
}

TEST_CASE("vsc builder is deterministic") {
    const Lti m1 = build_vsc(base_spec());
    const Lti m2 = build_vsc(base_spec());
    CHECK(m1.a.data() == m2.a.data());
    CHECK(m1.b.data() == m2.b.data());
}

TEST_CASE("vsc theta row integrates the droop frequency against the common frame") {
    const Lti m = build_vsc(base_spec());
    CHECK(m.a(TH, P) == doctest::Approx(-1e-4));
    CHECK(m.b(TH, 2) == -1.0);
    // w output row
    CHECK(m.c(13, P) == doctest::Approx(-1e-4));
}
