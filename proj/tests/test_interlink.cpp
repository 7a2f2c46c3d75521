#include <doctest.h>

#include <cmath>

#include "hmg/interlink.hpp"
#include "test_util.hpp"

using namespace hmg;

namespace {

// self-consistent zero-transfer operating point (isolated converter)
IcOperatingPoint isolated_point(const IcParams& p, double vdc0 = 800.0) {
    IcOperatingPoint op;
    op.v_dc0 = vdc0;
    op.v_icd0 = p.v_nom;
    op.v_icq0 = 0.0;
    op.i_od0 = 0.0;
    op.i_oq0 = -op.w0 * p.c_f * p.v_nom; // cap reactive draw circulates internally
    op.i_icd0 = op.i_od0;
    op.i_icq0 = op.i_oq0 + op.w0 * p.c_f * p.v_nom; // = 0
    return op;
}

IcParams consistent_params(const IcOperatingPoint& op, IcParams p = IcParams{}) {
    p.m_d0 = (op.v_icd0 + p.r_f * op.i_icd0 - op.w0 * p.l_f * op.i_icq0) / op.v_dc0;
    p.m_q0 = (op.v_icq0 + p.r_f * op.i_icq0 + op.w0 * p.l_f * op.i_icd0) / op.v_dc0;
    return p;
}

} // namespace

TEST_CASE("ic power circuit modulation column entry") {
    IcParams p;
    IcOperatingPoint op = isolated_point(p);
    const Lti pc = build_ic_power_circuit(consistent_params(op), op);
    CHECK(pc.n() == 5);
    CHECK(pc.state_names ==
          std::vector<std::string>{"i_icd", "i_icq", "v_icd", "v_icq", "v_dc"});
    // dm_d drives the filter current at v_dc0 / l_f = 800 / 0.03
    CHECK(pc.b(0, 0) == doctest::Approx(800.0 / 0.03).epsilon(1e-12));
}

TEST_CASE("ic power circuit dc-link row carries the bridge draw") {
    IcParams p;
    p.m_d0 = 0.475;
    p.m_q0 = 0.1;
    const Lti pc = build_ic_power_circuit(p, isolated_point(p));
    CHECK(pc.a(4, 0) == doctest::Approx(-1.5 * 0.475 / p.c_dc));
    CHECK(pc.a(4, 1) == doctest::Approx(-1.5 * 0.1 / p.c_dc));
}

TEST_CASE("ic power circuit decouples at zero frequency and zero modulation") {
    IcParams p;
    IcOperatingPoint op;
    op.w0 = 0.0;
    op.v_dc0 = 800.0;
    const Lti pc = build_ic_power_circuit(p, op);
    // d and q LC circuits independent, v_dc integrates -i_odc / c_dc
    for (std::size_t i : {0u, 2u})
        for (std::size_t j : {1u, 3u}) {
            CHECK(pc.a(i, j) == 0.0);
            CHECK(pc.a(j, i) == 0.0);
        }
    CHECK(pc.a(4, 4) == 0.0);
    CHECK(pc.b(4, 5) == doctest::Approx(-1.0 / p.c_dc));
}

TEST_CASE("ic model has eleven states in the documented order") {
    IcParams p;
    IcOperatingPoint op = isolated_point(p);
    const Lti m = build_ic(consistent_params(op), op);
    CHECK(m.n() == 11);
    CHECK(m.m() == 3);
    CHECK(m.state_names ==
          std::vector<std::string>{"i_icd", "i_icq", "v_icd", "v_icq", "v_dc", "w_vsm", "delta",
                                   "phi_d", "phi_q", "gamma_d", "gamma_q"});
    CHECK(m.input_names == std::vector<std::string>{"i_od", "i_oq", "i_odc"});
}

TEST_CASE("ic swing sensitivity to the converter power") {
    IcParams p;
    p.j = 0.2;
    IcOperatingPoint op = isolated_point(p);
    const Lti m = build_ic(consistent_params(op, p), op);
    // row w_vsm against i_icd carries -1.5 v_icd0 / (2 j): the power
    // sensitivity is the shared factor -1/(2 j) = -2.5
    CHECK(m.a(5, 0) / (1.5 * op.v_icd0) == doctest::Approx(-2.5));
    CHECK(m.a(5, 5) == doctest::Approx(-p.k_d / (2.0 * p.j)));
}

TEST_CASE("ic delta row is exactly the swing frequency") {
    IcParams p;
    IcOperatingPoint op = isolated_point(p);
    const Lti m = build_ic(consistent_params(op), op);
    for (std::size_t j = 0; j < 11; ++j)
        CHECK(m.a(6, j) == (j == 5 ? 1.0 : 0.0));
}

TEST_CASE("ic i_odc input reaches only the dc-link row") {
    IcParams p;
    IcOperatingPoint op = isolated_point(p);
    const Lti m = build_ic(consistent_params(op), op);
    for (std::size_t i = 0; i < 11; ++i) {
        if (i == 4) CHECK(m.b(i, 2) == doctest::Approx(-1.0 / p.c_dc));
        else CHECK(m.b(i, 2) == 0.0);
    }
}

TEST_CASE("ic energy sign: passive circuit at the isolated equilibrium") {
    // controllers neutralized, zero transfer: nothing can pump energy
    IcParams p;
    p.k_pv = p.k_iv = p.k_pc = p.k_ic = p.h_ff = 0.0;
    IcOperatingPoint op = isolated_point(p);
    const Lti m = build_ic(consistent_params(op, p), op);
    for (const Complex& l : eig_qr(m.a)) CHECK(l.real() <= 1e-9);
}

TEST_CASE("ic swing with stiff power coupling is an undamped oscillator at k_d = 0") {
    // 2-state swing with synchronizing feedback dP = k_synch * delta
    const double j = 0.2, k_synch = 5000.0;
    Mat a(2, 2);
    a(0, 1) = -k_synch / (2.0 * j); // w' = -dP/(2j)
    a(1, 0) = 1.0;                  // delta' = w
    const auto e = eig_qr(a);
    for (const Complex& l : e) {
        CHECK(std::abs(l.real()) <= 1e-9);
        CHECK(std::abs(std::abs(l.imag()) - std::sqrt(k_synch / (2.0 * j))) < 1e-9);
    }
}

TEST_CASE("ic validation rejects out-of-range modulation and nonpositive inertia") {
    IcParams p;
    p.m_d0 = 1.5;
    CHECK_THROWS_AS((void)build_ic(p, IcOperatingPoint{}), InvalidSpec);
    p = IcParams{};
    p.j = 0.0;
    CHECK_THROWS_AS((void)build_ic(p, IcOperatingPoint{}), InvalidSpec);
}
