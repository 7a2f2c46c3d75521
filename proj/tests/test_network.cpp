#include <doctest.h>

#include <cmath>
#include <set>

#include "hmg/network.hpp"
#include "test_util.hpp"

using namespace hmg;
using hmg::test::spectra_distance;

namespace {

DcConverterSpec dc_unit(const std::string& name, const std::string& bus, double v_ref,
                        double m_dc = 1e-3) {
    DcConverterSpec s;
    s.name = name;
    s.bus = bus;
    s.v_ref = v_ref;
    s.ctrl.m_dc = m_dc;
    return s;
}

VscSpec ac_unit(const std::string& name, const std::string& bus) {
    VscSpec s;
    s.name = name;
    s.bus = bus;
    return s;
}

GridConfig single_dc(double v_ref, double m_dc, double r_load) {
    GridConfig cfg;
    cfg.buses = {{"b1", BusKind::dc}};
    cfg.dc_converters = {dc_unit("dc1", "b1", v_ref, m_dc)};
    if (r_load > 0) cfg.loads.push_back({"b1", LoadKind::resistive, r_load, 0.0});
    return cfg;
}

GridConfig dc_fixture(double v_ref) {
    GridConfig cfg;
    cfg.buses = {{"b1", BusKind::dc}, {"b2", BusKind::dc}, {"b3", BusKind::dc}};
    cfg.dc_converters = {dc_unit("dc1", "b1", v_ref), dc_unit("dc2", "b2", v_ref),
                         dc_unit("dc3", "b3", v_ref)};
    cfg.dc_lines = {{"b1", "b2", 0.04, 0.01, LineKind::rl}, {"b2", "b3", 0.04, 0.01, LineKind::rl}};
    cfg.loads = {{"b1", LoadKind::resistive, 20.0, 0.0}, {"b3", LoadKind::resistive, 50.0, 0.0}};
    return cfg;
}

GridConfig ac_fixture() {
    GridConfig cfg;
    cfg.buses = {{"a1", BusKind::ac}, {"a2", BusKind::ac}, {"a3", BusKind::ac}};
    cfg.ac_converters = {ac_unit("ac1", "a1"), ac_unit("ac2", "a2"), ac_unit("ac3", "a3")};
    cfg.ac_lines = {{"a1", "a2", 0.04, 0.01, LineKind::rl}, {"a2", "a3", 0.04, 0.01, LineKind::rl}};
    cfg.loads = {{"a1", LoadKind::rl, 20.0, 1e-3}, {"a3", LoadKind::rl, 50.0, 1e-3}};
    return cfg;
}

GridConfig hybrid_fixture() {
    GridConfig cfg = dc_fixture(800.0);
    const GridConfig ac = ac_fixture();
    cfg.buses.insert(cfg.buses.end(), ac.buses.begin(), ac.buses.end());
    cfg.ac_converters = ac.ac_converters;
    cfg.ac_lines = ac.ac_lines;
    cfg.loads.insert(cfg.loads.end(), ac.loads.begin(), ac.loads.end());
    IcSpec ic;
    ic.name = "ic1";
    ic.ac_bus = "a2";
    ic.dc_bus = "b2";
    cfg.ic = ic;
    return cfg;
}

} // namespace

TEST_CASE("frame rotation closed forms and orthogonality") {
    CHECK(frame_rotation(0.0).t.data() == Mat::identity(2).data());
    const Mat q = frame_rotation(M_PI / 2).t;
    CHECK(std::abs(q(0, 0)) < 1e-15);
    CHECK(q(0, 1) == doctest::Approx(-1.0));
    CHECK(q(1, 0) == doctest::Approx(1.0));
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> ang(-10.0, 10.0);
    for (int t = 0; t < 10; ++t) {
        const FrameRotation fr = frame_rotation(ang(rng));
        CHECK((fr.t.transpose() * fr.t - Mat::identity(2)).max_abs() <= 1e-15);
    }
}

TEST_CASE("equilibrium of a no-load converter is exactly the reference") {
    const Equilibrium eq = solve_equilibrium(single_dc(400.0, 1e-3, -1.0));
    CHECK(eq.dc_points.at("dc1").i_o0 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(eq.dc_points.at("dc1").v_o0 == doctest::Approx(400.0));
    CHECK(eq.residual <= 1e-9);
}

TEST_CASE("equilibrium of a loaded converter solves the droop quadratic") {
    // oracle: v = 400 - 1e-3 v^2 / 20, computed independently
    const double a = 1e-3 / 20.0;
    const double v_oracle = (-1.0 + std::sqrt(1.0 + 4.0 * a * 400.0)) / (2.0 * a);
    const Equilibrium eq = solve_equilibrium(single_dc(400.0, 1e-3, 20.0));
    CHECK(std::abs(eq.dc_bus_v.at("b1") - v_oracle) < 1e-2);
    CHECK(eq.dc_points.at("dc1").i_o0 == doctest::Approx(v_oracle / 20.0).epsilon(1e-4));
}

TEST_CASE("equilibrium of the three-converter grid matches the shared-load value") {
    const Equilibrium eq = solve_equilibrium(dc_fixture(400.0));
    CHECK(eq.dc_bus_v.at("b1") == doctest::Approx(396.06).epsilon(1e-4));
    CHECK(eq.residual <= 1e-9);
}

TEST_CASE("equilibrium reports NoConvergence on contradictory setpoints") {
    GridConfig cfg;
    cfg.buses = {{"b1", BusKind::dc}};
    cfg.dc_converters = {dc_unit("dc1", "b1", 400.0, 0.0), dc_unit("dc2", "b1", 500.0, 0.0)};
    cfg.loads = {{"b1", LoadKind::resistive, 20.0, 0.0}};
    CHECK_THROWS_AS((void)solve_equilibrium(cfg), NoConvergence);
    try {
        (void)solve_equilibrium(cfg);
    } catch (const NoConvergence& e) {
        CHECK(std::string(e.what()).find("residual") != std::string::npos);
    }
}

TEST_CASE("ac equilibrium satisfies the droop laws") {
    const GridConfig cfg = ac_fixture();
    const Equilibrium eq = solve_equilibrium(cfg);
    CHECK(eq.residual <= 1e-9);
    CHECK(eq.w_sys < cfg.ac_converters[0].params.w_n); // loaded grid droops down
    for (const auto& c : cfg.ac_converters) {
        const VscOperatingPoint& op = eq.vsc_points.at(c.name);
        const double p = 1.5 * op.v_od0 * op.i_od0;
        CHECK(c.params.w_n - c.params.m_p * p == doctest::Approx(eq.w_sys).epsilon(1e-9));
        const double q = -1.5 * op.v_od0 * op.i_oq0;
        CHECK(c.params.v_nom - c.params.n_q * q == doctest::Approx(op.v_od0).epsilon(1e-9));
    }
    CHECK(eq.vsc_delta.at("ac1") == 0.0);
}

TEST_CASE("dc sub-grid assembly: three converters and two rl lines give 20 states") {
    const Lti m = assemble_dc_subgrid(dc_fixture(800.0));
    CHECK(m.n() == 20);
    CHECK(m.m() == 3); // the three reference channels stay external
    CHECK(m.state_names[0] == "dc1.i_v");
    CHECK(m.state_names[18] == "dcline0.i");
    CHECK(m.input_names == std::vector<std::string>{"dc1.V_ref", "dc2.V_ref", "dc3.V_ref"});
}

TEST_CASE("single converter with a load matches the hand-assembled closure") {
    const GridConfig cfg = single_dc(800.0, 1e-3, 20.0);
    const Equilibrium eq = solve_equilibrium(cfg);
    const Lti grid = assemble_dc_subgrid(cfg, eq);
    REQUIRE(grid.n() == 6);

    DcConverterSpec spec = cfg.dc_converters[0];
    spec.op = eq.dc_points.at("dc1");
    const Lti conv = build_dc_converter(spec);
    const double r_eff = 1.0 / (1.0 / 20.0 + 1.0 / cfg.r_virtual);
    Mat hand = conv.a;
    for (std::size_t i = 0; i < 6; ++i) hand(i, 1) += conv.b(i, 1) * r_eff;
    CHECK(spectra_distance(eig_qr(grid.a), eig_qr(hand), 1.0) < 1e-9);
    // closed-loop configuration is stable at the reference droop
    for (const Complex& l : eig_qr(grid.a)) CHECK(l.real() < 0.0);
}

TEST_CASE("passive limit: zero gains and droops keep the spectrum in the closed left plane") {
    GridConfig cfg = dc_fixture(400.0);
    for (auto& c : cfg.dc_converters) {
        c.ctrl.k_pv = c.ctrl.k_iv = c.ctrl.k_pc = c.ctrl.k_ic = 0.0;
        c.ctrl.h_ff = 0.0;
        c.ctrl.m_dc = 0.0;
    }
    const Lti m = assemble_dc_subgrid(cfg);
    for (const Complex& l : eig_qr(m.a)) CHECK(l.real() <= 1e-9);
}

TEST_CASE("ac sub-grid assembly: three converters, two lines, two rl loads give 47 states") {
    const Lti m = assemble_ac_subgrid(ac_fixture());
    CHECK(m.n() == 47);
    CHECK(m.m() == 0); // every port is closed internally
}

TEST_CASE("ac assembly keeps one angle-redundancy zero mode") {
    GridConfig cfg;
    cfg.buses = {{"a1", BusKind::ac}, {"a2", BusKind::ac}};
    cfg.ac_converters = {ac_unit("ac1", "a1"), ac_unit("ac2", "a2")};
    cfg.ac_lines = {{"a1", "a2", 0.04, 0.01, LineKind::rl}};
    cfg.loads = {{"a1", LoadKind::rl, 20.0, 1e-3}};
    const Lti m = assemble_ac_subgrid(cfg);
    REQUIRE(m.n() == 30);
    std::size_t zero_modes = 0;
    for (const Complex& l : eig_qr(m.a))
        if (std::abs(l) <= 1e-6) ++zero_modes;
    CHECK(zero_modes == 1);
    // the reference converter's angle row is structurally zero
    std::size_t th = 0;
    for (std::size_t i = 0; i < m.n(); ++i)
        if (m.state_names[i] == "ac1.theta") th = i;
    for (std::size_t j = 0; j < m.n(); ++j) CHECK(m.a(th, j) == 0.0);
}

TEST_CASE("ac spectrum is invariant under permuting identical converters") {
    // two identical units across a line, equal loads: swapping the converters
    // is a symmetry of the network
    GridConfig cfg;
    cfg.buses = {{"a1", BusKind::ac}, {"a2", BusKind::ac}};
    cfg.ac_converters = {ac_unit("u1", "a1"), ac_unit("u2", "a2")};
    cfg.ac_lines = {{"a1", "a2", 0.04, 0.01, LineKind::rl}};
    cfg.loads = {{"a1", LoadKind::rl, 30.0, 1e-3}, {"a2", LoadKind::rl, 30.0, 1e-3}};
    // symmetrize the solved equilibrium exactly (zero line flow by symmetry)
    // so the comparison isolates the assembly, not the Newton tolerance
    Equilibrium eq = solve_equilibrium(cfg);
    eq.vsc_points["u2"] = eq.vsc_points["u1"];
    eq.vsc_delta["u2"] = 0.0;
    eq.ac_bus_v["a2"] = eq.ac_bus_v["a1"];
    const auto e1 = eig_qr(assemble_ac_subgrid(cfg, eq).a);
    std::swap(cfg.ac_converters[0].bus, cfg.ac_converters[1].bus); // u1@a2, u2@a1
    const auto e2 = eig_qr(assemble_ac_subgrid(cfg, eq).a);
    CHECK(spectra_distance(e1, e2, 1.0) < 1e-8);
}

TEST_CASE("hybrid assembly reaches 78 states and is deterministic") {
    const GridConfig cfg = hybrid_fixture();
    const Lti m1 = assemble_hybrid(cfg);
    CHECK(m1.n() == 78);
    CHECK(m1.m() == 3);
    const Lti m2 = assemble_hybrid(cfg);
    CHECK(m1.a.data() == m2.a.data());
    CHECK(m1.state_names == m2.state_names);
}

TEST_CASE("hybrid assembly requires the interlinking converter") {
    GridConfig cfg = hybrid_fixture();
    cfg.ic.reset();
    CHECK_THROWS_AS((void)assemble_hybrid(cfg), MissingInterlink);
}

TEST_CASE("islanded and unknown buses are rejected") {
    GridConfig cfg = dc_fixture(400.0);
    cfg.buses.push_back({"orphan", BusKind::dc});
    CHECK_THROWS_AS((void)assemble_dc_subgrid(cfg), IslandedBus);

    GridConfig bad = dc_fixture(400.0);
    bad.dc_converters[0].bus = "nowhere";
    CHECK_THROWS_AS((void)solve_equilibrium(bad), UnknownBus);
}

TEST_CASE("virtual resistor sensitivity: slow modes move below one percent") {
    GridConfig cfg = dc_fixture(800.0);
    cfg.r_virtual = 1e3;
    const auto e1 = eig_qr(assemble_dc_subgrid(cfg).a);
    cfg.r_virtual = 1e4;
    const auto e2 = eig_qr(assemble_dc_subgrid(cfg).a);
    // pair nearest and check the physically meaningful range; the bus
    // constraint modes scale with r_virtual by construction
    std::vector<Complex> pool = e2;
    for (const Complex& l : e1) {
        if (std::abs(l) >= 100.0) continue;
        double best = 1e300;
        std::size_t bj = 0;
        for (std::size_t j = 0; j < pool.size(); ++j)
            if (std::abs(l - pool[j]) < best) { best = std::abs(l - pool[j]); bj = j; }
        CHECK(best / std::max(std::abs(l), 1e-6) < 1e-2);
        pool.erase(pool.begin() + static_cast<long>(bj));
    }
}

TEST_CASE("hybrid equilibrium keeps the interlink modulation inside the unit disc") {
    const Equilibrium eq = solve_equilibrium(hybrid_fixture());
    CHECK(std::abs(eq.ic_m_d0) < 1.0);
    CHECK(std::abs(eq.ic_m_q0) < 1.0);
    CHECK(eq.residual <= 1e-9);
}

TEST_CASE("scope builder selects converters and sub-grids") {
    const GridConfig cfg = hybrid_fixture();
    CHECK(build_scope(cfg, "converter:dc1").n() == 6);
    CHECK(build_scope(cfg, "converter:ac1").n() == 13);
    CHECK(build_scope(cfg, "converter:ic1").n() == 11);
    CHECK(build_scope(cfg, "dc").n() == 20);
    CHECK_THROWS_AS((void)build_scope(cfg, "converter:nope"), ConfigError);
    CHECK_THROWS_AS((void)build_scope(cfg, "bogus"), ConfigError);
}
