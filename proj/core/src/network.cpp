#include "hmg/network.hpp"

#include <cmath>
#include <map>
#include <set>

namespace hmg {

namespace {

Lti static_block(Mat d, std::vector<std::string> inputs, std::vector<std::string> outputs) {
    const std::size_t m = inputs.size(), p = outputs.size();
    return make_lti(Mat(0, 0), Mat(0, m), Mat(p, 0), std::move(d),
                    {}, std::move(inputs), std::move(outputs));
}

struct Assembly {
    std::vector<NamedBlock> blocks;
    std::vector<Wire> wires;
    std::vector<std::string> state_outputs;

    /// dynamic blocks expose their states as their first outputs
    void add_dynamic(const std::string& name, Lti sys) {
        for (const auto& s : sys.state_names) state_outputs.push_back(name + "." + s);
        blocks.push_back({name, std::move(sys)});
    }
    void add_static(const std::string& name, Lti sys) {
        blocks.push_back({name, std::move(sys)});
    }
    void wire(const std::string& from, const std::string& to, double gain = 1.0) {
        wires.push_back({from, to, gain});
    }
    Lti finish() { return interconnect(blocks, wires, {}, state_outputs); }
};

std::array<double, 2> rl_steady_current(double r, double l, double w, double vd, double vq) {
    const double det = r * r + w * l * w * l;
    return {(r * vd + w * l * vq) / det, (-w * l * vd + r * vq) / det};
}

void check_islands(const GridConfig& cfg, BusKind kind) {
    std::map<std::string, int> touch;
    for (const auto& b : cfg.buses)
        if (b.kind == kind) touch[b.name] = 0;
    auto hit = [&](const std::string& bus) {
        auto it = touch.find(bus);
        if (it != touch.end()) ++it->second;
    };
    for (const auto& c : cfg.dc_converters) hit(c.bus);
    for (const auto& c : cfg.ac_converters) hit(c.bus);
    for (const auto& l : cfg.dc_lines) { hit(l.from); hit(l.to); }
    for (const auto& l : cfg.ac_lines) { hit(l.from); hit(l.to); }
    for (const auto& l : cfg.loads) hit(l.bus);
    if (cfg.ic) { hit(cfg.ic->ac_bus); hit(cfg.ic->dc_bus); }
    for (const auto& [bus, n] : touch)
        if (n == 0) throw IslandedBus("bus '" + bus + "' has no connection");
}

// ---------------------------------------------------------------------------
// per-side assembly passes
// ---------------------------------------------------------------------------

void add_dc_side(const GridConfig& cfg, const Equilibrium& eq, Assembly& as) {
    for (const auto& conv : cfg.dc_converters) {
        DcConverterSpec spec = conv;
        auto it = eq.dc_points.find(conv.name);
        if (it != eq.dc_points.end()) spec.op = it->second;
        as.add_dynamic(conv.name, build_dc_converter(spec));
    }
    std::size_t li = 0;
    for (const auto& line : cfg.dc_lines) {
        const std::string name = "dcline" + std::to_string(li++);
        if (line.kind == LineKind::rl) {
            Mat a{{-line.r / line.l}};
            Mat b{{1.0 / line.l, -1.0 / line.l}};
            as.add_dynamic(name, make_lti(a, b, {"i"}, {"v_from", "v_to"}));
        } else {
            as.add_static(name, static_block(Mat{{1.0 / line.r, -1.0 / line.r}},
                                             {"v_from", "v_to"}, {"i"}));
        }
        as.wire("bus_" + line.from + ".v", name + ".v_from");
        as.wire("bus_" + line.to + ".v", name + ".v_to");
        as.wire(name + ".i", "bus_" + line.from + ".i", -1.0);
        as.wire(name + ".i", "bus_" + line.to + ".i", +1.0);
    }
    std::set<std::string> dc_buses;
    for (const auto& b : cfg.buses)
        if (b.kind == BusKind::dc) dc_buses.insert(b.name);
    std::size_t di = 0;
    for (const auto& load : cfg.loads) {
        if (!dc_buses.count(load.bus)) continue;
        if (load.kind == LoadKind::rl) {
            const std::string name = "dcload" + std::to_string(di++);
            Mat a{{-load.r / load.l}};
            Mat b{{1.0 / load.l}};
            as.add_dynamic(name, make_lti(a, b, {"i"}, {"v"}));
            as.wire("bus_" + load.bus + ".v", name + ".v");
            as.wire(name + ".i", "bus_" + load.bus + ".i", -1.0);
        } else {
            as.wire("bus_" + load.bus + ".v", "bus_" + load.bus + ".i", -1.0 / load.r);
        }
    }
    for (const auto& bus : cfg.buses) {
        if (bus.kind != BusKind::dc) continue;
        as.add_static("bus_" + bus.name,
                      static_block(Mat{{cfg.r_virtual}}, {"i"}, {"v"}));
    }
    for (const auto& conv : cfg.dc_converters) {
        as.wire(conv.name + ".i_o", "bus_" + conv.bus + ".i", +1.0);
        as.wire("bus_" + conv.bus + ".v", conv.name + ".V_dc", +1.0);
    }
}

void add_ac_side(const GridConfig& cfg, const Equilibrium& eq, Assembly& as) {
    if (cfg.ac_converters.empty()) return;
    const std::string wsrc = cfg.ac_converters.front().name + ".w";
    const double ws = eq.w_sys;

    for (const auto& conv : cfg.ac_converters) {
        VscSpec spec = conv;
        auto it = eq.vsc_points.find(conv.name);
        if (it != eq.vsc_points.end()) spec.op = it->second;
        as.add_dynamic(conv.name, build_vsc(spec));

        const double delta0 = eq.vsc_delta.count(conv.name) ? eq.vsc_delta.at(conv.name) : 0.0;
        const FrameRotation fr = frame_rotation(delta0);
        const auto vb0 = eq.ac_bus_v.count(conv.bus) ? eq.ac_bus_v.at(conv.bus)
                                                     : std::array<double, 2>{0.0, 0.0};
        Mat vb0m(2, 1);
        vb0m(0, 0) = vb0[0];
        vb0m(1, 0) = vb0[1];
        Mat il0m(2, 1);
        il0m(0, 0) = spec.op.i_od0;
        il0m(1, 0) = spec.op.i_oq0;

        // common-frame bus voltage into the converter frame
        Mat din(2, 3);
        const Mat tt = fr.t.transpose();
        const Mat dvt = fr.dt.transpose() * vb0m;
        for (int i = 0; i < 2; ++i) {
            din(i, 0) = tt(i, 0);
            din(i, 1) = tt(i, 1);
            din(i, 2) = dvt(i, 0);
        }
        as.add_static(conv.name + "_rin", static_block(din, {"vD", "vQ", "th"}, {"vd", "vq"}));

        // converter output current into the common frame
        Mat dout(2, 3);
        const Mat dit = fr.dt * il0m;
        for (int i = 0; i < 2; ++i) {
            dout(i, 0) = fr.t(i, 0);
            dout(i, 1) = fr.t(i, 1);
            dout(i, 2) = dit(i, 0);
        }
        as.add_static(conv.name + "_rout", static_block(dout, {"id", "iq", "th"}, {"iD", "iQ"}));

        as.wire("bus_" + conv.bus + ".v_d", conv.name + "_rin.vD");
        as.wire("bus_" + conv.bus + ".v_q", conv.name + "_rin.vQ");
        as.wire(conv.name + ".theta", conv.name + "_rin.th");
        as.wire(conv.name + "_rin.vd", conv.name + ".v_bd");
        as.wire(conv.name + "_rin.vq", conv.name + ".v_bq");
        as.wire(conv.name + ".i_od_out", conv.name + "_rout.id");
        as.wire(conv.name + ".i_oq_out", conv.name + "_rout.iq");
        as.wire(conv.name + ".theta", conv.name + "_rout.th");
        as.wire(conv.name + "_rout.iD", "bus_" + conv.bus + ".i_d");
        as.wire(conv.name + "_rout.iQ", "bus_" + conv.bus + ".i_q");
        as.wire(wsrc, conv.name + ".w_com");
    }

    std::size_t li = 0;
    for (const auto& line : cfg.ac_lines) {
        const std::string name = "acline" + std::to_string(li++);
        const auto vf0 = eq.ac_bus_v.count(line.from) ? eq.ac_bus_v.at(line.from)
                                                      : std::array<double, 2>{0.0, 0.0};
        const auto vt0 = eq.ac_bus_v.count(line.to) ? eq.ac_bus_v.at(line.to)
                                                    : std::array<double, 2>{0.0, 0.0};
        if (line.kind == LineKind::rl) {
            const auto i0 = rl_steady_current(line.r, line.l, ws, vf0[0] - vt0[0], vf0[1] - vt0[1]);
            Mat a{{-line.r / line.l, ws}, {-ws, -line.r / line.l}};
            Mat b(2, 5);
            b(0, 0) = 1.0 / line.l;
            b(0, 2) = -1.0 / line.l;
            b(1, 1) = 1.0 / line.l;
            b(1, 3) = -1.0 / line.l;
            b(0, 4) = i0[1];
            b(1, 4) = -i0[0];
            as.add_dynamic(name, make_lti(a, b, {"i_d", "i_q"},
                                          {"v_fd", "v_fq", "v_td", "v_tq", "w"}));
            as.wire(wsrc, name + ".w");
        } else {
            Mat d(2, 4);
            d(0, 0) = 1.0 / line.r;
            d(0, 2) = -1.0 / line.r;
            d(1, 1) = 1.0 / line.r;
            d(1, 3) = -1.0 / line.r;
            as.add_static(name, static_block(d, {"v_fd", "v_fq", "v_td", "v_tq"}, {"i_d", "i_q"}));
        }
        as.wire("bus_" + line.from + ".v_d", name + ".v_fd");
        as.wire("bus_" + line.from + ".v_q", name + ".v_fq");
        as.wire("bus_" + line.to + ".v_d", name + ".v_td");
        as.wire("bus_" + line.to + ".v_q", name + ".v_tq");
        as.wire(name + ".i_d", "bus_" + line.from + ".i_d", -1.0);
        as.wire(name + ".i_q", "bus_" + line.from + ".i_q", -1.0);
        as.wire(name + ".i_d", "bus_" + line.to + ".i_d", +1.0);
        as.wire(name + ".i_q", "bus_" + line.to + ".i_q", +1.0);
    }

    std::set<std::string> ac_buses;
    for (const auto& b : cfg.buses)
        if (b.kind == BusKind::ac) ac_buses.insert(b.name);
    std::size_t di = 0;
    for (const auto& load : cfg.loads) {
        if (!ac_buses.count(load.bus)) continue;
        if (load.kind == LoadKind::rl) {
            const std::string name = "acload" + std::to_string(di++);
            const auto v0 = eq.ac_bus_v.count(load.bus) ? eq.ac_bus_v.at(load.bus)
                                                        : std::array<double, 2>{0.0, 0.0};
            const auto i0 = rl_steady_current(load.r, load.l, ws, v0[0], v0[1]);
            Mat a{{-load.r / load.l, ws}, {-ws, -load.r / load.l}};
            Mat b(2, 3);
            b(0, 0) = 1.0 / load.l;
            b(1, 1) = 1.0 / load.l;
            b(0, 2) = i0[1];
            b(1, 2) = -i0[0];
            as.add_dynamic(name, make_lti(a, b, {"i_d", "i_q"}, {"v_d", "v_q", "w"}));
            as.wire(wsrc, name + ".w");
            as.wire("bus_" + load.bus + ".v_d", name + ".v_d");
            as.wire("bus_" + load.bus + ".v_q", name + ".v_q");
            as.wire(name + ".i_d", "bus_" + load.bus + ".i_d", -1.0);
            as.wire(name + ".i_q", "bus_" + load.bus + ".i_q", -1.0);
        } else {
            as.wire("bus_" + load.bus + ".v_d", "bus_" + load.bus + ".i_d", -1.0 / load.r);
            as.wire("bus_" + load.bus + ".v_q", "bus_" + load.bus + ".i_q", -1.0 / load.r);
        }
    }

    for (const auto& bus : cfg.buses) {
        if (bus.kind != BusKind::ac) continue;
        Mat d(2, 2);
        d(0, 0) = cfg.r_virtual;
        d(1, 1) = cfg.r_virtual;
        as.add_static("bus_" + bus.name, static_block(d, {"i_d", "i_q"}, {"v_d", "v_q"}));
    }
}

void add_interlink(const GridConfig& cfg, const Equilibrium& eq, Assembly& as) {
    const IcSpec& ic = *cfg.ic;
    IcParams params = ic.params;
    IcOperatingPoint op = ic.op;
    if (eq.vsc_points.size() || eq.dc_points.size()) {
        op = eq.ic_point;
        params.m_d0 = eq.ic_m_d0;
        params.m_q0 = eq.ic_m_q0;
    }
    as.add_dynamic(ic.name, build_ic(params, op));

    const FrameRotation fr = frame_rotation(eq.ic_delta);
    Mat vloc0(2, 1);
    vloc0(0, 0) = op.v_icd0;
    vloc0(1, 0) = op.v_icq0;
    Mat iloc0(2, 1);
    iloc0(0, 0) = op.i_od0;
    iloc0(1, 0) = op.i_oq0;
    const Mat icom0 = fr.t * iloc0;

    Mat dout(2, 3);
    const Mat dv = fr.dt * vloc0;
    for (int i = 0; i < 2; ++i) {
        dout(i, 0) = fr.t(i, 0);
        dout(i, 1) = fr.t(i, 1);
        dout(i, 2) = dv(i, 0);
    }
    as.add_static(ic.name + "_rout", static_block(dout, {"vd", "vq", "th"}, {"vD", "vQ"}));

    Mat din(2, 3);
    const Mat tt = fr.t.transpose();
    const Mat di = fr.dt.transpose() * icom0;
    for (int i = 0; i < 2; ++i) {
        din(i, 0) = tt(i, 0);
        din(i, 1) = tt(i, 1);
        din(i, 2) = di(i, 0);
    }
    as.add_static(ic.name + "_rin", static_block(din, {"iD", "iQ", "th"}, {"id", "iq"}));

    Mat dlac(2, 4);
    dlac(0, 0) = 1.0 / ic.r_link_ac;
    dlac(0, 2) = -1.0 / ic.r_link_ac;
    dlac(1, 1) = 1.0 / ic.r_link_ac;
    dlac(1, 3) = -1.0 / ic.r_link_ac;
    as.add_static(ic.name + "_lac",
                  static_block(dlac, {"vicD", "vicQ", "vbD", "vbQ"}, {"iD", "iQ"}));
    as.add_static(ic.name + "_ldc",
                  static_block(Mat{{1.0 / ic.r_link_dc, -1.0 / ic.r_link_dc}},
                               {"vdc", "vb"}, {"i"}));

    as.wire(ic.name + ".v_icd", ic.name + "_rout.vd");
    as.wire(ic.name + ".v_icq", ic.name + "_rout.vq");
    as.wire(ic.name + ".delta", ic.name + "_rout.th");
    as.wire(ic.name + ".delta", ic.name + "_rin.th");
    as.wire(ic.name + "_rout.vD", ic.name + "_lac.vicD");
    as.wire(ic.name + "_rout.vQ", ic.name + "_lac.vicQ");
    as.wire("bus_" + ic.ac_bus + ".v_d", ic.name + "_lac.vbD");
    as.wire("bus_" + ic.ac_bus + ".v_q", ic.name + "_lac.vbQ");
    as.wire(ic.name + "_lac.iD", "bus_" + ic.ac_bus + ".i_d", +1.0);
    as.wire(ic.name + "_lac.iQ", "bus_" + ic.ac_bus + ".i_q", +1.0);
    as.wire(ic.name + "_lac.iD", ic.name + "_rin.iD");
    as.wire(ic.name + "_lac.iQ", ic.name + "_rin.iQ");
    as.wire(ic.name + "_rin.id", ic.name + ".i_od");
    as.wire(ic.name + "_rin.iq", ic.name + ".i_oq");
    as.wire(ic.name + ".v_dc", ic.name + "_ldc.vdc");
    as.wire("bus_" + ic.dc_bus + ".v", ic.name + "_ldc.vb");
    as.wire(ic.name + "_ldc.i", ic.name + ".i_odc", +1.0);
    as.wire(ic.name + "_ldc.i", "bus_" + ic.dc_bus + ".i", +1.0);
}

} // namespace

// ---------------------------------------------------------------------------
// public assembly entry points
// ---------------------------------------------------------------------------

Lti assemble_dc_subgrid(const GridConfig& cfg) {
    const GridConfig sub = dc_only(cfg);
    validate(sub);
    check_islands(sub, BusKind::dc);
    return assemble_dc_subgrid(sub, solve_equilibrium(sub));
}

Lti assemble_dc_subgrid(const GridConfig& cfg, const Equilibrium& eq) {
    const GridConfig sub = dc_only(cfg);
    validate(sub);
    check_islands(sub, BusKind::dc);
    Assembly as;
    add_dc_side(sub, eq, as);
    return as.finish();
}

Lti assemble_ac_subgrid(const GridConfig& cfg) {
    const GridConfig sub = ac_only(cfg);
    validate(sub);
    check_islands(sub, BusKind::ac);
    return assemble_ac_subgrid(sub, solve_equilibrium(sub));
}

Lti assemble_ac_subgrid(const GridConfig& cfg, const Equilibrium& eq) {
    const GridConfig sub = ac_only(cfg);
    validate(sub);
    check_islands(sub, BusKind::ac);
    Assembly as;
    add_ac_side(sub, eq, as);
    return as.finish();
}

Lti assemble_hybrid(const GridConfig& cfg) {
    validate(cfg);
    if (!cfg.ic) throw MissingInterlink("hybrid assembly requires an interlinking converter");
    check_islands(cfg, BusKind::dc);
    check_islands(cfg, BusKind::ac);
    return assemble_hybrid(cfg, solve_equilibrium(cfg));
}

Lti assemble_hybrid(const GridConfig& cfg, const Equilibrium& eq) {
    validate(cfg);
    if (!cfg.ic) throw MissingInterlink("hybrid assembly requires an interlinking converter");
    check_islands(cfg, BusKind::dc);
    check_islands(cfg, BusKind::ac);
    Assembly as;
    add_dc_side(cfg, eq, as);
    add_ac_side(cfg, eq, as);
    add_interlink(cfg, eq, as);
    return as.finish();
}

Lti build_scope(const GridConfig& cfg, const std::string& scope) {
    if (scope == "dc") return assemble_dc_subgrid(cfg);
    if (scope == "ac") return assemble_ac_subgrid(cfg);
    if (scope == "hybrid") return assemble_hybrid(cfg);
    if (scope.rfind("converter:", 0) == 0) {
        const std::string name = scope.substr(10);
        const Equilibrium eq = solve_equilibrium(cfg);
        for (const auto& c : cfg.dc_converters)
            if (c.name == name) {
                DcConverterSpec spec = c;
                spec.op = eq.dc_points.at(name);
                return build_dc_converter(spec);
            }
        for (const auto& c : cfg.ac_converters)
            if (c.name == name) {
                VscSpec spec = c;
                spec.op = eq.vsc_points.at(name);
                return build_vsc(spec);
            }
        if (cfg.ic && cfg.ic->name == name) {
            IcParams p = cfg.ic->params;
            p.m_d0 = eq.ic_m_d0;
            p.m_q0 = eq.ic_m_q0;
            return build_ic(p, eq.ic_point);
        }
        throw ConfigError("scope", "no converter named '" + name + "'");
    }
    throw ConfigError("scope", "expected dc|ac|hybrid|converter:<name>, got '" + scope + "'");
}

} // namespace hmg
