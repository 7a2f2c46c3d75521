#include "hmg/config.hpp"

#include <json.hpp>

#include "hmg/model_io.hpp"

namespace hmg {

namespace {

using nlohmann::json;

double num(const json& j, const std::string& path, const std::string& field) {
    if (!j.contains(field)) throw ConfigError(path + "." + field, "missing number");
    if (!j[field].is_number()) throw ConfigError(path + "." + field, "expected a number");
    return j[field].get<double>();
}

double num_or(const json& j, const std::string& path, const std::string& field, double dflt) {
    if (!j.contains(field)) return dflt;
    if (!j[field].is_number()) throw ConfigError(path + "." + field, "expected a number");
    return j[field].get<double>();
}

std::string str(const json& j, const std::string& path, const std::string& field) {
    if (!j.contains(field)) throw ConfigError(path + "." + field, "missing string");
    if (!j[field].is_string()) throw ConfigError(path + "." + field, "expected a string");
    return j[field].get<std::string>();
}

DcFilterParams filter_from(const json& j, const std::string& path) {
    if (!j.contains("filter")) throw ConfigError(path + ".filter", "missing object");
    const json& f = j["filter"];
    const std::string p = path + ".filter";
    DcFilterParams out;
    out.r_f = num(f, p, "r_f_ohm");
    out.l_f = num(f, p, "l_f_henry");
    out.c_f = num(f, p, "c_f_farad");
    out.r_o = num(f, p, "r_o_ohm");
    out.l_o = num(f, p, "l_o_henry");
    return out;
}

LineDef line_from(const json& j, const std::string& path) {
    LineDef l;
    l.from = str(j, path, "from");
    l.to = str(j, path, "to");
    l.r = num(j, path, "r_ohm");
    const std::string kind = j.value("kind", std::string("rl"));
    if (kind == "rl") {
        l.kind = LineKind::rl;
        l.l = num(j, path, "l_henry");
    } else if (kind == "resistive") {
        l.kind = LineKind::resistive;
        l.l = 0.0;
    } else {
        throw ConfigError(path + ".kind", "expected rl|resistive");
    }
    return l;
}

} // namespace

GridConfig parse_grid_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError("<root>", std::string("parse failure: ") + e.what());
    }

    GridConfig cfg;
    cfg.r_virtual = num_or(j, "", "r_virtual_ohm", 1e3);

    if (!j.contains("buses") || !j["buses"].is_array())
        throw ConfigError("buses", "missing array");
    std::size_t idx = 0;
    for (const auto& b : j["buses"]) {
        const std::string path = "buses[" + std::to_string(idx++) + "]";
        BusDef def;
        def.name = str(b, path, "name");
        const std::string kind = str(b, path, "kind");
        if (kind == "dc") def.kind = BusKind::dc;
        else if (kind == "ac") def.kind = BusKind::ac;
        else throw ConfigError(path + ".kind", "expected dc|ac");
        cfg.buses.push_back(def);
    }

    idx = 0;
    for (const auto& c : j.value("dc_converters", json::array())) {
        const std::string path = "dc_converters[" + std::to_string(idx++) + "]";
        DcConverterSpec spec;
        spec.name = str(c, path, "name");
        spec.bus = str(c, path, "bus");
        spec.v_ref = num_or(c, path, "v_ref_volt", 400.0);
        spec.filter = filter_from(c, path);
        if (!c.contains("controller")) throw ConfigError(path + ".controller", "missing object");
        {
            const json& k = c["controller"];
            const std::string p = path + ".controller";
            spec.ctrl.k_pv = num(k, p, "k_pv");
            spec.ctrl.k_iv = num(k, p, "k_iv");
            spec.ctrl.k_pc = num(k, p, "k_pc");
            spec.ctrl.k_ic = num(k, p, "k_ic");
            spec.ctrl.h_ff = num_or(k, p, "h_ff", 0.75);
            spec.ctrl.w_f = num(k, p, "w_f_rad_per_s");
            spec.ctrl.m_dc = num(k, p, "m_dc_volt_per_watt");
        }
        if (c.contains("operating_point")) {
            const json& o = c["operating_point"];
            const std::string p = path + ".operating_point";
            spec.op.v_o0 = num(o, p, "v_o0_volt");
            spec.op.i_o0 = num(o, p, "i_o0_amp");
        }
        cfg.dc_converters.push_back(std::move(spec));
    }

    idx = 0;
    for (const auto& c : j.value("ac_converters", json::array())) {
        const std::string path = "ac_converters[" + std::to_string(idx++) + "]";
        VscSpec spec;
        spec.name = str(c, path, "name");
        spec.bus = str(c, path, "bus");
        const DcFilterParams f = filter_from(c, path);
        spec.params.r_f = f.r_f;
        spec.params.l_f = f.l_f;
        spec.params.c_f = f.c_f;
        spec.params.r_o = f.r_o;
        spec.params.l_o = f.l_o;
        if (!c.contains("controller")) throw ConfigError(path + ".controller", "missing object");
        {
            const json& k = c["controller"];
            const std::string p = path + ".controller";
            spec.params.k_pv = num(k, p, "k_pv");
            spec.params.k_iv = num(k, p, "k_iv");
            spec.params.k_pc = num(k, p, "k_pc");
            spec.params.k_ic = num(k, p, "k_ic");
            spec.params.h_ff = num_or(k, p, "h_ff", 0.75);
            spec.params.w_f = num(k, p, "w_f_rad_per_s");
        }
        if (c.contains("droop")) {
            const json& k = c["droop"];
            const std::string p = path + ".droop";
            spec.params.m_p = num_or(k, p, "m_p_rad_per_watt_s", 1e-4);
            spec.params.n_q = num_or(k, p, "n_q_volt_per_var", 1e-3);
        }
        spec.params.w_n = num_or(c, path, "w_n_rad_per_s", 314.15926535897931);
        spec.params.v_nom = num_or(c, path, "v_nom_volt", 380.0);
        if (c.contains("operating_point")) {
            const json& o = c["operating_point"];
            const std::string p = path + ".operating_point";
            spec.op.v_od0 = num(o, p, "v_od0_volt");
            spec.op.v_oq0 = num(o, p, "v_oq0_volt");
            spec.op.i_od0 = num(o, p, "i_od0_amp");
            spec.op.i_oq0 = num(o, p, "i_oq0_amp");
            spec.op.i_invd0 = num_or(o, p, "i_invd0_amp", spec.op.i_od0);
            spec.op.i_invq0 = num_or(o, p, "i_invq0_amp", spec.op.i_oq0);
            spec.op.w0 = num_or(o, p, "w0_rad_per_s", spec.params.w_n);
        } else {
            spec.op.w0 = spec.params.w_n;
            spec.op.v_od0 = spec.params.v_nom;
        }
        cfg.ac_converters.push_back(std::move(spec));
    }

    if (j.contains("ic") && !j["ic"].is_null()) {
        const json& c = j["ic"];
        const std::string path = "ic";
        IcSpec spec;
        spec.name = str(c, path, "name");
        spec.ac_bus = str(c, path, "ac_bus");
        spec.dc_bus = str(c, path, "dc_bus");
        if (!c.contains("filter")) throw ConfigError("ic.filter", "missing object");
        {
            const json& f = c["filter"];
            spec.params.r_f = num(f, "ic.filter", "r_f_ohm");
            spec.params.l_f = num(f, "ic.filter", "l_f_henry");
            spec.params.c_f = num(f, "ic.filter", "c_f_farad");
        }
        spec.params.c_dc = num(c, path, "c_dc_farad");
        spec.params.j = num_or(c, path, "inertia_j", 0.2);
        spec.params.k_d = num_or(c, path, "damping_k_d", 10.0);
        spec.params.p_ref = num_or(c, path, "p_ref_watt", 0.0);
        spec.params.w_g_star = num_or(c, path, "w_g_star_rad_per_s", 314.15926535897931);
        spec.params.v_nom = num_or(c, path, "v_nom_volt", 380.0);
        if (c.contains("controller")) {
            const json& k = c["controller"];
            const std::string p = "ic.controller";
            spec.params.k_pv = num(k, p, "k_pv");
            spec.params.k_iv = num(k, p, "k_iv");
            spec.params.k_pc = num(k, p, "k_pc");
            spec.params.k_ic = num(k, p, "k_ic");
            spec.params.h_ff = num_or(k, p, "h_ff", 0.75);
        }
        spec.r_link_ac = num_or(c, path, "r_link_ac_ohm", 0.05);
        spec.r_link_dc = num_or(c, path, "r_link_dc_ohm", 0.05);
        cfg.ic = std::move(spec);
    }

    idx = 0;
    for (const auto& l : j.value("dc_lines", json::array()))
        cfg.dc_lines.push_back(line_from(l, "dc_lines[" + std::to_string(idx++) + "]"));
    idx = 0;
    for (const auto& l : j.value("ac_lines", json::array()))
        cfg.ac_lines.push_back(line_from(l, "ac_lines[" + std::to_string(idx++) + "]"));

    idx = 0;
    for (const auto& l : j.value("loads", json::array())) {
        const std::string path = "loads[" + std::to_string(idx++) + "]";
        LoadDef def;
        def.bus = str(l, path, "bus");
        const std::string kind = l.value("kind", std::string("resistive"));
        if (kind == "resistive") def.kind = LoadKind::resistive;
        else if (kind == "rl") {
            def.kind = LoadKind::rl;
            def.l = num(l, path, "l_henry");
        } else throw ConfigError(path + ".kind", "expected resistive|rl");
        def.r = num(l, path, "r_ohm");
        cfg.loads.push_back(def);
    }

    try {
        validate(cfg);
    } catch (const UnknownBus& e) {
        throw ConfigError("buses", e.what());
    } catch (const InvalidSpec& e) {
        throw ConfigError("<config>", e.what());
    }
    return cfg;
}

GridConfig load_grid_config(const std::string& path) {
    return parse_grid_config(read_text_file(path));
}

} // namespace hmg
