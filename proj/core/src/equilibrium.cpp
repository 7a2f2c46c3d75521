#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "hmg/network.hpp"
#include "hmg/textio.hpp"

namespace hmg {

namespace {

struct BusIndex {
    std::vector<std::string> dc, ac;
    std::map<std::string, std::size_t> dc_pos, ac_pos;
};

BusIndex index_buses(const GridConfig& cfg) {
    BusIndex bi;
    for (const auto& b : cfg.buses) {
        if (b.kind == BusKind::dc) {
            bi.dc_pos[b.name] = bi.dc.size();
            bi.dc.push_back(b.name);
        } else {
            bi.ac_pos[b.name] = bi.ac.size();
            bi.ac.push_back(b.name);
        }
    }
    return bi;
}

// steady-state dq impedance of an RL branch at frequency w
std::array<double, 2> rl_current(double r, double l, double w,
                                 double vd, double vq) {
    // [r -wl; wl r] i = v
    const double det = r * r + w * l * w * l;
    return {(r * vd + w * l * vq) / det, (-w * l * vd + r * vq) / det};
}

} // namespace

void validate(const GridConfig& cfg) {
    if (!(cfg.r_virtual > 0)) throw InvalidSpec("r_virtual must be positive");
    std::set<std::string> bus_names, unit_names;
    for (const auto& b : cfg.buses)
        if (!bus_names.insert(b.name).second)
            throw InvalidSpec("bus name '" + b.name + "' repeated");
    auto need_bus = [&](const std::string& name, BusKind kind, const std::string& who) {
        for (const auto& b : cfg.buses)
            if (b.name == name) {
                if (b.kind != kind)
                    throw InvalidSpec(who + " references bus '" + name + "' of the wrong kind");
                return;
            }
        throw UnknownBus(who + " references unknown bus '" + name + "'");
    };
    for (const auto& c : cfg.dc_converters) {
        if (!unit_names.insert(c.name).second)
            throw InvalidSpec("converter name '" + c.name + "' repeated");
        need_bus(c.bus, BusKind::dc, "dc converter '" + c.name + "'");
        validate(c.filter);
        validate(c.ctrl);
    }
    for (const auto& c : cfg.ac_converters) {
        if (!unit_names.insert(c.name).second)
            throw InvalidSpec("converter name '" + c.name + "' repeated");
        need_bus(c.bus, BusKind::ac, "ac converter '" + c.name + "'");
        validate(c.params);
    }
    if (cfg.ic) {
        if (!unit_names.insert(cfg.ic->name).second)
            throw InvalidSpec("converter name '" + cfg.ic->name + "' repeated");
        need_bus(cfg.ic->ac_bus, BusKind::ac, "interlinking converter");
        need_bus(cfg.ic->dc_bus, BusKind::dc, "interlinking converter");
        if (!(cfg.ic->r_link_ac > 0) || !(cfg.ic->r_link_dc > 0))
            throw InvalidSpec("interlink coupling resistances must be positive");
    }
    for (const auto& l : cfg.dc_lines) {
        need_bus(l.from, BusKind::dc, "dc line");
        need_bus(l.to, BusKind::dc, "dc line");
        if (!(l.r > 0)) throw InvalidSpec("dc line resistance must be positive");
        if (l.kind == LineKind::rl && !(l.l > 0))
            throw InvalidSpec("dc rl line inductance must be positive");
    }
    for (const auto& l : cfg.ac_lines) {
        need_bus(l.from, BusKind::ac, "ac line");
        need_bus(l.to, BusKind::ac, "ac line");
        if (!(l.r > 0)) throw InvalidSpec("ac line resistance must be positive");
        if (l.kind == LineKind::rl && !(l.l > 0))
            throw InvalidSpec("ac rl line inductance must be positive");
    }
    for (const auto& ld : cfg.loads) {
        bool dcb = false, found = false;
        for (const auto& b : cfg.buses)
            if (b.name == ld.bus) { found = true; dcb = b.kind == BusKind::dc; }
        if (!found) throw UnknownBus("load references unknown bus '" + ld.bus + "'");
        (void)dcb;
        if (ld.r == 0.0) throw InvalidSpec("load resistance must be nonzero");
        if (ld.kind == LoadKind::rl && !(ld.l > 0))
            throw InvalidSpec("rl load inductance must be positive");
    }
}

FrameRotation frame_rotation(double delta) {
    if (!std::isfinite(delta)) throw InvalidSpec("frame_rotation: non-finite angle");
    const double c = std::cos(delta), s = std::sin(delta);
    FrameRotation fr;
    fr.t = Mat{{c, -s}, {s, c}};
    fr.dt = Mat{{-s, -c}, {c, -s}};
    return fr;
}

GridConfig dc_only(const GridConfig& cfg) {
    GridConfig out = cfg;
    out.ac_converters.clear();
    out.ac_lines.clear();
    out.ic.reset();
    std::vector<BusDef> buses;
    std::set<std::string> keep;
    for (const auto& b : cfg.buses)
        if (b.kind == BusKind::dc) { buses.push_back(b); keep.insert(b.name); }
    out.buses = std::move(buses);
    std::vector<LoadDef> loads;
    for (const auto& l : cfg.loads)
        if (keep.count(l.bus)) loads.push_back(l);
    out.loads = std::move(loads);
    return out;
}

GridConfig ac_only(const GridConfig& cfg) {
    GridConfig out = cfg;
    out.dc_converters.clear();
    out.dc_lines.clear();
    out.ic.reset();
    std::vector<BusDef> buses;
    std::set<std::string> keep;
    for (const auto& b : cfg.buses)
        if (b.kind == BusKind::ac) { buses.push_back(b); keep.insert(b.name); }
    out.buses = std::move(buses);
    std::vector<LoadDef> loads;
    for (const auto& l : cfg.loads)
        if (keep.count(l.bus)) loads.push_back(l);
    out.loads = std::move(loads);
    return out;
}

// ---------------------------------------------------------------------------
// Newton solve of the steady-state equations
// ---------------------------------------------------------------------------

Equilibrium solve_equilibrium(const GridConfig& cfg) {
    validate(cfg);
    const BusIndex bi = index_buses(cfg);
    const std::size_t ndcb = bi.dc.size();
    const std::size_t ndcc = cfg.dc_converters.size();
    const std::size_t nvsc = cfg.ac_converters.size();
    const std::size_t nacb = bi.ac.size();
    const bool has_ac = nvsc > 0;
    const bool has_ic = cfg.ic.has_value();
    if (has_ic && (!has_ac || ndcc == 0))
        throw InvalidSpec("interlinking converter requires both sub-grids");

    // unknown layout
    std::size_t off = 0;
    const std::size_t z_dc_bus = off; off += ndcb;
    const std::size_t z_dc_io = off; off += ndcc;
    const std::size_t z_ws = off; if (has_ac) off += 1;
    const std::size_t z_vsc = off; if (has_ac) off += 4 * nvsc - 1; // conv 0 has no delta
    const std::size_t z_ac_bus = off; if (has_ac) off += 2 * nacb;
    const std::size_t z_ic = off; if (has_ic) off += 4;
    const std::size_t nz = off;
    if (nz == 0) throw InvalidSpec("empty grid");

    auto vsc_slot = [&](std::size_t k, int field) {
        // field: 0 delta (k>0), 1 v_od, 2 i_od, 3 i_oq
        const std::size_t base = z_vsc + (k == 0 ? 0 : 4 * k - 1);
        if (k == 0) return base + static_cast<std::size_t>(field - 1);
        return base + static_cast<std::size_t>(field);
    };

    auto residual = [&](const std::vector<double>& z, std::vector<double>& r) {
        r.assign(nz, 0.0);
        std::vector<double> dc_inj(ndcb, 0.0);
        std::vector<std::array<double, 2>> ac_inj(nacb, {0.0, 0.0});
        const double ws = has_ac ? z[z_ws] : 0.0;

        // dc converters: droop law on the bus voltage
        for (std::size_t k = 0; k < ndcc; ++k) {
            const auto& c = cfg.dc_converters[k];
            const std::size_t b = bi.dc_pos.at(c.bus);
            const double vb = z[z_dc_bus + b];
            const double io = z[z_dc_io + k];
            const double vo = vb + c.filter.r_o * io;
            const double pw = vo * io;
            r[z_dc_io + k] = vb - (c.v_ref - c.ctrl.m_dc * pw);
            dc_inj[b] += io;
        }
        // dc lines and loads
        for (const auto& l : cfg.dc_lines) {
            const std::size_t f = bi.dc_pos.at(l.from), t = bi.dc_pos.at(l.to);
            const double i = (z[z_dc_bus + f] - z[z_dc_bus + t]) / l.r;
            dc_inj[f] -= i;
            dc_inj[t] += i;
        }
        for (const auto& ld : cfg.loads) {
            auto it = bi.dc_pos.find(ld.bus);
            if (it == bi.dc_pos.end()) continue;
            dc_inj[it->second] -= z[z_dc_bus + it->second] / ld.r;
        }

        // vsc droop + connector equations
        for (std::size_t k = 0; k < nvsc; ++k) {
            const auto& c = cfg.ac_converters[k];
            const std::size_t b = bi.ac_pos.at(c.bus);
            const double delta = k == 0 ? 0.0 : z[vsc_slot(k, 0)];
            const double vod = z[vsc_slot(k, 1)];
            const double iod = z[vsc_slot(k, 2)];
            const double ioq = z[vsc_slot(k, 3)];
            const double pw = 1.5 * vod * iod;
            const double qv = -1.5 * vod * ioq;
            const std::size_t rbase = vsc_slot(k, 0);
            if (k == 0) {
                r[z_ws] = c.params.w_n - c.params.m_p * pw - ws;
            } else {
                r[rbase] = c.params.w_n - c.params.m_p * pw - ws;
            }
            r[vsc_slot(k, 1)] = c.params.v_nom - c.params.n_q * qv - vod;
            // connector at steady state, in the converter frame
            const double cd = std::cos(delta), sd = std::sin(delta);
            const double vbD = z[z_ac_bus + 2 * b], vbQ = z[z_ac_bus + 2 * b + 1];
            const double vg_d = cd * vbD + sd * vbQ;
            const double vg_q = -sd * vbD + cd * vbQ;
            r[vsc_slot(k, 2)] = vg_d - (vod - c.params.r_o * iod + ws * c.params.l_o * ioq);
            r[vsc_slot(k, 3)] = vg_q - (-c.params.r_o * ioq - ws * c.params.l_o * iod);
            // injection into the bus, common frame
            ac_inj[b][0] += cd * iod - sd * ioq;
            ac_inj[b][1] += sd * iod + cd * ioq;
        }
        // ac lines and loads
        for (const auto& l : cfg.ac_lines) {
            const std::size_t f = bi.ac_pos.at(l.from), t = bi.ac_pos.at(l.to);
            const double dvd = z[z_ac_bus + 2 * f] - z[z_ac_bus + 2 * t];
            const double dvq = z[z_ac_bus + 2 * f + 1] - z[z_ac_bus + 2 * t + 1];
            std::array<double, 2> i{};
            if (l.kind == LineKind::rl) i = rl_current(l.r, l.l, ws, dvd, dvq);
            else i = {dvd / l.r, dvq / l.r};
            ac_inj[f][0] -= i[0];
            ac_inj[f][1] -= i[1];
            ac_inj[t][0] += i[0];
            ac_inj[t][1] += i[1];
        }
        for (const auto& ld : cfg.loads) {
            auto it = bi.ac_pos.find(ld.bus);
            if (it == bi.ac_pos.end()) continue;
            const double vd = z[z_ac_bus + 2 * it->second];
            const double vq = z[z_ac_bus + 2 * it->second + 1];
            std::array<double, 2> i{};
            if (ld.kind == LoadKind::rl) i = rl_current(ld.r, ld.l, ws, vd, vq);
            else i = {vd / ld.r, vq / ld.r};
            ac_inj[it->second][0] -= i[0];
            ac_inj[it->second][1] -= i[1];
        }

        // interlinking converter
        if (has_ic) {
            const auto& ic = *cfg.ic;
            const double delta = z[z_ic + 0];
            const double vdc = z[z_ic + 1];
            const double iod = z[z_ic + 2];
            const double ioq = z[z_ic + 3];
            const double vnom = ic.params.v_nom;
            const double i_icd = iod;
            const double i_icq = ioq + ws * ic.params.c_f * vnom;
            const double md = (vnom + ic.params.r_f * i_icd - ws * ic.params.l_f * i_icq) / vdc;
            const double mq = (ic.params.r_f * i_icq + ws * ic.params.l_f * i_icd) / vdc;
            const double i_odc = -1.5 * (md * i_icd + mq * i_icq);
            const double p_ic = 1.5 * vnom * i_icd;
            r[z_ic + 0] = ic.params.p_ref + ic.params.k_d * (ic.params.w_g_star - ws) - p_ic;

            const std::size_t ab = bi.ac_pos.at(ic.ac_bus);
            const double cd = std::cos(delta), sd = std::sin(delta);
            const double vicD = cd * vnom, vicQ = sd * vnom;
            const double vbD = z[z_ac_bus + 2 * ab], vbQ = z[z_ac_bus + 2 * ab + 1];
            const double ilD = (vicD - vbD) / ic.r_link_ac;
            const double ilQ = (vicQ - vbQ) / ic.r_link_ac;
            r[z_ic + 2] = (cd * iod - sd * ioq) - ilD;
            r[z_ic + 3] = (sd * iod + cd * ioq) - ilQ;
            ac_inj[ab][0] += ilD;
            ac_inj[ab][1] += ilQ;

            const std::size_t db = bi.dc_pos.at(ic.dc_bus);
            r[z_ic + 1] = i_odc - (vdc - z[z_dc_bus + db]) / ic.r_link_dc;
            dc_inj[db] += i_odc;
        }

        for (std::size_t b = 0; b < ndcb; ++b) r[z_dc_bus + b] = dc_inj[b];
        for (std::size_t b = 0; b < nacb; ++b) {
            r[z_ac_bus + 2 * b] = ac_inj[b][0];
            r[z_ac_bus + 2 * b + 1] = ac_inj[b][1];
        }
    };

    // initial iterate
    std::vector<double> z(nz, 0.0);
    {
        double vref = 400.0;
        if (ndcc) vref = cfg.dc_converters.front().v_ref;
        for (std::size_t b = 0; b < ndcb; ++b) z[z_dc_bus + b] = vref;
        for (std::size_t k = 0; k < ndcc; ++k) z[z_dc_io + k] = 1.0;
        if (has_ac) {
            z[z_ws] = cfg.ac_converters.front().params.w_n;
            for (std::size_t k = 0; k < nvsc; ++k) {
                z[vsc_slot(k, 1)] = cfg.ac_converters[k].params.v_nom;
                z[vsc_slot(k, 2)] = 1.0;
            }
            for (std::size_t b = 0; b < nacb; ++b)
                z[z_ac_bus + 2 * b] = cfg.ac_converters.front().params.v_nom;
        }
        if (has_ic) {
            z[z_ic + 1] = z[z_dc_bus + bi.dc_pos.at(cfg.ic->dc_bus)];
        }
    }

    std::vector<double> r(nz), rn(nz);
    auto norm_inf = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    };

    const double tol = 1e-9;
    const int max_iter = 200;
    int iter = 0;
    residual(z, r);
    double rnorm = norm_inf(r);
    for (; iter < max_iter && rnorm > tol; ++iter) {
        // finite-difference Jacobian
        Mat jac(nz, nz);
        std::vector<double> zp = z;
        for (std::size_t j = 0; j < nz; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(z[j]));
            zp[j] = z[j] + h;
            residual(zp, rn);
            for (std::size_t i = 0; i < nz; ++i) jac(i, j) = (rn[i] - r[i]) / h;
            zp[j] = z[j];
        }
        Mat rhs(nz, 1);
        for (std::size_t i = 0; i < nz; ++i) rhs(i, 0) = -r[i];
        Mat step;
        try {
            step = solve_linear(jac, rhs);
        } catch (const Singular&) {
            throw NoConvergence("equilibrium: singular Jacobian at iteration " +
                                std::to_string(iter) + ", residual " + fmt_g17(rnorm));
        }
        // damped update
        double lam = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            for (std::size_t i = 0; i < nz; ++i) zp[i] = z[i] + lam * step(i, 0);
            residual(zp, rn);
            if (norm_inf(rn) < rnorm) {
                z = zp;
                r = rn;
                rnorm = norm_inf(r);
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        if (!accepted) {
            std::ostringstream os;
            os << "equilibrium: damped Newton stalled at iteration " << iter
               << ", residual " << fmt_g17(rnorm) << ", worst unknown index "
               << (std::max_element(r.begin(), r.end(),
                                    [](double a, double b) { return std::abs(a) < std::abs(b); }) -
                   r.begin());
            throw NoConvergence(os.str());
        }
    }
    if (rnorm > tol)
        throw NoConvergence("equilibrium: residual " + fmt_g17(rnorm) + " after " +
                            std::to_string(iter) + " iterations");

    // package the solution
    Equilibrium eq;
    eq.iterations = iter;
    eq.residual = rnorm;
    for (std::size_t b = 0; b < ndcb; ++b) eq.dc_bus_v[bi.dc[b]] = z[z_dc_bus + b];
    for (std::size_t k = 0; k < ndcc; ++k) {
        const auto& c = cfg.dc_converters[k];
        const double vb = z[z_dc_bus + bi.dc_pos.at(c.bus)];
        const double io = z[z_dc_io + k];
        eq.dc_points[c.name] = DcOperatingPoint{vb + c.filter.r_o * io, io};
    }
    if (has_ac) {
        eq.w_sys = z[z_ws];
        for (std::size_t k = 0; k < nvsc; ++k) {
            const auto& c = cfg.ac_converters[k];
            VscOperatingPoint op;
            op.v_od0 = z[vsc_slot(k, 1)];
            op.v_oq0 = 0.0;
            op.i_od0 = z[vsc_slot(k, 2)];
            op.i_oq0 = z[vsc_slot(k, 3)];
            op.i_invd0 = op.i_od0; // i_od - w c_f v_oq with v_oq = 0
            op.i_invq0 = op.i_oq0 + eq.w_sys * c.params.c_f * op.v_od0;
            op.w0 = eq.w_sys;
            eq.vsc_points[c.name] = op;
            eq.vsc_delta[c.name] = k == 0 ? 0.0 : z[vsc_slot(k, 0)];
        }
        for (std::size_t b = 0; b < nacb; ++b)
            eq.ac_bus_v[bi.ac[b]] = {z[z_ac_bus + 2 * b], z[z_ac_bus + 2 * b + 1]};
    }
    if (has_ic) {
        const auto& ic = *cfg.ic;
        const double ws = eq.w_sys;
        IcOperatingPoint op;
        op.v_dc0 = z[z_ic + 1];
        op.i_od0 = z[z_ic + 2];
        op.i_oq0 = z[z_ic + 3];
        op.v_icd0 = ic.params.v_nom;
        op.v_icq0 = 0.0;
        op.i_icd0 = op.i_od0;
        op.i_icq0 = op.i_oq0 + ws * ic.params.c_f * ic.params.v_nom;
        op.w0 = ws;
        eq.ic_point = op;
        eq.ic_delta = z[z_ic + 0];
        eq.ic_m_d0 =
            (ic.params.v_nom + ic.params.r_f * op.i_icd0 - ws * ic.params.l_f * op.i_icq0) / op.v_dc0;
        eq.ic_m_q0 = (ic.params.r_f * op.i_icq0 + ws * ic.params.l_f * op.i_icd0) / op.v_dc0;
        if (std::abs(eq.ic_m_d0) > 1.0 || std::abs(eq.ic_m_q0) > 1.0)
            throw NoConvergence("equilibrium: interlink modulation index leaves [-1, 1] (m_d " +
                                fmt_g17(eq.ic_m_d0) + ", m_q " + fmt_g17(eq.ic_m_q0) + ")");
    }
    return eq;
}

} // namespace hmg
