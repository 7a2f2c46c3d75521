#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hmg/acconv.hpp"
#include "hmg/dcconv.hpp"
#include "hmg/interlink.hpp"
#include "hmg/sstate.hpp"

namespace hmg {

enum class BusKind { dc, ac };
enum class LineKind { rl, resistive };
enum class LoadKind { resistive, rl };

struct BusDef {
    std::string name;
    BusKind kind = BusKind::dc;
};

struct LineDef {
    std::string from;
    std::string to;
    double r = 0.0;
    double l = 0.0;
    LineKind kind = LineKind::rl;
};

struct LoadDef {
    std::string bus;
    LoadKind kind = LoadKind::resistive;
    double r = 0.0;
    double l = 0.0;
};

/// Declarative description of the grid to assemble.
struct GridConfig {
    std::vector<DcConverterSpec> dc_converters;
    std::vector<VscSpec> ac_converters;
    std::optional<IcSpec> ic;
    std::vector<LineDef> dc_lines;
    std::vector<LineDef> ac_lines;
    std::vector<LoadDef> loads;
    std::vector<BusDef> buses;
    double r_virtual = 1e3; ///< bus-closure virtual resistor, ohm
};

void validate(const GridConfig& cfg);

/// Planar rotation by delta and its derivative, for dq frame alignment.
struct FrameRotation {
    Mat t;  ///< [[cos, -sin], [sin, cos]]
    Mat dt; ///< d/d delta of t
};
FrameRotation frame_rotation(double delta);

/// Steady state of the nonlinear grid equations (droop laws + ideal-network
/// power balance; the virtual resistors exist only in the linearization).
struct Equilibrium {
    std::map<std::string, DcOperatingPoint> dc_points;
    std::map<std::string, double> dc_bus_v;
    std::map<std::string, VscOperatingPoint> vsc_points;
    std::map<std::string, double> vsc_delta;  ///< frame angle vs the common frame
    std::map<std::string, std::array<double, 2>> ac_bus_v; ///< common-frame dq
    double w_sys = 0.0;  ///< synchronous frequency of the AC side
    // interlinking converter point (valid when the config has one)
    IcOperatingPoint ic_point;
    double ic_delta = 0.0;
    double ic_m_d0 = 0.0, ic_m_q0 = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

/// Damped Newton iteration on the steady-state equations; residual inf-norm
/// below 1e-9 on success, NoConvergence (with the final residual and iterate
/// in the message) otherwise.
Equilibrium solve_equilibrium(const GridConfig& cfg);

Lti assemble_dc_subgrid(const GridConfig& cfg);
Lti assemble_dc_subgrid(const GridConfig& cfg, const Equilibrium& eq);
Lti assemble_ac_subgrid(const GridConfig& cfg);
Lti assemble_ac_subgrid(const GridConfig& cfg, const Equilibrium& eq);
Lti assemble_hybrid(const GridConfig& cfg);
Lti assemble_hybrid(const GridConfig& cfg, const Equilibrium& eq);

/// Reduced copies used for scoped analysis.
GridConfig dc_only(const GridConfig& cfg);
GridConfig ac_only(const GridConfig& cfg);

/// Build per a scope string: "dc", "ac", "hybrid" or "converter:<name>".
Lti build_scope(const GridConfig& cfg, const std::string& scope);

} // namespace hmg
