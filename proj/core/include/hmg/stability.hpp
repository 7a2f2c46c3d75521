#pragma once

#include <string>
#include <vector>

#include "hmg/network.hpp"
#include "hmg/sstate.hpp"

namespace hmg {

struct EigenEntry {
    Complex lambda;
    double damping;  ///< -Re/|l|, 1 for real negative, in [-1, 1]
    double freq_hz;  ///< |Im| / 2 pi
};

struct EigenReport {
    std::vector<EigenEntry> entries; ///< sorted by Re descending
    bool stable = false;             ///< all Re < 0
    double spectral_abscissa = 0.0;  ///< max Re
};

EigenReport eigen_report(const Lti& m);
EigenReport report_from_eigenvalues(std::vector<Complex> eigs);

struct SweepPoint {
    double m_dc;
    std::vector<Complex> eigenvalues;
    double spectral_abscissa = 0.0;
    bool ok = false;
    std::string error; ///< empty when ok
};

struct SweepResult {
    std::vector<SweepPoint> points;
};

/// Rebuild the scoped model for each droop value in {from, from+step, ...,
/// <= to} (equilibrium re-solved, all DC converters set to the swept gain)
/// and record the spectrum. Per-point failures are recorded, not thrown.
SweepResult droop_sweep(const GridConfig& cfg, const std::string& scope,
                        double from, double to, double step);

enum class CrossingKind { hopf, real_crossing };

struct Crossing {
    std::size_t index_before;
    std::size_t index_after;
    CrossingKind kind;
};

/// Sign changes of the spectral abscissa between consecutive sweep points;
/// a complex rightmost eigenvalue on the unstable side marks a Hopf-type
/// crossing.
std::vector<Crossing> detect_crossing(const SweepResult& s);

struct PlacementResult {
    Mat f;                         ///< feedback gain, u = F x + v
    std::vector<Complex> targets;
    std::vector<Complex> achieved; ///< eig(a + b f)
    double max_rel_error = 0.0;
    double conditioning = 0.0;     ///< condition estimate of the eigenvector pack X
    double theorem_residual = 0.0; ///< ||U1^T (A X - X L)||_inf
};

/// Inverse-eigenvalue state feedback: orthogonally split b = [U0 U1][Z; 0],
/// pick each closed-loop eigenvector from the admissible subspace
/// null(U1^T (a - lambda I)), improve the conditioning of the pack by
/// exchange sweeps, then recover F = Z^-1 U0^T (X L X^-1 - a) in real
/// arithmetic. Targets must be closed under conjugation.
PlacementResult place_poles(const Mat& a, const Mat& b, std::vector<Complex> targets);

/// Reflect unstable eigenvalues into the left half plane (decay floored at
/// 5% of the natural frequency) and rotate underdamped ones onto the
/// zeta_min damping cone preserving |lambda|. Angle-redundancy modes with
/// |lambda| < 1e-6 are re-anchored at -1. Idempotent.
std::vector<Complex> propose_targets(const EigenReport& report, double zeta_min);

struct PlacementCheck {
    std::vector<Complex> achieved;
    double max_rel_error = 0.0;
    bool pass_10pct = false;  ///< every pole within 10% of its target
    bool pass_tight = false;  ///< the 1e-6 internal tolerance
};

PlacementCheck verify_placement(const Mat& a, const Mat& b, const Mat& f,
                                const std::vector<Complex>& targets);

/// greedy nearest pairing; returns per-target relative errors
std::vector<double> pair_relative_errors(const std::vector<Complex>& targets,
                                         std::vector<Complex> achieved);

} // namespace hmg
