#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hmg/linalg.hpp"

namespace hmg {

/// Continuous-time LTI model x' = A x + B u, y = C x + D u with named
/// states, inputs and outputs. n may be 0 (static gain block, used by the
/// network assembler); m may be 0 (autonomous model).
struct Lti {
    Mat a, b, c, d;
    std::vector<std::string> state_names;
    std::vector<std::string> input_names;
    std::vector<std::string> output_names;

    std::size_t n() const { return state_names.size(); }
    std::size_t m() const { return input_names.size(); }
    std::size_t p() const { return output_names.size(); }
};

/// Validated construction. Throws DimensionMismatch / DuplicateLabel.
Lti make_lti(Mat a, Mat b, Mat c, Mat d,
             std::vector<std::string> states,
             std::vector<std::string> inputs,
             std::vector<std::string> outputs);

/// Convenience form: all states as outputs (c = I) and no feedthrough (d = 0).
Lti make_lti(Mat a, Mat b,
             std::vector<std::string> states,
             std::vector<std::string> inputs);

void validate_lti(const Lti& m);

struct NamedBlock {
    std::string name;
    Lti sys;
};

/// A wire adds `gain * (source output)` onto the destination input.
/// Labels are qualified as "<block>.<label>".
struct Wire {
    std::string from;
    std::string to;
    double gain = 1.0;
};

/// Connect blocks into a single model. Inputs not driven by any wire become
/// external inputs (or pass an explicit list); outputs default to all block
/// outputs. Instantaneous-feedthrough loops are solved through (I - D W);
/// a singular loop matrix throws SingularAlgebraicLoop.
Lti interconnect(const std::vector<NamedBlock>& blocks,
                 const std::vector<Wire>& wires,
                 const std::vector<std::string>& external_inputs = {},
                 const std::vector<std::string>& external_outputs = {});

std::vector<Complex> poles(const Lti& m);

/// Finite zeros of the (input, output) channel: roots of
/// c_i adj(sI - a) b_j + d_ij det(sI - a). Raw numerator roots are reported;
/// pole/zero cancellation is left to the caller.
std::vector<Complex> zeros_siso(const Lti& m, const std::string& input, const std::string& output);

struct StepTrace {
    std::vector<double> times;
    std::vector<std::vector<double>> states;  ///< one row per step, n wide
    std::vector<std::vector<double>> outputs; ///< one row per step, p wide
};

/// Exact-discretization step response: Phi = e^(A dt), Gamma from the
/// augmented exponential, u = amplitude on the selected input. dt <= 0 picks
/// min(0.1 / max|eig|, t_final / 1000).
StepTrace step_response(const Lti& m, const std::string& input, double t_final,
                        double dt = 0.0, std::vector<double> x0 = {},
                        double amplitude = 1.0);

/// -c a^-1 b + d; throws Singular for integrating systems.
Mat dc_gain(const Lti& m);

} // namespace hmg
