#pragma once

#include <string>
#include <vector>

#include "hmg/sstate.hpp"

namespace hmg {

/// Model document: fields n,m,p, row-major matrices a,b,c,d and the three
/// label lists, numbers rendered with 17 significant digits so that a
/// write/read cycle is bit exact.
std::string to_model_json(const Lti& m);
Lti from_model_json(const std::string& text);

/// Feedback-gain document: f (rows x cols, row-major), targets, achieved,
/// max_rel_error. Complex values are {re, im} pairs.
struct GainsDoc {
    Mat f;
    std::vector<Complex> targets;
    std::vector<Complex> achieved;
    double max_rel_error = 0.0;
};

std::string to_gains_json(const GainsDoc& g);
GainsDoc from_gains_json(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace hmg
