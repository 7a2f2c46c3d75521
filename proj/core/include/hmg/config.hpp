#pragma once

#include <string>

#include "hmg/network.hpp"

namespace hmg {

/// Parse the JSON grid description (unit-suffixed field names). Throws
/// ConfigError carrying the offending field path.
GridConfig parse_grid_config(const std::string& json_text);

GridConfig load_grid_config(const std::string& path);

} // namespace hmg
