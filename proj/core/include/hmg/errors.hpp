#pragma once

#include <stdexcept>
#include <string>

namespace hmg {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// numerics
struct NonConvergence : Error { using Error::Error; };
struct SizeLimit : Error { using Error::Error; };
struct Singular : Error { using Error::Error; };
struct ZeroPolynomial : Error { using Error::Error; };
struct Overflow : Error { using Error::Error; };

// model construction / interconnection
struct DimensionMismatch : Error { using Error::Error; };
struct DuplicateLabel : Error { using Error::Error; };
struct UnknownLabel : Error { using Error::Error; };
struct SingularAlgebraicLoop : Error { using Error::Error; };
struct ZeroNumerator : Error { using Error::Error; };
struct InvalidSpec : Error { using Error::Error; };

// network assembly / equilibrium
struct IslandedBus : Error { using Error::Error; };
struct UnknownBus : Error { using Error::Error; };
struct MissingInterlink : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };

// feedback synthesis
struct Uncontrollable : Error { using Error::Error; };
struct TargetCountMismatch : Error { using Error::Error; };
struct IllConditioned : Error { using Error::Error; };

/// Configuration/file parse error carrying the offending field path.
struct ConfigError : Error {
    std::string field;
    ConfigError(const std::string& field_, const std::string& what_)
        : Error("config error at '" + field_ + "': " + what_), field(field_) {}
};

} // namespace hmg
