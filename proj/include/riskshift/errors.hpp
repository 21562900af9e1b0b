#pragma once

#include <stdexcept>
#include <string>

namespace riskshift {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration values (hazard probabilities out of range, unknown
// preset, bad sweep grid, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Malformed input data: non-monotone trajectories, bad CSV rows, ...
struct DataError : Error {
    using Error::Error;
};

struct ShapeError : Error {
    using Error::Error;
};

struct EmptyAtRiskSet : Error {
    using Error::Error;
};

struct SingleArmError : Error {
    using Error::Error;
};

struct DegenerateWeights : Error {
    using Error::Error;
};

struct DegenerateDistribution : Error {
    using Error::Error;
};

struct PositivityError : Error {
    using Error::Error;
};

struct ConstantFeatureError : Error {
    using Error::Error;
};

struct InsufficientReplications : Error {
    using Error::Error;
};

}  // namespace riskshift
