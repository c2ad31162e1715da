#pragma once

#include <stdexcept>
#include <string>

namespace hyperstab {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct StabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DefinitenessError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InversionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluation requested at or near an imaginary-axis pole; carries the offending omega.
struct PoleProximityError : std::runtime_error {
    double omega;
    explicit PoleProximityError(const std::string& what, double w)
        : std::runtime_error(what), omega(w) {}
};

// Schedule already inadmissible: the energy floor went negative.
struct FloorDepletedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ApplicabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FixedPointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigurationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ProvenanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hyperstab
