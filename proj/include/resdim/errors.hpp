#pragma once

#include <stdexcept>
#include <string>

namespace resdim {

// Input-side failures (CLI exit code 2).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed file (bad JSON / bad delimited text).
struct ParseError : InputError {
    using InputError::InputError;
};

// Structurally valid file that violates the schema (missing section, wrong type).
struct SchemaError : InputError {
    using InputError::InputError;
};

// Schema-valid data that fails model validation rules.
struct ValidationError : InputError {
    using InputError::InputError;
};

// A market stage has no feasible solution (CLI exit code 1).
struct InfeasibleError : std::runtime_error {
    std::string stage; // e.g. "reserve", "day-ahead", "day-ahead-uc"
    InfeasibleError(std::string stage_, const std::string& what_)
        : std::runtime_error(what_), stage(std::move(stage_)) {}
};

// Solver gave up (iteration/node caps) or failed an internal audit.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace resdim
