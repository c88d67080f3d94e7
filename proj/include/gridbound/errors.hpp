#pragma once

#include <stdexcept>
#include <string>

namespace gridbound {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Case file is structurally malformed (wrong type, missing or unknown key).
struct SchemaError : Error {
    using Error::Error;
};

// Case file parsed but violates a model invariant; message names the entity.
struct ValidationError : Error {
    using Error::Error;
};

// Base network (or a post-outage network) is not connected.
struct DisconnectedError : Error {
    using Error::Error;
};

// Reduced nodal admittance factorization found a degenerate pivot.
struct SingularMatrixError : Error {
    using Error::Error;
};

// Removing this line disconnects the network; the rank-1 denominator vanishes.
struct IslandingError : Error {
    IslandingError(int line, const std::string& msg) : Error(msg), line_id(line) {}
    int line_id;
};

struct DimensionError : Error {
    using Error::Error;
};

struct NegativeRadiusError : Error {
    using Error::Error;
};

// Curve slope ordering contradicts its declared kind.
struct CurveShapeError : Error {
    using Error::Error;
};

// Evaluation requested outside the admissible domain.
struct DomainError : Error {
    using Error::Error;
};

// Operators passed to the graph builder disagree on dimensions.
struct ConsistencyError : Error {
    using Error::Error;
};

// Gap is undefined for a non-positive reference optimum.
struct NonpositiveReferenceError : Error {
    using Error::Error;
};

struct DimensionTooLargeError : Error {
    using Error::Error;
};

}  // namespace gridbound
