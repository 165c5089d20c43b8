#pragma once

#include <stdexcept>
#include <string>

namespace quantsurf {

struct QuantError : std::runtime_error {
    explicit QuantError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : QuantError {
    explicit ParseError(const std::string& msg) : QuantError("parse error: " + msg) {}
};

struct DegenerateSingularity : QuantError {
    explicit DegenerateSingularity(const std::string& msg)
        : QuantError("degenerate singularity: " + msg) {}
};

struct NonConvergence : QuantError {
    explicit NonConvergence(const std::string& msg) : QuantError("no convergence: " + msg) {}
};

struct Unsupported : QuantError {
    explicit Unsupported(const std::string& msg) : QuantError("unsupported: " + msg) {}
};

struct NonMorseInput : QuantError {
    explicit NonMorseInput(const std::string& msg) : QuantError("non-Morse input: " + msg) {}
};

struct OutOfRange : QuantError {
    explicit OutOfRange(const std::string& msg) : QuantError("out of range: " + msg) {}
};

struct PathLeavesLeaf : QuantError {
    explicit PathLeavesLeaf(const std::string& msg) : QuantError("path leaves leaf: " + msg) {}
};

struct TracingFailure : QuantError {
    explicit TracingFailure(const std::string& msg) : QuantError("tracing failure: " + msg) {}
};

struct InconsistentHolonomy : QuantError {
    explicit InconsistentHolonomy(const std::string& msg)
        : QuantError("inconsistent holonomy: " + msg) {}
};

struct InvalidChain : QuantError {
    explicit InvalidChain(const std::string& msg) : QuantError("invalid chain: " + msg) {}
};

struct OverlapContainsBS : QuantError {
    explicit OverlapContainsBS(const std::string& msg)
        : QuantError("overlap contains Bohr-Sommerfeld leaf: " + msg) {}
};

struct InsufficientArea : QuantError {
    explicit InsufficientArea(const std::string& msg) : QuantError("insufficient area: " + msg) {}
};

struct OnAxis : QuantError {
    explicit OnAxis(const std::string& msg) : QuantError("point on axis: " + msg) {}
};

struct ExactOverflow : QuantError {
    explicit ExactOverflow(const std::string& msg)
        : QuantError("exact arithmetic overflow: " + msg) {}
};

} // namespace quantsurf
