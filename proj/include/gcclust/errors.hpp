#pragma once

#include <stdexcept>
#include <string>

namespace gcclust {

// Base class for all recoverable errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroVectorError : Error {
    ZeroVectorError() : Error("vector has (near-)zero L2 norm") {}
    explicit ZeroVectorError(const std::string& what) : Error(what) {}
};

struct InvalidKError : Error {
    using Error::Error;
};

struct IsolatedNodeError : Error {
    explicit IsolatedNodeError(int node)
        : Error("node " + std::to_string(node) + " has no neighbors"), node(node) {}
    int node;
};

struct ShapeMismatchError : Error {
    using Error::Error;
};

struct LengthMismatchError : Error {
    using Error::Error;
};

struct InvalidSpecError : Error {
    using Error::Error;
};

struct DimMismatchError : Error {
    using Error::Error;
};

// Parse failure in a text input; line is 1-based.
struct ParseError : Error {
    ParseError(int line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line(line) {}
    int line;
};

// Anchor i has an empty positive (intra-community) index set.
struct NoPositivesError : Error {
    explicit NoPositivesError(int anchor)
        : Error("anchor " + std::to_string(anchor) + " has no positive pairs"), anchor(anchor) {}
    int anchor;
};

// Anchor i has an empty negative (inter-community) index set.
struct NoNegativesError : Error {
    explicit NoNegativesError(int anchor)
        : Error("anchor " + std::to_string(anchor) + " has no negative pairs"), anchor(anchor) {}
    int anchor;
};

struct EmptyBatchLossError : Error {
    EmptyBatchLossError() : Error("no anchor in the batch contributes to the loss") {}
};

struct MissingLabelsError : Error {
    MissingLabelsError() : Error("dataset has no ground-truth labels") {}
};

}  // namespace gcclust
