#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace atlasfuse {

enum class ErrorKind {
    InvalidArgument,
    Parse,
    Io,
    DegenerateGraph,
    DegenerateNode,
    ConvergenceFailure,
    TooFewSubjects,
    InvalidBandwidth,
    DegenerateLabels,
    VanishingWeight,
    SingularKernel,
    PopulationTooSmall,
    DimensionMismatch,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (and the
/// CLI) can branch on it without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised by avg_topology / kernel construction when a node's kernel entry
/// would be zero.
class DegenerateNodeError : public Error {
public:
    DegenerateNodeError(std::size_t node, const std::string& what)
        : Error(ErrorKind::DegenerateNode, what + " (node " + std::to_string(node) + ")"),
          node_(node) {}

    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace atlasfuse
