#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tucker {

// Error taxonomy shared across the library. The CLI maps these onto
// process exit codes (parse -> 2, capacity -> 3, degenerate -> 4).

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input text (bad token count, non-numeric field, ...).
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_number(line) {}
    std::size_t line_number;
};

// Index outside the declared extent (or below the 1-based disk minimum).
struct RangeError : Error {
    using Error::Error;
};

// Non-finite or otherwise unusable numeric value.
struct ValueError : Error {
    using Error::Error;
};

// Dimension mismatch between operands.
struct ShapeError : Error {
    using Error::Error;
};

// A dense intermediate would exceed the configured allocation cap.
struct CapacityError : Error {
    using Error::Error;
};

// An input violates a documented contract (asymmetric Gram matrix,
// inconsistent model, ...).
struct ContractError : Error {
    using Error::Error;
};

// A numerical identity that holds mathematically was violated, which
// signals corruption upstream (broken orthonormality and the like).
struct DiagnosticError : Error {
    using Error::Error;
};

// The solver reached a state it cannot continue from: the TTMcTC output
// for some mode vanished entirely.
struct DegenerateStateError : Error {
    explicit DegenerateStateError(std::size_t mode_1based)
        : Error("degenerate state: TTMcTC output is identically zero for mode " +
                std::to_string(mode_1based)),
          mode(mode_1based) {}
    std::size_t mode;
};

// A generation request that no tensor can satisfy (nnz exceeding the
// number of cells).
struct InfeasibleError : Error {
    using Error::Error;
};

}  // namespace tucker
