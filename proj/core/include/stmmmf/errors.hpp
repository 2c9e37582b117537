#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stmmmf {

// Caller broke a documented precondition (bad index, colliding insert, ...).
class contract_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Operands disagree on N, M, d or R.
class shape_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Optimizer produced a non-finite objective or gradient.
class divergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rating scale too small for the requested operation (e.g. average gap with R < 3).
class unsupported_scale_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Skew allocation over a label distribution with no mass left to share.
class degenerate_distribution_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class parse_error : public std::runtime_error {
public:
    parse_error(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace stmmmf
