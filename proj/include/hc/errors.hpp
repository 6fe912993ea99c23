#pragma once

#include <stdexcept>
#include <string>

namespace hc {

// Maps onto the CLI exit codes: domain failures exit 1, resource failures exit 2.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ConvergenceError : std::runtime_error {
    double residual;
    ConvergenceError(const std::string& what, double r) : std::runtime_error(what), residual(r) {}
};

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    int line;
    ParseError(const std::string& what, int l)
        : std::runtime_error("line " + std::to_string(l) + ": " + what), line(l) {}
};

}  // namespace hc
