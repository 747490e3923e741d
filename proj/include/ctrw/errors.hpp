#ifndef CTRW_ERRORS_HPP
#define CTRW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ctrw {

// Invalid or out-of-domain arguments detected before any computation.
struct InvalidParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed input file; carries the 1-based line number when known.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what, long line = -1)
        : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_number(line) {}
    long line_number;
};

// Kinetics evaluated outside their validity domain (e.g. GM with v <= 0).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Random generation could not satisfy structural constraints within the retry bound.
struct GenerationFailedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Linear system singular or too ill-conditioned to trust.
struct SingularSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// QR iteration failed to converge within the iteration cap.
struct EigenSolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive integration failed (step underflow or non-finite state).
struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ctrw

#endif
