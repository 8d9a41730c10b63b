#ifndef TRIPOD_ERRORS_HPP
#define TRIPOD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tripod {

// Base class for all library errors. The CLI maps subclasses to exit codes.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical precondition on an input was violated (non-Hermitian matrix,
// non-normalized state, ...).
struct invalid_input : error {
    explicit invalid_input(const std::string& msg) : error(msg) {}
};

// All couplings vanish; the dark manifold is not defined.
struct degenerate_configuration : error {
    explicit degenerate_configuration(const std::string& msg) : error(msg) {}
};

// A path that must close does not, or a vertex index is out of range.
struct invalid_loop : error {
    explicit invalid_loop(const std::string& msg) : error(msg) {}
};

// The integrator could not reach its accuracy target.
struct step_size_failure : error {
    explicit step_size_failure(const std::string& msg) : error(msg) {}
};

// Measured populations are incompatible with a normalized dark state.
struct inconsistent_populations : error {
    explicit inconsistent_populations(const std::string& msg) : error(msg) {}
};

// Least-squares problem is not identifiable.
struct fit_failure : error {
    explicit fit_failure(const std::string& msg) : error(msg) {}
};

// A density matrix failed its Hermiticity / trace / positivity checks.
struct invalid_state : error {
    explicit invalid_state(const std::string& msg) : error(msg) {}
};

} // namespace tripod

#endif
