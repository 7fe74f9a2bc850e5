#pragma once

#include <stdexcept>
#include <string>

namespace plasma {

// Bad inputs: malformed domains, out-of-range parameters, infeasible peak
// configurations. The CLI maps these to exit code 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Iteration failures: linear or nonlinear non-convergence, singular amplitude
// systems, active-set cycling. The CLI maps these to exit code 3.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace plasma
