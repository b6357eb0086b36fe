#pragma once

#include <stdexcept>
#include <string>

namespace ising {

// A numerical guarantee was violated at runtime: spectra out of their admissible
// range, residuals above tolerance, eigensolver failure. Distinct from input
// validation so callers (and the CLI exit code) can tell the two apart.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// A request exceeds a hard capacity limit (dense reference size, label width,
// reduced density-matrix dimension). Treated as an input error.
struct capacity_error : std::invalid_argument {
    explicit capacity_error(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace ising
