#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ising/modes.hpp"

namespace ising {

// Which single-particle modes are occupied. Bit k (1-based) refers to the k-th
// mode in ascending energy order, and the decimal label reads the bits with
// mode 1 as the most significant: "101" at three modes is label 5 (modes 1 and
// 3 occupied).
struct OccupationPattern {
    std::vector<std::uint8_t> bits;  // 0/1 per mode; index 0 is mode 1

    int n_modes() const { return static_cast<int>(bits.size()); }
    int n_occupied() const;
    std::uint64_t label() const;  // requires n_modes <= 63 (capacity_error otherwise)
};

// Accepts a decimal label ("5", "5_d"), or a bit string when the text is
// exactly n_modes characters of 0/1 (optionally suffixed "_b" to force that
// reading). Throws std::invalid_argument on malformed text or out-of-range
// labels, capacity_error for decimal labels at n_modes > 63.
OccupationPattern parse_label(const std::string& text, int n_modes);
OccupationPattern parse_label(std::uint64_t label, int n_modes);

// Independent fair bits from a seeded std::mt19937_64. Only raw engine output
// is used (top bit per draw), so the sequence is identical across standard
// library implementations.
OccupationPattern random_pattern(int n_modes, std::uint64_t seed);

// Majorana two-point matrix Gamma_ij = (1/2) <[g_i, g_j]> of a Gaussian state,
// stored through its imaginary part: Gamma = i*g with g real antisymmetric.
// Eigenvalues of Gamma lie in [-1/2, 1/2]; a pure state has all of them at
// +/- 1/2 (equivalently g g^T = I/4).
struct CorrelationMatrix {
    int n_pairs = 0;     // number of (odd,even) Majorana row pairs, i.e. sites kept
    Eigen::MatrixXd g;   // real antisymmetric, 2*n_pairs square

    Eigen::MatrixXcd complex_form() const;  // Gamma itself
};

// Correlation matrix of the mode-occupation eigenstate in the given basis.
// The basis must be nondegenerate (it is built from the delta=0 uncut chain,
// whose spectrum never degenerates); otherwise "occupy mode k" is ambiguous
// and an invalid_argument is thrown.
CorrelationMatrix initial_gamma(const ModeBasis& basis, const OccupationPattern& pattern);

CorrelationMatrix evolve(const CorrelationMatrix& gamma, const Propagator& prop);

// Keep the Majorana row/column pairs of the listed sites (1-based, strictly
// ascending). Reducing a pure state's matrix gives the subsystem's mixed-state
// correlations directly.
CorrelationMatrix reduce(const CorrelationMatrix& gamma, const std::vector<int>& sites);

// Eigenvalues +/- lambda_k of a (reduced) correlation matrix, with the
// single-mode parametrization lambda = (1/2) tanh(omega/2). Modes at
// lambda >= 1/2 - 1e-12 are treated as pure (omega = +inf); an eigenvalue
// beyond 1/2 + 1e-9 raises numerical_error.
struct ReducedSpectrum {
    Eigen::VectorXd lambdas;  // ascending, in [0, 1/2]
    Eigen::VectorXd omegas;   // 2*atanh(2*lambda), +inf for pure modes
    double entropy_bits = 0.0;
};

ReducedSpectrum mode_spectrum(const CorrelationMatrix& gamma);

// Entanglement entropy in bits: sum_k H((1 + 2*lambda_k)/2) with H the binary
// entropy.
double entropy(const CorrelationMatrix& gamma);

// All 2^m eigenvalues of the reduced density matrix, in mode-label order
// (mode 1 = most significant bit): products of p_k = 1/(1 + e^{omega_k}) and
// 1 - p_k. Capacity-capped at m <= 20; the values are validated to sum to 1
// within 1e-12.
std::vector<double> rho_eigenvalues(const CorrelationMatrix& gamma);

// <H> = sum_ij C_ij Gamma_ij = -sum_ij a_ij g_ij; conserved under evolve.
double expected_energy(const CouplingMatrix& coupling, const CorrelationMatrix& gamma);

// max_k | |eigenvalue_k| - 1/2 |; zero for a pure state.
double purity_deviation(const CorrelationMatrix& gamma);

}  // namespace ising
