#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ising/chain.hpp"
#include "ising/state.hpp"

namespace ising {

// Brute-force 2^N spin-space reference. Everything here is built from explicit
// Pauli / Jordan-Wigner matrices and dense diagonalization, with no shared
// machinery beyond the chain definition, so it can arbitrate the fermionic
// fast path. Capacity-capped at n_sites <= 14; tests stay at <= 10.

Eigen::MatrixXcd dense_hamiltonian(const ChainSpec& spec);

// The 2N Majorana matrices from the Jordan-Wigner strings, normalized to
// {g_i, g_j} = delta_ij (so g_i^2 = I/2). Index 2n-1 is the site-n operator
// proportional to the string times sigma^x, index 2n the sigma^y partner.
std::vector<Eigen::MatrixXcd> dense_majoranas(int n_sites);

// Normalized eigenstate with the given quasiparticle content: mode creation
// operators assembled from the basis coefficients, applied to the dense ground
// state. basis_spec must be the delta=0 uncut chain (the basis the occupation
// labels refer to). The result is verified to be an H eigenstate with energy
// E_ground + sum_occupied 2*mu_k to residual 1e-6; a larger residual raises
// numerical_error, since it signals a convention mismatch between the dense
// and fermionic paths.
Eigen::VectorXcd dense_quasiparticle_state(const ChainSpec& basis_spec, const ModeBasis& basis,
                                           const OccupationPattern& pattern);

Eigen::VectorXcd dense_evolve(const ChainSpec& spec, const Eigen::VectorXcd& psi, double t);

// Partial trace onto the listed sites (1-based, strictly ascending). Site 1 is
// the most significant qubit of the basis index.
Eigen::MatrixXcd dense_reduced_density(const Eigen::VectorXcd& psi, int n_sites,
                                       const std::vector<int>& sites);

// -sum p log2 p of a density matrix; validates trace 1 within 1e-8.
double dense_entropy(const Eigen::MatrixXcd& rho);

// Gamma_ij = <psi| g_i g_j |psi> - delta_ij/2, for cross-checking the Gaussian
// correlation matrix.
Eigen::MatrixXcd dense_correlation(const Eigen::VectorXcd& psi, int n_sites);

}  // namespace ising
