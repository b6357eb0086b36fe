#pragma once

#include <Eigen/Dense>

#include "ising/chain.hpp"

namespace ising {

// Spectral data of a coupling matrix. Eigenvalues of C = i*a come in +/- pairs;
// the positive half mu_1 <= ... <= mu_N is kept in `eigenvalues`. `canonical`
// is a real orthogonal Q with
//     Q^T a Q = blockdiag([[0, mu_k], [-mu_k, 0]]),
// which fixes the mode pairing used for occupation states and the propagator.
// Mode k of a chain costs an excitation energy of 2*mu_k (the spacing between
// adjacent many-body levels of that mode), which is the normalization
// `excitation_energies` returns.
struct ModeBasis {
    int n_sites = 0;
    Eigen::VectorXd eigenvalues;    // mu_k >= 0, ascending, size N
    Eigen::MatrixXd canonical;      // Q, 2N x 2N, real orthogonal
    Eigen::VectorXd spectrum;       // all 2N eigenvalues of C, ascending
    Eigen::MatrixXcd eigenvectors;  // columns matching `spectrum`

    Eigen::VectorXd excitation_energies() const { return 2.0 * eigenvalues; }
};

// Full eigendecomposition with deterministic +/- pairing. Exact zero modes
// (they appear at delta = 1, where the impurity kills its on-site field) get a
// real orthonormal null-space basis instead of the Re/Im-part construction.
// Throws numerical_error if the solver fails or the pairing degrades.
ModeBasis diagonalize(const CouplingMatrix& coupling);

// Single-particle excitation energies of the chain, ascending, physical
// normalization (2*mu). The many-body spectrum is -sum(E)/2 plus any subset sum.
Eigen::VectorXd single_particle_energies(const ChainSpec& spec);

// Heisenberg propagator for the Majorana vector, g(t) = T(t) g(0) with
// T(t) = exp(2*a*t), real orthogonal. Always built from the spectral data as
// Q * blockdiag(rotation(2*mu_k*t)) * Q^T -- never by time stepping -- so
// errors do not accumulate with t and T(s)T(t) = T(s+t) to round-off.
struct Propagator {
    double time = 0.0;
    Eigen::MatrixXd matrix;
};

Propagator propagator(const ModeBasis& basis, double t);

}  // namespace ising
