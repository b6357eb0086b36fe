#pragma once

#include <set>

#include <Eigen/Dense>

namespace ising {

// Open transverse-field Ising chain at its critical point, with one on-site
// field impurity of strength delta at impurity_site and an optional set of
// severed bonds. Sites are 1-based; bond b joins sites b and b+1, so valid
// bonds are 1..n_sites-1.
struct ChainSpec {
    int n_sites = 2;
    double delta = 0.0;
    int impurity_site = 1;
    std::set<int> cut_bonds;

    void validate() const;  // throws std::invalid_argument naming the offending field
};

// Quadratic Majorana form of the chain Hamiltonian, H = sum_ij C_ij g_i g_j,
// where the 2N Majorana operators satisfy {g_i, g_j} = delta_ij and
// C = i*a with a real antisymmetric. Only a is stored. Its nonzeros sit on the
// first off-diagonal: entry (2n-1, 2n) is the on-site field at site n (1, or
// 1 + delta at the impurity) and entry (2n, 2n+1) the bond n,n+1 (0 when the
// bond is severed), both in 1-based indexing.
struct CouplingMatrix {
    int n_sites = 0;
    Eigen::MatrixXd a;

    Eigen::MatrixXcd complex_form() const;  // C = i*a

    // Accepts a raw complex matrix, checking it is purely imaginary,
    // antisymmetric and of even dimension. Throws std::invalid_argument.
    static CouplingMatrix from_complex(const Eigen::MatrixXcd& c, double tol = 1e-12);
};

CouplingMatrix build_coupling(const ChainSpec& spec);

// Same chain with one more severed bond. Cutting an already-cut bond is a no-op.
ChainSpec cut_bond(const ChainSpec& spec, int bond);

// The first n_prime sites as a standalone chain: the bond n_prime,n_prime+1 is
// dropped, interior cuts are kept, and the impurity survives only when it lies
// inside the kept block.
ChainSpec subsystem_spec(const ChainSpec& spec, int n_prime);

}  // namespace ising
