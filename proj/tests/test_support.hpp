#pragma once

#include <algorithm>
#include <vector>

#include <Eigen/Dense>

#include "ising/chain.hpp"

namespace test_support {

// Coupling matrix with an arbitrary superdiagonal (f1, b1, f2, b2, ..., fN):
// lets tests exercise configurations a ChainSpec cannot produce, e.g. exact
// zero modes from a vanishing on-site field.
inline ising::CouplingMatrix tridiagonal_coupling(const std::vector<double>& superdiag) {
    const int dim = static_cast<int>(superdiag.size()) + 1;
    ising::CouplingMatrix c;
    c.n_sites = dim / 2;
    c.a = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i + 1 < dim; ++i) {
        c.a(i, i + 1) = superdiag[i];
        c.a(i + 1, i) = -superdiag[i];
    }
    return c;
}

inline std::vector<double> sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

inline std::vector<double> to_vector(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace test_support
