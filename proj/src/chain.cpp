#include "ising/chain.hpp"

#include <stdexcept>
#include <string>

namespace ising {

void ChainSpec::validate() const {
    if (n_sites < 2) throw std::invalid_argument("n_sites: need at least 2 sites, got " + std::to_string(n_sites));
    if (!(delta >= 0.0)) throw std::invalid_argument("impurity_strength: must be >= 0, got " + std::to_string(delta));
    if (impurity_site < 1 || impurity_site > n_sites)
        throw std::invalid_argument("impurity_site: " + std::to_string(impurity_site) + " outside 1.." +
                                    std::to_string(n_sites));
    for (int b : cut_bonds)
        if (b < 1 || b >= n_sites)
            throw std::invalid_argument("cut_bonds: bond " + std::to_string(b) + " outside 1.." +
                                        std::to_string(n_sites - 1));
}

Eigen::MatrixXcd CouplingMatrix::complex_form() const {
    return std::complex<double>(0.0, 1.0) * a.cast<std::complex<double>>();
}

CouplingMatrix CouplingMatrix::from_complex(const Eigen::MatrixXcd& c, double tol) {
    if (c.rows() != c.cols() || c.rows() % 2 != 0 || c.rows() == 0)
        throw std::invalid_argument("coupling matrix must be square with even dimension");
    if (c.real().cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("coupling matrix must be purely imaginary");
    Eigen::MatrixXd a = c.imag();
    if ((a + a.transpose()).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("coupling matrix must be antisymmetric");
    // store the exactly antisymmetric part so downstream identities are exact
    a = 0.5 * (a - a.transpose().eval());
    return CouplingMatrix{static_cast<int>(c.rows()) / 2, std::move(a)};
}

CouplingMatrix build_coupling(const ChainSpec& spec) {
    spec.validate();
    const int dim = 2 * spec.n_sites;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 1; n <= spec.n_sites; ++n) {
        // on-site field at site n couples its own Majorana pair (2n-1, 2n)
        const double field = 1.0 + (n == spec.impurity_site ? spec.delta : 0.0);
        a(2 * n - 2, 2 * n - 1) = field;
        a(2 * n - 1, 2 * n - 2) = -field;
        // bond n,n+1 couples the even operator of n with the odd one of n+1
        if (n < spec.n_sites && !spec.cut_bonds.count(n)) {
            a(2 * n - 1, 2 * n) = 1.0;
            a(2 * n, 2 * n - 1) = -1.0;
        }
    }
    return CouplingMatrix{spec.n_sites, std::move(a)};
}

ChainSpec cut_bond(const ChainSpec& spec, int bond) {
    spec.validate();
    if (bond < 1 || bond >= spec.n_sites)
        throw std::invalid_argument("cut_bond: bond " + std::to_string(bond) + " outside 1.." +
                                    std::to_string(spec.n_sites - 1));
    ChainSpec out = spec;
    out.cut_bonds.insert(bond);
    return out;
}

ChainSpec subsystem_spec(const ChainSpec& spec, int n_prime) {
    spec.validate();
    if (n_prime < 1 || n_prime > spec.n_sites)
        throw std::invalid_argument("subsystem_size: " + std::to_string(n_prime) + " outside 1.." +
                                    std::to_string(spec.n_sites));
    ChainSpec out;
    out.n_sites = n_prime;
    if (spec.impurity_site <= n_prime) {
        out.delta = spec.delta;
        out.impurity_site = spec.impurity_site;
    } else {
        out.delta = 0.0;
        out.impurity_site = 1;
    }
    for (int b : spec.cut_bonds)
        if (b < n_prime) out.cut_bonds.insert(b);
    if (out.n_sites < 2)
        throw std::invalid_argument("subsystem_size: a 1-site subsystem chain is not representable; need >= 2");
    return out;
}

}  // namespace ising
