#include "ising/dense.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "ising/errors.hpp"

namespace ising {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cd = std::complex<double>;

constexpr int kMaxDenseSites = 14;

MatrixXcd pauli(char which) {
    MatrixXcd m = MatrixXcd::Zero(2, 2);
    switch (which) {
        case 'i':
            m(0, 0) = 1.0;
            m(1, 1) = 1.0;
            break;
        case 'x':
            m(0, 1) = 1.0;
            m(1, 0) = 1.0;
            break;
        case 'y':
            m(0, 1) = cd(0.0, -1.0);
            m(1, 0) = cd(0.0, 1.0);
            break;
        case 'z':
            m(0, 0) = 1.0;
            m(1, 1) = -1.0;
            break;
        default:
            throw std::logic_error("unknown Pauli tag");
    }
    return m;
}

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Operator string: ops[s] acts on site s+1; site 1 is the leftmost (most
// significant) tensor factor.
MatrixXcd site_string(const std::string& ops) {
    MatrixXcd m = pauli(ops[0]);
    for (size_t s = 1; s < ops.size(); ++s) m = kron(m, pauli(ops[s]));
    return m;
}

void check_capacity(int n_sites) {
    if (n_sites > kMaxDenseSites) throw capacity_error("dense reference is capped at 14 sites");
}

}  // namespace

MatrixXcd dense_hamiltonian(const ChainSpec& spec) {
    spec.validate();
    check_capacity(spec.n_sites);
    const int n = spec.n_sites;
    const int dim = 1 << n;
    MatrixXcd h = MatrixXcd::Zero(dim, dim);
    for (int site = 1; site <= n; ++site) {
        std::string ops(n, 'i');
        ops[site - 1] = 'z';
        const double coef = -1.0 - (site == spec.impurity_site ? spec.delta : 0.0);
        h += coef * site_string(ops);
    }
    for (int bond = 1; bond < n; ++bond) {
        if (spec.cut_bonds.count(bond)) continue;
        std::string ops(n, 'i');
        ops[bond - 1] = 'x';
        ops[bond] = 'x';
        h -= site_string(ops);
    }
    return h;
}

std::vector<MatrixXcd> dense_majoranas(int n_sites) {
    if (n_sites < 1) throw std::invalid_argument("n_sites must be >= 1");
    check_capacity(n_sites);
    std::vector<MatrixXcd> out;
    out.reserve(2 * n_sites);
    const double s = 1.0 / std::sqrt(2.0);
    for (int site = 1; site <= n_sites; ++site) {
        std::string ops(n_sites, 'i');
        for (int k = 0; k < site - 1; ++k) ops[k] = 'z';
        ops[site - 1] = 'x';
        out.push_back(s * site_string(ops));
        ops[site - 1] = 'y';
        out.push_back(s * site_string(ops));
    }
    return out;
}

VectorXcd dense_quasiparticle_state(const ChainSpec& basis_spec, const ModeBasis& basis,
                                    const OccupationPattern& pattern) {
    basis_spec.validate();
    check_capacity(basis_spec.n_sites);
    if (basis_spec.delta != 0.0 || !basis_spec.cut_bonds.empty())
        throw std::invalid_argument("occupation labels refer to the uniform uncut chain");
    if (basis.n_sites != basis_spec.n_sites || pattern.n_modes() != basis_spec.n_sites)
        throw std::invalid_argument("basis/pattern size mismatch");

    const MatrixXcd h = dense_hamiltonian(basis_spec);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw numerical_error("dense diagonalization failed");
    VectorXcd psi = es.eigenvectors().col(0);

    const auto gammas = dense_majoranas(basis_spec.n_sites);
    const double s = 1.0 / std::sqrt(2.0);
    for (int k = 0; k < pattern.n_modes(); ++k) {
        if (!pattern.bits[k]) continue;
        // creation operator of mode k from the canonical pair of columns
        const int dim = psi.size();
        MatrixXcd dk = MatrixXcd::Zero(dim, dim);
        for (int j = 0; j < 2 * basis_spec.n_sites; ++j) {
            const cd coef(basis.canonical(j, 2 * k), -basis.canonical(j, 2 * k + 1));
            dk += (s * coef) * gammas[j];
        }
        psi = dk * psi;
        const double norm = psi.norm();
        if (norm < 1e-8) throw numerical_error("quasiparticle creation annihilated the state");
        psi /= norm;
    }

    double energy = es.eigenvalues()(0);
    for (int k = 0; k < pattern.n_modes(); ++k)
        if (pattern.bits[k]) energy += 2.0 * basis.eigenvalues(k);
    const double residual = (h * psi - energy * psi).norm();
    if (residual > 1e-6) throw numerical_error("quasiparticle state is not an eigenstate of the dense chain");
    return psi;
}

VectorXcd dense_evolve(const ChainSpec& spec, const VectorXcd& psi, double t) {
    const MatrixXcd h = dense_hamiltonian(spec);
    if (psi.size() != h.rows()) throw std::invalid_argument("state dimension does not match the chain");
    if (!std::isfinite(t)) throw std::invalid_argument("time must be finite");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw numerical_error("dense diagonalization failed");
    const VectorXcd coeffs = es.eigenvectors().adjoint() * psi;
    VectorXcd phased(coeffs.size());
    for (int j = 0; j < coeffs.size(); ++j) phased(j) = coeffs(j) * std::exp(cd(0.0, -es.eigenvalues()(j) * t));
    return es.eigenvectors() * phased;
}

MatrixXcd dense_reduced_density(const VectorXcd& psi, int n_sites, const std::vector<int>& sites) {
    check_capacity(n_sites);
    if (psi.size() != (Eigen::Index{1} << n_sites)) throw std::invalid_argument("state dimension does not match n_sites");
    if (sites.empty()) throw std::invalid_argument("site list is empty");
    for (size_t j = 0; j < sites.size(); ++j) {
        if (sites[j] < 1 || sites[j] > n_sites) throw std::invalid_argument("site index out of range");
        if (j > 0 && sites[j] <= sites[j - 1]) throw std::invalid_argument("sites must be strictly ascending");
    }
    const int m = static_cast<int>(sites.size());
    std::vector<char> kept(n_sites + 1, 0);
    for (int site : sites) kept[site] = 1;

    const Eigen::Index dim_kept = Eigen::Index{1} << m;
    const Eigen::Index dim_env = Eigen::Index{1} << (n_sites - m);
    MatrixXcd slices(dim_env, dim_kept);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        Eigen::Index a = 0, e = 0;
        for (int site = 1; site <= n_sites; ++site) {
            const Eigen::Index bit = (i >> (n_sites - site)) & 1;
            if (kept[site]) a = (a << 1) | bit;
            else e = (e << 1) | bit;
        }
        slices(e, a) = psi(i);
    }
    return slices.transpose() * slices.conjugate();
}

double dense_entropy(const MatrixXcd& rho) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("density matrix must be square");
    if (std::abs(rho.trace().real() - 1.0) > 1e-8 || std::abs(rho.trace().imag()) > 1e-8)
        throw numerical_error("density matrix trace deviates from 1");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw numerical_error("density matrix diagonalization failed");
    double bits = 0.0;
    for (int j = 0; j < es.eigenvalues().size(); ++j) {
        double p = es.eigenvalues()(j);
        if (p < -1e-10) throw numerical_error("density matrix has a negative eigenvalue");
        if (p > 1e-15) bits -= p * std::log2(p);
    }
    return bits;
}

MatrixXcd dense_correlation(const VectorXcd& psi, int n_sites) {
    check_capacity(n_sites);
    if (psi.size() != (Eigen::Index{1} << n_sites)) throw std::invalid_argument("state dimension does not match n_sites");
    const auto gammas = dense_majoranas(n_sites);
    const int dim = 2 * n_sites;
    MatrixXcd w(psi.size(), dim);
    for (int j = 0; j < dim; ++j) w.col(j) = gammas[j] * psi;
    MatrixXcd corr = w.adjoint() * w;
    corr -= 0.5 * MatrixXcd::Identity(dim, dim);
    return corr;
}

}  // namespace ising
