#include "ising/modes.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "ising/errors.hpp"

namespace ising {

namespace {

// Real orthonormal basis of the span of the given vectors (modified
// Gram-Schmidt, re-orthogonalized once). Used for the null space of a, where
// the Re/Im-part pairing is not available.
std::vector<Eigen::VectorXd> orthonormalize(const std::vector<Eigen::VectorXd>& cand, int want) {
    std::vector<Eigen::VectorXd> basis;
    for (const auto& c : cand) {
        if (static_cast<int>(basis.size()) == want) break;
        Eigen::VectorXd v = c;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) v -= b.dot(v) * b;
        const double n = v.norm();
        if (n > 1e-6) basis.push_back(v / n);
    }
    return basis;
}

}  // namespace

ModeBasis diagonalize(const CouplingMatrix& coupling) {
    const int n = coupling.n_sites;
    const int dim = 2 * n;
    if (coupling.a.rows() != dim || coupling.a.cols() != dim)
        throw std::invalid_argument("coupling matrix dimension does not match n_sites");
    if (!coupling.a.allFinite()) throw std::invalid_argument("coupling matrix has non-finite entries");
    if ((coupling.a + coupling.a.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("coupling matrix must be antisymmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(coupling.complex_form());
    if (es.info() != Eigen::Success) throw numerical_error("eigendecomposition failed");

    ModeBasis out;
    out.n_sites = n;
    out.spectrum = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();

    const double scale = std::max(1.0, out.spectrum.cwiseAbs().maxCoeff());
    for (int j = 0; j < n; ++j)
        if (std::abs(out.spectrum(j) + out.spectrum(dim - 1 - j)) > 1e-10 * scale)
            throw numerical_error("spectrum does not split into +/- pairs");

    const double zero_tol = 1e-9 * scale;
    out.eigenvalues.resize(n);
    out.canonical.resize(dim, dim);

    // Exact zero modes first (they are the smallest nonnegative eigenvalues):
    // their conjugate pairs coincide, so build a real basis of the null space.
    std::vector<Eigen::VectorXd> zero_cand;
    int n_zero_cols = 0;
    for (int j = 0; j < dim; ++j) {
        if (std::abs(out.spectrum(j)) <= zero_tol) {
            zero_cand.push_back(out.eigenvectors.col(j).real());
            zero_cand.push_back(out.eigenvectors.col(j).imag());
            ++n_zero_cols;
        }
    }
    if (n_zero_cols % 2 != 0) throw numerical_error("odd number of zero modes");
    const int z = n_zero_cols / 2;
    if (z > 0) {
        auto basis = orthonormalize(zero_cand, 2 * z);
        if (static_cast<int>(basis.size()) != 2 * z)
            throw numerical_error("could not build a real basis of the zero eigenspace");
        for (int p = 0; p < z; ++p) {
            out.canonical.col(2 * p) = basis[2 * p];
            out.canonical.col(2 * p + 1) = basis[2 * p + 1];
            out.eigenvalues(p) = 0.0;
        }
    }

    // Remaining modes: for C v = mu v with mu > 0, the conjugate pair lives at
    // -mu, so sqrt(2)*Im(v) and sqrt(2)*Re(v) are orthonormal and produce the
    // canonical block [[0, mu], [-mu, 0]] in that column order.
    int k = z;
    const double rt2 = std::sqrt(2.0);
    for (int j = 0; j < dim; ++j) {
        if (out.spectrum(j) > zero_tol) {
            out.canonical.col(2 * k) = rt2 * out.eigenvectors.col(j).imag();
            out.canonical.col(2 * k + 1) = rt2 * out.eigenvectors.col(j).real();
            out.eigenvalues(k) = out.spectrum(j);
            ++k;
        }
    }
    if (k != n) throw numerical_error("mode count mismatch after +/- pairing");

    const double q_dev =
        (out.canonical * out.canonical.transpose() - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff();
    if (q_dev > 1e-10) throw numerical_error("canonical transform lost orthogonality: " + std::to_string(q_dev));
    return out;
}

Eigen::VectorXd single_particle_energies(const ChainSpec& spec) {
    return diagonalize(build_coupling(spec)).excitation_energies();
}

Propagator propagator(const ModeBasis& basis, double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("propagator time must be finite");
    const int dim = 2 * basis.n_sites;
    // exp(2 a t) = Q * blockdiag([[cos th, sin th], [-sin th, cos th]]) * Q^T
    // with th = 2*mu_k*t per mode.
    Eigen::MatrixXd qr(dim, dim);
    for (int kk = 0; kk < basis.n_sites; ++kk) {
        const double th = 2.0 * basis.eigenvalues(kk) * t;
        const double c = std::cos(th), s = std::sin(th);
        qr.col(2 * kk) = c * basis.canonical.col(2 * kk) - s * basis.canonical.col(2 * kk + 1);
        qr.col(2 * kk + 1) = s * basis.canonical.col(2 * kk) + c * basis.canonical.col(2 * kk + 1);
    }
    Propagator out;
    out.time = t;
    out.matrix.noalias() = qr * basis.canonical.transpose();
    return out;
}

}  // namespace ising
