#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "ising/chain.hpp"
#include "ising/dense.hpp"
#include "ising/errors.hpp"
#include "ising/modes.hpp"
#include "ising/state.hpp"

using namespace ising;
using cd = std::complex<double>;

namespace {

ChainSpec make_spec(int n, double delta = 0.0, int alpha = 1, std::set<int> cuts = {}) {
    ChainSpec s;
    s.n_sites = n;
    s.delta = delta;
    s.impurity_site = alpha;
    s.cut_bonds = std::move(cuts);
    return s;
}

std::vector<double> dense_spectrum(const ChainSpec& spec) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense_hamiltonian(spec), Eigen::EigenvaluesOnly);
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return out;
}

// Many-body spectrum implied by the mode energies: -sum(E)/2 plus every subset sum.
std::vector<double> implied_spectrum(const ChainSpec& spec) {
    const Eigen::VectorXd e = single_particle_energies(spec);
    const int n = static_cast<int>(e.size());
    std::vector<double> out{-0.5 * e.sum()};
    out.reserve(std::size_t{1} << n);
    for (int k = 0; k < n; ++k) {
        const std::size_t sz = out.size();
        for (std::size_t i = 0; i < sz; ++i) out.push_back(out[i] + e(k));
    }
    std::sort(out.begin(), out.end());
    return out;
}

double max_multiset_gap(std::vector<double> a, std::vector<double> b) {
    REQUIRE(a.size() == b.size());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double gap = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
    return gap;
}

}  // namespace

TEST_CASE("two-site dense spectra") {
    const std::vector<double> uniform = dense_spectrum(make_spec(2));
    const double r5 = std::sqrt(5.0);
    CHECK(max_multiset_gap(uniform, {-r5, -1.0, 1.0, r5}) <= 1e-12);

    const std::vector<double> cut = dense_spectrum(make_spec(2, 0.0, 1, {1}));
    CHECK(max_multiset_gap(cut, {-2.0, 0.0, 0.0, 2.0}) <= 1e-12);
}

TEST_CASE("dense Hamiltonian is Hermitian and linear in the impurity strength") {
    const int n = 4, alpha = 2;
    const Eigen::MatrixXcd h0 = dense_hamiltonian(make_spec(n));
    const Eigen::MatrixXcd h1 = dense_hamiltonian(make_spec(n, 1.0, alpha));
    CHECK((h0 - h0.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((h1 - h1.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);

    // the impurity adds a pure on-site-field term: h0 - h1 = sigma^z at alpha
    const Eigen::MatrixXcd diff = h0 - h1;
    for (int i = 0; i < diff.rows(); ++i) {
        for (int j = 0; j < diff.cols(); ++j) {
            if (i != j) {
                CHECK(std::abs(diff(i, j)) == 0.0);
            } else {
                const int bit = (i >> (n - alpha)) & 1;
                CHECK(diff(i, i).real() == doctest::Approx(1.0 - 2.0 * bit).epsilon(1e-14));
                CHECK(diff(i, i).imag() == 0.0);
            }
        }
    }

    CHECK_THROWS_AS(dense_hamiltonian(make_spec(15)), capacity_error);
}

TEST_CASE("dense Majorana operators anticommute to the identity") {
    const int n = 3;
    const auto g = dense_majoranas(n);
    REQUIRE(g.size() == 6);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(8, 8);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK((g[i] - g[i].adjoint()).cwiseAbs().maxCoeff() <= 1e-14);
        for (std::size_t j = 0; j < g.size(); ++j) {
            const Eigen::MatrixXcd anti = g[i] * g[j] + g[j] * g[i];
            const Eigen::MatrixXcd want = (i == j) ? id : Eigen::MatrixXcd::Zero(8, 8).eval();
            CHECK((anti - want).cwiseAbs().maxCoeff() <= 1e-13);
        }
    }
    CHECK_THROWS_AS(dense_majoranas(0), std::invalid_argument);
}

TEST_CASE("quadratic Majorana form reproduces the dense Hamiltonian") {
    for (const auto& spec :
         {make_spec(2), make_spec(3, 1.0, 2), make_spec(4, 0.7, 1, {2}), make_spec(4, 2.0, 4)}) {
        CAPTURE(spec.n_sites);
        const CouplingMatrix c = build_coupling(spec);
        const auto g = dense_majoranas(spec.n_sites);
        const int dim = 1 << spec.n_sites;
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
        for (int i = 0; i < 2 * spec.n_sites; ++i)
            for (int j = 0; j < 2 * spec.n_sites; ++j)
                h += cd(0.0, c.a(i, j)) * (g[i] * g[j]);
        CHECK((h - dense_hamiltonian(spec)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("mode energies generate the dense many-body spectrum") {
    for (const auto& spec : {make_spec(2, 1.5, 2), make_spec(4, 1.0, 2), make_spec(5, 0.3, 5, {2}),
                             make_spec(6, 2.0, 3, {1, 4})}) {
        CAPTURE(spec.n_sites);
        CHECK(max_multiset_gap(dense_spectrum(spec), implied_spectrum(spec)) <= 1e-8);
    }
}

TEST_CASE("quasiparticle states are dense eigenstates at the right energies") {
    const ChainSpec spec0 = make_spec(5);
    const ModeBasis basis = diagonalize(build_coupling(spec0));
    const Eigen::MatrixXcd h = dense_hamiltonian(spec0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const double e_ground = es.eigenvalues()(0);

    const Eigen::VectorXcd vac = dense_quasiparticle_state(spec0, basis, parse_label(std::uint64_t{0}, 5));
    CHECK(std::abs(vac.norm() - 1.0) <= 1e-12);
    CHECK((h * vac - e_ground * vac).norm() <= 1e-8);

    for (int k = 0; k < 5; ++k) {
        const OccupationPattern single = parse_label(std::uint64_t{1} << (4 - k), 5);
        const Eigen::VectorXcd psi = dense_quasiparticle_state(spec0, basis, single);
        const double want = e_ground + 2.0 * basis.eigenvalues(k);
        CHECK((h * psi - want * psi).norm() <= 1e-8);
    }

    CHECK_THROWS_AS(dense_quasiparticle_state(make_spec(5, 1.0, 2), basis, parse_label(std::uint64_t{0}, 5)),
                    std::invalid_argument);
}

TEST_CASE("dense two-point functions match the Gaussian construction") {
    const ChainSpec spec0 = make_spec(5);
    const ModeBasis basis = diagonalize(build_coupling(spec0));
    const OccupationPattern p = parse_label("10110", 5);
    const Eigen::VectorXcd psi = dense_quasiparticle_state(spec0, basis, p);
    const Eigen::MatrixXcd dense_gamma = dense_correlation(psi, 5);
    const Eigen::MatrixXcd gaussian = initial_gamma(basis, p).complex_form();
    CHECK((dense_gamma - gaussian).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("dense evolution: identity at t=0, unitary, stationary on eigenstates") {
    const ChainSpec spec0 = make_spec(4);
    const ModeBasis basis = diagonalize(build_coupling(spec0));
    const Eigen::VectorXcd psi = dense_quasiparticle_state(spec0, basis, parse_label("0110", 4));

    CHECK((dense_evolve(spec0, psi, 0.0) - psi).cwiseAbs().maxCoeff() <= 1e-12);

    const Eigen::VectorXcd moved = dense_evolve(make_spec(4, 1.0, 2), psi, 37.0);
    CHECK(std::abs(moved.norm() - 1.0) <= 1e-10);

    // eigenstate of the evolving chain: observables frozen up to 1e-10
    const Eigen::VectorXcd still = dense_evolve(spec0, psi, 5.0);
    CHECK((dense_correlation(still, 4) - dense_correlation(psi, 4)).cwiseAbs().maxCoeff() <= 1e-10);

    CHECK_THROWS_AS(dense_evolve(spec0, psi, std::nan("")), std::invalid_argument);
    Eigen::VectorXcd short_psi = psi.head(8);
    CHECK_THROWS_AS(dense_evolve(spec0, short_psi, 1.0), std::invalid_argument);
}

TEST_CASE("partial trace: projector on the full set, pure across a real cut") {
    const ChainSpec spec0 = make_spec(4);
    const ModeBasis basis = diagonalize(build_coupling(spec0));
    const Eigen::VectorXcd psi = dense_quasiparticle_state(spec0, basis, parse_label("1010", 4));

    const Eigen::MatrixXcd full = dense_reduced_density(psi, 4, {1, 2, 3, 4});
    CHECK(std::abs(full.trace().real() - 1.0) <= 1e-12);
    CHECK((full * full - full).cwiseAbs().maxCoeff() <= 1e-10);  // rank-1 projector
    CHECK(dense_entropy(full) <= 1e-8);

    // severed chain, product eigenstate: left block stays pure under evolution
    const ChainSpec cut = make_spec(4, 0.0, 1, {2});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense_hamiltonian(cut));
    const Eigen::VectorXcd ground = es.eigenvectors().col(0);
    const Eigen::VectorXcd later = dense_evolve(cut, ground, 3.0);
    const Eigen::MatrixXcd left = dense_reduced_density(later, 4, {1, 2});
    CHECK(dense_entropy(left) <= 1e-9);

    CHECK_THROWS_AS(dense_reduced_density(psi, 4, {}), std::invalid_argument);
    CHECK_THROWS_AS(dense_reduced_density(psi, 4, {2, 2}), std::invalid_argument);
    CHECK_THROWS_AS(dense_reduced_density(psi, 4, {0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(dense_reduced_density(psi, 4, {3, 5}), std::invalid_argument);
}

TEST_CASE("dense entropy closed forms and validation") {
    Eigen::MatrixXcd mixed = 0.25 * Eigen::MatrixXcd::Identity(4, 4);
    CHECK(dense_entropy(mixed) == doctest::Approx(2.0).epsilon(1e-12));

    Eigen::MatrixXcd bad_trace = 0.5 * Eigen::MatrixXcd::Identity(4, 4);
    CHECK_THROWS_AS(dense_entropy(bad_trace), numerical_error);

    Eigen::MatrixXcd rect = Eigen::MatrixXcd::Zero(2, 3);
    CHECK_THROWS_AS(dense_entropy(rect), std::invalid_argument);
}

TEST_CASE("reduced spectra agree between dense and Gaussian pipelines") {
    const ChainSpec spec0 = make_spec(6);
    const ChainSpec evo = make_spec(6, 1.0, 3);
    const ModeBasis basis = diagonalize(build_coupling(spec0));
    const OccupationPattern p = parse_label("101100", 6);
    const double t = 2.0;

    // dense side
    const Eigen::VectorXcd psi0 = dense_quasiparticle_state(spec0, basis, p);
    const Eigen::VectorXcd psi_t = dense_evolve(evo, psi0, t);
    const Eigen::MatrixXcd rho = dense_reduced_density(psi_t, 6, {1, 2, 3});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    std::vector<double> dense_vals(es.eigenvalues().data(), es.eigenvalues().data() + 8);

    // Gaussian side
    const ModeBasis evo_basis = diagonalize(build_coupling(evo));
    const CorrelationMatrix gt = evolve(initial_gamma(basis, p), propagator(evo_basis, t));
    const std::vector<double> gauss_vals = rho_eigenvalues(reduce(gt, {1, 2, 3}));

    CHECK(max_multiset_gap(dense_vals, gauss_vals) <= 1e-8);
    CHECK(std::abs(dense_entropy(rho) - entropy(reduce(gt, {1, 2, 3}))) <= 1e-8);
}
