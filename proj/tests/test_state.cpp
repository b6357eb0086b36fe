#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ising/chain.hpp"
#include "ising/errors.hpp"
#include "ising/modes.hpp"
#include "ising/state.hpp"

using namespace ising;

namespace {

ChainSpec make_spec(int n, double delta = 0.0, int alpha = 1, std::set<int> cuts = {}) {
    ChainSpec s;
    s.n_sites = n;
    s.delta = delta;
    s.impurity_site = alpha;
    s.cut_bonds = std::move(cuts);
    return s;
}

// Correlation matrix with prescribed mode eigenvalues: block-diagonal
// [[0, l], [-l, 0]] per pair.
CorrelationMatrix corr_from_lambdas(const std::vector<double>& lambdas) {
    const int m = static_cast<int>(lambdas.size());
    CorrelationMatrix out;
    out.n_pairs = m;
    out.g = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    for (int k = 0; k < m; ++k) {
        out.g(2 * k, 2 * k + 1) = lambdas[k];
        out.g(2 * k + 1, 2 * k) = -lambdas[k];
    }
    return out;
}

std::vector<std::uint8_t> bits(std::initializer_list<int> v) {
    return std::vector<std::uint8_t>(v.begin(), v.end());
}

}  // namespace

TEST_CASE("occupation labels follow the most-significant-first convention") {
    CHECK(parse_label("5_d", 3).bits == bits({1, 0, 1}));
    OccupationPattern p32 = parse_label("32_d", 10);
    CHECK(p32.bits == bits({0, 0, 0, 0, 1, 0, 0, 0, 0, 0}));  // mode 5 occupied
    CHECK(p32.label() == 32);
    CHECK(parse_label("0_d", 4).bits == bits({0, 0, 0, 0}));
    CHECK(parse_label("101", 3).bits == bits({1, 0, 1}));  // exact-length bit string
    CHECK(parse_label("101_b", 3).label() == 5);
    CHECK(parse_label("11", 2).label() == 3);
    CHECK(parse_label(std::uint64_t{6}, 3).bits == bits({1, 1, 0}));
    for (std::uint64_t v : {0, 1, 5, 7}) CHECK(parse_label(v, 3).label() == v);
}

TEST_CASE("occupation label validation") {
    CHECK_THROWS_AS(parse_label("12x", 4), std::invalid_argument);
    CHECK_THROWS_AS(parse_label("", 4), std::invalid_argument);
    CHECK_THROWS_AS(parse_label(std::uint64_t{8}, 3), std::invalid_argument);  // out of range
    CHECK_THROWS_AS(parse_label("8_d", 3), std::invalid_argument);
    CHECK_THROWS_AS(parse_label("10_b", 3), std::invalid_argument);  // wrong length forced bits
    CHECK_THROWS_AS(parse_label(std::uint64_t{0}, 64), capacity_error);
    CHECK_THROWS_AS(parse_label("1_d", 0), std::invalid_argument);
    // a 64-mode bit string is fine; only the decimal label is capacity-capped
    const OccupationPattern wide = parse_label(std::string(64, '0'), 64);
    CHECK(wide.n_modes() == 64);
    CHECK_THROWS_AS(wide.label(), capacity_error);
}

TEST_CASE("random patterns are deterministic and unbiased") {
    const OccupationPattern a = random_pattern(50, 12345);
    const OccupationPattern b = random_pattern(50, 12345);
    CHECK(a.bits == b.bits);
    CHECK(random_pattern(50, 54321).bits != a.bits);
    CHECK(random_pattern(1, 7).n_modes() == 1);

    long occupied = 0;
    const int draws = 10000, n = 50;
    for (int s = 0; s < draws; ++s) occupied += random_pattern(n, 1000 + s).n_occupied();
    const double fraction = static_cast<double>(occupied) / (static_cast<double>(draws) * n);
    CHECK(fraction == doctest::Approx(0.5).epsilon(0.03));  // 3 sigma of binomial
}

TEST_CASE("occupation eigenstates are pure with the right energy") {
    const ChainSpec spec = make_spec(8);
    const CouplingMatrix c = build_coupling(spec);
    const ModeBasis basis = diagonalize(c);
    const double mu_sum = basis.eigenvalues.sum();

    const CorrelationMatrix vac = initial_gamma(basis, parse_label(std::uint64_t{0}, 8));
    CHECK(purity_deviation(vac) <= 1e-12);
    CHECK(expected_energy(c, vac) == doctest::Approx(-mu_sum).epsilon(1e-12));

    const CorrelationMatrix top = initial_gamma(basis, parse_label(std::uint64_t{255}, 8));
    CHECK(expected_energy(c, top) == doctest::Approx(mu_sum).epsilon(1e-12));

    const OccupationPattern p = parse_label("10110010", 8);
    const CorrelationMatrix g = initial_gamma(basis, p);
    CHECK(purity_deviation(g) <= 1e-12);
    double expected = -mu_sum;
    for (int k = 0; k < 8; ++k)
        if (p.bits[k]) expected += 2.0 * basis.eigenvalues(k);
    CHECK(expected_energy(c, g) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("initial_gamma rejects mismatched or ambiguous bases") {
    const ModeBasis basis = diagonalize(build_coupling(make_spec(4)));
    CHECK_THROWS_AS(initial_gamma(basis, parse_label(std::uint64_t{0}, 3)), std::invalid_argument);
    // a severed two-site chain has a doubly degenerate mode: occupation is ambiguous
    const ModeBasis degen = diagonalize(build_coupling(make_spec(2, 0.0, 1, {1})));
    CHECK_THROWS_AS(initial_gamma(degen, parse_label(std::uint64_t{1}, 2)), std::invalid_argument);
}

TEST_CASE("evolution preserves purity, spectrum, and energy") {
    const ChainSpec spec = make_spec(12, 1.0, 6);
    const CouplingMatrix c = build_coupling(spec);
    const ModeBasis evo = diagonalize(c);
    const ModeBasis basis0 = diagonalize(build_coupling(make_spec(12)));
    const CorrelationMatrix g0 = initial_gamma(basis0, random_pattern(12, 99));
    const double e0 = expected_energy(c, g0);

    CHECK((evolve(g0, propagator(evo, 0.0)).g - g0.g).cwiseAbs().maxCoeff() <= 1e-13);
    for (double t : {0.3, 1.7, 5.0, 40.0}) {
        CAPTURE(t);
        const CorrelationMatrix gt = evolve(g0, propagator(evo, t));
        CHECK(purity_deviation(gt) <= 1e-10);
        CHECK(std::abs(expected_energy(c, gt) - e0) <= 1e-9);
    }

    CorrelationMatrix small = corr_from_lambdas({0.5});
    CHECK_THROWS_AS(evolve(small, propagator(evo, 1.0)), std::invalid_argument);
}

TEST_CASE("reduce keeps the requested site pairs") {
    const ModeBasis basis = diagonalize(build_coupling(make_spec(6)));
    const CorrelationMatrix g = initial_gamma(basis, random_pattern(6, 4));
    const CorrelationMatrix full = reduce(g, {1, 2, 3, 4, 5, 6});
    CHECK((full.g - g.g).cwiseAbs().maxCoeff() == 0.0);

    const CorrelationMatrix sub = reduce(g, {2, 5});
    REQUIRE(sub.n_pairs == 2);
    CHECK(sub.g(0, 1) == g.g(2, 3));
    CHECK(sub.g(0, 2) == g.g(2, 8));
    CHECK(sub.g(3, 1) == g.g(9, 3));

    CHECK_THROWS_AS(reduce(g, {}), std::invalid_argument);
    CHECK_THROWS_AS(reduce(g, {0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(reduce(g, {5, 7}), std::invalid_argument);
    CHECK_THROWS_AS(reduce(g, {3, 3}), std::invalid_argument);
    CHECK_THROWS_AS(reduce(g, {4, 2}), std::invalid_argument);
}

TEST_CASE("mode spectrum: lambda/omega closed forms") {
    const double half_tanh_1 = 0.3807970779778824;  // lambda at omega = 2
    const ReducedSpectrum at2 = mode_spectrum(corr_from_lambdas({half_tanh_1}));
    CHECK(at2.omegas(0) == doctest::Approx(2.0).epsilon(1e-12));

    const ReducedSpectrum mixed = mode_spectrum(corr_from_lambdas({0.0}));
    CHECK(mixed.omegas(0) == 0.0);
    CHECK(mixed.entropy_bits == doctest::Approx(1.0).epsilon(1e-12));

    const ReducedSpectrum pure = mode_spectrum(corr_from_lambdas({0.5}));
    CHECK(std::isinf(pure.omegas(0)));
    CHECK(std::abs(pure.entropy_bits) <= 1e-12);

    // round trip lambda -> omega -> lambda across the admissible range
    for (double l : {0.0, 1e-6, 0.1, 0.25, 0.4, 0.499, 0.5 - 1e-8}) {
        const ReducedSpectrum s = mode_spectrum(corr_from_lambdas({l}));
        CHECK(std::abs(0.5 * std::tanh(0.5 * s.omegas(0)) - l) <= 1e-12);
    }
}

TEST_CASE("mode spectrum sorts ascending and flags overshoot") {
    const ReducedSpectrum s = mode_spectrum(corr_from_lambdas({0.4, 0.1, 0.3}));
    CHECK(s.lambdas(0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(s.lambdas(1) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(s.lambdas(2) == doctest::Approx(0.4).epsilon(1e-12));

    CHECK_THROWS_AS(mode_spectrum(corr_from_lambdas({0.5 + 1e-6})), numerical_error);
    CHECK_NOTHROW(mode_spectrum(corr_from_lambdas({0.5 + 1e-10})));  // round-off clamps to pure
}

TEST_CASE("entropy closed forms") {
    CHECK(entropy(corr_from_lambdas({0.25})) == doctest::Approx(0.8112781244591328).epsilon(1e-12));
    CHECK(entropy(corr_from_lambdas({0.0, 0.0, 0.0, 0.0, 0.0})) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(std::abs(entropy(corr_from_lambdas({0.5, 0.5}))) <= 1e-12);
}

TEST_CASE("reduced density eigenvalues in label order") {
    const std::vector<double> half_half = rho_eigenvalues(corr_from_lambdas({0.0}));
    REQUIRE(half_half.size() == 2);
    CHECK(half_half[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(half_half[1] == doctest::Approx(0.5).epsilon(1e-12));

    const std::vector<double> pure = rho_eigenvalues(corr_from_lambdas({0.5, 0.5}));
    REQUIRE(pure.size() == 4);
    CHECK(pure[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pure[1] == 0.0);
    CHECK(pure[2] == 0.0);
    CHECK(pure[3] == 0.0);

    // two distinct modes: index bits read (mode 1, mode 2) most significant first
    const double l1 = 0.1, l2 = 0.3;
    const std::vector<double> two = rho_eigenvalues(corr_from_lambdas({l2, l1}));  // sorted inside
    auto p_of = [](double l) { return 1.0 / (1.0 + std::exp(2.0 * std::atanh(2.0 * l))); };
    const double p1 = p_of(l1), p2 = p_of(l2);
    CHECK(two[0] == doctest::Approx((1 - p1) * (1 - p2)).epsilon(1e-12));
    CHECK(two[1] == doctest::Approx((1 - p1) * p2).epsilon(1e-12));
    CHECK(two[2] == doctest::Approx(p1 * (1 - p2)).epsilon(1e-12));
    CHECK(two[3] == doctest::Approx(p1 * p2).epsilon(1e-12));

    double sum = 0.0;
    for (double v : two) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(rho_eigenvalues(corr_from_lambdas(std::vector<double>(21, 0.0))), capacity_error);
}

TEST_CASE("purity deviation separates pure from mixed") {
    const ModeBasis basis = diagonalize(build_coupling(make_spec(5)));
    CHECK(purity_deviation(initial_gamma(basis, random_pattern(5, 11))) <= 1e-12);
    CHECK(purity_deviation(corr_from_lambdas({0.0, 0.0})) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("subsystem and complement carry equal entropy for a pure state") {
    const ChainSpec evo_spec = make_spec(10, 1.0, 3);
    const ModeBasis evo = diagonalize(build_coupling(evo_spec));
    const ModeBasis basis0 = diagonalize(build_coupling(make_spec(10)));
    const CorrelationMatrix g0 = initial_gamma(basis0, random_pattern(10, 21));
    const CorrelationMatrix gt = evolve(g0, propagator(evo, 7.0));
    const double s_left = entropy(reduce(gt, {1, 2, 3, 4}));
    const double s_right = entropy(reduce(gt, {5, 6, 7, 8, 9, 10}));
    CHECK(s_left == doctest::Approx(s_right).epsilon(1e-8));
    CHECK(s_left > 0.1);  // the quench does generate entanglement
}
