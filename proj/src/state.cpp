#include "ising/state.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "ising/errors.hpp"

namespace ising {

namespace {

double binary_entropy_bits(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

void check_pattern_size(const ModeBasis& basis, const OccupationPattern& pattern) {
    if (pattern.n_modes() != basis.n_sites)
        throw std::invalid_argument("pattern has " + std::to_string(pattern.n_modes()) + " modes, basis has " +
                                    std::to_string(basis.n_sites));
}

}  // namespace

int OccupationPattern::n_occupied() const {
    int c = 0;
    for (auto b : bits) c += b;
    return c;
}

std::uint64_t OccupationPattern::label() const {
    if (n_modes() > 63) throw capacity_error("decimal labels only defined for up to 63 modes");
    std::uint64_t v = 0;
    for (auto b : bits) v = (v << 1) | b;  // mode 1 ends up most significant
    return v;
}

OccupationPattern parse_label(std::uint64_t label, int n_modes) {
    if (n_modes < 1) throw std::invalid_argument("pattern needs at least one mode");
    if (n_modes > 63) throw capacity_error("decimal labels only defined for up to 63 modes");
    if (label >> n_modes)
        throw std::invalid_argument("label " + std::to_string(label) + " out of range for " +
                                    std::to_string(n_modes) + " modes");
    OccupationPattern out;
    out.bits.resize(n_modes);
    for (int k = 0; k < n_modes; ++k) out.bits[k] = (label >> (n_modes - 1 - k)) & 1;
    return out;
}

OccupationPattern parse_label(const std::string& text, int n_modes) {
    if (n_modes < 1) throw std::invalid_argument("pattern needs at least one mode");
    std::string body = text;
    bool force_bits = false, force_decimal = false;
    if (body.size() > 2 && body.compare(body.size() - 2, 2, "_b") == 0) {
        force_bits = true;
        body.resize(body.size() - 2);
    } else if (body.size() > 2 && body.compare(body.size() - 2, 2, "_d") == 0) {
        force_decimal = true;
        body.resize(body.size() - 2);
    }
    if (body.empty()) throw std::invalid_argument("empty occupation label");
    bool binary_chars = true, decimal_chars = true;
    for (char c : body) {
        if (c != '0' && c != '1') binary_chars = false;
        if (c < '0' || c > '9') decimal_chars = false;
    }
    // A string of exactly n_modes 0/1 characters reads as the bit pattern;
    // anything else is a decimal label.
    const bool as_bits = force_bits || (!force_decimal && binary_chars &&
                                        static_cast<int>(body.size()) == n_modes);
    if (as_bits) {
        if (!binary_chars || static_cast<int>(body.size()) != n_modes)
            throw std::invalid_argument("bit-string label '" + text + "' must be exactly " +
                                        std::to_string(n_modes) + " characters of 0/1");
        OccupationPattern out;
        out.bits.resize(n_modes);
        for (int k = 0; k < n_modes; ++k) out.bits[k] = body[k] == '1';
        return out;
    }
    if (!decimal_chars) throw std::invalid_argument("malformed occupation label '" + text + "'");
    if (body.size() > 19) throw std::invalid_argument("decimal label '" + text + "' too large");
    return parse_label(std::stoull(body), n_modes);
}

OccupationPattern random_pattern(int n_modes, std::uint64_t seed) {
    if (n_modes < 1) throw std::invalid_argument("pattern needs at least one mode");
    std::mt19937_64 eng(seed);
    OccupationPattern out;
    out.bits.resize(n_modes);
    for (int k = 0; k < n_modes; ++k) out.bits[k] = static_cast<std::uint8_t>(eng() >> 63);
    return out;
}

Eigen::MatrixXcd CorrelationMatrix::complex_form() const {
    return std::complex<double>(0.0, 1.0) * g.cast<std::complex<double>>();
}

CorrelationMatrix initial_gamma(const ModeBasis& basis, const OccupationPattern& pattern) {
    check_pattern_size(basis, pattern);
    for (int k = 0; k + 1 < basis.n_sites; ++k)
        if (basis.eigenvalues(k + 1) - basis.eigenvalues(k) < 1e-9)
            throw std::invalid_argument("mode basis is degenerate; occupation labels are ambiguous");
    const int dim = 2 * basis.n_sites;
    // In the canonical frame each mode is a 2x2 block [[0, s], [-s, 0]] with
    // s = +1/2 empty, -1/2 occupied.
    Eigen::MatrixXd qs(dim, dim);
    for (int k = 0; k < basis.n_sites; ++k) {
        const double s = pattern.bits[k] ? -0.5 : 0.5;
        qs.col(2 * k) = basis.canonical.col(2 * k + 1) * (-s);
        qs.col(2 * k + 1) = basis.canonical.col(2 * k) * s;
    }
    CorrelationMatrix out;
    out.n_pairs = basis.n_sites;
    out.g.noalias() = qs * basis.canonical.transpose();
    out.g = 0.5 * (out.g - out.g.transpose().eval());
    return out;
}

CorrelationMatrix evolve(const CorrelationMatrix& gamma, const Propagator& prop) {
    if (prop.matrix.rows() != gamma.g.rows())
        throw std::invalid_argument("propagator and correlation matrix dimensions differ");
    CorrelationMatrix out;
    out.n_pairs = gamma.n_pairs;
    out.g.noalias() = prop.matrix * gamma.g * prop.matrix.transpose();
    out.g = 0.5 * (out.g - out.g.transpose().eval());
    return out;
}

CorrelationMatrix reduce(const CorrelationMatrix& gamma, const std::vector<int>& sites) {
    if (sites.empty()) throw std::invalid_argument("site list is empty");
    for (size_t i = 0; i < sites.size(); ++i) {
        if (sites[i] < 1 || sites[i] > gamma.n_pairs)
            throw std::invalid_argument("site " + std::to_string(sites[i]) + " outside 1.." +
                                        std::to_string(gamma.n_pairs));
        if (i > 0 && sites[i] <= sites[i - 1])
            throw std::invalid_argument("site list must be strictly ascending");
    }
    const int m = static_cast<int>(sites.size());
    Eigen::VectorXi idx(2 * m);
    for (int i = 0; i < m; ++i) {
        idx(2 * i) = 2 * sites[i] - 2;
        idx(2 * i + 1) = 2 * sites[i] - 1;
    }
    CorrelationMatrix out;
    out.n_pairs = m;
    out.g = gamma.g(idx, idx);
    return out;
}

ReducedSpectrum mode_spectrum(const CorrelationMatrix& gamma) {
    const int m = gamma.n_pairs;
    Eigen::MatrixXd g = 0.5 * (gamma.g - gamma.g.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        (std::complex<double>(0.0, 1.0) * g.cast<std::complex<double>>()).eval(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw numerical_error("correlation eigendecomposition failed");
    const Eigen::VectorXd ev = es.eigenvalues();  // ascending, symmetric about 0
    if (ev.cwiseAbs().maxCoeff() > 0.5 + 1e-9)
        throw numerical_error("correlation eigenvalue beyond 1/2: " + std::to_string(ev.cwiseAbs().maxCoeff()));
    ReducedSpectrum out;
    out.lambdas.resize(m);
    out.omegas.resize(m);
    out.entropy_bits = 0.0;
    for (int k = 0; k < m; ++k) {
        const double l = std::min(0.5, std::max(0.0, ev(m + k)));
        out.lambdas(k) = l;
        out.omegas(k) = l >= 0.5 - 1e-12 ? std::numeric_limits<double>::infinity() : 2.0 * std::atanh(2.0 * l);
        out.entropy_bits += binary_entropy_bits(0.5 + l);
    }
    return out;
}

double entropy(const CorrelationMatrix& gamma) { return mode_spectrum(gamma).entropy_bits; }

std::vector<double> rho_eigenvalues(const CorrelationMatrix& gamma) {
    const int m = gamma.n_pairs;
    if (m > 20) throw capacity_error("reduced density spectrum capped at 20 modes, got " + std::to_string(m));
    const ReducedSpectrum spec = mode_spectrum(gamma);
    std::vector<double> vals{1.0};
    // extend label-order: bit for mode k splits every existing entry, so the
    // final index reads the bits with mode 1 most significant
    for (int k = 0; k < m; ++k) {
        const double w = spec.omegas(k);
        const double p = std::isinf(w) ? 0.0 : 1.0 / (1.0 + std::exp(w));
        std::vector<double> next(vals.size() * 2);
        for (size_t i = 0; i < vals.size(); ++i) {
            next[2 * i] = vals[i] * (1.0 - p);
            next[2 * i + 1] = vals[i] * p;
        }
        vals.swap(next);
    }
    double sum = 0.0, comp = 0.0;  // Kahan, so the unit-sum check is meaningful
    for (double v : vals) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw numerical_error("reduced density eigenvalues sum to " + std::to_string(sum));
    return vals;
}

double expected_energy(const CouplingMatrix& coupling, const CorrelationMatrix& gamma) {
    if (coupling.a.rows() != gamma.g.rows())
        throw std::invalid_argument("coupling and correlation matrix dimensions differ");
    // sum_ij C_ij Gamma_ij with C = i*a, Gamma = i*g
    return -coupling.a.cwiseProduct(gamma.g).sum();
}

double purity_deviation(const CorrelationMatrix& gamma) {
    // eigenvalues of (i g) are +/- singular values of g; g g^T has them squared
    Eigen::MatrixXd gg = gamma.g * gamma.g.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gg, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw numerical_error("purity eigendecomposition failed");
    double dev = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        dev = std::max(dev, std::abs(std::sqrt(std::max(0.0, es.eigenvalues()(i))) - 0.5));
    return dev;
}

}  // namespace ising
