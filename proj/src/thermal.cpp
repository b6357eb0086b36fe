#include "ising/thermal.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ising/errors.hpp"
#include "ising/modes.hpp"

namespace ising {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// beta*E with the conventions for limit fits: at beta = +inf an exact zero
// mode contributes beta*E = 0 (its occupation stays free), any positive energy
// freezes out.
double beta_e(double beta, double e) {
    if (std::isinf(beta)) return e > 0.0 ? kInf : 0.0;
    return beta * e;
}

double fidelity_factor(double omega, double be) {
    const double num = 1.0 + std::exp(-0.5 * (omega + be));
    const double den = std::sqrt((1.0 + std::exp(-omega)) * (1.0 + std::exp(-be)));
    return num / den;
}

}  // namespace

void ThermalModel::validate() const {
    if (energies.size() == 0) throw std::invalid_argument("thermal model has no modes");
    for (int k = 0; k < energies.size(); ++k) {
        if (!std::isfinite(energies(k)) || energies(k) < -1e-12)
            throw std::invalid_argument("mode energies must be finite and >= 0");
        if (k > 0 && energies(k) < energies(k - 1))
            throw std::invalid_argument("mode energies must be ascending");
    }
}

ThermalModel subsystem_thermal_model(const ChainSpec& spec, int n_prime, bool keep_impurity) {
    ChainSpec sub = subsystem_spec(spec, n_prime);
    if (!keep_impurity) {
        sub.delta = 0.0;
        sub.impurity_site = 1;
    }
    ThermalModel model;
    model.energies = single_particle_energies(sub);
    // exact zero modes come out as round-off-size values of either sign
    for (int k = 0; k < model.energies.size(); ++k)
        if (std::abs(model.energies(k)) < 1e-12) model.energies(k) = 0.0;
    model.validate();
    return model;
}

double log_partition(const ThermalModel& model, double beta) {
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
    double s = 0.0;
    for (int k = 0; k < model.energies.size(); ++k) s += std::log1p(std::exp(-beta_e(beta, model.energies(k))));
    return s;
}

double internal_energy(const ThermalModel& model, double beta) {
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
    double s = 0.0;
    for (int k = 0; k < model.energies.size(); ++k) {
        const double be = beta_e(beta, model.energies(k));
        // E / (e^{beta E} + 1); overflow of exp harmlessly gives E/inf = 0
        s += model.energies(k) / (std::exp(be) + 1.0);
    }
    return s;
}

BetaFit fit_beta_eos(const ThermalModel& model, double entropy_bits, double tol) {
    model.validate();
    if (!std::isfinite(entropy_bits)) throw std::invalid_argument("entropy must be finite");
    const double target = entropy_bits * std::numbers::ln2_v<double>;
    const int m = model.n_modes();
    auto g = [&](double beta) { return log_partition(model, beta) + beta * internal_energy(model, beta) - target; };
    if (entropy_bits <= 0.0) return {kInf, BetaFit::Limit::infinite};
    if (entropy_bits >= static_cast<double>(m)) return {0.0, BetaFit::Limit::zero};
    double lo = 0.0;  // g(0) = (m - S)*ln2 > 0
    double hi = 1.0;
    while (g(hi) > 0.0) {
        hi *= 2.0;
        if (hi > 1e12) return {kInf, BetaFit::Limit::infinite};  // entropy floor of zero modes
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (std::abs(gm) <= tol) return {mid, BetaFit::Limit::none};
        (gm > 0.0 ? lo : hi) = mid;
        if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
    }
    return {0.5 * (lo + hi), BetaFit::Limit::none};
}

double classical_fidelity(const Eigen::VectorXd& omegas, const ThermalModel& model, double beta) {
    model.validate();
    if (omegas.size() != model.energies.size())
        throw std::invalid_argument("spectrum and thermal model sizes differ");
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
    for (int k = 0; k < omegas.size(); ++k) {
        if (std::isnan(omegas(k)) || omegas(k) < 0.0)
            throw std::invalid_argument("mode parameters must be >= 0");
        if (k > 0 && omegas(k) < omegas(k - 1))
            throw std::invalid_argument("mode parameters must be ascending");
    }
    double f = 1.0;
    for (int k = 0; k < omegas.size(); ++k) f *= fidelity_factor(omegas(k), beta_e(beta, model.energies(k)));
    return f;
}

BetaFit fit_beta_max_fidelity(const Eigen::VectorXd& omegas, const ThermalModel& model) {
    const double lo = 1e-3, hi = 1e3;
    const int n_grid = 121;
    auto f = [&](double beta) { return classical_fidelity(omegas, model, beta); };
    // coarse logarithmic grid; strict > keeps the smaller beta on ties
    int best_i = 0;
    double best_f = -1.0, best_beta = lo;
    const double step = std::log(hi / lo) / (n_grid - 1);
    for (int i = 0; i < n_grid; ++i) {
        const double b = lo * std::exp(step * i);
        const double v = f(b);
        if (v > best_f) {
            best_f = v;
            best_i = i;
            best_beta = b;
        }
    }
    // golden-section refinement in log-beta around the grid maximum
    double a = std::log(lo * std::exp(step * std::max(0, best_i - 1)));
    double b = std::log(lo * std::exp(step * std::min(n_grid - 1, best_i + 1)));
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(std::exp(x1)), f2 = f(std::exp(x2));
    while (b - a > 1e-6) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(std::exp(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(std::exp(x2));
        }
    }
    const double mid = std::exp(0.5 * (a + b));
    const double fm = f(mid);
    if (fm > best_f || (f1 > best_f) || (f2 > best_f)) {
        // prefer the refined point; fall back to whichever evaluation won
        if (fm >= f1 && fm >= f2) best_beta = mid;
        else if (f1 >= f2) best_beta = std::exp(x1);
        else best_beta = std::exp(x2);
    }
    return {best_beta, BetaFit::Limit::none};
}

WindowStats time_averaged_fidelity(const std::vector<double>& times, const std::vector<double>& values,
                                   double t1, double t2, double edge_tol) {
    if (times.size() != values.size()) throw std::invalid_argument("trace time and value counts differ");
    if (!(t1 < t2)) throw std::invalid_argument("window must satisfy t1 < t2");
    WindowStats out;
    double sum = 0.0;
    for (size_t i = 0; i < times.size(); ++i) {
        if (times[i] > t1 + edge_tol && times[i] < t2 - edge_tol) {
            if (out.count == 0) {
                out.min = out.max = values[i];
            } else {
                out.min = std::min(out.min, values[i]);
                out.max = std::max(out.max, values[i]);
            }
            sum += values[i];
            ++out.count;
        }
    }
    if (out.count == 0) throw std::invalid_argument("no trace samples strictly inside the window");
    out.mean = sum / out.count;
    return out;
}

}  // namespace ising
