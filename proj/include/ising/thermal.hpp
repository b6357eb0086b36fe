#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ising/chain.hpp"
#include "ising/state.hpp"

namespace ising {

// Free-fermion thermal reference: the subsystem's single-particle energies
// E_1 <= ... <= E_m at inverse temperature beta, with
// ln Z(beta) = sum_k ln(1 + e^{-beta E_k}). Energies are >= 0; an exact zero
// mode appears when the impurity at delta = 1 sits inside the subsystem.
struct ThermalModel {
    Eigen::VectorXd energies;

    int n_modes() const { return static_cast<int>(energies.size()); }
    void validate() const;
};

// Thermal reference for the first n_prime sites: the kept block as a standalone
// chain (boundary bond dropped), with the impurity either kept when it lies
// inside (the default) or stripped.
ThermalModel subsystem_thermal_model(const ChainSpec& spec, int n_prime, bool keep_impurity = true);

double log_partition(const ThermalModel& model, double beta);
double internal_energy(const ThermalModel& model, double beta);

// Outcome of an inverse-temperature fit. `limit` marks the degenerate ends of
// the domain: entropy at (or below) zero pins beta = +inf, entropy at (or
// above) saturation pins beta = 0.
struct BetaFit {
    double beta = 0.0;
    enum class Limit { none, zero, infinite } limit = Limit::none;
};

// Solve the equation of state ln Z(beta) + beta*U(beta) = S*ln2 for beta.
// The left side minus the right is monotone decreasing in beta, so bisection
// on a doubling bracket converges; iteration stops at |residual| <= tol.
BetaFit fit_beta_eos(const ThermalModel& model, double entropy_bits, double tol = 1e-10);

// Bhattacharyya overlap between the reduced state's mode spectrum and the
// thermal reference, computed mode-wise over both spectra sorted ascending:
//   F = prod_k (1 + e^{-(omega_k + beta*E_k)/2}) / sqrt((1+e^{-omega_k})(1+e^{-beta E_k})).
// Pure modes (omega = +inf) contribute 1/sqrt(1 + e^{-beta E_k}); beta may be
// +inf (then beta*E is taken as 0 for an exact zero mode). Result in (0, 1],
// and 1 exactly when the spectra coincide.
double classical_fidelity(const Eigen::VectorXd& omegas, const ThermalModel& model, double beta);

// argmax_beta of classical_fidelity over beta in [1e-3, 1e3]: coarse
// logarithmic grid, then golden-section refinement to relative width 1e-6.
// Ties prefer the smaller beta.
BetaFit fit_beta_max_fidelity(const Eigen::VectorXd& omegas, const ThermalModel& model);

// Mean/min/max of a sampled trace over the open window (t1, t2). Grid points
// are compared against the edges with slack edge_tol, so a grid time that is
// an edge up to floating rounding stays excluded. Throws if no point falls
// inside the window.
struct WindowStats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    int count = 0;
};

WindowStats time_averaged_fidelity(const std::vector<double>& times, const std::vector<double>& values,
                                   double t1, double t2, double edge_tol = 1e-7);

}  // namespace ising
