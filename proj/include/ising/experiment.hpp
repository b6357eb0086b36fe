#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ising/chain.hpp"
#include "ising/state.hpp"
#include "ising/thermal.hpp"

namespace ising {

enum class BetaMethod { equation_of_state, max_fidelity };
enum class ThermalReference { impurity_included, impurity_excluded };

// Uniform sampling grid t_i = t_start + i*dt, endpoints included.
struct TimeGrid {
    double t_start = 0.0;
    double t_end = 40.0;
    double dt = 0.1;

    int n_points() const;
    double time(int i) const { return t_start + i * dt; }
    std::vector<double> times() const;
};

// One experiment run, deserializable from flat key=value text. Field defaults
// are the documented config defaults; see config_keys() for the full key list.
struct ExperimentConfig {
    ChainSpec spec;  // n_sites, impurity_strength, impurity_site, cut_bonds
    int subsystem_size = 0;  // 0 = n_sites/2
    TimeGrid grid;
    double window_start = 30.0;
    double window_end = 40.0;
    BetaMethod beta_method = BetaMethod::equation_of_state;
    ThermalReference reference = ThermalReference::impurity_included;
    std::uint64_t seed = 1;
    int samples = 500;
    std::string initial = "random";  // "random", decimal label, or bit string
    double bin_width = 0.01;
    double compare_time = 30.0;
    std::vector<int> impurity_sites;  // entropy-trace sweep; empty = {impurity_site}
    bool emit_lambdas = false;
    double energy_density_min = 0.0;  // active only when energy_filter = true
    double energy_density_max = 0.0;
    bool energy_filter = false;
    int threads = 0;  // 0 = hardware concurrency

    void validate() const;  // throws std::invalid_argument naming the key
};

// Keys with their defaults, for documentation and the CLI's key listing.
const std::map<std::string, std::string>& config_defaults();

// Build a config from parsed key=value pairs; unknown keys and malformed
// values throw std::invalid_argument naming the key. Missing keys take their
// defaults (n_sites included: the defaults describe the 50-site chain with a
// delta=1 impurity at site 25 and a 25-site subsystem).
ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv);

// Canonical echo of every effective setting, alphabetical, round-trippable
// through config_from_map. The config hash is FNV-1a over these lines.
std::map<std::string, std::string> normalized_map(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

// Indices of grid points strictly inside (t1, t2); edge comparisons carry
// slack 1e-6*dt so a grid time equal to an edge up to rounding stays out.
std::vector<int> window_indices(const TimeGrid& grid, double t1, double t2);

// Shared per-configuration machinery: evolve an occupation eigenstate of the
// delta=0 uncut chain under the (possibly impure / cut) chain Hamiltonian and
// extract the reduced spectrum of sites 1..n_prime at requested times.
// Immutable after construction; safe to share across threads.
class SubsystemEvolver {
public:
    SubsystemEvolver(const ChainSpec& evolution_spec, int n_prime);

    const ChainSpec& evolution_spec() const { return spec_; }
    const ModeBasis& initial_basis() const { return basis0_; }
    const ModeBasis& evolution_basis() const { return evo_; }
    int n_prime() const { return n_prime_; }

    std::vector<ReducedSpectrum> pattern_spectra(const OccupationPattern& pattern,
                                                 const std::vector<double>& times) const;
    std::vector<ReducedSpectrum> state_spectra(const CorrelationMatrix& gamma0,
                                               const std::vector<double>& times) const;

private:
    ChainSpec spec_;
    int n_prime_;
    ModeBasis basis0_;  // delta=0 uncut basis the occupation labels refer to
    ModeBasis evo_;
    Eigen::MatrixXd q_top_;  // first 2*n_prime rows of evo_.canonical
};

// The initial state for sample `index`: the configured explicit label, or a
// seeded random pattern (rejection-sampled into the energy-density window when
// the filter is on; density = sum of occupied excitation energies / n_sites).
OccupationPattern draw_pattern(const ExperimentConfig& cfg, const ModeBasis& basis0,
                               std::uint64_t index);

// ---- runners ----------------------------------------------------------------

struct EntropyTrace {
    int alpha = 0;
    std::vector<double> times;
    std::vector<double> entropy_bits;
    Eigen::MatrixXd lambdas;  // row per time, column per subsystem mode
};
EntropyTrace run_entropy_trace(const ExperimentConfig& cfg, int alpha);

struct TraceRow {
    double t = 0.0;
    double entropy_bits = 0.0;
    double beta_eos = 0.0;
    double beta_maxf = 0.0;
    double fidelity = 0.0;
};
struct FidelityTrace {
    std::vector<TraceRow> rows;
    WindowStats window;  // over the fidelity column
};
FidelityTrace run_fidelity_trace(const ExperimentConfig& cfg);

struct SpectrumComparison {
    double time = 0.0;
    double beta = 0.0;
    double fidelity = 0.0;
    Eigen::VectorXd exp_neg_omega;   // e^{-omega_k}, modes ascending
    Eigen::VectorXd exp_neg_beta_e;  // e^{-beta E_k}
};
SpectrumComparison run_spectrum_compare(const ExperimentConfig& cfg);

struct SampleStats {
    int index = 0;
    double f_initial = 0.0;  // fidelity of the t=0 state
    double f_mean = 0.0;     // windowed average
    double f_min = 0.0;
    double f_max = 0.0;
};
// One row per sample for the evolution spec as configured.
std::vector<SampleStats> run_ensemble(const ExperimentConfig& cfg, const ChainSpec& evolution_spec);
std::vector<SampleStats> run_scatter(const ExperimentConfig& cfg);

struct HistogramResult {
    std::vector<SampleStats> coupled;  // evolution under the configured spec
    std::vector<SampleStats> cut;      // same states, boundary bond severed
};
HistogramResult run_histogram(const ExperimentConfig& cfg);

struct ProductCheck {
    std::vector<double> times;
    std::vector<double> s_decoupled;  // dynamics with the boundary bond severed
    std::vector<double> s_coupled;    // same initial state, bond restored
    double max_decoupled = 0.0;
    double max_coupled = 0.0;
};
ProductCheck run_product_check(const ExperimentConfig& cfg);

// ---- artifact rendering -----------------------------------------------------

std::string render_entropy_csv(const EntropyTrace& trace, bool emit_lambdas);
std::string render_fidelity_csv(const FidelityTrace& trace);
std::string render_spectrum_csv(const SpectrumComparison& cmp);
std::string render_samples_csv(const std::vector<SampleStats>& stats);
// input_side: histogram of f_initial; otherwise of f_mean. Bins [k*w, (k+1)*w),
// the last bin closed at 1.
std::string render_histogram_csv(const std::vector<SampleStats>& stats, bool input_side,
                                 double bin_width);
std::string render_product_csv(const ProductCheck& check);

// Run a function over indices [0, n) on a small thread pool; deterministic
// because each index's work depends only on the index. Rethrows the first
// worker exception.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace ising
