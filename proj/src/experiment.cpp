#include "ising/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ising/errors.hpp"
#include "ising/io.hpp"
#include "ising/rng.hpp"

namespace ising {

namespace {

// shortest round-trip decimal form, for config echoes and hashing
std::string format_shortest(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(text);
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        if (a == std::string::npos) {
            item.clear();
        } else {
            const auto b = item.find_last_not_of(" \t");
            item = item.substr(a, b - a + 1);
        }
        out.push_back(item);
    }
    return out;
}

long long parse_integer(const std::string& key, const std::string& value) {
    size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": not an integer: '" + value + "'");
    }
    if (used != value.size()) throw std::invalid_argument(key + ": not an integer: '" + value + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& value) {
    const long long v = parse_integer(key, value);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw std::invalid_argument(key + ": out of range: '" + value + "'");
    return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": not an unsigned integer: '" + value + "'");
    }
    if (used != value.size() || value.find('-') != std::string::npos)
        throw std::invalid_argument(key + ": not an unsigned integer: '" + value + "'");
    return v;
}

double parse_double(const std::string& key, const std::string& value) {
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": not a number: '" + value + "'");
    }
    if (used != value.size()) throw std::invalid_argument(key + ": not a number: '" + value + "'");
    if (!std::isfinite(v)) throw std::invalid_argument(key + ": must be finite: '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw std::invalid_argument(key + ": expected true or false, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    if (value.empty()) return out;
    for (const auto& item : split_list(value)) {
        if (item.empty()) throw std::invalid_argument(key + ": empty list entry");
        out.push_back(parse_int(key, item));
    }
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

// uncut uniform-chain coupling of any size (down to one site), for building
// half-chain product states without going through ChainSpec validation
CouplingMatrix uniform_coupling(int m) {
    CouplingMatrix c;
    c.n_sites = m;
    c.a = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    for (int n = 1; n <= m; ++n) {
        c.a(2 * n - 2, 2 * n - 1) = 1.0;
        c.a(2 * n - 1, 2 * n - 2) = -1.0;
        if (n < m) {
            c.a(2 * n - 1, 2 * n) = 1.0;
            c.a(2 * n, 2 * n - 1) = -1.0;
        }
    }
    return c;
}

ChainSpec uniform_spec(int n_sites) {
    ChainSpec s;
    s.n_sites = n_sites;
    s.delta = 0.0;
    s.impurity_site = 1;
    return s;
}

struct PointFit {
    double beta_eos = 0.0;
    double beta_maxf = 0.0;
    double fidelity = 0.0;
};

PointFit fit_point(const ReducedSpectrum& spec, const ThermalModel& model, BetaMethod method) {
    PointFit out;
    out.beta_eos = fit_beta_eos(model, spec.entropy_bits).beta;
    out.beta_maxf = fit_beta_max_fidelity(spec.omegas, model).beta;
    const double beta = method == BetaMethod::equation_of_state ? out.beta_eos : out.beta_maxf;
    out.fidelity = classical_fidelity(spec.omegas, model, beta);
    return out;
}

}  // namespace

int TimeGrid::n_points() const {
    if (!std::isfinite(t_start) || !std::isfinite(t_end) || !std::isfinite(dt) || !(dt > 0.0) || t_end < t_start)
        throw std::invalid_argument("time grid requires finite t_start <= t_end and dt > 0");
    const long long n = std::llround((t_end - t_start) / dt) + 1;
    if (n < 1 || n > 10'000'000) throw std::invalid_argument("time grid has an unreasonable point count");
    return static_cast<int>(n);
}

std::vector<double> TimeGrid::times() const {
    std::vector<double> out(n_points());
    for (size_t i = 0; i < out.size(); ++i) out[i] = time(static_cast<int>(i));
    return out;
}

void ExperimentConfig::validate() const {
    if (spec.n_sites < 2) throw std::invalid_argument("n_sites must be >= 2");
    if (spec.delta < 0.0) throw std::invalid_argument("impurity_strength must be >= 0");
    if (spec.impurity_site < 1 || spec.impurity_site > spec.n_sites)
        throw std::invalid_argument("impurity_site must be in [1, n_sites]");
    for (int b : spec.cut_bonds)
        if (b < 1 || b >= spec.n_sites) throw std::invalid_argument("cut_bonds entries must be in [1, n_sites-1]");
    spec.validate();
    if (subsystem_size < 1 || subsystem_size >= spec.n_sites)
        throw std::invalid_argument("subsystem_size must be in [1, n_sites-1]");
    grid.n_points();  // throws naming the grid keys' constraint
    if (!(window_start < window_end)) throw std::invalid_argument("window_start must be < window_end");
    if (window_start < grid.t_start - 1e-12 || window_end > grid.t_end + 1e-12)
        throw std::invalid_argument("window_start/window_end must lie within [t_start, t_end]");
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    if (!(bin_width > 0.0) || bin_width > 1.0) throw std::invalid_argument("bin_width must be in (0, 1]");
    if (!std::isfinite(compare_time)) throw std::invalid_argument("compare_time must be finite");
    for (int a : impurity_sites)
        if (a < 1 || a > spec.n_sites) throw std::invalid_argument("impurity_sites entries must be in [1, n_sites]");
    if (energy_filter && !(energy_density_min <= energy_density_max))
        throw std::invalid_argument("energy_density_min must be <= energy_density_max");
    if (threads < 0) throw std::invalid_argument("threads must be >= 0");
    if (initial.empty()) throw std::invalid_argument("initial must be 'random' or an occupation label");
}

const std::map<std::string, std::string>& config_defaults() {
    static const std::map<std::string, std::string> defaults = {
        {"n_sites", "50"},
        {"impurity_strength", "1"},
        {"impurity_site", "25"},
        {"cut_bonds", ""},
        {"subsystem_size", "25"},
        {"t_start", "0"},
        {"t_end", "40"},
        {"dt", "0.1"},
        {"window_start", "30"},
        {"window_end", "40"},
        {"beta_method", "equation_of_state"},
        {"thermal_reference", "impurity_included"},
        {"seed", "1"},
        {"samples", "500"},
        {"initial", "random"},
        {"bin_width", "0.01"},
        {"compare_time", "30"},
        {"impurity_sites", ""},
        {"emit_lambdas", "false"},
        {"energy_filter", "false"},
        {"energy_density_min", "0"},
        {"energy_density_max", "0"},
        {"threads", "0"},
    };
    return defaults;
}

ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv) {
    const auto& defaults = config_defaults();
    for (const auto& [key, value] : kv) {
        (void)value;
        if (!defaults.count(key)) throw std::invalid_argument("unknown config key: " + key);
    }
    auto lookup = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    auto text = [&](const char* key) { return lookup(key).value_or(defaults.at(key)); };

    ExperimentConfig cfg;
    cfg.spec.n_sites = parse_int("n_sites", text("n_sites"));
    cfg.spec.delta = parse_double("impurity_strength", text("impurity_strength"));
    if (auto v = lookup("impurity_site")) cfg.spec.impurity_site = parse_int("impurity_site", *v);
    else cfg.spec.impurity_site = (cfg.spec.n_sites + 1) / 2;
    for (int b : parse_int_list("cut_bonds", text("cut_bonds"))) cfg.spec.cut_bonds.insert(b);
    if (auto v = lookup("subsystem_size")) cfg.subsystem_size = parse_int("subsystem_size", *v);
    else cfg.subsystem_size = cfg.spec.n_sites / 2;
    cfg.grid.t_start = parse_double("t_start", text("t_start"));
    cfg.grid.t_end = parse_double("t_end", text("t_end"));
    cfg.grid.dt = parse_double("dt", text("dt"));
    cfg.window_start = parse_double("window_start", text("window_start"));
    cfg.window_end = parse_double("window_end", text("window_end"));
    const std::string method = text("beta_method");
    if (method == "equation_of_state") cfg.beta_method = BetaMethod::equation_of_state;
    else if (method == "max_fidelity") cfg.beta_method = BetaMethod::max_fidelity;
    else throw std::invalid_argument("beta_method: expected equation_of_state or max_fidelity, got '" + method + "'");
    const std::string ref = text("thermal_reference");
    if (ref == "impurity_included") cfg.reference = ThermalReference::impurity_included;
    else if (ref == "impurity_excluded") cfg.reference = ThermalReference::impurity_excluded;
    else
        throw std::invalid_argument("thermal_reference: expected impurity_included or impurity_excluded, got '" +
                                    ref + "'");
    cfg.seed = parse_u64("seed", text("seed"));
    cfg.samples = parse_int("samples", text("samples"));
    cfg.initial = text("initial");
    cfg.bin_width = parse_double("bin_width", text("bin_width"));
    cfg.compare_time = parse_double("compare_time", text("compare_time"));
    cfg.impurity_sites = parse_int_list("impurity_sites", text("impurity_sites"));
    cfg.emit_lambdas = parse_bool("emit_lambdas", text("emit_lambdas"));
    cfg.energy_filter = parse_bool("energy_filter", text("energy_filter"));
    cfg.energy_density_min = parse_double("energy_density_min", text("energy_density_min"));
    cfg.energy_density_max = parse_double("energy_density_max", text("energy_density_max"));
    cfg.threads = parse_int("threads", text("threads"));
    cfg.validate();
    return cfg;
}

std::map<std::string, std::string> normalized_map(const ExperimentConfig& cfg) {
    std::map<std::string, std::string> out;
    out["n_sites"] = std::to_string(cfg.spec.n_sites);
    out["impurity_strength"] = format_shortest(cfg.spec.delta);
    out["impurity_site"] = std::to_string(cfg.spec.impurity_site);
    out["cut_bonds"] = join_ints(std::vector<int>(cfg.spec.cut_bonds.begin(), cfg.spec.cut_bonds.end()));
    out["subsystem_size"] = std::to_string(cfg.subsystem_size);
    out["t_start"] = format_shortest(cfg.grid.t_start);
    out["t_end"] = format_shortest(cfg.grid.t_end);
    out["dt"] = format_shortest(cfg.grid.dt);
    out["window_start"] = format_shortest(cfg.window_start);
    out["window_end"] = format_shortest(cfg.window_end);
    out["beta_method"] =
        cfg.beta_method == BetaMethod::equation_of_state ? "equation_of_state" : "max_fidelity";
    out["thermal_reference"] =
        cfg.reference == ThermalReference::impurity_included ? "impurity_included" : "impurity_excluded";
    out["seed"] = std::to_string(cfg.seed);
    out["samples"] = std::to_string(cfg.samples);
    out["initial"] = cfg.initial;
    out["bin_width"] = format_shortest(cfg.bin_width);
    out["compare_time"] = format_shortest(cfg.compare_time);
    out["impurity_sites"] = join_ints(cfg.impurity_sites);
    out["emit_lambdas"] = cfg.emit_lambdas ? "true" : "false";
    out["energy_filter"] = cfg.energy_filter ? "true" : "false";
    out["energy_density_min"] = format_shortest(cfg.energy_density_min);
    out["energy_density_max"] = format_shortest(cfg.energy_density_max);
    out["threads"] = std::to_string(cfg.threads);
    return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::string lines;
    for (const auto& [key, value] : normalized_map(cfg)) lines += key + "=" + value + "\n";
    return fnv1a_hex(lines);
}

std::vector<int> window_indices(const TimeGrid& grid, double t1, double t2) {
    if (!(t1 < t2)) throw std::invalid_argument("window must satisfy t1 < t2");
    const double tol = 1e-6 * grid.dt;
    std::vector<int> out;
    const int n = grid.n_points();
    for (int i = 0; i < n; ++i) {
        const double t = grid.time(i);
        if (t > t1 + tol && t < t2 - tol) out.push_back(i);
    }
    return out;
}

SubsystemEvolver::SubsystemEvolver(const ChainSpec& evolution_spec, int n_prime)
    : spec_(evolution_spec), n_prime_(n_prime) {
    spec_.validate();
    if (n_prime_ < 1 || n_prime_ > spec_.n_sites)
        throw std::invalid_argument("subsystem_size must be in [1, n_sites]");
    basis0_ = diagonalize(build_coupling(uniform_spec(spec_.n_sites)));
    evo_ = diagonalize(build_coupling(spec_));
    q_top_ = evo_.canonical.topRows(2 * n_prime_);
}

std::vector<ReducedSpectrum> SubsystemEvolver::pattern_spectra(const OccupationPattern& pattern,
                                                               const std::vector<double>& times) const {
    return state_spectra(initial_gamma(basis0_, pattern), times);
}

std::vector<ReducedSpectrum> SubsystemEvolver::state_spectra(const CorrelationMatrix& gamma0,
                                                             const std::vector<double>& times) const {
    const int dim = 2 * spec_.n_sites;
    if (gamma0.g.rows() != dim || gamma0.g.cols() != dim)
        throw std::invalid_argument("initial state does not match the chain size");
    if (times.empty()) throw std::invalid_argument("no sample times requested");

    // work in the eigenmode frame: G(t) = Qe R(t) [Qe^T G0 Qe] R(t)^T Qe^T
    const Eigen::MatrixXd m0 = evo_.canonical.transpose() * gamma0.g * evo_.canonical;
    const int n_modes = spec_.n_sites;

    std::vector<ReducedSpectrum> out;
    out.reserve(times.size());
    Eigen::MatrixXd m(dim, dim);
    for (double t : times) {
        if (!std::isfinite(t)) throw std::invalid_argument("sample times must be finite");
        m = m0;
        // left-multiply by the block rotation: rows in canonical pairs
        for (int k = 0; k < n_modes; ++k) {
            const double th = 2.0 * evo_.eigenvalues(k) * t;
            if (th == 0.0) continue;
            const double c = std::cos(th), s = std::sin(th);
            const Eigen::RowVectorXd r0 = m.row(2 * k);
            m.row(2 * k) = c * r0 + s * m.row(2 * k + 1);
            m.row(2 * k + 1) = -s * r0 + c * m.row(2 * k + 1);
        }
        // right-multiply by its transpose: same combination on columns
        for (int k = 0; k < n_modes; ++k) {
            const double th = 2.0 * evo_.eigenvalues(k) * t;
            if (th == 0.0) continue;
            const double c = std::cos(th), s = std::sin(th);
            const Eigen::VectorXd c0 = m.col(2 * k);
            m.col(2 * k) = c * c0 + s * m.col(2 * k + 1);
            m.col(2 * k + 1) = -s * c0 + c * m.col(2 * k + 1);
        }
        CorrelationMatrix sub;
        sub.n_pairs = n_prime_;
        sub.g = q_top_ * m * q_top_.transpose();
        sub.g = 0.5 * (sub.g - sub.g.transpose()).eval();
        out.push_back(mode_spectrum(sub));
    }
    return out;
}

OccupationPattern draw_pattern(const ExperimentConfig& cfg, const ModeBasis& basis0, std::uint64_t index) {
    const int n = basis0.n_sites;
    if (cfg.initial != "random") {
        try {
            return parse_label(cfg.initial, n);
        } catch (const std::exception& e) {
            throw std::invalid_argument(std::string("initial: ") + e.what());
        }
    }
    std::mt19937_64 eng(derive_seed(cfg.seed, index));
    const Eigen::VectorXd exc = basis0.excitation_energies();
    for (int attempt = 0; attempt < 10000; ++attempt) {
        OccupationPattern p;
        p.bits.resize(n);
        for (int k = 0; k < n; ++k) p.bits[k] = static_cast<std::uint8_t>(eng() >> 63);
        if (!cfg.energy_filter) return p;
        double density = 0.0;
        for (int k = 0; k < n; ++k)
            if (p.bits[k]) density += exc(k);
        density /= n;
        if (density >= cfg.energy_density_min - 1e-12 && density <= cfg.energy_density_max + 1e-12) return p;
    }
    throw std::invalid_argument("energy_density_min/energy_density_max window rejected 10000 draws");
}

EntropyTrace run_entropy_trace(const ExperimentConfig& cfg, int alpha) {
    cfg.validate();
    ChainSpec spec = cfg.spec;
    spec.impurity_site = alpha;
    spec.validate();
    SubsystemEvolver evolver(spec, cfg.subsystem_size);
    const OccupationPattern pattern = draw_pattern(cfg, evolver.initial_basis(), 0);
    EntropyTrace trace;
    trace.alpha = alpha;
    trace.times = cfg.grid.times();
    const auto spectra = evolver.state_spectra(initial_gamma(evolver.initial_basis(), pattern), trace.times);
    trace.entropy_bits.resize(spectra.size());
    trace.lambdas.resize(static_cast<Eigen::Index>(spectra.size()), cfg.subsystem_size);
    for (size_t i = 0; i < spectra.size(); ++i) {
        trace.entropy_bits[i] = spectra[i].entropy_bits;
        trace.lambdas.row(static_cast<Eigen::Index>(i)) = spectra[i].lambdas.transpose();
    }
    return trace;
}

FidelityTrace run_fidelity_trace(const ExperimentConfig& cfg) {
    cfg.validate();
    SubsystemEvolver evolver(cfg.spec, cfg.subsystem_size);
    const ThermalModel model = subsystem_thermal_model(
        cfg.spec, cfg.subsystem_size, cfg.reference == ThermalReference::impurity_included);
    const OccupationPattern pattern = draw_pattern(cfg, evolver.initial_basis(), 0);
    const std::vector<double> times = cfg.grid.times();
    const auto spectra = evolver.pattern_spectra(pattern, times);

    FidelityTrace trace;
    trace.rows.resize(times.size());
    std::vector<double> fvals(times.size());
    for (size_t i = 0; i < times.size(); ++i) {
        const PointFit fit = fit_point(spectra[i], model, cfg.beta_method);
        trace.rows[i] = {times[i], spectra[i].entropy_bits, fit.beta_eos, fit.beta_maxf, fit.fidelity};
        fvals[i] = fit.fidelity;
    }
    trace.window = time_averaged_fidelity(times, fvals, cfg.window_start, cfg.window_end);
    return trace;
}

SpectrumComparison run_spectrum_compare(const ExperimentConfig& cfg) {
    cfg.validate();
    SubsystemEvolver evolver(cfg.spec, cfg.subsystem_size);
    const ThermalModel model = subsystem_thermal_model(
        cfg.spec, cfg.subsystem_size, cfg.reference == ThermalReference::impurity_included);
    const OccupationPattern pattern = draw_pattern(cfg, evolver.initial_basis(), 0);
    const auto spectra = evolver.pattern_spectra(pattern, {cfg.compare_time});
    const ReducedSpectrum& spec = spectra.front();
    const PointFit fit = fit_point(spec, model, cfg.beta_method);
    const double beta = cfg.beta_method == BetaMethod::equation_of_state ? fit.beta_eos : fit.beta_maxf;

    SpectrumComparison cmp;
    cmp.time = cfg.compare_time;
    cmp.beta = beta;
    cmp.fidelity = fit.fidelity;
    cmp.exp_neg_omega.resize(spec.omegas.size());
    cmp.exp_neg_beta_e.resize(model.energies.size());
    for (int k = 0; k < spec.omegas.size(); ++k)
        cmp.exp_neg_omega(k) = std::isinf(spec.omegas(k)) ? 0.0 : std::exp(-spec.omegas(k));
    for (int k = 0; k < model.energies.size(); ++k) {
        const double be = std::isinf(beta) ? (model.energies(k) > 0.0
                                                  ? std::numeric_limits<double>::infinity()
                                                  : 0.0)
                                           : beta * model.energies(k);
        cmp.exp_neg_beta_e(k) = std::exp(-be);
    }
    return cmp;
}

std::vector<SampleStats> run_ensemble(const ExperimentConfig& cfg, const ChainSpec& evolution_spec) {
    cfg.validate();
    SubsystemEvolver evolver(evolution_spec, cfg.subsystem_size);
    const ThermalModel model = subsystem_thermal_model(
        evolution_spec, cfg.subsystem_size, cfg.reference == ThermalReference::impurity_included);

    // the initial point plus the grid times strictly inside the window
    const std::vector<int> widx = window_indices(cfg.grid, cfg.window_start, cfg.window_end);
    if (widx.empty()) throw std::invalid_argument("no grid samples strictly inside the fidelity window");
    std::vector<double> times;
    times.push_back(cfg.grid.time(0));
    for (int i : widx) times.push_back(cfg.grid.time(i));

    std::vector<SampleStats> stats(cfg.samples);
    parallel_for(cfg.samples, cfg.threads, [&](int s) {
        const OccupationPattern pattern = draw_pattern(cfg, evolver.initial_basis(), static_cast<std::uint64_t>(s));
        const auto spectra = evolver.pattern_spectra(pattern, times);
        SampleStats row;
        row.index = s;
        row.f_initial = fit_point(spectra[0], model, cfg.beta_method).fidelity;
        double sum = 0.0;
        for (size_t i = 1; i < spectra.size(); ++i) {
            const double f = fit_point(spectra[i], model, cfg.beta_method).fidelity;
            if (i == 1) {
                row.f_min = row.f_max = f;
            } else {
                row.f_min = std::min(row.f_min, f);
                row.f_max = std::max(row.f_max, f);
            }
            sum += f;
        }
        row.f_mean = sum / static_cast<double>(spectra.size() - 1);
        stats[s] = row;
    });
    return stats;
}

std::vector<SampleStats> run_scatter(const ExperimentConfig& cfg) { return run_ensemble(cfg, cfg.spec); }

HistogramResult run_histogram(const ExperimentConfig& cfg) {
    cfg.validate();
    HistogramResult out;
    out.coupled = run_ensemble(cfg, cfg.spec);
    out.cut = run_ensemble(cfg, cut_bond(cfg.spec, cfg.subsystem_size));
    return out;
}

ProductCheck run_product_check(const ExperimentConfig& cfg) {
    cfg.validate();
    const int n = cfg.spec.n_sites;
    const int np = cfg.subsystem_size;
    const ChainSpec cut_spec = cut_bond(cfg.spec, np);

    // product initial state: an occupation eigenstate on each side of the cut,
    // assembled as a direct sum so there is exactly zero cross-cut correlation
    const ModeBasis full0 = diagonalize(build_coupling(uniform_spec(n)));
    const OccupationPattern pattern = draw_pattern(cfg, full0, 0);
    const ModeBasis left0 = diagonalize(uniform_coupling(np));
    const ModeBasis right0 = diagonalize(uniform_coupling(n - np));
    OccupationPattern pl, pr;
    pl.bits.assign(pattern.bits.begin(), pattern.bits.begin() + np);
    pr.bits.assign(pattern.bits.begin() + np, pattern.bits.end());
    const CorrelationMatrix gl = initial_gamma(left0, pl);
    const CorrelationMatrix gr = initial_gamma(right0, pr);
    CorrelationMatrix g0;
    g0.n_pairs = n;
    g0.g = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    g0.g.topLeftCorner(2 * np, 2 * np) = gl.g;
    g0.g.bottomRightCorner(2 * (n - np), 2 * (n - np)) = gr.g;

    SubsystemEvolver cut_evolver(cut_spec, np);
    SubsystemEvolver coupled_evolver(cfg.spec, np);

    ProductCheck check;
    check.times = cfg.grid.times();
    const auto dec = cut_evolver.state_spectra(g0, check.times);
    const auto coup = coupled_evolver.state_spectra(g0, check.times);
    check.s_decoupled.resize(dec.size());
    check.s_coupled.resize(coup.size());
    for (size_t i = 0; i < dec.size(); ++i) {
        check.s_decoupled[i] = dec[i].entropy_bits;
        check.s_coupled[i] = coup[i].entropy_bits;
        check.max_decoupled = std::max(check.max_decoupled, std::abs(dec[i].entropy_bits));
        check.max_coupled = std::max(check.max_coupled, std::abs(coup[i].entropy_bits));
    }
    return check;
}

std::string render_entropy_csv(const EntropyTrace& trace, bool emit_lambdas) {
    std::string out = "t";
    if (emit_lambdas)
        for (int k = 1; k <= trace.lambdas.cols(); ++k) out += ",lambda_" + std::to_string(k);
    out += ",S\n";
    for (size_t i = 0; i < trace.times.size(); ++i) {
        out += format_g17(trace.times[i]);
        if (emit_lambdas)
            for (int k = 0; k < trace.lambdas.cols(); ++k)
                out += "," + format_g17(trace.lambdas(static_cast<Eigen::Index>(i), k));
        out += "," + format_g17(trace.entropy_bits[i]) + "\n";
    }
    return out;
}

std::string render_fidelity_csv(const FidelityTrace& trace) {
    std::string out = "t,S,beta_eos,beta_max_fidelity,F\n";
    for (const TraceRow& row : trace.rows) {
        out += format_g17(row.t) + "," + format_g17(row.entropy_bits) + "," + format_g17(row.beta_eos) + "," +
               format_g17(row.beta_maxf) + "," + format_g17(row.fidelity) + "\n";
    }
    return out;
}

std::string render_spectrum_csv(const SpectrumComparison& cmp) {
    std::string out = "k,exp_neg_omega,exp_neg_beta_E\n";
    for (int k = 0; k < cmp.exp_neg_omega.size(); ++k)
        out += std::to_string(k + 1) + "," + format_g17(cmp.exp_neg_omega(k)) + "," +
               format_g17(cmp.exp_neg_beta_e(k)) + "\n";
    return out;
}

std::string render_samples_csv(const std::vector<SampleStats>& stats) {
    std::string out = "sample,F_initial,F_mean,F_min,F_max\n";
    for (const SampleStats& row : stats)
        out += std::to_string(row.index) + "," + format_g17(row.f_initial) + "," + format_g17(row.f_mean) + "," +
               format_g17(row.f_min) + "," + format_g17(row.f_max) + "\n";
    return out;
}

std::string render_histogram_csv(const std::vector<SampleStats>& stats, bool input_side, double bin_width) {
    if (!(bin_width > 0.0) || bin_width > 1.0) throw std::invalid_argument("bin_width must be in (0, 1]");
    const int n_bins = static_cast<int>(std::ceil(1.0 / bin_width - 1e-9));
    std::vector<long long> counts(n_bins, 0);
    for (const SampleStats& row : stats) {
        const double f = std::clamp(input_side ? row.f_initial : row.f_mean, 0.0, 1.0);
        const int idx = std::min(n_bins - 1, static_cast<int>(std::floor(f / bin_width)));
        ++counts[idx];
    }
    std::string out = "bin_lo,bin_hi,count\n";
    for (int k = 0; k < n_bins; ++k) {
        const double lo = k * bin_width;
        const double hi = std::min(1.0, (k + 1) * bin_width);
        out += format_g17(lo) + "," + format_g17(hi) + "," + std::to_string(counts[k]) + "\n";
    }
    return out;
}

std::string render_product_csv(const ProductCheck& check) {
    std::string out = "t,S_decoupled,S_coupled\n";
    for (size_t i = 0; i < check.times.size(); ++i)
        out += format_g17(check.times[i]) + "," + format_g17(check.s_decoupled[i]) + "," +
               format_g17(check.s_coupled[i]) + "\n";
    return out;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min(workers, n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace ising
