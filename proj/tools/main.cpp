#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ising/dense.hpp"
#include "ising/errors.hpp"
#include "ising/experiment.hpp"
#include "ising/io.hpp"
#include "ising/rng.hpp"
#include "ising/version.hpp"

namespace {

using namespace ising;

struct RunOutput {
    std::vector<std::string> artifacts;                      // file names, write order
    std::vector<std::pair<std::string, std::string>> summary;  // summary.* lines, insertion order
};

std::string default_out_dir() {
    if (const char* env = std::getenv("ISING_SIM_OUT")) return env;
    return "./out";
}

void write_artifact(const std::filesystem::path& dir, const std::string& name, const std::string& content,
                    RunOutput& out) {
    write_text_file((dir / name).string(), content);
    out.artifacts.push_back(name);
}

void write_manifest(const std::filesystem::path& dir, const std::string& subcommand,
                    const std::map<std::string, std::string>& config_echo, const std::string& hash,
                    const std::string& seed, double wall_s, const RunOutput& out) {
    std::string text;
    text += "subcommand=" + subcommand + "\n";
    text += std::string("code_version=") + kVersion + "\n";
    text += "config_hash=" + hash + "\n";
    text += "seed=" + seed + "\n";
    text += "wall_time_s=" + format_g17(wall_s) + "\n";
    for (const auto& name : out.artifacts) text += "artifact=" + name + "\n";
    for (const auto& [key, value] : out.summary) text += "summary." + key + "=" + value + "\n";
    for (const auto& [key, value] : config_echo) text += "config." + key + "=" + value + "\n";
    write_text_file((dir / "manifest.txt").string(), text);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

RunOutput do_entropy_trace(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    RunOutput out;
    std::vector<int> alphas = cfg.impurity_sites;
    if (alphas.empty()) alphas.push_back(cfg.spec.impurity_site);
    for (int alpha : alphas) {
        const EntropyTrace trace = run_entropy_trace(cfg, alpha);
        write_artifact(dir, "entropy_alpha" + std::to_string(alpha) + ".csv",
                       render_entropy_csv(trace, cfg.emit_lambdas), out);
        out.summary.emplace_back("s_final_alpha" + std::to_string(alpha),
                                 format_g17(trace.entropy_bits.back()));
    }
    out.summary.emplace_back("n_points", std::to_string(cfg.grid.n_points()));
    return out;
}

RunOutput do_fidelity_trace(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    RunOutput out;
    const FidelityTrace trace = run_fidelity_trace(cfg);
    write_artifact(dir, "fidelity_trace.csv", render_fidelity_csv(trace), out);
    out.summary.emplace_back("f_initial", format_g17(trace.rows.front().fidelity));
    out.summary.emplace_back("f_window_mean", format_g17(trace.window.mean));
    out.summary.emplace_back("f_window_min", format_g17(trace.window.min));
    out.summary.emplace_back("f_window_max", format_g17(trace.window.max));
    return out;
}

RunOutput do_spectrum_compare(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    RunOutput out;
    const SpectrumComparison cmp = run_spectrum_compare(cfg);
    write_artifact(dir, "spectrum_compare.csv", render_spectrum_csv(cmp), out);
    out.summary.emplace_back("time", format_g17(cmp.time));
    out.summary.emplace_back("beta", format_g17(cmp.beta));
    out.summary.emplace_back("fidelity", format_g17(cmp.fidelity));
    return out;
}

RunOutput do_scatter(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    RunOutput out;
    const auto stats = run_scatter(cfg);
    write_artifact(dir, "scatter_samples.csv", render_samples_csv(stats), out);
    // x = y reference line for the no-thermalization diagonal
    std::string diag = "F_initial,F_mean\n";
    for (int k = 0; k <= 100; ++k) {
        const double f = 0.01 * k;
        diag += format_g17(f) + "," + format_g17(f) + "\n";
    }
    write_artifact(dir, "scatter_diagonal.csv", diag, out);

    int improved = 0;
    double sum_f0 = 0.0, sum_fm = 0.0;
    for (const auto& row : stats) {
        if (row.f_mean >= row.f_initial) ++improved;
        sum_f0 += row.f_initial;
        sum_fm += row.f_mean;
    }
    const double m = static_cast<double>(stats.size());
    const double p = improved / m;
    const double z = 1.959963984540054;  // two-sided 95%
    const double denom = 1.0 + z * z / m;
    const double center = (p + z * z / (2.0 * m)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / m + z * z / (4.0 * m * m)) / denom;
    out.summary.emplace_back("fraction_improved", format_g17(p));
    out.summary.emplace_back("fraction_improved_ci95_lo", format_g17(std::max(0.0, center - half)));
    out.summary.emplace_back("fraction_improved_ci95_hi", format_g17(std::min(1.0, center + half)));
    out.summary.emplace_back("mean_f_initial", format_g17(sum_f0 / m));
    out.summary.emplace_back("mean_f_mean", format_g17(sum_fm / m));
    return out;
}

RunOutput do_histogram(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    RunOutput out;
    const HistogramResult result = run_histogram(cfg);
    write_artifact(dir, "samples_coupled.csv", render_samples_csv(result.coupled), out);
    write_artifact(dir, "samples_cut.csv", render_samples_csv(result.cut), out);
    write_artifact(dir, "histogram_f0_coupled.csv", render_histogram_csv(result.coupled, true, cfg.bin_width), out);
    write_artifact(dir, "histogram_f0_cut.csv", render_histogram_csv(result.cut, true, cfg.bin_width), out);
    write_artifact(dir, "histogram_fmean_coupled.csv", render_histogram_csv(result.coupled, false, cfg.bin_width),
                   out);
    write_artifact(dir, "histogram_fmean_cut.csv", render_histogram_csv(result.cut, false, cfg.bin_width), out);

    auto column = [](const std::vector<SampleStats>& stats, bool mean_side) {
        std::vector<double> v;
        v.reserve(stats.size());
        for (const auto& row : stats) v.push_back(mean_side ? row.f_mean : row.f_initial);
        return v;
    };
    auto improvement = [](const std::vector<SampleStats>& stats) {
        double s = 0.0;
        for (const auto& row : stats) s += row.f_mean - row.f_initial;
        return s / static_cast<double>(stats.size());
    };
    out.summary.emplace_back("median_f_mean_coupled", format_g17(median(column(result.coupled, true))));
    out.summary.emplace_back("median_f_mean_cut", format_g17(median(column(result.cut, true))));
    out.summary.emplace_back("mean_improvement_coupled", format_g17(improvement(result.coupled)));
    out.summary.emplace_back("mean_improvement_cut", format_g17(improvement(result.cut)));
    return out;
}

RunOutput do_product_check(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    RunOutput out;
    const ProductCheck check = run_product_check(cfg);
    write_artifact(dir, "product_check.csv", render_product_csv(check), out);
    out.summary.emplace_back("max_decoupled", format_g17(check.max_decoupled));
    out.summary.emplace_back("max_coupled", format_g17(check.max_coupled));
    if (check.max_decoupled > 1e-10)
        throw numerical_error("decoupled dynamics produced cross-cut entropy above 1e-10");
    return out;
}

// Random dense-vs-Gaussian entropy comparisons over small chains.
RunOutput do_oracle_check(int max_n, int cases, std::uint64_t seed, const std::filesystem::path& dir) {
    if (max_n < 2 || max_n > 10) throw std::invalid_argument("max-n must be in [2, 10]");
    if (cases < 1) throw std::invalid_argument("cases must be >= 1");
    RunOutput out;
    std::string csv = "case,n,delta,alpha,cut,label,t,n_prime,s_gaussian,s_dense,abs_dev\n";
    const double t_choices[] = {0.0, 0.5, 2.0, 10.0};
    double max_dev = 0.0;
    int case_index = 0;
    for (int n = 2; n <= max_n; ++n) {
        for (int c = 0; c < cases; ++c, ++case_index) {
            std::mt19937_64 eng(derive_seed(seed, static_cast<std::uint64_t>(case_index)));
            auto u01 = [&]() { return (eng() >> 11) * 0x1.0p-53; };
            ChainSpec spec;
            spec.n_sites = n;
            spec.delta = 2.0 * u01();
            spec.impurity_site = 1 + static_cast<int>(eng() % static_cast<std::uint64_t>(n));
            int cut = 0;
            if (n > 2 && u01() < 0.25) {
                cut = 1 + static_cast<int>(eng() % static_cast<std::uint64_t>(n - 1));
                spec.cut_bonds.insert(cut);
            }
            OccupationPattern pattern;
            pattern.bits.resize(n);
            for (int k = 0; k < n; ++k) pattern.bits[k] = static_cast<std::uint8_t>(eng() >> 63);
            const double t = t_choices[eng() % 4];
            const int n_prime = 1 + static_cast<int>(eng() % static_cast<std::uint64_t>(n - 1));

            SubsystemEvolver evolver(spec, n_prime);
            const double s_gauss = evolver.pattern_spectra(pattern, {t})[0].entropy_bits;

            ChainSpec basis_spec;
            basis_spec.n_sites = n;
            Eigen::VectorXcd psi = dense_quasiparticle_state(basis_spec, evolver.initial_basis(), pattern);
            psi = dense_evolve(spec, psi, t);
            std::vector<int> sites(n_prime);
            for (int s = 0; s < n_prime; ++s) sites[s] = s + 1;
            const double s_dense = dense_entropy(dense_reduced_density(psi, n, sites));

            const double dev = std::abs(s_gauss - s_dense);
            max_dev = std::max(max_dev, dev);
            csv += std::to_string(case_index) + "," + std::to_string(n) + "," + format_g17(spec.delta) + "," +
                   std::to_string(spec.impurity_site) + "," + std::to_string(cut) + "," +
                   std::to_string(pattern.label()) + "," + format_g17(t) + "," + std::to_string(n_prime) + "," +
                   format_g17(s_gauss) + "," + format_g17(s_dense) + "," + format_g17(dev) + "\n";
        }
    }
    write_artifact(dir, "oracle_check.csv", csv, out);
    out.summary.emplace_back("cases", std::to_string(case_index));
    out.summary.emplace_back("max_abs_dev", format_g17(max_dev));
    std::cout << "oracle-check: " << case_index << " cases, max |S_gaussian - S_dense| = " << format_g17(max_dev)
              << "\n";
    if (max_dev > 1e-8) throw numerical_error("Gaussian and dense entropies disagree beyond 1e-8");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Free-fermion Ising chain simulator: exact Gaussian-state dynamics, "
                 "subsystem spectra, and effective-temperature analysis"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = default_out_dir();
    std::vector<std::string> overrides;
    std::uint64_t seed_override = 0;
    bool seed_given = false;

    auto* cmd_entropy = app.add_subcommand("entropy-trace", "entanglement entropy of the leading block vs time");
    auto* cmd_fidelity = app.add_subcommand("fidelity-trace", "entropy, fitted beta and fidelity vs time");
    auto* cmd_spectrum = app.add_subcommand("spectrum-compare", "reduced spectrum vs thermal reference at one time");
    auto* cmd_scatter = app.add_subcommand("scatter", "initial vs time-averaged fidelity over random states");
    auto* cmd_histogram = app.add_subcommand("histogram", "fidelity histograms, coupled and boundary-cut variants");
    auto* cmd_product = app.add_subcommand("product-check", "cross-cut entropy under decoupled vs coupled dynamics");
    auto* cmd_oracle = app.add_subcommand("oracle-check", "dense spin-space cross-validation on small chains");

    for (CLI::App* sub : {cmd_entropy, cmd_fidelity, cmd_spectrum, cmd_scatter, cmd_histogram, cmd_product}) {
        sub->add_option("-c,--config", config_path, "flat key=value config file");
        sub->add_option("-o,--out", out_dir, "output directory (default $ISING_SIM_OUT or ./out)");
        sub->add_option("--set", overrides, "override a config key, e.g. --set n_sites=20");
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t& v) { seed_override = v; seed_given = true; },
            "override the master seed");
    }

    int oracle_max_n = 8;
    int oracle_cases = 20;
    std::uint64_t oracle_seed = 1;
    cmd_oracle->add_option("-o,--out", out_dir, "output directory (default $ISING_SIM_OUT or ./out)");
    cmd_oracle->add_option("--max-n", oracle_max_n, "largest chain size to cross-check")->capture_default_str();
    cmd_oracle->add_option("--cases", oracle_cases, "random cases per chain size")->capture_default_str();
    cmd_oracle->add_option("--seed", oracle_seed, "master seed for the random cases")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
        const std::filesystem::path dir(out_dir);
        std::filesystem::create_directories(dir);
        CLI::App* active = app.get_subcommands().front();
        const std::string name = active->get_name();

        RunOutput out;
        std::map<std::string, std::string> echo;
        std::string hash;
        std::string seed_text;

        if (name == "oracle-check") {
            out = do_oracle_check(oracle_max_n, oracle_cases, oracle_seed, dir);
            echo["max_n"] = std::to_string(oracle_max_n);
            echo["cases"] = std::to_string(oracle_cases);
            echo["seed"] = std::to_string(oracle_seed);
            std::string lines;
            for (const auto& [key, value] : echo) lines += key + "=" + value + "\n";
            hash = fnv1a_hex(lines);
            seed_text = std::to_string(oracle_seed);
        } else {
            std::map<std::string, std::string> kv;
            if (!config_path.empty()) kv = parse_flat_kv(read_text_file(config_path));
            for (const std::string& item : overrides) {
                const auto eq = item.find('=');
                if (eq == std::string::npos || eq == 0)
                    throw std::invalid_argument("--set expects key=value, got '" + item + "'");
                kv[item.substr(0, eq)] = item.substr(eq + 1);
            }
            if (seed_given) kv["seed"] = std::to_string(seed_override);
            const ExperimentConfig cfg = config_from_map(kv);
            echo = normalized_map(cfg);
            hash = config_hash(cfg);
            seed_text = std::to_string(cfg.seed);

            if (name == "entropy-trace") out = do_entropy_trace(cfg, dir);
            else if (name == "fidelity-trace") out = do_fidelity_trace(cfg, dir);
            else if (name == "spectrum-compare") out = do_spectrum_compare(cfg, dir);
            else if (name == "scatter") out = do_scatter(cfg, dir);
            else if (name == "histogram") out = do_histogram(cfg, dir);
            else if (name == "product-check") out = do_product_check(cfg, dir);
            else throw std::invalid_argument("unknown subcommand: " + name);
        }

        const double wall =
            std::chrono::duration_cast<std::chrono::duration<double>>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(dir, name, echo, hash, seed_text, wall, out);
        for (const auto& artifact : out.artifacts) std::cout << (dir / artifact).string() << "\n";
        std::cout << (dir / "manifest.txt").string() << "\n";
        return 0;
    } catch (const numerical_error& e) {
        std::cerr << "numerical integrity error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "filesystem error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
