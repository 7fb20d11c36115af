// Command-line front end: simulations, synthetic fixtures, analyses, self-checks.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "quench/errors.hpp"
#include "quench/experiment.hpp"

namespace {

namespace fs = std::filesystem;
using namespace quench;

enum Exit { ok = 0, failure = 1, config_error = 2, analysis_error = 3, capacity_error = 4 };

struct Common {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "INI experiment config");
    app->add_option("--out", c.out, "output directory (overrides run.output_dir)");
    app->add_option("--seed", c.seed, "master seed (overrides run.seed)");
    app->add_option("--threads", c.threads, "worker threads, 0 = all cores");
    app->add_option("--override", c.overrides, "section.key=value, repeatable");
}

ExperimentConfig build_config(const Common& c) {
    auto config = c.config_path.empty() ? parse_config("", c.overrides) : load_config(c.config_path, c.overrides);
    if (c.seed) config.run.seed = *c.seed;
    if (c.threads) config.run.threads = *c.threads;
    if (!c.out.empty()) config.run.output_dir = c.out;
    return config;
}

void print_manifest(const RunManifest& m) {
    std::cout << "wrote " << m.files.size() << " files in " << m.wall_seconds << " s\n";
}

int run_validate(const Common& c) {
    bool all = true;
    if (!c.config_path.empty()) {
        const auto config = build_config(c);
        config.validate();
        const bool round = parse_config(serialize_config(config)) == config;
        std::cout << (round ? "PASS" : "FAIL") << " config " << c.config_path << "\n";
        all = all && round;
    }
    if (!c.out.empty()) {
        const auto problems = verify_manifest(c.out);
        for (const auto& p : problems) std::cout << "FAIL manifest: " << p << "\n";
        if (problems.empty()) std::cout << "PASS manifest " << c.out << "\n";
        all = all && problems.empty();
    }
    for (const auto& r : run_invariant_suite(c.threads.value_or(0))) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
        if (!r.passed) std::cout << ": " << r.detail;
        std::cout << "\n";
        all = all && r.passed;
    }
    return all ? ok : analysis_error;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Critical quench simulations and data-collapse analysis"};
    app.require_subcommand(1);

    Common sim_c, sim_q, synth, coll, cross, val;
    std::vector<std::string> collapse_files, crossing_files;
    std::optional<double> crossing_w;

    add_common(app.add_subcommand("simulate-classical", "Glauber quench ensembles after Wolff equilibration"), sim_c);
    add_common(app.add_subcommand("simulate-quantum", "exact state-vector quench of the transverse-field Ising model"),
               sim_q);
    add_common(app.add_subcommand("make-synthetic", "series that obey a known scaling form"), synth);

    auto* collapse = app.add_subcommand("analyze-collapse", "estimate w from a set of series files");
    add_common(collapse, coll);
    collapse->add_option("files", collapse_files, "series CSV files")->required()->check(CLI::ExistingFile);

    auto* crossing = app.add_subcommand("analyze-crossing", "single-crossing spread at fixed h");
    add_common(crossing, cross);
    crossing->add_option("files", crossing_files, "series CSV files")->required()->check(CLI::ExistingFile);
    crossing->add_option("--w", crossing_w, "exponent used to rescale time");

    add_common(app.add_subcommand("validate", "config and manifest checks plus the invariant suite"), val);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        const auto name = app.get_subcommands().front()->get_name();
        if (name == "simulate-classical") {
            print_manifest(simulate_classical(build_config(sim_c)));
        } else if (name == "simulate-quantum") {
            print_manifest(simulate_quantum(build_config(sim_q)));
        } else if (name == "make-synthetic") {
            print_manifest(make_synthetic_files(build_config(synth)));
        } else if (name == "analyze-collapse") {
            const auto config = build_config(coll);
            std::vector<fs::path> files(collapse_files.begin(), collapse_files.end());
            const auto report = analyze_collapse(files, config, config.run.output_dir);
            const auto& r = report.result;
            std::cout << "w_rep = " << r.w_rep << "  sigma_sys = " << r.sigma_sys << "  band = [" << r.band_low()
                      << ", " << r.band_high() << "]  accepted windows = " << r.accepted_count() << "\n";
            std::cout << "report: " << report.report.string() << "\n";
        } else if (name == "analyze-crossing") {
            auto config = build_config(cross);
            if (crossing_w) config.analysis.crossing_w = *crossing_w;
            std::vector<fs::path> files(crossing_files.begin(), crossing_files.end());
            const auto report = analyze_crossing(files, config, config.run.output_dir);
            const auto& d = report.diagnostic;
            std::cout << "x_min = " << d.x_min << "  delta_min = " << d.delta[d.index_min] << "\n";
            std::cout << "report: " << report.report.string() << "\n";
        } else if (name == "validate") {
            return run_validate(val);
        }
        return ok;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return capacity_error;
    } catch (const PartialResultsError& e) {
        std::cerr << "partial results: " << e.what() << "\n";
        return analysis_error;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return analysis_error;
    } catch (const AnalysisError& e) {
        std::cerr << "analysis error: " << e.what() << "\n";
        return analysis_error;
    } catch (const DiagnosticsError& e) {
        std::cerr << "diagnostics error: " << e.what() << "\n";
        return analysis_error;
    } catch (const ProtocolError& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return analysis_error;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return analysis_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failure;
    }
}
