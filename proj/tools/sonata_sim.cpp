// Command-line simulator: runs a configured or preset experiment and writes
// per-run traces, the Monte-Carlo aggregate and an optional chart.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "sonata/engine.hpp"
#include "sonata/errors.hpp"
#include "sonata/harness/config.hpp"
#include "sonata/harness/experiment.hpp"
#include "sonata/harness/presets.hpp"

namespace {

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += (c == '\n') ? ' ' : c;
    }
    return out + '"';
}

void report(const std::exception& e) {
    std::cerr << "error kind=" << sonata::error_kind(e) << " message=" << quoted(e.what()) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed successive convex approximation simulator"};
    std::string config_path;
    std::string preset_name;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> iterations;
    std::optional<std::size_t> threads;
    std::string variant;
    std::string out_dir = "sonata_out";
    bool svg = false;
    bool list_presets = false;
    bool print_config = false;

    auto* source = app.add_option_group("source");
    source->add_option("--config", config_path, "Experiment configuration file")->check(CLI::ExistingFile);
    source->add_option("--preset", preset_name, "Built-in experiment preset");
    source->add_flag("--list-presets", list_presets, "List built-in presets and exit");
    source->require_option(1);
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--runs", runs, "Number of Monte-Carlo runs");
    app.add_option("--iters", iterations, "Iterations per run");
    app.add_option("--threads", threads, "Worker threads (0 = one per core)");
    app.add_option("--variant", variant, "Algorithm variant override");
    app.add_option("--out", out_dir, "Output directory");
    app.add_flag("--svg", svg, "Also write figure.svg");
    app.add_flag("--print-config", print_config, "Print the effective configuration and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (list_presets) {
            for (auto name : sonata::preset_names()) std::cout << name << '\n';
            return 0;
        }
        sonata::ExperimentConfig config =
            config_path.empty() ? sonata::preset(preset_name) : sonata::load_config(config_path);
        if (seed) config.seed = *seed;
        if (runs) config.runs = *runs;
        if (iterations) config.options.max_iterations = *iterations;
        if (threads) config.threads = *threads;
        if (!variant.empty()) config.variant = sonata::parse_algorithm(variant);
        sonata::validate(config);
        if (print_config) {
            std::cout << sonata::format_config(config);
            return 0;
        }

        const sonata::ExperimentResult result = sonata::run_experiment(config);
        sonata::write_outputs(result, out_dir, svg);
        const auto& agg = result.aggregate;
        for (std::size_t k = 0; k < result.runs.size(); ++k) {
            const auto& r = result.runs[k];
            if (!r.ok()) {
                std::cerr << "run " << k << " failed kind=" << r.error_kind << " message=" << quoted(r.error_message)
                          << '\n';
            }
        }
        if (!agg.n.empty()) {
            std::printf("variant=%s runs=%zu failed=%zu iterations=%zu J=%.6e D=%.6e out=%s\n", agg.variant.c_str(),
                        agg.runs, agg.failed, agg.n.back(), agg.J_mean.back(), agg.D_mean.back(), out_dir.c_str());
        }
        return agg.failed == 0 ? 0 : 3;
    } catch (const std::exception& e) {
        report(e);
        return 2;
    }
}
