#pragma once

// Experiment configuration: a flat "key = value" text format grouped in
// [sections]. '#' at the start of a line or after whitespace starts a comment.
//
//   [problem]    kind (quadratic | huber | localization | file), agents,
//                dimension, rows, measurements, targets, sigma, outlier_scale,
//                cutoff_scale, noiseless, noise_scale, l1, box_radius, path
//   [graph]      kind (paper | complete | cycle | ring | path | replay),
//                random_out_edges, symmetrize, file, mixing
//   [algorithm]  variant, direction, surrogate, tau, epsilon, aug_dgm_form,
//                add_opt_form, inner_tol, inner_max_iterations
//   [schedule]   kind (polynomial | recursive | constant), alpha0, beta, mu
//   [benchmark]  alpha0, mu: recursive schedule used for subgrad-push
//   [run]        seed, runs, iterations, start (zero | random), terminate,
//                tol_J, tol_D, threads

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sonata/digraph.hpp"
#include "sonata/mixing.hpp"
#include "sonata/problems.hpp"
#include "sonata/variants.hpp"

namespace sonata {

struct ProblemSpec {
    std::string kind = "quadratic";
    std::size_t agents = 10;
    std::size_t dimension = 5;
    /// Quadratic rows per agent; 0 means 2 * dimension.
    std::size_t rows = 0;
    std::size_t measurements = 20;
    std::size_t targets = 5;
    double sigma = 0.1;
    double outlier_scale = 5.0;
    double cutoff_scale = 3.0;
    bool noiseless = false;
    double noise_scale = 1.0;
    double l1 = 0.0;
    std::optional<double> box_radius;
    /// Problem file for kind = file.
    std::string path;
};

struct GraphSpec {
    std::string kind = "paper";
    std::size_t random_out_edges = 1;
    bool symmetrize = false;
    /// Digraph sequence file for kind = replay.
    std::string file;
    MixingRule mixing = MixingRule::push_sum;
};

struct ExperimentConfig {
    ProblemSpec problem;
    GraphSpec graph;
    Algorithm variant = Algorithm::sonata;
    VariantOptions options;
    /// Schedule substituted when the variant is subgrad-push.
    std::optional<StepSizeSchedule> benchmark_schedule;
    std::uint64_t seed = 1;
    std::size_t runs = 20;
    /// Zero or random starting points.
    bool random_start = true;
    /// 0 means one thread per core.
    std::size_t threads = 0;
};

/// Parses and validates. Throws ConfigError listing every violation.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
/// Every violation of module contracts visible without building the run.
std::vector<std::string> config_violations(const ExperimentConfig& config);
/// Throws ConfigError when config_violations is non-empty.
void validate(const ExperimentConfig& config);
/// Text form accepted by parse_config.
std::string format_config(const ExperimentConfig& config);

/// Problem for Monte-Carlo run `run_seed`; the Huber ground truth depends
/// only on `master_seed`.
ProblemInstance build_problem(const ProblemSpec& spec, std::uint64_t run_seed, std::uint64_t master_seed);
DigraphSequence build_graphs(const GraphSpec& spec, std::size_t agents, std::uint64_t run_seed);
/// Schedule actually used by the configured variant.
StepSizeSchedule effective_schedule(const ExperimentConfig& config);

}  // namespace sonata
