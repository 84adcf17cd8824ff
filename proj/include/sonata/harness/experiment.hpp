#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sonata/harness/config.hpp"
#include "sonata/metrics.hpp"

namespace sonata {

/// Per-iteration Monte-Carlo means. Shorter runs are padded with their final
/// values.
struct AggregateTrace {
    std::string variant;
    std::vector<std::size_t> n;
    std::vector<double> J_mean;
    std::vector<double> D_mean;
    std::vector<double> U_mean;
    std::size_t runs = 0;
    std::size_t failed = 0;
    std::size_t padded = 0;
};

struct ExperimentResult {
    std::vector<RunRecord> runs;
    std::vector<std::uint64_t> seeds;
    AggregateTrace aggregate;
};

/// Seed of Monte-Carlo run k: derive_seed(master, k).
std::uint64_t run_seed(std::uint64_t master, std::size_t k);

/// One Monte-Carlo run.
RunRecord run_single(const ExperimentConfig& config, std::size_t k);

/// All runs, concurrently when threads allow; results do not depend on the
/// thread count. Throws ExperimentError when every run fails.
ExperimentResult run_experiment(const ExperimentConfig& config);

AggregateTrace aggregate(const std::vector<RunRecord>& runs, const std::string& variant);
/// `# variant=... runs=... failed=... padded=...` then n,J_mean,D_mean,U_mean.
void write_aggregate_csv(std::ostream& out, const AggregateTrace& trace);
/// run_<k>.csv, aggregate.csv and optionally figure.svg under `directory`.
void write_outputs(const ExperimentResult& result, const std::string& directory, bool svg);

}  // namespace sonata
