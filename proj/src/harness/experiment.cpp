#include "sonata/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

#include "sonata/errors.hpp"
#include "sonata/harness/svg.hpp"

namespace sonata {

std::uint64_t run_seed(std::uint64_t master, std::size_t k) { return derive_seed(master, k); }

RunRecord run_single(const ExperimentConfig& config, std::size_t k) {
    const std::uint64_t seed = run_seed(config.seed, k);
    const ProblemInstance problem = build_problem(config.problem, seed, config.seed);
    const DigraphSequence graphs = build_graphs(config.graph, problem.agent_count, seed);
    std::vector<Vector> x0;
    if (config.random_start) {
        x0 = random_start(problem, seed);
    } else {
        const Vector zero = problem.feasible_set->project(Vector::Zero(static_cast<Eigen::Index>(problem.dimension)));
        x0.assign(problem.agent_count, zero);
    }
    VariantOptions options = config.options;
    options.schedule = effective_schedule(config);
    return run_variant(config.variant, problem, graphs, config.graph.mixing, options, x0);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    validate(config);
    ExperimentResult result;
    result.runs.resize(config.runs);
    for (std::size_t k = 0; k < config.runs; ++k) result.seeds.push_back(run_seed(config.seed, k));

    std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, config.runs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < config.runs; k = next++) {
            try {
                result.runs[k] = run_single(config, k);
            } catch (const std::exception& e) {
                RunRecord failed;
                failed.variant = std::string(algorithm_name(config.variant));
                failed.status = RunStatus::failed;
                failed.error_kind = error_kind(e);
                failed.error_message = e.what();
                result.runs[k] = std::move(failed);
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    result.aggregate = aggregate(result.runs, std::string(algorithm_name(config.variant)));
    if (result.aggregate.runs == 0) {
        std::string cause = result.runs.empty() ? "no runs" : result.runs.front().error_message;
        throw ExperimentError("every Monte-Carlo run failed; first error: " + cause);
    }
    return result;
}

AggregateTrace aggregate(const std::vector<RunRecord>& runs, const std::string& variant) {
    AggregateTrace trace;
    trace.variant = variant;
    std::size_t length = 0;
    for (const auto& r : runs) {
        if (!r.ok() || r.metrics.empty()) {
            ++trace.failed;
            continue;
        }
        ++trace.runs;
        length = std::max(length, r.metrics.size());
    }
    trace.n.resize(length);
    trace.J_mean.assign(length, 0.0);
    trace.D_mean.assign(length, 0.0);
    trace.U_mean.assign(length, 0.0);
    for (const auto& r : runs) {
        if (!r.ok() || r.metrics.empty()) continue;
        if (r.metrics.size() < length) ++trace.padded;
        for (std::size_t k = 0; k < length; ++k) {
            const IterationMetrics& m = r.metrics[std::min(k, r.metrics.size() - 1)];
            trace.J_mean[k] += m.J;
            trace.D_mean[k] += m.D;
            trace.U_mean[k] += m.U_zbar;
        }
    }
    for (std::size_t k = 0; k < length; ++k) {
        trace.n[k] = k;
        if (trace.runs == 0) continue;
        const double count = static_cast<double>(trace.runs);
        trace.J_mean[k] /= count;
        trace.D_mean[k] /= count;
        trace.U_mean[k] /= count;
    }
    return trace;
}

void write_aggregate_csv(std::ostream& out, const AggregateTrace& trace) {
    out << "# variant=" << trace.variant << " runs=" << trace.runs << " failed=" << trace.failed
        << " padded=" << trace.padded << '\n';
    out << "n,J_mean,D_mean,U_mean\n";
    for (std::size_t k = 0; k < trace.n.size(); ++k) {
        out << trace.n[k] << ',' << format_double(trace.J_mean[k]) << ',' << format_double(trace.D_mean[k]) << ','
            << format_double(trace.U_mean[k]) << '\n';
    }
}

void write_outputs(const ExperimentResult& result, const std::string& directory, bool svg) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    auto open = [&](const std::string& name) {
        std::ofstream out(fs::path(directory) / name);
        if (!out) throw ArgumentError("cannot write " + (fs::path(directory) / name).string());
        return out;
    };
    for (std::size_t k = 0; k < result.runs.size(); ++k) {
        auto out = open("run_" + std::to_string(k) + ".csv");
        write_run_csv(out, result.runs[k]);
    }
    {
        auto out = open("aggregate.csv");
        write_aggregate_csv(out, result.aggregate);
    }
    if (svg) {
        const AggregateTrace& t = result.aggregate;
        std::vector<double> x(t.n.begin(), t.n.end());
        auto out = open("figure.svg");
        write_svg_chart(out, {{"J mean", x, t.J_mean}, {"D mean", x, t.D_mean}}, t.variant, "iteration n",
                        "value (log scale)");
    }
}

}  // namespace sonata
