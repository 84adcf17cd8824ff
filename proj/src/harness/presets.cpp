#include "sonata/harness/presets.hpp"

#include <string>

#include "sonata/errors.hpp"

namespace sonata {

namespace {

ExperimentConfig paper_base() {
    ExperimentConfig c;
    c.graph.kind = "paper";
    c.graph.mixing = MixingRule::push_sum;
    c.variant = Algorithm::sonata;
    c.options.direction = Direction::atc;
    c.options.termination.enabled = false;
    c.runs = 20;
    c.options.max_iterations = 500;
    return c;
}

ExperimentConfig huber(SurrogateKind kind, double tau) {
    ExperimentConfig c = paper_base();
    c.problem.kind = "huber";
    c.problem.agents = 30;
    c.problem.measurements = 20;
    c.problem.dimension = 200;
    c.problem.sigma = 0.1;
    c.options.surrogate.kind = kind;
    c.options.surrogate.tau = tau;
    c.options.schedule = StepSizeSchedule::recursive(0.1, 0.01);
    c.benchmark_schedule = StepSizeSchedule::recursive(0.5, 0.01);
    c.random_start = false;
    return c;
}

ExperimentConfig localization(SurrogateKind kind, double tau) {
    ExperimentConfig c = paper_base();
    c.problem.kind = "localization";
    c.problem.agents = 30;
    c.problem.targets = 5;
    c.problem.dimension = 10;
    c.options.surrogate.kind = kind;
    c.options.surrogate.tau = tau;
    c.options.schedule = StepSizeSchedule::recursive(0.1, 1e-4);
    c.benchmark_schedule = StepSizeSchedule::recursive(0.05, 1e-4);
    c.random_start = true;
    return c;
}

}  // namespace

const std::vector<std::string_view>& preset_names() {
    static const std::vector<std::string_view> names = {"huber-sca", "huber-lin", "localization-lin",
                                                        "localization-pl", "quadratic-oracle"};
    return names;
}

ExperimentConfig preset(std::string_view name) {
    if (name == "huber-sca") return huber(SurrogateKind::huber_sca, 1.5);
    if (name == "huber-lin") return huber(SurrogateKind::linearization, 2.0);
    if (name == "localization-lin") return localization(SurrogateKind::linearization, 7.0);
    if (name == "localization-pl") return localization(SurrogateKind::partial_linearization, 5.0);
    if (name == "quadratic-oracle") {
        ExperimentConfig c = paper_base();
        c.problem.kind = "quadratic";
        c.problem.agents = 10;
        c.problem.dimension = 5;
        c.options.surrogate.kind = SurrogateKind::linearization;
        c.options.surrogate.tau = 0.02;
        c.options.schedule = StepSizeSchedule::polynomial(0.1, 1.0);
        c.benchmark_schedule = StepSizeSchedule::recursive(0.5, 0.01);
        c.options.max_iterations = 5000;
        c.runs = 1;
        c.random_start = false;
        return c;
    }
    throw ArgumentError("unknown preset '" + std::string(name) + "'");
}

}  // namespace sonata
