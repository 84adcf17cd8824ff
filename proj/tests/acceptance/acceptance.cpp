// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sonata/digraph.hpp"
#include "sonata/engine.hpp"
#include "sonata/harness/config.hpp"
#include "sonata/harness/experiment.hpp"
#include "sonata/harness/presets.hpp"
#include "sonata/metrics.hpp"
#include "sonata/mixing.hpp"
#include "sonata/problems.hpp"
#include "sonata/rng.hpp"
#include "sonata/surrogates.hpp"
#include "sonata/variants.hpp"

using namespace sonata;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buffer[256];
    std::snprintf(buffer, sizeof buffer, format, a, b, c, d);
    return buffer;
}

void append(Outcome& out, bool ok, const std::string& what) {
    out.pass = out.pass && ok;
    if (!out.detail.empty()) out.detail += "; ";
    out.detail += (ok ? "" : "!") + what;
}

// Minimizer of sum_i 1/2 ||Q_i x - c_i||^2 from a least-squares solve of the
// stacked system.
Vector stacked_least_squares(const ProblemInstance& problem) {
    Eigen::Index rows = 0;
    for (const auto& cost : problem.costs) rows += dynamic_cast<const QuadraticCost&>(*cost).Q().rows();
    Matrix Q(rows, static_cast<Eigen::Index>(problem.dimension));
    Vector c(rows);
    Eigen::Index offset = 0;
    for (const auto& cost : problem.costs) {
        const auto& q = dynamic_cast<const QuadraticCost&>(*cost);
        Q.middleRows(offset, q.Q().rows()) = q.Q();
        c.segment(offset, q.Q().rows()) = q.c();
        offset += q.Q().rows();
    }
    return Q.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(c);
}

Vector zbar_of(const RunRecord& record) { return weighted_average(record.final_x, record.final_phi); }

double max_deviation(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
    if (a.size() != b.size() || a.empty()) return INFINITY;
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, (a[k] - b[k]).cwiseAbs().maxCoeff());
    return worst;
}

ExperimentConfig reduced_preset(const std::string& name) {
    ExperimentConfig config = preset(name);
    config.problem.agents = 10;
    if (config.problem.kind == "localization") {
        config.problem.targets = 10;
        config.problem.dimension = 20;
    } else {
        config.problem.dimension = 20;
    }
    config.runs = 1;
    config.options.max_iterations = 10000;
    return config;
}

Outcome conservation() {
    Outcome out;
    for (auto name : preset_names()) {
        const auto start = Clock::now();
        const ExperimentConfig config = reduced_preset(std::string(name));
        const RunRecord record = run_single(config, 0);
        double mass = 0.0;
        double tracking = 0.0;
        for (const auto& m : record.metrics) {
            mass = std::max(mass, m.mass_err);
            tracking = std::max(tracking, m.tracking_err / (1.0 + m.gradient_scale));
        }
        const double elapsed = seconds_since(start);
        const bool ok = record.ok() && record.iterations() == 10000 && mass <= 1e-8 && tracking <= 1e-8 &&
                        elapsed < 60.0;
        append(out, ok, std::string(name) + fmt(" mass=%.2e track=%.2e t=%.1fs", mass, tracking, elapsed));
    }
    return out;
}

Outcome oracle_convergence() {
    Outcome out;
    const auto start = Clock::now();
    ExperimentConfig config = preset("quadratic-oracle");
    config.runs = 1;
    const ProblemInstance problem = build_problem(config.problem, run_seed(config.seed, 0), config.seed);
    const RunRecord record = run_single(config, 0);
    double best_J = INFINITY;
    double best_D = INFINITY;
    std::size_t hit = 0;
    for (const auto& m : record.metrics) {
        best_J = std::min(best_J, m.J);
        best_D = std::min(best_D, m.D);
        if (hit == 0 && m.J <= 1e-4 && m.D <= 1e-6) hit = m.n;
    }
    const Vector x_star = stacked_least_squares(problem);
    const double error = (zbar_of(record) - x_star).norm();
    const double elapsed = seconds_since(start);
    const auto& last = record.metrics.back();
    append(out, record.ok() && hit > 0 && hit <= 5000,
           fmt("J<=1e-4 and D<=1e-6 first at n=%.0f (final J=%.2e D=%.2e)", double(hit), last.J, last.D));
    append(out, error <= 1e-4, fmt("||zbar-x*||=%.2e", error));
    append(out, elapsed < 30.0, fmt("t=%.1fs", elapsed));
    return out;
}

Outcome fixed_point() {
    Outcome out;
    QuadraticOracleOptions opts;
    opts.seed = 11;
    const ProblemInstance problem = build_quadratic_oracle(opts);
    const Vector x_star = stacked_least_squares(problem);
    VariantOptions options;
    options.surrogate.kind = SurrogateKind::linearization;
    options.surrogate.tau = 1.0;
    options.schedule = StepSizeSchedule::polynomial(0.1, 1.0);
    options.max_iterations = 100;
    options.termination.enabled = false;
    options.tracker_init = TrackerInit::average_gradient;
    options.record_trajectory = true;
    const auto graphs = DigraphSequence::paper_topology(problem.agent_count, 5);
    const std::vector<Vector> x0(problem.agent_count, x_star);
    const RunRecord record = run_variant(Algorithm::sonata, problem, graphs, MixingRule::push_sum, options, x0);
    double worst = 0.0;
    for (const auto& X : record.trajectory) {
        worst = std::max(worst, (X.rowwise() - x_star.transpose()).rowwise().norm().maxCoeff());
    }
    append(out, record.ok() && record.trajectory.size() == 101, fmt("%.0f snapshots", double(record.trajectory.size())));
    append(out, worst <= 1e-12, fmt("max ||x_i - x*|| = %.2e", worst));
    return out;
}

struct EquivalenceSetup {
    ProblemInstance problem;
    std::vector<Vector> x0;
    double alpha = 0.02;
};

EquivalenceSetup equivalence_setup() {
    QuadraticOracleOptions opts;
    opts.seed = 2024;
    opts.agents = 8;
    opts.dimension = 4;
    EquivalenceSetup setup{build_quadratic_oracle(opts), {}, 0.02};
    Rng rng(77);
    for (std::size_t i = 0; i < 8; ++i) {
        Vector x(4);
        for (auto& v : x) v = rng.normal();
        setup.x0.push_back(x);
    }
    return setup;
}

VariantOptions linearized(const EquivalenceSetup& setup, Direction direction) {
    VariantOptions options;
    options.direction = direction;
    options.schedule = StepSizeSchedule::constant(setup.alpha);
    options.surrogate.kind = SurrogateKind::linearization;
    options.surrogate.tau = static_cast<double>(setup.problem.agent_count);
    options.max_iterations = 200;
    options.termination.enabled = false;
    options.record_trajectory = true;
    return options;
}

RunRecord engine_run(const EquivalenceSetup& setup, const DigraphSequence& graphs, MixingRule rule,
                     const VariantOptions& options, std::optional<AgentStepRule> step_rule = std::nullopt) {
    IterationConfig config = engine_config(setup.problem, options);
    config.agent_step_rule = std::move(step_rule);
    return run(setup.problem, graphs, rule, config, setup.x0);
}

Outcome reductions() {
    Outcome out;
    const auto start = Clock::now();
    const EquivalenceSetup setup = equivalence_setup();
    const std::size_t I = setup.problem.agent_count;

    {
        const auto graphs = DigraphSequence::symmetrized(DigraphSequence::paper_topology(I, 3));
        const VariantOptions options = linearized(setup, Direction::cta);
        const RunRecord a = run_variant(Algorithm::diging, setup.problem, graphs, MixingRule::metropolis, options, setup.x0);
        const RunRecord b = engine_run(setup, graphs, MixingRule::metropolis, options);
        const double dev = max_deviation(a.trajectory, b.trajectory);
        append(out, a.ok() && b.ok() && dev <= 1e-12, fmt("diging~cta-next-l %.2e", dev));
    }
    {
        const auto graphs = DigraphSequence::paper_topology(I, 4);
        const VariantOptions options = linearized(setup, Direction::atc);
        const RunRecord a =
            run_variant(Algorithm::push_diging, setup.problem, graphs, MixingRule::push_sum, options, setup.x0);
        const RunRecord b = engine_run(setup, graphs, MixingRule::push_sum, options);
        const double dev = max_deviation(a.trajectory, b.trajectory);
        append(out, a.ok() && b.ok() && dev <= 1e-12, fmt("push-diging~atc-l %.2e", dev));
    }
    {
        const auto graphs = DigraphSequence::constant(undirected_ring(I));
        VariantOptions options = linearized(setup, Direction::atc);
        options.aug_dgm_form = AugDgmForm::coordinated;
        const RunRecord a = run_variant(Algorithm::aug_dgm, setup.problem, graphs, MixingRule::metropolis, options, setup.x0);
        const RunRecord b = engine_run(setup, graphs, MixingRule::metropolis, options);
        const double dev = max_deviation(a.trajectory, b.trajectory);
        append(out, a.ok() && b.ok() && dev <= 1e-12, fmt("aug-dgm(coordinated)~atc-next-l %.2e", dev));
    }
    {
        const auto graphs = DigraphSequence::constant(generate_paper_topology(I, 0, 9));
        VariantOptions options = linearized(setup, Direction::cta);
        const AgentStepRule rule = [](std::size_t, double alpha, double phi_old, double phi_new) {
            return phi_old * alpha / phi_new;
        };
        const RunRecord reference = engine_run(setup, graphs, MixingRule::push_sum, options, rule);
        options.add_opt_form = AddOptForm::push;
        const RunRecord push = run_variant(Algorithm::add_opt, setup.problem, graphs, MixingRule::push_sum, options, setup.x0);
        options.add_opt_form = AddOptForm::row_stochastic;
        const RunRecord row =
            run_variant(Algorithm::add_opt, setup.problem, graphs, MixingRule::push_sum, options, setup.x0);
        const double d1 = max_deviation(push.trajectory, reference.trajectory);
        const double d2 = max_deviation(row.trajectory, reference.trajectory);
        const double d3 = max_deviation(push.trajectory, row.trajectory);
        append(out, push.ok() && row.ok() && reference.ok() && std::max({d1, d2, d3}) <= 1e-10,
               fmt("add-opt push~cta-l %.2e, row~cta-l %.2e, push~row %.2e", d1, d2, d3));
    }
    const double elapsed = seconds_since(start);
    append(out, elapsed < 10.0, fmt("t=%.2fs", elapsed));
    return out;
}

Outcome push_sum_consensus() {
    Outcome out;
    QuadraticOracleOptions opts;
    opts.seed = 5;
    opts.agents = 20;
    opts.dimension = 3;
    const ProblemInstance problem = build_quadratic_oracle(opts);
    std::vector<Vector> x0;
    Rng rng(99);
    Vector mean = Vector::Zero(3);
    for (std::size_t i = 0; i < 20; ++i) {
        Vector x(3);
        for (auto& v : x) v = rng.uniform(-5.0, 5.0);
        mean += x / 20.0;
        x0.push_back(x);
    }
    VariantOptions options;
    options.schedule = StepSizeSchedule::constant(0.0);
    options.max_iterations = 500;
    options.termination.enabled = false;
    const auto graphs = DigraphSequence::paper_topology(20, 17);
    const RunRecord record =
        run_variant(Algorithm::subgradient_push, problem, graphs, MixingRule::push_sum, options, x0);
    const double worst =
        record.ok() ? (record.final_x.rowwise() - mean.transpose()).rowwise().norm().maxCoeff() : INFINITY;
    append(out, record.ok() && record.iterations() == 500, fmt("N=%.0f", double(record.iterations())));
    append(out, worst <= 1e-8, fmt("max ||x_i[N] - mean x[0]|| = %.2e", worst));
    return out;
}

struct AuditCase {
    std::string name;
    ProblemInstance problem;
    std::vector<SurrogateKind> kinds;
};

Outcome surrogate_audit() {
    Outcome out;
    std::vector<AuditCase> cases;
    {
        HuberOptions h;
        h.seed = 3;
        h.agents = 4;
        h.dimension = 12;
        h.measurements = 8;
        cases.push_back({"huber", build_huber_regression(h),
                         {SurrogateKind::linearization, SurrogateKind::partial_linearization, SurrogateKind::huber_sca,
                          SurrogateKind::convexification}});
    }
    {
        LocalizationOptions l;
        l.seed = 4;
        l.agents = 4;
        l.targets = 3;
        cases.push_back({"localization", build_localization(l),
                         {SurrogateKind::linearization, SurrogateKind::partial_linearization,
                          SurrogateKind::convexification}});
    }
    {
        QuadraticOracleOptions q;
        q.seed = 6;
        q.agents = 4;
        q.dimension = 6;
        cases.push_back({"quadratic", build_quadratic_oracle(q),
                         {SurrogateKind::linearization, SurrogateKind::partial_linearization,
                          SurrogateKind::convexification}});
    }
    const double tau = 1.3;
    for (const auto& c : cases) {
        for (SurrogateKind kind : c.kinds) {
            SurrogateOptions options;
            options.kind = kind;
            options.tau = tau;
            const SurrogateFactory factory = make_surrogate_factory(c.problem, options);
            Rng rng(derive_seed(0xa0d17, static_cast<std::uint64_t>(kind)));
            double c1_analytic = 0.0;
            double c1_fd = 0.0;
            double c2_ratio = INFINITY;
            bool modulus_ok = true;
            const std::size_t m = c.problem.dimension;
            for (std::size_t k = 0; k < 20; ++k) {
                const std::size_t agent = k % c.problem.agent_count;
                const Vector anchor = c.problem.feasible_set->sample(m, rng);
                const auto s = factory(agent, anchor);
                const SmoothCost& f = *c.problem.costs[agent];
                const Vector g = f.gradient(anchor);
                const double scale = 1.0 + g.lpNorm<Eigen::Infinity>();
                c1_analytic = std::max(c1_analytic, (s->gradient(anchor) - g).lpNorm<Eigen::Infinity>() / scale);
                const FunctionCost wrapped(m, [&](const Vector& x) { return s->value(x); },
                                           [&](const Vector& x) { return s->gradient(x); });
                c1_fd = std::max(c1_fd, (finite_difference_gradient(wrapped, anchor) - g).lpNorm<Eigen::Infinity>() / scale);
                const double declared = s->strong_convexity();
                if (kind != SurrogateKind::convexification && declared < tau) modulus_ok = false;
                for (std::size_t p = 0; p < 5; ++p) {
                    Vector x = anchor;
                    Vector z = anchor;
                    for (std::size_t j = 0; j < m; ++j) {
                        x[static_cast<Eigen::Index>(j)] += rng.normal();
                        z[static_cast<Eigen::Index>(j)] += rng.normal();
                    }
                    const double gap = (x - z).squaredNorm();
                    const double monotone = (s->gradient(x) - s->gradient(z)).dot(x - z);
                    c2_ratio = std::min(c2_ratio, monotone / (tau * gap));
                }
            }
            const bool ok = c1_analytic <= 1e-10 && c1_fd <= 1e-6 && c2_ratio >= 0.99 && modulus_ok;
            append(out, ok,
                   c.name + "/" + std::string(surrogate_kind_name(kind)) +
                       fmt(" C1=%.1e fd=%.1e C2=%.3f", c1_analytic, c1_fd, c2_ratio));
        }
    }
    return out;
}

double mean_J_at(const ExperimentResult& result, std::size_t n) {
    const auto& trace = result.aggregate;
    return n < trace.J_mean.size() ? trace.J_mean[n] : INFINITY;
}

Outcome huber_reproduction() {
    Outcome out;
    const auto start = Clock::now();
    ExperimentConfig sca = preset("huber-sca");
    ExperimentConfig lin = preset("huber-lin");
    ExperimentConfig push = preset("huber-sca");
    push.variant = Algorithm::subgradient_push;
    const ExperimentResult r_sca = run_experiment(sca);
    const ExperimentResult r_lin = run_experiment(lin);
    const ExperimentResult r_push = run_experiment(push);
    const double j_sca = mean_J_at(r_sca, 500);
    const double j_lin = mean_J_at(r_lin, 500);
    const double j_push = mean_J_at(r_push, 500);
    const double elapsed = seconds_since(start);
    append(out, r_sca.aggregate.runs == 20 && r_lin.aggregate.runs == 20 && r_push.aggregate.runs == 20,
           fmt("completed runs %.0f/%.0f/%.0f", double(r_sca.aggregate.runs), double(r_lin.aggregate.runs),
               double(r_push.aggregate.runs)));
    append(out, j_sca < j_lin, fmt("J(500) sca=%.3e < lin=%.3e", j_sca, j_lin));
    append(out, j_lin < j_push, fmt("J(500) lin=%.3e < subgrad-push=%.3e", j_lin, j_push));
    append(out, 10.0 * j_sca <= j_push, fmt("sca %.0fx below subgrad-push", j_push / j_sca));
    append(out, elapsed < 600.0, fmt("t=%.1fs", elapsed));
    return out;
}

// Window [200, 300] stays within a factor 2 of the value at n = 200 (checked
// on the Monte-Carlo mean).
bool plateau(const std::vector<double>& trace, double& spread) {
    if (trace.size() <= 300) return false;
    const double anchor = trace[200];
    double lo = INFINITY;
    double hi = 0.0;
    for (std::size_t n = 200; n <= 300; ++n) {
        lo = std::min(lo, trace[n]);
        hi = std::max(hi, trace[n]);
    }
    spread = std::max(hi / anchor, anchor / lo);
    return spread <= 2.0;
}

Outcome localization_reproduction() {
    Outcome out;
    const auto start = Clock::now();
    ExperimentConfig lin = preset("localization-lin");
    ExperimentConfig pl = preset("localization-pl");
    lin.options.max_iterations = 300;
    pl.options.max_iterations = 300;
    const ExperimentResult r_lin = run_experiment(lin);
    const ExperimentResult r_pl = run_experiment(pl);
    for (const auto* r : {&r_lin, &r_pl}) {
        double sJ = 0.0;
        double sD = 0.0;
        const bool pJ = plateau(r->aggregate.J_mean, sJ);
        const bool pD = plateau(r->aggregate.D_mean, sD);
        append(out, pJ && pD, r->aggregate.variant + (r == &r_lin ? "-lin" : "-pl") +
                                  fmt(" J(200)=%.3e spread %.2f, D(200)=%.3e spread %.2f", r->aggregate.J_mean[200], sJ,
                                      r->aggregate.D_mean[200], sD));
    }
    const double j_lin = mean_J_at(r_lin, 200);
    const double j_pl = mean_J_at(r_pl, 200);
    append(out, j_pl <= j_lin, fmt("J(200) pl=%.4e <= lin=%.4e", j_pl, j_lin));
    const double elapsed = seconds_since(start);
    append(out, elapsed < 300.0, fmt("t=%.1fs", elapsed));
    return out;
}

Outcome b_connectivity() {
    Outcome out;
    const auto static_connected = DigraphSequence::constant(directed_cycle(5));
    const auto alternating = DigraphSequence::replay({Digraph(4, {{0, 1}, {1, 2}, {2, 3}}), Digraph(4, {{3, 0}})});
    const auto disconnected = DigraphSequence::constant(Digraph(4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}}));
    const bool a = check_b_connectivity(static_connected, 1, 10);
    const bool b2 = check_b_connectivity(alternating, 2, 10);
    const bool b1 = check_b_connectivity(alternating, 1, 10);
    const bool c = check_b_connectivity(disconnected, 1, 10) || check_b_connectivity(disconnected, 3, 10);
    append(out, a, "static connected -> true");
    append(out, b2 && !b1, "alternating -> true at B=2, false at B=1");
    append(out, !c, "disconnected -> false");
    return out;
}

std::string experiment_bytes(const ExperimentConfig& config) {
    const ExperimentResult result = run_experiment(config);
    std::ostringstream out;
    for (const auto& r : result.runs) write_run_csv(out, r);
    write_aggregate_csv(out, result.aggregate);
    return out.str();
}

Outcome determinism() {
    Outcome out;
    ExperimentConfig quad = preset("quadratic-oracle");
    ExperimentConfig huber = preset("huber-sca");
    huber.runs = 4;
    huber.options.max_iterations = 100;
    huber.threads = 1;
    ExperimentConfig huber_threads = huber;
    huber_threads.threads = 3;
    ExperimentConfig loc = preset("localization-pl");
    loc.runs = 3;
    loc.options.max_iterations = 150;
    const std::string q1 = experiment_bytes(quad);
    const std::string q2 = experiment_bytes(quad);
    const std::string h1 = experiment_bytes(huber);
    const std::string h2 = experiment_bytes(huber_threads);
    const std::string l1 = experiment_bytes(loc);
    const std::string l2 = experiment_bytes(loc);
    append(out, q1 == q2, fmt("quadratic-oracle identical (%.0f bytes)", double(q1.size())));
    append(out, h1 == h2, fmt("huber-sca identical across 1 and 3 threads (%.0f bytes)", double(h1.size())));
    append(out, l1 == l2, fmt("localization-pl identical (%.0f bytes)", double(l1.size())));
    return out;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"conservation", conservation},
        {"oracle-convergence", oracle_convergence},
        {"fixed-point", fixed_point},
        {"reduction-equivalences", reductions},
        {"push-sum-consensus", push_sum_consensus},
        {"surrogate-audit", surrogate_audit},
        {"huber-reproduction", huber_reproduction},
        {"localization-reproduction", localization_reproduction},
        {"b-connectivity", b_connectivity},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome outcome;
        try {
            outcome = criteria[k].second();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        if (!outcome.pass) ++failures;
        std::printf("%s %zu %s: %s\n", outcome.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                    outcome.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
