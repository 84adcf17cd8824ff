#include "doctest.h"

#include <cmath>

#include "sonata/engine.hpp"
#include "sonata/errors.hpp"
#include "sonata/metrics.hpp"
#include "sonata/variants.hpp"
#include "support.hpp"

using namespace sonata;
using testing_support::random_vector;

namespace {

ProblemInstance oracle(std::size_t agents = 6, std::size_t dimension = 3, std::uint64_t seed = 1) {
    QuadraticOracleOptions o;
    o.seed = seed;
    o.agents = agents;
    o.dimension = dimension;
    return build_quadratic_oracle(o);
}

std::vector<Vector> random_points(Rng& rng, std::size_t agents, std::size_t dimension) {
    std::vector<Vector> xs;
    for (std::size_t i = 0; i < agents; ++i) xs.push_back(random_vector(rng, dimension));
    return xs;
}

IterationConfig linearized_config(const ProblemInstance& p, double tau, Direction direction = Direction::atc) {
    VariantOptions options;
    options.direction = direction;
    options.surrogate.tau = tau;
    options.schedule = StepSizeSchedule::polynomial(0.5, 0.75);
    options.termination.enabled = false;
    return engine_config(p, options);
}

}  // namespace

TEST_CASE("step-size schedules") {
    const auto poly = StepSizeSchedule::polynomial(0.1, 1.0).sequence(4);
    CHECK(poly[0] == doctest::Approx(0.1));
    CHECK(poly[3] == doctest::Approx(0.1 / 4.0));
    const auto rec = StepSizeSchedule::recursive(0.5, 0.1).sequence(3);
    CHECK(rec[1] == doctest::Approx(0.5 * (1 - 0.05)));
    CHECK(rec[2] == doctest::Approx(rec[1] * (1 - 0.1 * rec[1])));
    CHECK(StepSizeSchedule::constant(0.3).sequence(5)[4] == 0.3);

    StepSizeCursor cursor(StepSizeSchedule::polynomial(0.2, 0.6));
    for (std::size_t n = 0; n < 30; ++n) {
        CHECK(cursor.index() == n);
        CHECK(cursor.value() == doctest::Approx(0.2 / std::pow(static_cast<double>(n + 1), 0.6)));
        cursor.advance();
    }
    for (double a : StepSizeSchedule::recursive(1.0, 0.9).sequence(200)) {
        CHECK(a > 0.0);
        CHECK(a <= 1.0);
    }

    CHECK_THROWS_WITH_AS(StepSizeSchedule::polynomial(0.1, 0.4).validate(), "beta must lie in (0.5, 1]", ArgumentError);
    CHECK_THROWS_AS(StepSizeSchedule::polynomial(0.0, 1.0).validate(), ArgumentError);
    CHECK_THROWS_AS(StepSizeSchedule::recursive(1.5, 0.1).validate(), ArgumentError);
    CHECK_THROWS_AS(StepSizeSchedule::recursive(0.5, 1.0).validate(), ArgumentError);
    CHECK_THROWS_AS(StepSizeSchedule::constant(1.2).validate(), ArgumentError);
    CHECK_NOTHROW(StepSizeSchedule::constant(0.0).validate());
    CHECK(parse_direction(direction_name(Direction::cta)) == Direction::cta);
}

TEST_CASE("initialization") {
    const ProblemInstance p = oracle(5, 3);
    Rng rng(2);
    const auto x0 = random_points(rng, 5, 3);
    const auto states = initialize(p, x0);
    Vector weighted = Vector::Zero(3);
    Vector total = Vector::Zero(3);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(states[i].phi == 1.0);
        const Vector g = p.costs[i]->gradient(x0[i]);
        CHECK(states[i].y == g);
        CHECK((states[i].pi_tilde - 4.0 * g).norm() <= 1e-14 * (1 + g.norm()));
        weighted += states[i].phi * states[i].y;
        total += g;
    }
    CHECK((weighted - total).norm() <= 1e-13);

    const ProblemInstance single = oracle(1, 3);
    const auto one = initialize(single, {Vector::Ones(3)});
    CHECK(one[0].pi_tilde.isZero());

    const auto avg = initialize(p, x0, TrackerInit::average_gradient);
    for (const auto& s : avg) CHECK((s.y - total / 5.0).norm() <= 1e-13);

    QuadraticOracleOptions boxed;
    boxed.box_radius = 0.5;
    const ProblemInstance b = build_quadratic_oracle(boxed);
    const std::vector<Vector> outside(b.agent_count, Vector::Constant(static_cast<Eigen::Index>(b.dimension), 2.0));
    CHECK_THROWS_AS(initialize(b, outside), ArgumentError);
    const auto projected = initialize(b, outside, TrackerInit::local_gradient, true);
    CHECK(b.feasible_set->contains(projected[0].x, 0.0));
}

TEST_CASE("local SCA step") {
    const ProblemInstance p = oracle(4, 3);
    const auto factory = make_surrogate_factory(p, {});
    Rng rng(3);
    auto states = initialize(p, random_points(rng, 4, 3));
    const Vector x = states[0].x;
    const Vector xt = local_sca_step(states[0], 0, p, factory, 0.0);
    CHECK(states[0].v == x);
    local_sca_step(states[0], 0, p, factory, 1.0);
    CHECK((states[0].v - xt).norm() <= 1e-15);

    // At the consensual optimum with exact tracker, the step stays put.
    const Vector& xs = *p.reference_solution;
    auto at_opt = initialize(p, std::vector<Vector>(4, xs), TrackerInit::average_gradient);
    for (std::size_t i = 0; i < 4; ++i) {
        local_sca_step(at_opt[i], i, p, factory, 0.7);
        CHECK((at_opt[i].v - xs).norm() <= 1e-12);
    }
}

TEST_CASE("consensus step") {
    const ProblemInstance p = oracle(2, 1);
    auto states = initialize(p, {Vector::Zero(1), Vector::Constant(1, 2.0)});
    states[0].v = states[0].x;
    states[1].v = states[1].x;
    MixingMatrix A{Matrix::Constant(2, 2, 0.5), 0.5};
    auto atc = states;
    consensus_step(atc, A, Direction::atc);
    CHECK(atc[0].x[0] == doctest::Approx(1.0));
    CHECK(atc[1].x[0] == doctest::Approx(1.0));

    Rng rng(4);
    const Digraph g = testing_support::random_connected_digraph(rng, 5, 0.3);
    MixingMatrix B = push_sum_weights(g);
    const ProblemInstance q = oracle(5, 2);
    auto same = initialize(q, std::vector<Vector>(5, Vector::Constant(2, 3.0)));
    for (auto& s : same) s.v = Vector::Constant(2, -1.0);
    auto cta = same;
    consensus_step(same, B, Direction::atc);
    for (const auto& s : same) CHECK((s.x - Vector::Constant(2, -1.0)).norm() <= 1e-14);
    consensus_step(cta, B, Direction::cta);
    for (const auto& s : cta) CHECK((s.x - Vector::Constant(2, -1.0)).norm() <= 1e-14);

    auto u = initialize(q, random_points(rng, 5, 2));
    for (auto& s : u) s.v = s.x;
    auto w = u;
    consensus_step(u, B, Direction::atc);
    consensus_step(w, B, Direction::cta);
    for (std::size_t i = 0; i < 5; ++i) CHECK((u[i].x - w[i].x).norm() <= 1e-14);
}

TEST_CASE("tracking identity over many random column-stochastic rounds") {
    Rng rng(5);
    const ProblemInstance p = oracle(6, 3, 9);
    const auto factory = make_surrogate_factory(p, {});
    auto states = initialize(p, random_points(rng, 6, 3));
    for (int n = 0; n < 1000; ++n) {
        const Digraph g = testing_support::random_connected_digraph(rng, 6, 0.2);
        MixingMatrix A{testing_support::random_column_stochastic(rng, g), 0.0};
        A.kappa = realized_kappa(A.entries);
        for (std::size_t i = 0; i < 6; ++i) local_sca_step(states[i], i, p, factory, 0.05);
        const Vector phi_old = consensus_step(states, A, n % 2 ? Direction::cta : Direction::atc);
        tracking_step(states, A, phi_old, p);
        Vector lhs = Vector::Zero(3);
        Vector rhs = Vector::Zero(3);
        double mass = 0.0;
        for (std::size_t i = 0; i < 6; ++i) {
            lhs += states[i].phi * states[i].y;
            rhs += p.costs[i]->gradient(states[i].x);
            mass += states[i].phi;
            CHECK((states[i].pi_tilde - (6.0 * states[i].y - states[i].last_grad)).norm() <= 1e-12 * (1 + states[i].y.norm()));
        }
        CHECK(std::abs(mass - 6.0) <= 1e-9);
        CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-9 * (1 + rhs.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("single agent tracker equals its gradient") {
    const ProblemInstance p = oracle(1, 2, 4);
    const auto factory = make_surrogate_factory(p, {});
    auto states = initialize(p, {Vector::Ones(2)});
    MixingMatrix A{Matrix::Ones(1, 1), 1.0};
    for (int n = 0; n < 5; ++n) {
        local_sca_step(states[0], 0, p, factory, 0.5);
        const Vector phi_old = consensus_step(states, A, Direction::atc);
        tracking_step(states, A, phi_old, p);
        CHECK((states[0].y - p.costs[0]->gradient(states[0].x)).norm() <= 1e-14);
        CHECK(states[0].pi_tilde.norm() <= 1e-14);
    }
}

TEST_CASE("run converges on the oracle and is deterministic") {
    const ProblemInstance p = oracle(6, 3, 3);
    IterationConfig config = linearized_config(p, 1.0);
    config.max_iterations = 3000;
    const auto graphs = DigraphSequence::paper_topology(6, 2);
    const RunRecord a = run(p, graphs, MixingRule::push_sum, config, 7);
    const RunRecord b = run(p, graphs, MixingRule::push_sum, config, 7);
    REQUIRE(a.ok());
    CHECK(a.metrics.size() == 3001);
    CHECK(a.metrics.back().J < 1e-3);
    CHECK(a.metrics.back().D < 1e-8);
    CHECK((weighted_average(a.final_x, a.final_phi) - *p.reference_solution).norm() < 1e-3);
    CHECK(a.final_x == b.final_x);
    for (std::size_t n = 0; n < a.metrics.size(); ++n) CHECK(a.metrics[n].J == b.metrics[n].J);
    CHECK(a.metrics.back().transmissions > 0);
    CHECK(a.realized_kappa > 0.0);
}

TEST_CASE("termination, feasibility and failure capture") {
    const ProblemInstance p = oracle(5, 3, 5);
    IterationConfig config = linearized_config(p, 1.0);
    config.max_iterations = 100000;
    config.termination = {true, 1e-4, 1e-6};
    const auto graphs = DigraphSequence::constant(complete_digraph(5));
    const RunRecord r = run(p, graphs, MixingRule::push_sum, config, 1);
    CHECK(r.status == RunStatus::terminated);
    CHECK(r.metrics.back().J <= 1e-4);
    CHECK(r.iterations() < 100000);

    QuadraticOracleOptions boxed;
    boxed.agents = 5;
    boxed.box_radius = 0.2;
    const ProblemInstance b = build_quadratic_oracle(boxed);
    IterationConfig bc = linearized_config(b, 1.0);
    bc.max_iterations = 50;
    bc.record_trajectory = true;
    const RunRecord br = run(b, DigraphSequence::paper_topology(5, 1), MixingRule::push_sum, bc, 3);
    REQUIRE(br.ok());
    for (const auto& X : br.trajectory)
        for (Eigen::Index i = 0; i < X.rows(); ++i) CHECK(b.feasible_set->contains(X.row(i).transpose(), 1e-12));

    IterationConfig cta = linearized_config(b, 1.0, Direction::cta);
    CHECK_THROWS_AS(validate_config(b, DigraphSequence::paper_topology(5, 1), cta), ArgumentError);

    IterationConfig broken = linearized_config(p, 1.0);
    broken.max_iterations = 20;
    int calls = 0;
    const auto inner = broken.surrogate;
    broken.surrogate = [&](std::size_t i, const Vector& a) {
        if (++calls > 30) throw ConvergenceError("forced", 1.0);
        return inner(i, a);
    };
    const RunRecord failed = run(p, graphs, MixingRule::push_sum, broken, 1);
    CHECK(failed.status == RunStatus::failed);
    CHECK(failed.error_kind == "convergence");
    CHECK_FALSE(failed.metrics.empty());

    IterationConfig wrong = linearized_config(p, 1.0);
    CHECK_THROWS_AS(validate_config(p, DigraphSequence::constant(complete_digraph(4)), wrong), ArgumentError);
}

TEST_CASE("transmissions count edges per broadcast vector") {
    const Digraph g = directed_cycle(4);
    CHECK(round_transmissions(g, 2) == 8);
    CHECK(error_kind(StateCorruptionError("x")) == "state-corruption");
    CHECK(error_kind(ArgumentError("x")) == "argument");
}
