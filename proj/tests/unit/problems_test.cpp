#include "doctest.h"

#include <cmath>
#include <sstream>

#include "sonata/errors.hpp"
#include "sonata/problems.hpp"
#include "support.hpp"

using namespace sonata;

namespace {

double inf_norm(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

// x* of sum_i 1/2 ||Q_i x - c_i||^2 via QR of the stacked system.
Vector stacked_solution(const ProblemInstance& p) {
    std::vector<const QuadraticCost*> qs;
    Eigen::Index rows = 0;
    for (const auto& c : p.costs) {
        qs.push_back(dynamic_cast<const QuadraticCost*>(c.get()));
        rows += qs.back()->Q().rows();
    }
    Matrix Q(rows, static_cast<Eigen::Index>(p.dimension));
    Vector c(rows);
    Eigen::Index at = 0;
    for (const auto* q : qs) {
        Q.middleRows(at, q->Q().rows()) = q->Q();
        c.segment(at, q->Q().rows()) = q->c();
        at += q->Q().rows();
    }
    return Q.householderQr().solve(c);
}

}  // namespace

TEST_CASE("huber value and derivative") {
    CHECK(huber_value(0.0, 0.7) == 0.0);
    CHECK(huber_value(0.1, 0.3) == doctest::Approx(0.01));
    CHECK(huber_value(1.0, 0.3) == doctest::Approx(0.51));
    CHECK(huber_value(-1.0, 0.3) == doctest::Approx(0.51));
    const double c = 0.3;
    CHECK(huber_value(c, c) == doctest::Approx(c * c));
    CHECK(huber_value(c + 1e-9, c) == doctest::Approx(huber_value(c - 1e-9, c)).epsilon(1e-7));
    CHECK(huber_derivative(c - 1e-12, c) == doctest::Approx(2 * c));
    CHECK(huber_derivative(c + 1e-12, c) == doctest::Approx(2 * c));
    CHECK(huber_derivative(-c - 1e-12, c) == doctest::Approx(-2 * c));
    CHECK(huber_derivative(5.0, c) == doctest::Approx(2 * c));
}

TEST_CASE("huber regression instance") {
    HuberOptions o;
    o.seed = 9;
    o.agents = 5;
    o.dimension = 15;
    o.measurements = 6;
    const ProblemInstance p = build_huber_regression(o);
    CHECK(p.agent_count == 5);
    CHECK(p.is_unconstrained_smooth());
    for (const auto& c : p.costs) {
        const auto& h = dynamic_cast<const HuberCost&>(*c);
        CHECK((h.A().rowwise().norm().array() - 1.0).abs().maxCoeff() <= 1e-12);
        CHECK(h.cutoff() == doctest::Approx(0.3));
    }
    Rng rng(1);
    CHECK(audit_gradients(p, rng, 20) <= 1e-5);

    o.noiseless = true;
    const ProblemInstance clean = build_huber_regression(o);
    CHECK(inf_norm(clean.total_gradient(*clean.reference_solution)) == 0.0);
    CHECK(stationarity_residual(clean, *clean.reference_solution) == 0.0);

    HuberOptions same = o;
    same.seed = 10;
    same.truth_seed = o.seed;
    const ProblemInstance other = build_huber_regression(same);
    CHECK(*other.reference_solution == *clean.reference_solution);
    o.agents = 0;
    CHECK_THROWS_AS(build_huber_regression(o), ArgumentError);
}

TEST_CASE("localization instance") {
    LocalizationOptions o;
    o.seed = 3;
    o.agents = 8;
    o.targets = 3;
    const ProblemInstance p = build_localization(o);
    CHECK(p.dimension == 6);
    Vector observed = Vector::Zero(3);
    for (const auto& c : p.costs) {
        const auto& l = dynamic_cast<const LocalizationCost&>(*c);
        observed += l.mask();
        CHECK(l.distances().minCoeff() >= 0.0);
    }
    CHECK(observed.minCoeff() >= 1.0);
    Rng rng(2);
    CHECK(audit_gradients(p, rng, 20) <= 1e-5);
    CHECK(p.feasible_set->contains(*p.reference_solution, 0.0));

    // Hand-derived gradient with respect to one target.
    const LocalizationCost one(Eigen::Vector2d(0.2, 0.4), Vector::Constant(1, 0.3), Vector::Ones(1));
    Vector x(2);
    x << 0.5, 0.9;
    const double d2 = 0.3 * 0.3 + 0.5 * 0.5;
    const double factor = -4.0 * (0.3 - d2);
    CHECK(one.gradient(x)[0] == doctest::Approx(factor * 0.3));
    CHECK(one.gradient(x)[1] == doctest::Approx(factor * 0.5));
    const LocalizationCost unobserved(Eigen::Vector2d(0.2, 0.4), Vector::Constant(2, 0.3), Vector::Zero(2));
    CHECK(unobserved.gradient(Vector::Ones(4)).isZero());

    Vector truth(2);
    truth << 0.7, 0.1;
    const double d = (truth - Vector(Eigen::Vector2d(0.2, 0.4))).squaredNorm();
    const LocalizationCost exact(Eigen::Vector2d(0.2, 0.4), Vector::Constant(1, d), Vector::Ones(1));
    CHECK(exact.value(truth) == doctest::Approx(0.0));

    LocalizationOptions impossible = o;
    impossible.agents = 1;
    impossible.targets = 40;
    impossible.mask_retries = 2;
    CHECK_THROWS_AS(build_localization(impossible), GenerationError);
}

TEST_CASE("quadratic oracle") {
    QuadraticOracleOptions o;
    o.seed = 4;
    o.agents = 6;
    o.dimension = 4;
    const ProblemInstance p = build_quadratic_oracle(o);
    const Vector& x = *p.reference_solution;
    CHECK(inf_norm(p.total_gradient(x)) <= 1e-10);
    CHECK((x - stacked_solution(p)).norm() <= 1e-10);

    QuadraticOracleOptions one = o;
    one.agents = 1;
    const ProblemInstance single = build_quadratic_oracle(one);
    CHECK(inf_norm(single.costs[0]->gradient(*single.reference_solution)) <= 1e-10);

    QuadraticOracleOptions lasso = o;
    lasso.l1_weight = 0.2;
    lasso.box_radius = 0.5;
    const ProblemInstance l = build_quadratic_oracle(lasso);
    CHECK(stationarity_residual(l, *l.reference_solution) <= 1e-8);
    CHECK(l.feasible_set->contains(*l.reference_solution, 1e-12));

    QuadraticOracleOptions bad = o;
    bad.rows = 1;
    bad.rank_retries = 3;
    CHECK_THROWS_AS(build_quadratic_oracle(bad), ArgumentError);
}

TEST_CASE("regularizers and sets") {
    const L1Regularizer l1(0.5);
    Vector x(3);
    x << 1.0, -0.2, -2.0;
    const Vector p = l1.prox(x, 1.0);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == 0.0);
    CHECK(p[2] == doctest::Approx(-1.5));
    CHECK(l1.prox(x, 0.0) == x);
    CHECK_THROWS_AS(L1Regularizer(-1.0), ArgumentError);

    const auto box = Box::uniform(3, -1.0, 1.0);
    const Vector proj = box->project(Vector::Constant(3, 4.0));
    CHECK(proj == Vector::Ones(3));
    CHECK(box->project(proj) == proj);
    CHECK(box->contains(proj, 0.0));
    CHECK_FALSE(box->contains(Vector::Constant(3, 1.5), 0.0));
    CHECK_THROWS_AS(Box(Vector::Ones(2), Vector::Zero(2)), ArgumentError);

    // Nonexpansiveness on random pairs.
    Rng rng(8);
    for (int t = 0; t < 50; ++t) {
        const Vector a = testing_support::random_vector(rng, 3, 3.0);
        const Vector b = testing_support::random_vector(rng, 3, 3.0);
        CHECK((box->project(a) - box->project(b)).norm() <= (a - b).norm() + 1e-15);
        CHECK((l1.prox(a, 0.7) - l1.prox(b, 0.7)).norm() <= (a - b).norm() + 1e-15);
        const Vector s = box->sample(3, rng);
        CHECK(box->contains(s, 0.0));
    }
    const Vector cp = composite_prox(l1, *box, x * 3.0, 1.0);
    CHECK(cp[0] == 1.0);
    CHECK(cp[2] == -1.0);
}

TEST_CASE("problem validation and text round trip") {
    QuadraticOracleOptions q;
    q.seed = 2;
    q.agents = 3;
    q.dimension = 3;
    q.l1_weight = 0.1;
    q.box_radius = 2.0;
    HuberOptions h;
    h.agents = 3;
    h.dimension = 5;
    h.measurements = 4;
    LocalizationOptions l;
    l.agents = 4;
    l.targets = 2;
    for (const ProblemInstance& p : {build_quadratic_oracle(q), build_huber_regression(h), build_localization(l)}) {
        std::stringstream buffer;
        write_problem(buffer, p);
        const ProblemInstance back = read_problem(buffer);
        CHECK(back.agent_count == p.agent_count);
        CHECK(back.dimension == p.dimension);
        Rng rng(5);
        for (int t = 0; t < 5; ++t) {
            const Vector x = p.feasible_set->sample(p.dimension, rng);
            CHECK(back.objective(x) == p.objective(x));
            CHECK(back.total_gradient(x) == p.total_gradient(x));
        }
        CHECK(back.reference_solution.has_value() == p.reference_solution.has_value());
    }
    std::stringstream bad("sonata-problem 7\n");
    CHECK_THROWS_AS(read_problem(bad), ArgumentError);

    ProblemInstance broken = build_quadratic_oracle(q);
    broken.dimension = 4;
    CHECK_THROWS_AS(broken.validate(), ArgumentError);
}

TEST_CASE("stationarity residual on a smooth problem is the gradient norm") {
    QuadraticOracleOptions q;
    q.seed = 12;
    const ProblemInstance p = build_quadratic_oracle(q);
    Rng rng(3);
    for (int t = 0; t < 10; ++t) {
        const Vector x = testing_support::random_vector(rng, p.dimension);
        CHECK(stationarity_residual(p, x) == doctest::Approx(inf_norm(p.total_gradient(x))));
    }
}

TEST_CASE("centralized proximal gradient reports failure to converge") {
    QuadraticOracleOptions q;
    q.seed = 5;
    q.l1_weight = 0.3;
    const ProblemInstance p = build_quadratic_oracle(q);
    CHECK_THROWS_AS(centralized_proximal_gradient(p, Vector::Zero(static_cast<Eigen::Index>(p.dimension)), 10.0, 1e-14, 3),
                    ConvergenceError);
}
