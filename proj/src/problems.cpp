#include "sonata/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sonata/errors.hpp"

namespace sonata {

FunctionCost::FunctionCost(std::size_t dimension, ValueFn value, GradientFn gradient)
    : dimension_(dimension), value_(std::move(value)), gradient_(std::move(gradient)) {
    if (!value_ || !gradient_) throw ArgumentError("function cost needs value and gradient callables");
}

std::shared_ptr<const FunctionCost> FunctionCost::zero(std::size_t dimension) {
    return std::make_shared<FunctionCost>(
        dimension, [](const Vector&) { return 0.0; },
        [dimension](const Vector&) { return Vector::Zero(static_cast<Eigen::Index>(dimension)).eval(); });
}

QuadraticCost::QuadraticCost(Matrix Q, Vector c) : Q_(std::move(Q)), c_(std::move(c)) {
    if (Q_.rows() != c_.size()) throw ArgumentError("quadratic cost: Q and c disagree in rows");
    hessian_ = Q_.transpose() * Q_;
}

double QuadraticCost::value(const Vector& x) const { return 0.5 * (Q_ * x - c_).squaredNorm(); }

Vector QuadraticCost::gradient(const Vector& x) const { return Q_.transpose() * (Q_ * x - c_); }

double huber_value(double r, double c) {
    const double a = std::abs(r);
    return a <= c ? r * r : c * (2.0 * a - c);
}

double huber_derivative(double r, double c) {
    if (std::abs(r) <= c) return 2.0 * r;
    return r > 0.0 ? 2.0 * c : -2.0 * c;
}

HuberCost::HuberCost(Matrix A, Vector b, double cutoff) : A_(std::move(A)), b_(std::move(b)), cutoff_(cutoff) {
    if (A_.rows() != b_.size()) throw ArgumentError("Huber cost: A and b disagree in rows");
    if (A_.rows() < 1) throw ArgumentError("Huber cost needs at least one measurement");
    if (!(cutoff_ > 0.0)) throw ArgumentError("Huber cutoff must be positive");
    gram_ = A_ * A_.transpose();
}

double HuberCost::value(const Vector& x) const {
    const Vector r = residuals(x);
    double total = 0.0;
    for (Eigen::Index j = 0; j < r.size(); ++j) total += huber_value(r(j), cutoff_);
    return total;
}

Vector HuberCost::gradient(const Vector& x) const {
    Vector r = residuals(x);
    for (Eigen::Index j = 0; j < r.size(); ++j) r(j) = huber_derivative(r(j), cutoff_);
    return A_.transpose() * r;
}

LocalizationCost::LocalizationCost(Eigen::Vector2d sensor, Vector distances, Vector mask)
    : sensor_(std::move(sensor)), distances_(std::move(distances)), mask_(std::move(mask)) {
    if (distances_.size() != mask_.size()) throw ArgumentError("localization: distances and mask disagree");
    for (Eigen::Index t = 0; t < mask_.size(); ++t) {
        if (mask_(t) != 0.0 && mask_(t) != 1.0) throw ArgumentError("localization mask must be binary");
        if (distances_(t) < 0.0) throw ArgumentError("localization distances must be nonnegative");
    }
}

double LocalizationCost::value(const Vector& x) const {
    if (x.size() != static_cast<Eigen::Index>(dimension())) throw ArgumentError("localization: bad point size");
    double total = 0.0;
    for (Eigen::Index t = 0; t < distances_.size(); ++t) {
        if (mask_(t) == 0.0) continue;
        const double gap = distances_(t) - (x.segment<2>(2 * t) - sensor_).squaredNorm();
        total += gap * gap;
    }
    return total;
}

Vector LocalizationCost::gradient(const Vector& x) const {
    if (x.size() != static_cast<Eigen::Index>(dimension())) throw ArgumentError("localization: bad point size");
    Vector g = Vector::Zero(x.size());
    for (Eigen::Index t = 0; t < distances_.size(); ++t) {
        if (mask_(t) == 0.0) continue;
        const Eigen::Vector2d diff = x.segment<2>(2 * t) - sensor_;
        const double gap = distances_(t) - diff.squaredNorm();
        g.segment<2>(2 * t) = -4.0 * gap * diff;
    }
    return g;
}

L1Regularizer::L1Regularizer(double lambda) : lambda_(lambda) {
    if (!(lambda_ >= 0.0)) throw ArgumentError("l1 weight must be nonnegative");
}

Vector L1Regularizer::prox(const Vector& x, double weight) const {
    const double t = weight * lambda_;
    Vector out(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double a = std::abs(x(k)) - t;
        out(k) = a > 0.0 ? std::copysign(a, x(k)) : 0.0;
    }
    return out;
}

std::string L1Regularizer::describe() const {
    char buffer[48];
    std::snprintf(buffer, sizeof buffer, "l1 %.17g", lambda_);
    return buffer;
}

Vector FeasibleSet::sample(std::size_t dimension, Rng& rng) const {
    Vector x(static_cast<Eigen::Index>(dimension));
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = rng.uniform(-1.0, 1.0);
    return project(x);
}

Box::Box(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size()) throw ArgumentError("box bounds disagree in size");
    if ((lower_.array() > upper_.array()).any()) throw ArgumentError("box is empty");
}

std::shared_ptr<const Box> Box::uniform(std::size_t dimension, double lower, double upper) {
    const auto m = static_cast<Eigen::Index>(dimension);
    return std::make_shared<Box>(Vector::Constant(m, lower), Vector::Constant(m, upper));
}

Vector Box::project(const Vector& x) const {
    if (x.size() != lower_.size()) throw ArgumentError("box projection: bad point size");
    return x.cwiseMax(lower_).cwiseMin(upper_);
}

bool Box::contains(const Vector& x, double tolerance) const {
    if (x.size() != lower_.size()) return false;
    return ((x.array() >= lower_.array() - tolerance) && (x.array() <= upper_.array() + tolerance)).all();
}

Vector Box::sample(std::size_t dimension, Rng& rng) const {
    if (static_cast<Eigen::Index>(dimension) != lower_.size()) throw ArgumentError("box sample: bad size");
    Vector x(lower_.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = rng.uniform(lower_(k), upper_(k));
    return x;
}

Vector composite_prox(const Regularizer& G, const FeasibleSet& K, const Vector& u, double weight) {
    if (G.is_zero()) return K.project(u);
    if (K.is_whole_space()) return G.prox(u, weight);
    if (G.is_separable() && K.is_separable()) return K.project(G.prox(u, weight));
    throw ArgumentError("no exact prox for this regularizer / set combination");
}

double ProblemInstance::smooth_value(const Vector& x) const {
    double total = 0.0;
    for (const auto& f : costs) total += f->value(x);
    return total;
}

double ProblemInstance::objective(const Vector& x) const { return smooth_value(x) + regularizer->value(x); }

Vector ProblemInstance::total_gradient(const Vector& x) const {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(dimension));
    for (const auto& f : costs) g += f->gradient(x);
    return g;
}

void ProblemInstance::validate() const {
    if (agent_count == 0 || dimension == 0) throw ArgumentError("problem needs agents and a positive dimension");
    if (costs.size() != agent_count) throw ArgumentError("one local cost per agent is required");
    if (!regularizer || !feasible_set) throw ArgumentError("problem needs a regularizer and a feasible set");
    Rng rng(0x5eed);
    const Vector x = feasible_set->sample(dimension, rng);
    for (const auto& f : costs) {
        if (!f || f->dimension() != dimension) throw ArgumentError("local cost dimension mismatch");
        if (!std::isfinite(f->value(x)) || !f->gradient(x).allFinite()) {
            throw ArgumentError("local cost is not finite on the feasible set");
        }
    }
    if (reference_solution && reference_solution->size() != static_cast<Eigen::Index>(dimension)) {
        throw ArgumentError("reference solution dimension mismatch");
    }
}

double stationarity_residual(const ProblemInstance& problem, const Vector& x) {
    const Vector g = problem.total_gradient(x);
    if (problem.is_unconstrained_smooth()) return g.lpNorm<Eigen::Infinity>();
    const Vector step = composite_prox(*problem.regularizer, *problem.feasible_set, x - g, 1.0);
    return (x - step).lpNorm<Eigen::Infinity>();
}

Vector finite_difference_gradient(const SmoothCost& f, const Vector& x) {
    Vector g(x.size());
    Vector probe = x;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double h = 1e-6 * (1.0 + std::abs(x(k)));
        probe(k) = x(k) + h;
        const double up = f.value(probe);
        probe(k) = x(k) - h;
        const double down = f.value(probe);
        probe(k) = x(k);
        g(k) = (up - down) / (2.0 * h);
    }
    return g;
}

double audit_gradients(const ProblemInstance& problem, Rng& rng, std::size_t points) {
    double worst = 0.0;
    for (std::size_t p = 0; p < points; ++p) {
        const Vector x = problem.feasible_set->sample(problem.dimension, rng);
        for (const auto& f : problem.costs) {
            const Vector analytic = f->gradient(x);
            const Vector numeric = finite_difference_gradient(*f, x);
            const double err = (analytic - numeric).lpNorm<Eigen::Infinity>() /
                               (1.0 + analytic.lpNorm<Eigen::Infinity>());
            worst = std::max(worst, err);
        }
    }
    return worst;
}

ProblemInstance build_huber_regression(const HuberOptions& options) {
    if (options.agents == 0 || options.measurements == 0 || options.dimension == 0) {
        throw ArgumentError("Huber regression sizes must be positive");
    }
    if (!(options.sigma > 0.0)) throw ArgumentError("Huber regression sigma must be positive");
    const auto m = static_cast<Eigen::Index>(options.dimension);
    const auto rows = static_cast<Eigen::Index>(options.measurements);
    const double cutoff = options.cutoff_scale * options.sigma;

    Rng truth_rng(derive_seed(options.truth_seed.value_or(options.seed), 0));
    Vector x0(m);
    for (Eigen::Index k = 0; k < m; ++k) x0(k) = truth_rng.uniform(-1.0, 1.0);

    Rng rng(derive_seed(options.seed, 1));
    ProblemInstance problem;
    problem.name = "huber";
    problem.agent_count = options.agents;
    problem.dimension = options.dimension;
    Vector lipschitz(static_cast<Eigen::Index>(options.agents));
    for (std::size_t i = 0; i < options.agents; ++i) {
        Matrix A(rows, m);
        for (Eigen::Index j = 0; j < rows; ++j) {
            for (Eigen::Index k = 0; k < m; ++k) A(j, k) = rng.normal();
            A.row(j) /= A.row(j).norm();
        }
        Vector b = A * x0;
        if (!options.noiseless) {
            for (Eigen::Index j = 0; j < rows; ++j) b(j) += options.sigma * rng.normal();
            const auto outlier = static_cast<Eigen::Index>(rng.index(options.measurements));
            b(outlier) += options.outlier_scale * options.sigma * rng.normal();
        }
        lipschitz(static_cast<Eigen::Index>(i)) =
            2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(A * A.transpose(), Eigen::EigenvaluesOnly)
                      .eigenvalues()
                      .maxCoeff();
        problem.costs.push_back(std::make_shared<HuberCost>(std::move(A), std::move(b), cutoff));
    }
    problem.lipschitz_bounds = std::move(lipschitz);
    problem.reference_solution = std::move(x0);
    return problem;
}

ProblemInstance build_localization(const LocalizationOptions& options) {
    if (options.agents == 0 || options.targets == 0) throw ArgumentError("localization sizes must be positive");
    if (!(options.box_lower < options.box_upper)) throw ArgumentError("localization box is empty");
    const std::size_t I = options.agents;
    const std::size_t T = options.targets;
    Rng rng(derive_seed(options.seed, 2));
    auto draw_point = [&] {
        return Eigen::Vector2d(rng.uniform(options.box_lower, options.box_upper),
                               rng.uniform(options.box_lower, options.box_upper));
    };
    std::vector<Eigen::Vector2d> sensors(I);
    for (auto& s : sensors) s = draw_point();
    Vector truth(static_cast<Eigen::Index>(2 * T));
    for (std::size_t t = 0; t < T; ++t) truth.segment<2>(static_cast<Eigen::Index>(2 * t)) = draw_point();

    Matrix mask(static_cast<Eigen::Index>(I), static_cast<Eigen::Index>(T));
    bool covered = false;
    for (std::size_t attempt = 0; attempt <= options.mask_retries && !covered; ++attempt) {
        for (Eigen::Index i = 0; i < mask.rows(); ++i)
            for (Eigen::Index t = 0; t < mask.cols(); ++t) mask(i, t) = rng.bernoulli(0.5) ? 1.0 : 0.0;
        covered = (mask.colwise().sum().array() > 0.0).all();
    }
    if (!covered) throw GenerationError("could not draw a mask that observes every target");

    double min_distance = std::numeric_limits<double>::infinity();
    for (const auto& s : sensors)
        for (std::size_t t = 0; t < T; ++t)
            min_distance = std::min(min_distance, (truth.segment<2>(static_cast<Eigen::Index>(2 * t)) - s).norm());
    const double noise_std = options.noise_scale * min_distance;

    ProblemInstance problem;
    problem.name = "localization";
    problem.agent_count = I;
    problem.dimension = 2 * T;
    for (std::size_t i = 0; i < I; ++i) {
        Vector d(static_cast<Eigen::Index>(T));
        for (std::size_t t = 0; t < T; ++t) {
            const double exact = (truth.segment<2>(static_cast<Eigen::Index>(2 * t)) - sensors[i]).squaredNorm();
            d(static_cast<Eigen::Index>(t)) = std::max(0.0, exact + noise_std * rng.normal());
        }
        problem.costs.push_back(
            std::make_shared<LocalizationCost>(sensors[i], std::move(d), mask.row(static_cast<Eigen::Index>(i)).transpose()));
    }
    problem.feasible_set = Box::uniform(2 * T, options.box_lower, options.box_upper);
    problem.reference_solution = std::move(truth);
    return problem;
}

Vector centralized_proximal_gradient(const ProblemInstance& problem, const Vector& start, double lipschitz,
                                     double tol, std::size_t max_iterations) {
    const double step = 1.0 / lipschitz;
    const Regularizer& G = *problem.regularizer;
    const FeasibleSet& K = *problem.feasible_set;
    Vector x = composite_prox(G, K, start, step);
    Vector extrapolated = x;
    double momentum = 1.0;
    for (std::size_t k = 0; k < max_iterations; ++k) {
        if (stationarity_residual(problem, x) <= tol) return x;
        const Vector next = composite_prox(G, K, extrapolated - step * problem.total_gradient(extrapolated), step);
        const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        if ((extrapolated - next).dot(next - x) > 0.0) {
            momentum = 1.0;
            extrapolated = next;
        } else {
            extrapolated = next + ((momentum - 1.0) / next_momentum) * (next - x);
            momentum = next_momentum;
        }
        x = next;
    }
    throw ConvergenceError("centralized proximal gradient hit its iteration cap", stationarity_residual(problem, x));
}

ProblemInstance build_quadratic_oracle(const QuadraticOracleOptions& options) {
    if (options.agents == 0 || options.dimension == 0) throw ArgumentError("quadratic oracle sizes must be positive");
    const auto m = static_cast<Eigen::Index>(options.dimension);
    const auto rows = static_cast<Eigen::Index>(options.rows == 0 ? 2 * options.dimension : options.rows);
    if (rows < m) throw ArgumentError("quadratic oracle needs rows >= dimension for full column rank");
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows) * static_cast<double>(options.agents));

    Rng rng(derive_seed(options.seed, 3));
    ProblemInstance problem;
    problem.name = "quadratic";
    problem.agent_count = options.agents;
    problem.dimension = options.dimension;
    Matrix hessian = Matrix::Zero(m, m);
    Vector linear = Vector::Zero(m);
    Vector lipschitz(static_cast<Eigen::Index>(options.agents));
    for (std::size_t i = 0; i < options.agents; ++i) {
        Matrix Q(rows, m);
        bool full_rank = false;
        for (std::size_t attempt = 0; attempt <= options.rank_retries && !full_rank; ++attempt) {
            for (Eigen::Index r = 0; r < rows; ++r)
                for (Eigen::Index k = 0; k < m; ++k) Q(r, k) = scale * rng.normal();
            full_rank = Eigen::ColPivHouseholderQR<Matrix>(Q).rank() == m;
        }
        if (!full_rank) throw GenerationError("could not draw a full-column-rank Q_i");
        Vector c(rows);
        for (Eigen::Index r = 0; r < rows; ++r) c(r) = rng.normal();
        auto cost = std::make_shared<QuadraticCost>(std::move(Q), std::move(c));
        hessian += cost->hessian();
        linear += cost->Q().transpose() * cost->c();
        lipschitz(static_cast<Eigen::Index>(i)) =
            Eigen::SelfAdjointEigenSolver<Matrix>(cost->hessian(), Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
        problem.costs.push_back(std::move(cost));
    }
    problem.lipschitz_bounds = lipschitz;
    if (options.l1_weight > 0.0) problem.regularizer = std::make_shared<L1Regularizer>(options.l1_weight);
    if (options.box_radius) {
        if (!(*options.box_radius > 0.0)) throw ArgumentError("box radius must be positive");
        problem.feasible_set = Box::uniform(options.dimension, -*options.box_radius, *options.box_radius);
    }

    Vector solution = hessian.ldlt().solve(linear);
    if (!problem.is_unconstrained_smooth()) {
        const double L = Eigen::SelfAdjointEigenSolver<Matrix>(hessian, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
        solution = centralized_proximal_gradient(problem, solution, L, 1e-12);
    }
    problem.reference_solution = std::move(solution);
    return problem;
}

}  // namespace sonata
