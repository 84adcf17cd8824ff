#include <cmath>

#include "sonata/errors.hpp"
#include "sonata/surrogates.hpp"

namespace sonata {
namespace {

Vector prox_step(const SubproblemSpec& spec, const Vector& u, double weight) {
    return composite_prox(spec.regularizer, spec.feasible_set, u, weight);
}

/// Largest curvature of the surrogate near its anchor by power iteration on
/// gradient differences.
double estimate_lipschitz(const Surrogate& s) {
    const Vector& a = s.anchor();
    const Eigen::Index m = a.size();
    const double h = 1e-4 * (1.0 + a.lpNorm<Eigen::Infinity>());
    const Vector base = s.gradient(a);
    Vector v(m);
    for (Eigen::Index k = 0; k < m; ++k) v(k) = 1.0 + 0.1 * static_cast<double>(k % 7);
    v.normalize();
    double estimate = s.strong_convexity();
    for (int it = 0; it < 20; ++it) {
        Vector w = (s.gradient(a + h * v) - base) / h;
        const double norm = w.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) break;
        estimate = std::max(estimate, norm);
        v = w / norm;
    }
    return 1.1 * estimate;
}

}  // namespace

double subproblem_residual(const SubproblemSpec& spec, const Vector& x) {
    const Vector g = spec.surrogate.gradient(x) + spec.pi;
    return (x - prox_step(spec, x - g, 1.0)).lpNorm<Eigen::Infinity>();
}

Vector solve_subproblem_iterative(const SubproblemSpec& spec, const Vector& start, const InnerSolverOptions& options) {
    const Surrogate& s = spec.surrogate;
    if (start.size() != static_cast<Eigen::Index>(s.dimension()) || spec.pi.size() != start.size()) {
        throw ArgumentError("subproblem: dimension mismatch");
    }
    const std::optional<double> known = s.lipschitz();
    double L = known ? *known : estimate_lipschitz(s);
    auto smooth = [&](const Vector& x) { return s.value(x) + spec.pi.dot(x); };

    Vector x = prox_step(spec, start, 1.0 / L);
    Vector y = x;
    double t = 1.0;
    for (std::size_t k = 0; k < options.max_iterations; ++k) {
        if (subproblem_residual(spec, x) <= options.tolerance) return x;
        const Vector gy = s.gradient(y) + spec.pi;
        Vector next = prox_step(spec, y - gy / L, 1.0 / L);
        if (!known) {
            const double fy = smooth(y);
            for (int tries = 0; tries < 60; ++tries) {
                const Vector d = next - y;
                const double bound = fy + gy.dot(d) + 0.5 * L * d.squaredNorm();
                if (smooth(next) <= bound + 1e-12 * (1.0 + std::abs(fy))) break;
                L *= 2.0;
                next = prox_step(spec, y - gy / L, 1.0 / L);
            }
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        if ((y - next).dot(next - x) > 0.0) {
            t = 1.0;
            y = next;
        } else {
            y = next + ((t - 1.0) / t_next) * (next - x);
            t = t_next;
        }
        x = std::move(next);
    }
    const double residual = subproblem_residual(spec, x);
    if (residual <= options.tolerance) return x;
    throw ConvergenceError("inner solver reached its iteration cap", residual);
}

Vector solve_subproblem(const SubproblemSpec& spec, const InnerSolverOptions& options) {
    if (options.allow_closed_form) {
        if (auto x = spec.surrogate.closed_form(spec.pi, spec.regularizer, spec.feasible_set)) return *x;
    }
    return solve_subproblem_iterative(spec, spec.feasible_set.project(spec.surrogate.anchor()), options);
}

}  // namespace sonata
