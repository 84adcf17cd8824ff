#pragma once

// Strongly convex surrogates of the local costs and the per-agent
// subproblem  min_x  f~(x; a) + pi^T x + G(x)  over K.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sonata/problems.hpp"
#include "sonata/types.hpp"

namespace sonata {

class Surrogate {
public:
    Surrogate(Vector anchor, double strong_convexity);
    virtual ~Surrogate() = default;

    const Vector& anchor() const { return anchor_; }
    /// Guaranteed strong convexity modulus.
    double strong_convexity() const { return strong_convexity_; }
    std::size_t dimension() const { return static_cast<std::size_t>(anchor_.size()); }

    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;
    /// Exact minimizer of value + pi^T x + G over K when one is available.
    virtual std::optional<Vector> closed_form(const Vector& pi, const Regularizer& G, const FeasibleSet& K) const;
    /// Known Lipschitz constant of the gradient, if any.
    virtual std::optional<double> lipschitz() const { return std::nullopt; }
    virtual std::string_view kind() const = 0;

private:
    Vector anchor_;
    double strong_convexity_;
};

/// f(a) + grad f(a)^T (x - a) + tau/2 ||x - a||^2.
class LinearizationSurrogate final : public Surrogate {
public:
    LinearizationSurrogate(const SmoothCost& f, Vector anchor, double tau);
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    std::optional<Vector> closed_form(const Vector& pi, const Regularizer& G, const FeasibleSet& K) const override;
    std::optional<double> lipschitz() const override { return tau_; }
    std::string_view kind() const override { return "linearization"; }
    const Vector& anchor_gradient() const { return anchor_gradient_; }

private:
    double tau_;
    double anchor_value_;
    Vector anchor_gradient_;
};

/// f1(x) + f2(a) + grad f2(a)^T (x - a) + tau/2 ||x - a||^2 with f1 convex.
class PartialLinearizationSurrogate final : public Surrogate {
public:
    PartialLinearizationSurrogate(std::shared_ptr<const SmoothCost> convex_part,
                                  std::shared_ptr<const SmoothCost> nonconvex_part, Vector anchor, double tau);
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    std::string_view kind() const override { return "partial-linearization"; }

private:
    std::shared_ptr<const SmoothCost> convex_;
    double tau_;
    double linear_value_;
    Vector linear_gradient_;
};

/// Block split x = (x1, x2): keeps f(x1, a2), linearizes in x2 with a tau
/// proximal term and adds an epsilon proximal term on x1.
class ConvexificationSurrogate final : public Surrogate {
public:
    static constexpr double default_epsilon = 1e-8;

    /// Throws ArgumentError when the blocks do not partition the coordinates.
    ConvexificationSurrogate(std::shared_ptr<const SmoothCost> f, std::vector<std::size_t> block1,
                             std::vector<std::size_t> block2, Vector anchor, double tau,
                             double epsilon = default_epsilon);
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    std::string_view kind() const override { return "convexification"; }

private:
    Vector frozen(const Vector& x) const;

    std::shared_ptr<const SmoothCost> f_;
    std::vector<std::size_t> block1_;
    std::vector<std::size_t> block2_;
    double tau_;
    double epsilon_;
    Vector anchor_gradient_;
};

/// Quadratic majorizer of a Huber cost: each residual term becomes
/// w_j r_j(x)^2 + k_j with w_j = min{1, c/|r_j(a)|}, plus tau/2 ||x - a||^2.
class HuberScaSurrogate final : public Surrogate {
public:
    HuberScaSurrogate(std::shared_ptr<const HuberCost> f, Vector anchor, double tau);
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    /// (2 A^T D A + tau I)^-1 (tau a - pi + 2 A^T D b) through the cached
    /// Gram matrix, when G = 0 and K is the whole space.
    std::optional<Vector> closed_form(const Vector& pi, const Regularizer& G, const FeasibleSet& K) const override;
    std::optional<double> lipschitz() const override { return lipschitz_; }
    std::string_view kind() const override { return "huber-sca"; }
    const Vector& weights() const { return weights_; }

private:
    std::shared_ptr<const HuberCost> f_;
    double tau_;
    Vector weights_;
    double offset_;
    double lipschitz_;
};

/// Partial linearization of the localization cost: per target
/// p_t (x_t^T A x_t - b_t^T (x_t - a_t)) + tau/2 ||x_t - a_t||^2 with
/// A = 4 s s^T + 2 ||s||^2 I.
class LocalizationSurrogate final : public Surrogate {
public:
    LocalizationSurrogate(std::shared_ptr<const LocalizationCost> f, Vector anchor, double tau);
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    /// Exact per-target 2x2 box-constrained quadratic solve when G = 0 and K
    /// is a box or the whole space.
    std::optional<Vector> closed_form(const Vector& pi, const Regularizer& G, const FeasibleSet& K) const override;
    std::optional<double> lipschitz() const override { return lipschitz_; }
    std::string_view kind() const override { return "localization-pl"; }
    const Eigen::Matrix2d& curvature() const { return A_; }
    Eigen::Vector2d linear_coefficient(std::size_t target) const;

private:
    std::shared_ptr<const LocalizationCost> f_;
    double tau_;
    Eigen::Matrix2d A_;
    Matrix b_;
    double offset_;
    double lipschitz_;
};

struct SubproblemSpec {
    const Surrogate& surrogate;
    Vector pi;
    const Regularizer& regularizer;
    const FeasibleSet& feasible_set;
};

struct InnerSolverOptions {
    double tolerance = 1e-10;
    std::size_t max_iterations = 10000;
    bool allow_closed_form = true;
};

/// ||x - composite_prox(G, K, x - (grad f~(x) + pi), 1)||_inf.
double subproblem_residual(const SubproblemSpec& spec, const Vector& x);

/// Closed form when the surrogate offers one, otherwise accelerated
/// proximal gradient with restart. Throws ConvergenceError at the cap.
Vector solve_subproblem(const SubproblemSpec& spec, const InnerSolverOptions& options = {});
/// Inner solver only, from a given start.
Vector solve_subproblem_iterative(const SubproblemSpec& spec, const Vector& start,
                                  const InnerSolverOptions& options = {});

enum class SurrogateKind { linearization, partial_linearization, huber_sca, convexification };

SurrogateKind parse_surrogate_kind(std::string_view name);
std::string_view surrogate_kind_name(SurrogateKind kind);

struct SurrogateOptions {
    SurrogateKind kind = SurrogateKind::linearization;
    double tau = 1.0;
    /// Per-agent tau_i overriding `tau`.
    std::optional<Vector> agent_tau;
    /// Convexification: coordinates kept exactly; the rest are linearized.
    /// Empty means the first half of the coordinates.
    std::vector<std::size_t> convex_block;
    double epsilon = ConvexificationSurrogate::default_epsilon;
};

/// (agent, anchor) -> surrogate of f_agent at anchor.
using SurrogateFactory = std::function<std::unique_ptr<Surrogate>(std::size_t agent, const Vector& anchor)>;

/// Checks that `options.kind` applies to every cost of `problem`:
/// huber-sca needs Huber costs; partial linearization needs quadratic,
/// Huber or localization costs.
SurrogateFactory make_surrogate_factory(const ProblemInstance& problem, const SurrogateOptions& options);

}  // namespace sonata
