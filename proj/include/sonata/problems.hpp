#pragma once

// Problem instances: minimize sum_i f_i(x) + G(x) over x in K.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sonata/rng.hpp"
#include "sonata/types.hpp"

namespace sonata {

/// A smooth local cost f_i with its gradient.
class SmoothCost {
public:
    virtual ~SmoothCost() = default;
    virtual std::size_t dimension() const = 0;
    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;
};

/// Adapter for ad hoc costs given as callables.
class FunctionCost final : public SmoothCost {
public:
    using ValueFn = std::function<double(const Vector&)>;
    using GradientFn = std::function<Vector(const Vector&)>;

    FunctionCost(std::size_t dimension, ValueFn value, GradientFn gradient);
    /// f = 0.
    static std::shared_ptr<const FunctionCost> zero(std::size_t dimension);

    std::size_t dimension() const override { return dimension_; }
    double value(const Vector& x) const override { return value_(x); }
    Vector gradient(const Vector& x) const override { return gradient_(x); }

private:
    std::size_t dimension_;
    ValueFn value_;
    GradientFn gradient_;
};

/// f(x) = 1/2 ||Q x - c||^2.
class QuadraticCost final : public SmoothCost {
public:
    QuadraticCost(Matrix Q, Vector c);
    std::size_t dimension() const override { return static_cast<std::size_t>(Q_.cols()); }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    const Matrix& Q() const { return Q_; }
    const Vector& c() const { return c_; }
    /// Q^T Q.
    const Matrix& hessian() const { return hessian_; }

private:
    Matrix Q_;
    Vector c_;
    Matrix hessian_;
};

/// Huber loss: r^2 for |r| <= c, c (2|r| - c) beyond. C^1 with slope 2c at the knee.
double huber_value(double r, double c);
double huber_derivative(double r, double c);

/// f(x) = sum_j h(a_j^T x - b_j), rows a_j of A.
class HuberCost final : public SmoothCost {
public:
    HuberCost(Matrix A, Vector b, double cutoff);
    std::size_t dimension() const override { return static_cast<std::size_t>(A_.cols()); }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    Vector residuals(const Vector& x) const { return A_ * x - b_; }
    const Matrix& A() const { return A_; }
    const Vector& b() const { return b_; }
    double cutoff() const { return cutoff_; }
    /// A A^T, cached for low-rank solves.
    const Matrix& gram() const { return gram_; }

private:
    Matrix A_;
    Vector b_;
    double cutoff_;
    Matrix gram_;
};

/// f(x) = sum_t p_t (d_t - ||x_t - s||^2)^2 where x stacks the T target
/// positions x_t in R^2.
class LocalizationCost final : public SmoothCost {
public:
    LocalizationCost(Eigen::Vector2d sensor, Vector distances, Vector mask);
    std::size_t dimension() const override { return 2 * target_count(); }
    std::size_t target_count() const { return static_cast<std::size_t>(distances_.size()); }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    const Eigen::Vector2d& sensor() const { return sensor_; }
    const Vector& distances() const { return distances_; }
    const Vector& mask() const { return mask_; }

private:
    Eigen::Vector2d sensor_;
    Vector distances_;
    Vector mask_;
};

/// Convex, possibly nonsmooth G.
class Regularizer {
public:
    virtual ~Regularizer() = default;
    virtual double value(const Vector& x) const = 0;
    /// argmin_u weight * G(u) + 1/2 ||u - x||^2.
    virtual Vector prox(const Vector& x, double weight) const = 0;
    virtual bool is_zero() const { return false; }
    /// True when G is a sum of per-coordinate terms.
    virtual bool is_separable() const { return false; }
    virtual std::string describe() const = 0;
};

class ZeroRegularizer final : public Regularizer {
public:
    double value(const Vector&) const override { return 0.0; }
    Vector prox(const Vector& x, double) const override { return x; }
    bool is_zero() const override { return true; }
    bool is_separable() const override { return true; }
    std::string describe() const override { return "zero"; }
};

/// lambda ||x||_1.
class L1Regularizer final : public Regularizer {
public:
    explicit L1Regularizer(double lambda);
    double value(const Vector& x) const override { return lambda_ * x.lpNorm<1>(); }
    Vector prox(const Vector& x, double weight) const override;
    bool is_separable() const override { return true; }
    std::string describe() const override;
    double lambda() const { return lambda_; }

private:
    double lambda_;
};

/// Closed convex K.
class FeasibleSet {
public:
    virtual ~FeasibleSet() = default;
    virtual Vector project(const Vector& x) const = 0;
    virtual bool contains(const Vector& x, double tolerance = 0.0) const = 0;
    virtual bool is_whole_space() const { return false; }
    virtual bool is_separable() const { return false; }
    /// Uniform draw from K (bounded sets) or from [-1, 1]^m projected onto K.
    virtual Vector sample(std::size_t dimension, Rng& rng) const;
    virtual std::string describe() const = 0;
};

class WholeSpace final : public FeasibleSet {
public:
    Vector project(const Vector& x) const override { return x; }
    bool contains(const Vector& x, double) const override { return x.allFinite(); }
    bool is_whole_space() const override { return true; }
    bool is_separable() const override { return true; }
    std::string describe() const override { return "whole"; }
};

/// Axis-aligned box lower <= x <= upper.
class Box final : public FeasibleSet {
public:
    Box(Vector lower, Vector upper);
    static std::shared_ptr<const Box> uniform(std::size_t dimension, double lower, double upper);
    Vector project(const Vector& x) const override;
    bool contains(const Vector& x, double tolerance) const override;
    bool is_separable() const override { return true; }
    Vector sample(std::size_t dimension, Rng& rng) const override;
    std::string describe() const override { return "box"; }
    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }

private:
    Vector lower_;
    Vector upper_;
};

/// prox of (weight * G + indicator of K) at u. Exact when G = 0, K is the
/// whole space, or both are coordinate-separable; otherwise ArgumentError.
Vector composite_prox(const Regularizer& G, const FeasibleSet& K, const Vector& u, double weight);

struct ProblemInstance {
    std::string name;
    std::size_t agent_count = 0;
    std::size_t dimension = 0;
    std::vector<std::shared_ptr<const SmoothCost>> costs;
    std::shared_ptr<const Regularizer> regularizer = std::make_shared<ZeroRegularizer>();
    std::shared_ptr<const FeasibleSet> feasible_set = std::make_shared<WholeSpace>();
    /// Optional per-agent Lipschitz bounds on grad f_i.
    std::optional<Vector> lipschitz_bounds;
    /// Known minimizer or stationary point, when the generator computes one.
    std::optional<Vector> reference_solution;

    /// F(x) = sum_i f_i(x).
    double smooth_value(const Vector& x) const;
    /// U(x) = F(x) + G(x).
    double objective(const Vector& x) const;
    Vector total_gradient(const Vector& x) const;
    bool is_unconstrained_smooth() const {
        return regularizer->is_zero() && feasible_set->is_whole_space();
    }
    /// Checks dimensions and that every cost evaluates finitely on K.
    void validate() const;
};

/// ||x - composite_prox(G, K, x - grad F(x), 1)||_inf; zero exactly at
/// stationary points.
double stationarity_residual(const ProblemInstance& problem, const Vector& x);

/// Largest ||fd - grad||_inf / (1 + ||grad||_inf) over `points` random
/// feasible points and all agents, using central differences with step
/// 1e-6 (1 + |x_k|).
double audit_gradients(const ProblemInstance& problem, Rng& rng, std::size_t points = 20);
Vector finite_difference_gradient(const SmoothCost& f, const Vector& x);

struct HuberOptions {
    std::uint64_t seed = 1;
    /// Seed for the true parameter x_0; Monte-Carlo runs keep it fixed.
    std::optional<std::uint64_t> truth_seed;
    std::size_t agents = 30;
    std::size_t measurements = 20;
    std::size_t dimension = 200;
    double sigma = 0.1;
    /// Outlier standard deviation as a multiple of sigma.
    double outlier_scale = 5.0;
    /// Cutoff c as a multiple of sigma.
    double cutoff_scale = 3.0;
    /// Disable noise and outliers (x_0 becomes an exact minimizer).
    bool noiseless = false;
};

/// Robust linear regression with unit-norm Gaussian rows, x_0 uniform on
/// [-1, 1]^m, Gaussian noise and one outlier per agent. reference_solution
/// holds x_0.
ProblemInstance build_huber_regression(const HuberOptions& options);

struct LocalizationOptions {
    std::uint64_t seed = 1;
    std::size_t agents = 30;
    std::size_t targets = 5;
    double box_lower = 0.0;
    double box_upper = 1.0;
    /// Multiplies the noise standard deviation (minimum sensor-target distance).
    double noise_scale = 1.0;
    std::size_t mask_retries = 1000;
};

/// Sensor-network target localization over the unit box. reference_solution
/// holds the true target positions.
ProblemInstance build_localization(const LocalizationOptions& options);

struct QuadraticOracleOptions {
    std::uint64_t seed = 1;
    std::size_t agents = 10;
    std::size_t dimension = 5;
    /// Rows of each Q_i; 0 means 2 * dimension.
    std::size_t rows = 0;
    /// Weight of the optional lambda ||x||_1 term.
    double l1_weight = 0.0;
    /// Optional box [-box_radius, box_radius]^m.
    std::optional<double> box_radius;
    std::size_t rank_retries = 100;
};

/// f_i(x) = 1/2 ||Q_i x - c_i||^2 with Gaussian Q_i scaled so that
/// sum_i Q_i^T Q_i has eigenvalues of order one. reference_solution is the
/// global minimizer, solved directly (smooth, unconstrained) or with an
/// accelerated proximal-gradient oracle to residual 1e-12.
ProblemInstance build_quadratic_oracle(const QuadraticOracleOptions& options);

/// Centralized accelerated proximal gradient for a problem whose smooth part
/// has Lipschitz constant `lipschitz`. Stops at stationarity residual <= tol.
Vector centralized_proximal_gradient(const ProblemInstance& problem, const Vector& start, double lipschitz,
                                     double tol, std::size_t max_iterations = 200000);

/// Text serialization: a dimensions header followed by decimal matrices.
/// Supports quadratic, Huber and localization costs.
void write_problem(std::ostream& out, const ProblemInstance& problem);
ProblemInstance read_problem(std::istream& in);

}  // namespace sonata
