#include "sonata/surrogates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sonata/errors.hpp"

namespace sonata {

Surrogate::Surrogate(Vector anchor, double strong_convexity)
    : anchor_(std::move(anchor)), strong_convexity_(strong_convexity) {
    if (!(strong_convexity_ > 0.0)) throw ArgumentError("surrogate strong convexity must be positive");
    if (!anchor_.allFinite()) throw ArgumentError("surrogate anchor must be finite");
}

std::optional<Vector> Surrogate::closed_form(const Vector&, const Regularizer&, const FeasibleSet&) const {
    return std::nullopt;
}

namespace {

void require_tau(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ArgumentError("tau must be positive and finite");
}

bool has_exact_prox(const Regularizer& G, const FeasibleSet& K) {
    return G.is_zero() || K.is_whole_space() || (G.is_separable() && K.is_separable());
}

}  // namespace

LinearizationSurrogate::LinearizationSurrogate(const SmoothCost& f, Vector anchor, double tau)
    : Surrogate(std::move(anchor), (require_tau(tau), tau)), tau_(tau) {
    if (f.dimension() != dimension()) throw ArgumentError("linearization: anchor dimension mismatch");
    anchor_value_ = f.value(this->anchor());
    anchor_gradient_ = f.gradient(this->anchor());
}

double LinearizationSurrogate::value(const Vector& x) const {
    const Vector d = x - anchor();
    return anchor_value_ + anchor_gradient_.dot(d) + 0.5 * tau_ * d.squaredNorm();
}

Vector LinearizationSurrogate::gradient(const Vector& x) const { return anchor_gradient_ + tau_ * (x - anchor()); }

std::optional<Vector> LinearizationSurrogate::closed_form(const Vector& pi, const Regularizer& G,
                                                          const FeasibleSet& K) const {
    if (!has_exact_prox(G, K)) return std::nullopt;
    return composite_prox(G, K, anchor() - (anchor_gradient_ + pi) / tau_, 1.0 / tau_);
}

PartialLinearizationSurrogate::PartialLinearizationSurrogate(std::shared_ptr<const SmoothCost> convex_part,
                                                             std::shared_ptr<const SmoothCost> nonconvex_part,
                                                             Vector anchor, double tau)
    : Surrogate(std::move(anchor), (require_tau(tau), tau)), convex_(std::move(convex_part)), tau_(tau) {
    if (!convex_ || !nonconvex_part) throw ArgumentError("partial linearization needs both parts");
    if (convex_->dimension() != dimension() || nonconvex_part->dimension() != dimension()) {
        throw ArgumentError("partial linearization: dimension mismatch");
    }
    linear_value_ = nonconvex_part->value(this->anchor());
    linear_gradient_ = nonconvex_part->gradient(this->anchor());
}

double PartialLinearizationSurrogate::value(const Vector& x) const {
    const Vector d = x - anchor();
    return convex_->value(x) + linear_value_ + linear_gradient_.dot(d) + 0.5 * tau_ * d.squaredNorm();
}

Vector PartialLinearizationSurrogate::gradient(const Vector& x) const {
    return convex_->gradient(x) + linear_gradient_ + tau_ * (x - anchor());
}

namespace {

double convexification_modulus(std::size_t block1, std::size_t block2, double tau, double epsilon) {
    if (block1 == 0) return tau;
    if (block2 == 0) return epsilon;
    return std::min(tau, epsilon);
}

}  // namespace

ConvexificationSurrogate::ConvexificationSurrogate(std::shared_ptr<const SmoothCost> f,
                                                   std::vector<std::size_t> block1,
                                                   std::vector<std::size_t> block2, Vector anchor, double tau,
                                                   double epsilon)
    : Surrogate(std::move(anchor), (require_tau(tau), require_tau(epsilon),
                                    convexification_modulus(block1.size(), block2.size(), tau, epsilon))),
      f_(std::move(f)),
      block1_(std::move(block1)),
      block2_(std::move(block2)),
      tau_(tau),
      epsilon_(epsilon) {
    if (!f_ || f_->dimension() != dimension()) throw ArgumentError("convexification: dimension mismatch");
    std::vector<int> seen(dimension(), 0);
    for (auto* block : {&block1_, &block2_}) {
        for (std::size_t k : *block) {
            if (k >= dimension()) throw ArgumentError("convexification: coordinate out of range");
            if (seen[k]++) throw ArgumentError("convexification: coordinate listed twice");
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw ArgumentError("convexification: blocks do not cover every coordinate");
    }
    anchor_gradient_ = f_->gradient(this->anchor());
}

Vector ConvexificationSurrogate::frozen(const Vector& x) const {
    Vector z = x;
    for (std::size_t k : block2_) z(static_cast<Eigen::Index>(k)) = anchor()(static_cast<Eigen::Index>(k));
    return z;
}

double ConvexificationSurrogate::value(const Vector& x) const {
    double total = f_->value(frozen(x));
    for (std::size_t k : block2_) {
        const auto i = static_cast<Eigen::Index>(k);
        const double d = x(i) - anchor()(i);
        total += anchor_gradient_(i) * d + 0.5 * tau_ * d * d;
    }
    for (std::size_t k : block1_) {
        const auto i = static_cast<Eigen::Index>(k);
        const double d = x(i) - anchor()(i);
        total += 0.5 * epsilon_ * d * d;
    }
    return total;
}

Vector ConvexificationSurrogate::gradient(const Vector& x) const {
    const Vector inner = f_->gradient(frozen(x));
    Vector g(x.size());
    for (std::size_t k : block1_) {
        const auto i = static_cast<Eigen::Index>(k);
        g(i) = inner(i) + epsilon_ * (x(i) - anchor()(i));
    }
    for (std::size_t k : block2_) {
        const auto i = static_cast<Eigen::Index>(k);
        g(i) = anchor_gradient_(i) + tau_ * (x(i) - anchor()(i));
    }
    return g;
}

HuberScaSurrogate::HuberScaSurrogate(std::shared_ptr<const HuberCost> f, Vector anchor, double tau)
    : Surrogate(std::move(anchor), (require_tau(tau), tau)), f_(std::move(f)), tau_(tau) {
    if (!f_ || f_->dimension() != dimension()) throw ArgumentError("Huber surrogate: dimension mismatch");
    const Vector r = f_->residuals(this->anchor());
    const double c = f_->cutoff();
    weights_.resize(r.size());
    offset_ = 0.0;
    for (Eigen::Index j = 0; j < r.size(); ++j) {
        const double a = std::abs(r(j));
        if (a <= c) {
            weights_(j) = 1.0;
        } else {
            weights_(j) = c / a;
            offset_ += c * a - c * c;
        }
    }
    lipschitz_ = 2.0 * weights_.maxCoeff() * f_->A().squaredNorm() + tau_;
}

double HuberScaSurrogate::value(const Vector& x) const {
    const Vector r = f_->residuals(x);
    return weights_.dot(r.cwiseAbs2()) + offset_ + 0.5 * tau_ * (x - anchor()).squaredNorm();
}

Vector HuberScaSurrogate::gradient(const Vector& x) const {
    const Vector r = f_->residuals(x);
    return 2.0 * (f_->A().transpose() * weights_.cwiseProduct(r)) + tau_ * (x - anchor());
}

std::optional<Vector> HuberScaSurrogate::closed_form(const Vector& pi, const Regularizer& G,
                                                     const FeasibleSet& K) const {
    if (!G.is_zero() || !K.is_whole_space()) return std::nullopt;
    const Matrix& A = f_->A();
    const Vector rhs = tau_ * anchor() - pi + 2.0 * (A.transpose() * weights_.cwiseProduct(f_->b()));
    Matrix M = f_->gram();
    M.diagonal().array() += (0.5 * tau_) / weights_.array();
    const Vector correction = A.transpose() * M.llt().solve(A * rhs);
    return Vector((rhs - correction) / tau_);
}

LocalizationSurrogate::LocalizationSurrogate(std::shared_ptr<const LocalizationCost> f, Vector anchor, double tau)
    : Surrogate(std::move(anchor), (require_tau(tau), tau)), f_(std::move(f)), tau_(tau) {
    if (!f_ || f_->dimension() != dimension()) throw ArgumentError("localization surrogate: dimension mismatch");
    const Eigen::Vector2d& s = f_->sensor();
    const double s2 = s.squaredNorm();
    A_ = 4.0 * s * s.transpose() + 2.0 * s2 * Eigen::Matrix2d::Identity();
    const auto T = static_cast<Eigen::Index>(f_->target_count());
    b_.resize(2, T);
    bool any = false;
    for (Eigen::Index t = 0; t < T; ++t) {
        const Eigen::Vector2d at = this->anchor().segment<2>(2 * t);
        const double d = f_->distances()(t);
        b_.col(t) = 4.0 * s2 * s - 4.0 * (at.squaredNorm() - d) * (at - s) + 8.0 * s.dot(at) * at;
        any = any || f_->mask()(t) != 0.0;
    }
    offset_ = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
        if (f_->mask()(t) == 0.0) continue;
        const Eigen::Vector2d at = this->anchor().segment<2>(2 * t);
        offset_ -= at.dot(A_ * at);
    }
    offset_ += f_->value(this->anchor());
    lipschitz_ = (any ? 12.0 * s2 : 0.0) + tau_;
}

Eigen::Vector2d LocalizationSurrogate::linear_coefficient(std::size_t target) const {
    return b_.col(static_cast<Eigen::Index>(target));
}

double LocalizationSurrogate::value(const Vector& x) const {
    double total = offset_;
    for (Eigen::Index t = 0; t < b_.cols(); ++t) {
        const Eigen::Vector2d xt = x.segment<2>(2 * t);
        const Eigen::Vector2d d = xt - anchor().segment<2>(2 * t);
        if (f_->mask()(t) != 0.0) total += xt.dot(A_ * xt) - b_.col(t).dot(d);
        total += 0.5 * tau_ * d.squaredNorm();
    }
    return total;
}

Vector LocalizationSurrogate::gradient(const Vector& x) const {
    Vector g(x.size());
    for (Eigen::Index t = 0; t < b_.cols(); ++t) {
        const Eigen::Vector2d xt = x.segment<2>(2 * t);
        Eigen::Vector2d gt = tau_ * (xt - anchor().segment<2>(2 * t));
        if (f_->mask()(t) != 0.0) gt += 2.0 * (A_ * xt) - b_.col(t);
        g.segment<2>(2 * t) = gt;
    }
    return g;
}

namespace {

/// argmin 1/2 x^T H x - h^T x over lower <= x <= upper (2-D, H positive definite).
Eigen::Vector2d box_quadratic_2d(const Eigen::Matrix2d& H, const Eigen::Vector2d& h, const Eigen::Vector2d& lower,
                                 const Eigen::Vector2d& upper) {
    const Eigen::Vector2d free = H.llt().solve(h);
    if ((free.array() >= lower.array()).all() && (free.array() <= upper.array()).all()) return free;
    auto q = [&](const Eigen::Vector2d& x) { return 0.5 * x.dot(H * x) - h.dot(x); };
    Eigen::Vector2d best = free.cwiseMax(lower).cwiseMin(upper);
    double best_value = std::numeric_limits<double>::infinity();
    for (int fixed = 0; fixed < 2; ++fixed) {
        const int other = 1 - fixed;
        for (double bound : {lower(fixed), upper(fixed)}) {
            if (!std::isfinite(bound)) continue;
            Eigen::Vector2d x;
            x(fixed) = bound;
            x(other) = std::clamp((h(other) - H(other, fixed) * bound) / H(other, other), lower(other), upper(other));
            const double v = q(x);
            if (v < best_value) {
                best_value = v;
                best = x;
            }
        }
    }
    return best;
}

}  // namespace

std::optional<Vector> LocalizationSurrogate::closed_form(const Vector& pi, const Regularizer& G,
                                                         const FeasibleSet& K) const {
    if (!G.is_zero()) return std::nullopt;
    const auto* box = dynamic_cast<const Box*>(&K);
    if (!box && !K.is_whole_space()) return std::nullopt;
    const double inf = std::numeric_limits<double>::infinity();
    Vector x(anchor().size());
    for (Eigen::Index t = 0; t < b_.cols(); ++t) {
        const bool observed = f_->mask()(t) != 0.0;
        Eigen::Matrix2d H = tau_ * Eigen::Matrix2d::Identity();
        Eigen::Vector2d h = tau_ * anchor().segment<2>(2 * t) - pi.segment<2>(2 * t);
        if (observed) {
            H += 2.0 * A_;
            h += b_.col(t);
        }
        const Eigen::Vector2d lower = box ? Eigen::Vector2d(box->lower().segment<2>(2 * t)) : Eigen::Vector2d(-inf, -inf);
        const Eigen::Vector2d upper = box ? Eigen::Vector2d(box->upper().segment<2>(2 * t)) : Eigen::Vector2d(inf, inf);
        x.segment<2>(2 * t) = box_quadratic_2d(H, h, lower, upper);
    }
    return x;
}

SurrogateKind parse_surrogate_kind(std::string_view name) {
    if (name == "linearization") return SurrogateKind::linearization;
    if (name == "partial-linearization") return SurrogateKind::partial_linearization;
    if (name == "huber-sca") return SurrogateKind::huber_sca;
    if (name == "convexification") return SurrogateKind::convexification;
    throw ArgumentError("unknown surrogate '" + std::string(name) + "'");
}

std::string_view surrogate_kind_name(SurrogateKind kind) {
    switch (kind) {
        case SurrogateKind::linearization: return "linearization";
        case SurrogateKind::partial_linearization: return "partial-linearization";
        case SurrogateKind::huber_sca: return "huber-sca";
        case SurrogateKind::convexification: return "convexification";
    }
    return "unknown";
}

SurrogateFactory make_surrogate_factory(const ProblemInstance& problem, const SurrogateOptions& options) {
    const std::size_t I = problem.agent_count;
    Vector tau = Vector::Constant(static_cast<Eigen::Index>(I), options.tau);
    if (options.agent_tau) {
        if (options.agent_tau->size() != static_cast<Eigen::Index>(I)) {
            throw ArgumentError("per-agent tau needs one entry per agent");
        }
        tau = *options.agent_tau;
    }
    for (Eigen::Index i = 0; i < tau.size(); ++i) require_tau(tau(i));
    auto costs = problem.costs;

    switch (options.kind) {
        case SurrogateKind::linearization:
            return [costs, tau](std::size_t i, const Vector& a) -> std::unique_ptr<Surrogate> {
                return std::make_unique<LinearizationSurrogate>(*costs.at(i), a, tau(static_cast<Eigen::Index>(i)));
            };
        case SurrogateKind::huber_sca: {
            std::vector<std::shared_ptr<const HuberCost>> huber;
            for (const auto& f : costs) {
                auto h = std::dynamic_pointer_cast<const HuberCost>(f);
                if (!h) throw ArgumentError("huber-sca surrogate needs Huber costs");
                huber.push_back(std::move(h));
            }
            return [huber, tau](std::size_t i, const Vector& a) -> std::unique_ptr<Surrogate> {
                return std::make_unique<HuberScaSurrogate>(huber.at(i), a, tau(static_cast<Eigen::Index>(i)));
            };
        }
        case SurrogateKind::partial_linearization: {
            for (const auto& f : costs) {
                const bool supported = std::dynamic_pointer_cast<const LocalizationCost>(f) ||
                                       std::dynamic_pointer_cast<const QuadraticCost>(f) ||
                                       std::dynamic_pointer_cast<const HuberCost>(f);
                if (!supported) throw ArgumentError("partial linearization is not defined for this cost");
            }
            auto zero = FunctionCost::zero(problem.dimension);
            return [costs, tau, zero](std::size_t i, const Vector& a) -> std::unique_ptr<Surrogate> {
                const double t = tau(static_cast<Eigen::Index>(i));
                if (auto loc = std::dynamic_pointer_cast<const LocalizationCost>(costs.at(i))) {
                    return std::make_unique<LocalizationSurrogate>(std::move(loc), a, t);
                }
                return std::make_unique<PartialLinearizationSurrogate>(costs.at(i), zero, a, t);
            };
        }
        case SurrogateKind::convexification: {
            std::vector<std::size_t> block1 = options.convex_block;
            if (block1.empty()) {
                for (std::size_t k = 0; k < (problem.dimension + 1) / 2; ++k) block1.push_back(k);
            }
            std::vector<char> in_block1(problem.dimension, 0);
            for (std::size_t k : block1) {
                if (k >= problem.dimension) throw ArgumentError("convexification: coordinate out of range");
                in_block1[k] = 1;
            }
            std::vector<std::size_t> block2;
            for (std::size_t k = 0; k < problem.dimension; ++k)
                if (!in_block1[k]) block2.push_back(k);
            const double epsilon = options.epsilon;
            return [costs, tau, block1, block2, epsilon](std::size_t i, const Vector& a) -> std::unique_ptr<Surrogate> {
                return std::make_unique<ConvexificationSurrogate>(costs.at(i), block1, block2, a,
                                                                  tau(static_cast<Eigen::Index>(i)), epsilon);
            };
        }
    }
    throw ArgumentError("unknown surrogate kind");
}

}  // namespace sonata
