#include "sonata/engine.hpp"

#include <cmath>
#include <exception>

#include "sonata/errors.hpp"
#include "sonata/kernels.hpp"

namespace sonata {

Direction parse_direction(std::string_view name) {
    if (name == "atc" || name == "ATC") return Direction::atc;
    if (name == "cta" || name == "CTA") return Direction::cta;
    throw ArgumentError("unknown direction '" + std::string(name) + "'");
}

std::string_view direction_name(Direction direction) { return direction == Direction::atc ? "atc" : "cta"; }

StepSizeSchedule StepSizeSchedule::polynomial(double alpha0, double beta) {
    return StepSizeSchedule(Kind::polynomial, alpha0, beta, 0.0);
}

StepSizeSchedule StepSizeSchedule::recursive(double alpha0, double mu) {
    return StepSizeSchedule(Kind::recursive, alpha0, 0.0, mu);
}

StepSizeSchedule StepSizeSchedule::constant(double alpha) { return StepSizeSchedule(Kind::constant, alpha, 0.0, 0.0); }

void StepSizeSchedule::validate() const {
    switch (kind_) {
        case Kind::polynomial:
            if (!(alpha0_ > 0.0 && alpha0_ <= 1.0)) throw ArgumentError("alpha0 must lie in (0, 1]");
            if (!(beta_ > 0.5 && beta_ <= 1.0)) throw ArgumentError("beta must lie in (0.5, 1]");
            break;
        case Kind::recursive:
            if (!(alpha0_ > 0.0 && alpha0_ <= 1.0)) throw ArgumentError("alpha[0] must lie in (0, 1]");
            if (!(mu_ > 0.0 && mu_ < 1.0)) throw ArgumentError("mu must lie in (0, 1)");
            break;
        case Kind::constant:
            if (!(alpha0_ >= 0.0 && alpha0_ <= 1.0)) throw ArgumentError("constant alpha must lie in [0, 1]");
            break;
    }
}

std::vector<double> StepSizeSchedule::sequence(std::size_t count) const {
    std::vector<double> out;
    out.reserve(count);
    StepSizeCursor cursor(*this);
    for (std::size_t n = 0; n < count; ++n, cursor.advance()) out.push_back(cursor.value());
    return out;
}

std::string_view schedule_kind_name(StepSizeSchedule::Kind kind) {
    switch (kind) {
        case StepSizeSchedule::Kind::polynomial: return "polynomial";
        case StepSizeSchedule::Kind::recursive: return "recursive";
        case StepSizeSchedule::Kind::constant: return "constant";
    }
    return "unknown";
}

StepSizeCursor::StepSizeCursor(const StepSizeSchedule& schedule) : schedule_(schedule), value_(schedule.alpha0()) {
    schedule_.validate();
}

void StepSizeCursor::advance() {
    ++n_;
    switch (schedule_.kind()) {
        case StepSizeSchedule::Kind::polynomial:
            value_ = schedule_.alpha0() / std::pow(static_cast<double>(n_ + 1), schedule_.beta());
            break;
        case StepSizeSchedule::Kind::recursive:
            value_ = value_ * (1.0 - schedule_.mu() * value_);
            break;
        case StepSizeSchedule::Kind::constant:
            break;
    }
}

std::vector<AgentState> initialize(const ProblemInstance& problem, const std::vector<Vector>& x0, TrackerInit init,
                                   bool project) {
    const std::size_t I = problem.agent_count;
    if (x0.size() != I) throw ArgumentError("one starting point per agent is required");
    std::vector<AgentState> states(I);
    Vector total = Vector::Zero(static_cast<Eigen::Index>(problem.dimension));
    for (std::size_t i = 0; i < I; ++i) {
        if (x0[i].size() != static_cast<Eigen::Index>(problem.dimension)) {
            throw ArgumentError("starting point dimension mismatch");
        }
        AgentState& s = states[i];
        if (problem.feasible_set->contains(x0[i], 1e-12)) {
            s.x = x0[i];
        } else if (project) {
            s.x = problem.feasible_set->project(x0[i]);
        } else {
            throw ArgumentError("starting point of agent " + std::to_string(i) + " is infeasible");
        }
        s.v = s.x;
        s.phi = 1.0;
        s.last_grad = problem.costs[i]->gradient(s.x);
        total += s.last_grad;
    }
    const double scale = static_cast<double>(I);
    for (auto& s : states) {
        s.y = init == TrackerInit::local_gradient ? s.last_grad : Vector(total / scale);
        s.pi_tilde = scale * s.y - s.last_grad;
    }
    return states;
}

Vector local_sca_step(AgentState& state, std::size_t agent, const ProblemInstance& problem,
                      const SurrogateFactory& surrogate, double alpha, const InnerSolverOptions& inner) {
    const auto model = surrogate(agent, state.x);
    const SubproblemSpec spec{*model, state.pi_tilde, *problem.regularizer, *problem.feasible_set};
    Vector x_tilde = solve_subproblem(spec, inner);
    state.v.resize(state.x.size());
    kernels::lerp(view(state.x), view(x_tilde), alpha, view(state.v));
    return x_tilde;
}

Vector consensus_step(std::vector<AgentState>& states, const MixingMatrix& A, Direction direction) {
    const auto I = static_cast<Eigen::Index>(states.size());
    if (A.entries.rows() != I || A.entries.cols() != I) throw ArgumentError("mixing matrix size mismatch");
    Vector phi_old(I);
    for (Eigen::Index i = 0; i < I; ++i) phi_old(i) = states[static_cast<std::size_t>(i)].phi;
    const Vector phi_new = update_phi(A, phi_old);
    const Matrix W = induced_row_matrix(A, phi_old, phi_new);

    std::vector<Vector> next(states.size());
    for (Eigen::Index i = 0; i < I; ++i) {
        const AgentState& si = states[static_cast<std::size_t>(i)];
        Vector acc = Vector::Zero(si.x.size());
        for (Eigen::Index j = 0; j < I; ++j) {
            const double w = W(i, j);
            if (w == 0.0) continue;
            const AgentState& sj = states[static_cast<std::size_t>(j)];
            kernels::axpy(w, view(direction == Direction::atc ? sj.v : sj.x), view(acc));
        }
        if (direction == Direction::cta) {
            kernels::axpy(1.0, view(si.v), view(acc));
            kernels::axpy(-1.0, view(si.x), view(acc));
        }
        next[static_cast<std::size_t>(i)] = std::move(acc);
    }
    for (Eigen::Index i = 0; i < I; ++i) {
        auto& s = states[static_cast<std::size_t>(i)];
        s.x = std::move(next[static_cast<std::size_t>(i)]);
        s.phi = phi_new(i);
    }
    return phi_old;
}

void tracking_step(std::vector<AgentState>& states, const MixingMatrix& A, const Vector& phi_old,
                   const ProblemInstance& problem) {
    const auto I = static_cast<Eigen::Index>(states.size());
    const double scale = static_cast<double>(I);
    std::vector<Vector> next(states.size());
    std::vector<Vector> grads(states.size());
    for (Eigen::Index i = 0; i < I; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const AgentState& si = states[k];
        if (!(si.phi >= phi_underflow_floor)) throw NumericalUnderflowError("consensus weight underflow");
        Vector acc = Vector::Zero(si.y.size());
        for (Eigen::Index j = 0; j < I; ++j) {
            const double a = A.entries(i, j);
            if (a == 0.0) continue;
            kernels::axpy(a * phi_old(j), view(states[static_cast<std::size_t>(j)].y), view(acc));
        }
        grads[k] = problem.costs[k]->gradient(si.x);
        kernels::axpy(1.0, view(grads[k]), view(acc));
        kernels::axpy(-1.0, view(si.last_grad), view(acc));
        kernels::scale(1.0 / si.phi, view(acc));
        next[k] = std::move(acc);
    }
    for (std::size_t k = 0; k < states.size(); ++k) {
        auto& s = states[k];
        s.y = std::move(next[k]);
        s.last_grad = std::move(grads[k]);
        s.pi_tilde = scale * s.y - s.last_grad;
    }
}

Matrix stack_x(const std::vector<AgentState>& states) {
    Matrix X(static_cast<Eigen::Index>(states.size()), states.empty() ? 0 : states.front().x.size());
    for (std::size_t i = 0; i < states.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = states[i].x.transpose();
    return X;
}

Matrix stack_y(const std::vector<AgentState>& states) {
    Matrix Y(static_cast<Eigen::Index>(states.size()), states.empty() ? 0 : states.front().y.size());
    for (std::size_t i = 0; i < states.size(); ++i) Y.row(static_cast<Eigen::Index>(i)) = states[i].y.transpose();
    return Y;
}

Vector stack_phi(const std::vector<AgentState>& states) {
    Vector phi(static_cast<Eigen::Index>(states.size()));
    for (std::size_t i = 0; i < states.size(); ++i) phi(static_cast<Eigen::Index>(i)) = states[i].phi;
    return phi;
}

void validate_config(const ProblemInstance& problem, const DigraphSequence& graphs, const IterationConfig& config) {
    problem.validate();
    if (graphs.vertex_count() != problem.agent_count) throw ArgumentError("graph size differs from agent count");
    if (config.max_iterations < 1) throw ArgumentError("max_iterations must be at least 1");
    if (!config.surrogate) throw ArgumentError("a surrogate factory is required");
    config.schedule.validate();
    if (config.direction == Direction::cta && !problem.feasible_set->is_whole_space()) {
        throw ArgumentError("CTA updates are only supported without constraints");
    }
    if (config.agent_step_sizes) {
        const Vector& a = *config.agent_step_sizes;
        if (a.size() != static_cast<Eigen::Index>(problem.agent_count)) {
            throw ArgumentError("per-agent step sizes need one entry per agent");
        }
        if ((a.array() < 0.0).any() || (a.array() > 1.0).any()) {
            throw ArgumentError("per-agent step sizes must lie in [0, 1]");
        }
    }
    if (config.inner.tolerance <= 0.0 || config.inner.max_iterations == 0) {
        throw ArgumentError("inner solver needs a positive tolerance and iteration cap");
    }
}

std::size_t round_transmissions(const Digraph& g, std::size_t vectors) {
    return g.edges().size() * vectors;
}

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const ArgumentError*>(&e)) return "argument";
    if (dynamic_cast<const StateCorruptionError*>(&e)) return "state-corruption";
    if (dynamic_cast<const NumericalUnderflowError*>(&e)) return "numerical-underflow";
    if (dynamic_cast<const ConvergenceError*>(&e)) return "convergence";
    if (dynamic_cast<const GenerationError*>(&e)) return "generation";
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    return "runtime";
}

namespace {

bool should_stop(const Termination& t, const IterationMetrics& m) {
    return t.enabled && m.J <= t.J && m.D <= t.D;
}

}  // namespace

RunRecord run(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
              const IterationConfig& config, const std::vector<Vector>& x0) {
    validate_config(problem, graphs, config);
    auto states = initialize(problem, x0, config.tracker_init, config.project_initial);
    const std::size_t I = problem.agent_count;

    RunRecord record;
    record.variant = config.name;
    StepSizeCursor cursor(config.schedule);
    std::size_t transmissions = 0;

    auto snapshot = [&](std::size_t n, double alpha) {
        const Matrix X = stack_x(states);
        Vector gsum = Vector::Zero(static_cast<Eigen::Index>(problem.dimension));
        for (const auto& s : states) gsum += s.last_grad;
        IterationMetrics m = observe(problem, n, alpha, X, stack_phi(states), stack_y(states), gsum);
        m.transmissions = transmissions;
        record.metrics.push_back(m);
        if (config.record_trajectory) record.trajectory.push_back(X);
    };

    snapshot(0, cursor.value());
    try {
        for (std::size_t n = 0; n < config.max_iterations; ++n) {
            if (n > 0 && should_stop(config.termination, record.metrics.back())) {
                record.status = RunStatus::terminated;
                break;
            }
            const Digraph g = graphs.at(n);
            const MixingMatrix A = build_mixing(rule, g);
            if (config.check_mixing && !validate_assumption_d(A.entries, g, A.kappa)) {
                throw StateCorruptionError("mixing matrix violates its column-stochastic contract");
            }
            record.realized_kappa = std::min(record.realized_kappa, realized_kappa(A.entries));

            const double alpha = cursor.value();
            const Vector phi_old = stack_phi(states);
            const Vector phi_new = A.entries * phi_old;
            for (std::size_t i = 0; i < I; ++i) {
                const auto k = static_cast<Eigen::Index>(i);
                double a = config.agent_step_sizes ? (*config.agent_step_sizes)(k) : alpha;
                if (config.agent_step_rule) a = (*config.agent_step_rule)(i, a, phi_old(k), phi_new(k));
                if (!problem.feasible_set->is_whole_space() && !(a >= 0.0 && a <= 1.0)) {
                    throw ArgumentError("agent step size outside [0, 1] on a constrained problem");
                }
                local_sca_step(states[i], i, problem, config.surrogate, a, config.inner);
            }
            const Vector old = consensus_step(states, A, config.direction);
            tracking_step(states, A, old, problem);
            transmissions += round_transmissions(g, 2);
            cursor.advance();
            snapshot(n + 1, cursor.value());
        }
    } catch (const std::exception& e) {
        record.status = RunStatus::failed;
        record.error_kind = error_kind(e);
        record.error_message = e.what();
    }
    record.final_x = stack_x(states);
    record.final_phi = stack_phi(states);
    return record;
}

std::vector<Vector> random_start(const ProblemInstance& problem, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x5741));
    std::vector<Vector> x0;
    for (std::size_t i = 0; i < problem.agent_count; ++i) x0.push_back(problem.feasible_set->sample(problem.dimension, rng));
    return x0;
}

RunRecord run(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
              const IterationConfig& config, std::uint64_t seed) {
    return run(problem, graphs, rule, config, random_start(problem, seed));
}

}  // namespace sonata
