#pragma once

// The SONATA iteration: local SCA step, push-sum consensus on x and phi,
// and gradient tracking, over a sequence of column-stochastic matrices.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sonata/digraph.hpp"
#include "sonata/metrics.hpp"
#include "sonata/mixing.hpp"
#include "sonata/problems.hpp"
#include "sonata/surrogates.hpp"

namespace sonata {

/// Adapt-then-combine or combine-then-adapt.
enum class Direction { atc, cta };

Direction parse_direction(std::string_view name);
std::string_view direction_name(Direction direction);

class StepSizeSchedule {
public:
    enum class Kind { polynomial, recursive, constant };

    /// alpha[n] = alpha0 / (n + 1)^beta.
    static StepSizeSchedule polynomial(double alpha0, double beta);
    /// alpha[n] = alpha[n-1] (1 - mu alpha[n-1]).
    static StepSizeSchedule recursive(double alpha0, double mu);
    static StepSizeSchedule constant(double alpha);

    Kind kind() const { return kind_; }
    double alpha0() const { return alpha0_; }
    double beta() const { return beta_; }
    double mu() const { return mu_; }

    /// Throws ArgumentError naming the violated range.
    void validate() const;
    /// alpha[0], ..., alpha[count - 1].
    std::vector<double> sequence(std::size_t count) const;

private:
    StepSizeSchedule(Kind kind, double alpha0, double beta, double mu)
        : kind_(kind), alpha0_(alpha0), beta_(beta), mu_(mu) {}

    Kind kind_;
    double alpha0_;
    double beta_;
    double mu_;
};

std::string_view schedule_kind_name(StepSizeSchedule::Kind kind);

/// Iterates a schedule one step at a time.
class StepSizeCursor {
public:
    explicit StepSizeCursor(const StepSizeSchedule& schedule);
    double value() const { return value_; }
    std::size_t index() const { return n_; }
    void advance();

private:
    StepSizeSchedule schedule_;
    std::size_t n_ = 0;
    double value_;
};

struct AgentState {
    Vector x;
    Vector v;
    Vector y;
    double phi = 1.0;
    Vector pi_tilde;
    Vector last_grad;
};

enum class TrackerInit {
    /// y_i[0] = grad f_i(x_i[0]).
    local_gradient,
    /// y_i[0] = (1/I) sum_j grad f_j(x_j[0]): a warm start that keeps
    /// consensual stationary points fixed.
    average_gradient
};

struct Termination {
    bool enabled = true;
    double J = 1e-6;
    double D = 1e-8;
};

/// Maps the shared step alpha[n] to agent i's step, given phi_i[n] and phi_i[n+1].
using AgentStepRule = std::function<double(std::size_t agent, double alpha, double phi_old, double phi_new)>;

struct IterationConfig {
    std::string name = "sonata";
    Direction direction = Direction::atc;
    SurrogateFactory surrogate;
    StepSizeSchedule schedule = StepSizeSchedule::polynomial(0.1, 1.0);
    /// Constant per-agent steps; replaces the schedule when set.
    std::optional<Vector> agent_step_sizes;
    std::optional<AgentStepRule> agent_step_rule;
    std::size_t max_iterations = 1000;
    Termination termination;
    TrackerInit tracker_init = TrackerInit::local_gradient;
    InnerSolverOptions inner;
    /// Project infeasible starting points instead of rejecting them.
    bool project_initial = false;
    bool record_trajectory = false;
    /// Re-check Assumption D on every generated matrix.
    bool check_mixing = true;
};

/// phi_i = 1, y_i per `init`, pi~_i = I y_i - grad f_i(x_i).
std::vector<AgentState> initialize(const ProblemInstance& problem, const std::vector<Vector>& x0,
                                   TrackerInit init = TrackerInit::local_gradient, bool project = false);

/// Solves the local subproblem at x_i and sets v_i = x_i + alpha (x~_i - x_i).
/// Returns x~_i.
Vector local_sca_step(AgentState& state, std::size_t agent, const ProblemInstance& problem,
                      const SurrogateFactory& surrogate, double alpha, const InnerSolverOptions& inner = {});

/// phi <- A phi and x <- W v (ATC) or W x + (v - x) (CTA). Returns the old phi.
Vector consensus_step(std::vector<AgentState>& states, const MixingMatrix& A, Direction direction);

/// y_i <- (sum_j a_ij phi_j_old y_j + grad f_i(x_i) - last_grad_i) / phi_i,
/// then pi~_i = I y_i - grad f_i(x_i). Expects consensus_step to have run.
void tracking_step(std::vector<AgentState>& states, const MixingMatrix& A, const Vector& phi_old,
                   const ProblemInstance& problem);

/// Stacks the agents' x (or y) as rows.
Matrix stack_x(const std::vector<AgentState>& states);
Matrix stack_y(const std::vector<AgentState>& states);
Vector stack_phi(const std::vector<AgentState>& states);

/// Throws ArgumentError on an inconsistent configuration.
void validate_config(const ProblemInstance& problem, const DigraphSequence& graphs, const IterationConfig& config);

/// Runs until termination or max_iterations. Step failures end the run
/// early and are reported in the record.
RunRecord run(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
              const IterationConfig& config, const std::vector<Vector>& x0);
/// Starting points drawn from the feasible set with a generator seeded by `seed`.
RunRecord run(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
              const IterationConfig& config, std::uint64_t seed);
std::vector<Vector> random_start(const ProblemInstance& problem, std::uint64_t seed);

/// Messages sent in one round where every agent broadcasts `vectors` vectors.
std::size_t round_transmissions(const Digraph& g, std::size_t vectors);

/// Short name of the exception type for error reports.
std::string error_kind(const std::exception& e);

}  // namespace sonata
