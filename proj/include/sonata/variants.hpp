#pragma once

// Special cases and relatives of SONATA written as explicit stacked-matrix
// recursions, independent of the per-agent engine.

#include <optional>
#include <string_view>
#include <vector>

#include "sonata/engine.hpp"

namespace sonata {

enum class Algorithm {
    sonata,
    sonata_next,
    sonata_l,
    sonata_next_l,
    aug_dgm,
    diging,
    push_diging,
    add_opt,
    subgradient_push
};

Algorithm parse_algorithm(std::string_view name);
std::string_view algorithm_name(Algorithm algorithm);

enum class AugDgmForm {
    /// x <- W (x - Diag(alpha) y), y <- W (y + g+ - g).
    uncoordinated,
    /// x <- W (x - alpha y), y <- W y + g+ - g.
    coordinated
};

enum class AddOptForm {
    /// z <- A z - alpha y~, x = z / phi, y~ <- A y~ + g+ - g.
    push,
    /// x <- W x - alpha Phi[n+1]^-1 Phi[n] y, y <- W y + Phi[n+1]^-1 (g+ - g).
    row_stochastic
};

struct VariantOptions {
    Direction direction = Direction::atc;
    StepSizeSchedule schedule = StepSizeSchedule::constant(0.05);
    /// Aug-DGM per-agent steps; defaults to the shared schedule.
    std::optional<Vector> agent_step_sizes;
    AugDgmForm aug_dgm_form = AugDgmForm::coordinated;
    AddOptForm add_opt_form = AddOptForm::push;
    /// Surrogate and inner solver of the SONATA-NEXT recursion and the engine.
    SurrogateOptions surrogate;
    InnerSolverOptions inner;
    std::size_t max_iterations = 1000;
    Termination termination;
    TrackerInit tracker_init = TrackerInit::local_gradient;
    bool record_trajectory = false;
};

/// SONATA-NEXT: doubly stochastic A, phi = 1, W = A.
RunRecord run_sonata_next(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                          const VariantOptions& options, const std::vector<Vector>& x0);
/// SONATA-L: linearized local step with tau_i = I, so x~ = x - y. Needs G = 0, K = R^m.
RunRecord run_sonata_l(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                       const VariantOptions& options, const std::vector<Vector>& x0);
/// SONATA-L with doubly stochastic weights.
RunRecord run_sonata_next_l(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                            const VariantOptions& options, const std::vector<Vector>& x0);
/// Static undirected graph, doubly stochastic weights.
RunRecord run_aug_dgm(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                      const VariantOptions& options, const std::vector<Vector>& x0);
/// Doubly stochastic weights, constant step.
RunRecord run_diging(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                     const VariantOptions& options, const std::vector<Vector>& x0);
/// Push-sum weights; tracks u = phi x and y~ = phi y.
RunRecord run_push_diging(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                          const VariantOptions& options, const std::vector<Vector>& x0);
/// Static digraph, constant step.
RunRecord run_add_opt(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                      const VariantOptions& options, const std::vector<Vector>& x0);
/// Perturbed push-sum: z_i <- sum_j a_ij (z_j - alpha grad f_j(x_j)), x = z / phi,
/// two mixing rounds per recorded iteration. No tracker.
RunRecord run_subgradient_push(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                               const VariantOptions& options, const std::vector<Vector>& x0);

/// Engine configuration equivalent to `options` for Algorithm::sonata.
IterationConfig engine_config(const ProblemInstance& problem, const VariantOptions& options);

/// Checks the preconditions of `algorithm` that do not need a run, e.g.
/// doubly stochastic rules or an unconstrained smooth problem.
void validate_variant(Algorithm algorithm, const ProblemInstance& problem, const DigraphSequence& graphs,
                      MixingRule rule, const VariantOptions& options);

RunRecord run_variant(Algorithm algorithm, const ProblemInstance& problem, const DigraphSequence& graphs,
                      MixingRule rule, const VariantOptions& options, const std::vector<Vector>& x0);

}  // namespace sonata
