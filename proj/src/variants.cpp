#include "sonata/variants.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "sonata/errors.hpp"

namespace sonata {

Algorithm parse_algorithm(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "sonata") return Algorithm::sonata;
    if (lower == "sonata-next") return Algorithm::sonata_next;
    if (lower == "sonata-l") return Algorithm::sonata_l;
    if (lower == "sonata-next-l") return Algorithm::sonata_next_l;
    if (lower == "aug-dgm") return Algorithm::aug_dgm;
    if (lower == "diging") return Algorithm::diging;
    if (lower == "push-diging") return Algorithm::push_diging;
    if (lower == "add-opt") return Algorithm::add_opt;
    if (lower == "subgrad-push" || lower == "subgradient-push") return Algorithm::subgradient_push;
    throw ArgumentError("unknown variant '" + std::string(name) + "'");
}

std::string_view algorithm_name(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::sonata: return "sonata";
        case Algorithm::sonata_next: return "sonata-next";
        case Algorithm::sonata_l: return "sonata-l";
        case Algorithm::sonata_next_l: return "sonata-next-l";
        case Algorithm::aug_dgm: return "aug-dgm";
        case Algorithm::diging: return "diging";
        case Algorithm::push_diging: return "push-diging";
        case Algorithm::add_opt: return "add-opt";
        case Algorithm::subgradient_push: return "subgrad-push";
    }
    return "unknown";
}

namespace {

Matrix stacked_gradients(const ProblemInstance& problem, const Matrix& X) {
    Matrix G(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        G.row(i) = problem.costs[static_cast<std::size_t>(i)]->gradient(X.row(i).transpose()).transpose();
    }
    return G;
}

Matrix stacked_start(const ProblemInstance& problem, const std::vector<Vector>& x0) {
    if (x0.size() != problem.agent_count) throw ArgumentError("one starting point per agent is required");
    Matrix X(static_cast<Eigen::Index>(problem.agent_count), static_cast<Eigen::Index>(problem.dimension));
    for (std::size_t i = 0; i < x0.size(); ++i) {
        if (x0[i].size() != X.cols()) throw ArgumentError("starting point dimension mismatch");
        if (!problem.feasible_set->contains(x0[i], 1e-12)) throw ArgumentError("infeasible starting point");
        X.row(static_cast<Eigen::Index>(i)) = x0[i].transpose();
    }
    return X;
}

/// Per-iteration bookkeeping shared by the stacked recursions.
class Recorder {
public:
    Recorder(const ProblemInstance& problem, const VariantOptions& options, Algorithm algorithm)
        : problem_(problem), options_(options) {
        record_.variant = std::string(algorithm_name(algorithm));
    }

    void snapshot(std::size_t n, double alpha, const Matrix& X, const Vector& phi, const Matrix& Y, const Matrix& G) {
        IterationMetrics m = observe(problem_, n, alpha, X, phi, Y, G.colwise().sum().transpose());
        m.transmissions = transmissions_;
        record_.metrics.push_back(m);
        if (options_.record_trajectory) record_.trajectory.push_back(X);
        record_.final_x = X;
        record_.final_phi = phi;
    }

    bool should_stop() const {
        const auto& t = options_.termination;
        const auto& m = record_.metrics.back();
        return record_.metrics.size() > 1 && t.enabled && m.J <= t.J && m.D <= t.D;
    }

    void count(const Digraph& g, std::size_t vectors) { transmissions_ += g.edges().size() * vectors; }
    void note_kappa(const Matrix& A) { record_.realized_kappa = std::min(record_.realized_kappa, realized_kappa(A)); }
    void stop() { record_.status = RunStatus::terminated; }

    void fail(const std::exception& e) {
        record_.status = RunStatus::failed;
        record_.error_kind = error_kind(e);
        record_.error_message = e.what();
    }

    RunRecord take() { return std::move(record_); }

private:
    const ProblemInstance& problem_;
    const VariantOptions& options_;
    RunRecord record_;
    std::size_t transmissions_ = 0;
};

Matrix tracker_start(const Matrix& G, TrackerInit init) {
    if (init == TrackerInit::local_gradient) return G;
    Matrix Y(G.rows(), G.cols());
    Y.rowwise() = G.colwise().mean();
    return Y;
}

Matrix mixing_at(const DigraphSequence& graphs, MixingRule rule, std::size_t n, bool doubly_stochastic,
                 Recorder& recorder, Digraph* graph_out = nullptr) {
    const Digraph g = graphs.at(n);
    MixingMatrix A = build_mixing(rule, g);
    if (!validate_assumption_d(A.entries, g, A.kappa)) {
        throw StateCorruptionError("mixing matrix violates its column-stochastic contract");
    }
    if (doubly_stochastic && !is_doubly_stochastic(A.entries)) {
        throw ArgumentError("this variant needs doubly stochastic weights");
    }
    recorder.note_kappa(A.entries);
    if (graph_out) *graph_out = g;
    return std::move(A.entries);
}

template <typename Body>
RunRecord drive(Algorithm algorithm, const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                const VariantOptions& options, Body body) {
    validate_variant(algorithm, problem, graphs, rule, options);
    Recorder recorder(problem, options, algorithm);
    try {
        body(recorder);
    } catch (const ArgumentError&) {
        throw;
    } catch (const std::exception& e) {
        recorder.fail(e);
    }
    return recorder.take();
}

}  // namespace

void validate_variant(Algorithm algorithm, const ProblemInstance& problem, const DigraphSequence& graphs,
                      MixingRule rule, const VariantOptions& options) {
    problem.validate();
    if (graphs.vertex_count() != problem.agent_count) throw ArgumentError("graph size differs from agent count");
    if (options.max_iterations < 1) throw ArgumentError("max_iterations must be at least 1");
    options.schedule.validate();
    const bool needs_doubly_stochastic = algorithm == Algorithm::sonata_next || algorithm == Algorithm::sonata_next_l ||
                                         algorithm == Algorithm::aug_dgm || algorithm == Algorithm::diging;
    if (needs_doubly_stochastic && rule == MixingRule::push_sum) {
        throw ArgumentError(std::string(algorithm_name(algorithm)) + " needs doubly stochastic weights");
    }
    const bool needs_smooth = algorithm != Algorithm::sonata && algorithm != Algorithm::sonata_next &&
                              algorithm != Algorithm::subgradient_push;
    if (needs_smooth && !problem.is_unconstrained_smooth()) {
        throw ArgumentError(std::string(algorithm_name(algorithm)) + " needs G = 0 and K = R^m");
    }
    if (algorithm == Algorithm::subgradient_push && !problem.regularizer->is_zero()) {
        throw ArgumentError("subgrad-push needs G = 0");
    }
    if ((algorithm == Algorithm::aug_dgm || algorithm == Algorithm::add_opt) && !graphs.is_static()) {
        throw ArgumentError(std::string(algorithm_name(algorithm)) + " needs a static graph");
    }
    if ((algorithm == Algorithm::diging || algorithm == Algorithm::add_opt) &&
        options.schedule.kind() != StepSizeSchedule::Kind::constant) {
        throw ArgumentError(std::string(algorithm_name(algorithm)) + " needs a constant step size");
    }
    if ((algorithm == Algorithm::push_diging || algorithm == Algorithm::subgradient_push) &&
        rule != MixingRule::push_sum) {
        throw ArgumentError(std::string(algorithm_name(algorithm)) + " needs push-sum weights");
    }
    if ((algorithm == Algorithm::sonata_next || algorithm == Algorithm::sonata) &&
        options.direction == Direction::cta && !problem.feasible_set->is_whole_space()) {
        throw ArgumentError("CTA updates are only supported without constraints");
    }
    if (options.agent_step_sizes && options.agent_step_sizes->size() != static_cast<Eigen::Index>(problem.agent_count)) {
        throw ArgumentError("per-agent step sizes need one entry per agent");
    }
}

RunRecord run_sonata_next(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                          const VariantOptions& options, const std::vector<Vector>& x0) {
    const SurrogateFactory factory = make_surrogate_factory(problem, options.surrogate);
    return drive(Algorithm::sonata_next, problem, graphs, rule, options, [&](Recorder& rec) {
        const auto I = static_cast<Eigen::Index>(problem.agent_count);
        const Vector phi = Vector::Ones(I);
        Matrix X = stacked_start(problem, x0);
        Matrix G = stacked_gradients(problem, X);
        Matrix Y = tracker_start(G, options.tracker_init);
        StepSizeCursor step(options.schedule);
        rec.snapshot(0, step.value(), X, phi, Y, G);
        for (std::size_t n = 0; n < options.max_iterations; ++n) {
            if (rec.should_stop()) {
                rec.stop();
                break;
            }
            Digraph g(1, {});
            const Matrix W = mixing_at(graphs, rule, n, true, rec, &g);
            const Matrix Pi = static_cast<double>(I) * Y - G;
            Matrix Delta(X.rows(), X.cols());
            for (Eigen::Index i = 0; i < I; ++i) {
                const auto model = factory(static_cast<std::size_t>(i), X.row(i).transpose());
                const SubproblemSpec spec{*model, Pi.row(i).transpose(), *problem.regularizer, *problem.feasible_set};
                Delta.row(i) = (solve_subproblem(spec, options.inner) - X.row(i).transpose()).transpose();
            }
            const double alpha = step.value();
            X = options.direction == Direction::atc ? Matrix(W * (X + alpha * Delta)) : Matrix(W * X + alpha * Delta);
            const Matrix G_next = stacked_gradients(problem, X);
            Y = W * Y + G_next - G;
            G = G_next;
            rec.count(g, 2);
            step.advance();
            rec.snapshot(n + 1, step.value(), X, phi, Y, G);
        }
    });
}

namespace {

RunRecord linearized(Algorithm algorithm, bool doubly_stochastic, const ProblemInstance& problem,
                     const DigraphSequence& graphs, MixingRule rule, const VariantOptions& options,
                     const std::vector<Vector>& x0) {
    return drive(algorithm, problem, graphs, rule, options, [&](Recorder& rec) {
        const auto I = static_cast<Eigen::Index>(problem.agent_count);
        Vector phi = Vector::Ones(I);
        Matrix X = stacked_start(problem, x0);
        Matrix G = stacked_gradients(problem, X);
        Matrix Y = tracker_start(G, options.tracker_init);
        StepSizeCursor step(options.schedule);
        rec.snapshot(0, step.value(), X, phi, Y, G);
        for (std::size_t n = 0; n < options.max_iterations; ++n) {
            if (rec.should_stop()) {
                rec.stop();
                break;
            }
            Digraph g(1, {});
            const Matrix A = mixing_at(graphs, rule, n, doubly_stochastic, rec, &g);
            const double alpha = step.value();
            if (doubly_stochastic) {
                X = options.direction == Direction::atc ? Matrix(A * (X - alpha * Y)) : Matrix(A * X - alpha * Y);
                const Matrix G_next = stacked_gradients(problem, X);
                Y = A * Y + G_next - G;
                G = G_next;
            } else {
                const Vector phi_next = A * phi;
                if (phi_next.minCoeff() < phi_underflow_floor) throw NumericalUnderflowError("consensus weight underflow");
                const Matrix W = phi_next.cwiseInverse().asDiagonal() * A * phi.asDiagonal();
                X = options.direction == Direction::atc ? Matrix(W * (X - alpha * Y)) : Matrix(W * X - alpha * Y);
                const Matrix G_next = stacked_gradients(problem, X);
                Y = W * Y + phi_next.cwiseInverse().asDiagonal() * (G_next - G);
                G = G_next;
                phi = phi_next;
            }
            rec.count(g, 2);
            step.advance();
            rec.snapshot(n + 1, step.value(), X, phi, Y, G);
        }
    });
}

}  // namespace

RunRecord run_sonata_l(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                       const VariantOptions& options, const std::vector<Vector>& x0) {
    return linearized(Algorithm::sonata_l, false, problem, graphs, rule, options, x0);
}

RunRecord run_sonata_next_l(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                            const VariantOptions& options, const std::vector<Vector>& x0) {
    return linearized(Algorithm::sonata_next_l, true, problem, graphs, rule, options, x0);
}

RunRecord run_aug_dgm(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                      const VariantOptions& options, const std::vector<Vector>& x0) {
    return drive(Algorithm::aug_dgm, problem, graphs, rule, options, [&](Recorder& rec) {
        const auto I = static_cast<Eigen::Index>(problem.agent_count);
        const Vector phi = Vector::Ones(I);
        Matrix X = stacked_start(problem, x0);
        Matrix G = stacked_gradients(problem, X);
        Matrix Y = tracker_start(G, options.tracker_init);
        Digraph g(1, {});
        const Matrix W = mixing_at(graphs, rule, 0, true, rec, &g);
        StepSizeCursor step(options.schedule);
        rec.snapshot(0, step.value(), X, phi, Y, G);
        for (std::size_t n = 0; n < options.max_iterations; ++n) {
            if (rec.should_stop()) {
                rec.stop();
                break;
            }
            const double alpha = step.value();
            Matrix G_next;
            if (options.aug_dgm_form == AugDgmForm::uncoordinated) {
                const Vector steps = options.agent_step_sizes ? *options.agent_step_sizes : Vector(Vector::Constant(I, alpha));
                X = W * (X - steps.asDiagonal() * Y);
                G_next = stacked_gradients(problem, X);
                Y = W * (Y + G_next - G);
            } else {
                X = W * (X - alpha * Y);
                G_next = stacked_gradients(problem, X);
                Y = W * Y + G_next - G;
            }
            G = std::move(G_next);
            rec.count(g, 2);
            step.advance();
            rec.snapshot(n + 1, step.value(), X, phi, Y, G);
        }
    });
}

RunRecord run_diging(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                     const VariantOptions& options, const std::vector<Vector>& x0) {
    return drive(Algorithm::diging, problem, graphs, rule, options, [&](Recorder& rec) {
        const auto I = static_cast<Eigen::Index>(problem.agent_count);
        const Vector phi = Vector::Ones(I);
        const double alpha = options.schedule.alpha0();
        Matrix X = stacked_start(problem, x0);
        Matrix G = stacked_gradients(problem, X);
        Matrix Y = tracker_start(G, options.tracker_init);
        rec.snapshot(0, alpha, X, phi, Y, G);
        for (std::size_t n = 0; n < options.max_iterations; ++n) {
            if (rec.should_stop()) {
                rec.stop();
                break;
            }
            Digraph g(1, {});
            const Matrix W = mixing_at(graphs, rule, n, true, rec, &g);
            X = W * X - alpha * Y;
            const Matrix G_next = stacked_gradients(problem, X);
            Y = W * Y + G_next - G;
            G = G_next;
            rec.count(g, 2);
            rec.snapshot(n + 1, alpha, X, phi, Y, G);
        }
    });
}

RunRecord run_push_diging(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                          const VariantOptions& options, const std::vector<Vector>& x0) {
    return drive(Algorithm::push_diging, problem, graphs, rule, options, [&](Recorder& rec) {
        const auto I = static_cast<Eigen::Index>(problem.agent_count);
        Vector phi = Vector::Ones(I);
        Matrix U = stacked_start(problem, x0);
        Matrix X = U;
        Matrix G = stacked_gradients(problem, X);
        Matrix Yt = tracker_start(G, options.tracker_init);
        StepSizeCursor step(options.schedule);
        rec.snapshot(0, step.value(), X, phi, Yt, G);
        for (std::size_t n = 0; n < options.max_iterations; ++n) {
            if (rec.should_stop()) {
                rec.stop();
                break;
            }
            Digraph g(1, {});
            const Matrix A = mixing_at(graphs, rule, n, false, rec, &g);
            U = A * (U - step.value() * Yt);
            phi = A * phi;
            if (phi.minCoeff() < phi_underflow_floor) throw NumericalUnderflowError("consensus weight underflow");
            X = phi.cwiseInverse().asDiagonal() * U;
            const Matrix G_next = stacked_gradients(problem, X);
            Yt = A * Yt + G_next - G;
            G = G_next;
            rec.count(g, 2);
            step.advance();
            rec.snapshot(n + 1, step.value(), X, phi, phi.cwiseInverse().asDiagonal() * Yt, G);
        }
    });
}

RunRecord run_add_opt(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                      const VariantOptions& options, const std::vector<Vector>& x0) {
    return drive(Algorithm::add_opt, problem, graphs, rule, options, [&](Recorder& rec) {
        const auto I = static_cast<Eigen::Index>(problem.agent_count);
        const double alpha = options.schedule.alpha0();
        Vector phi = Vector::Ones(I);
        Matrix X = stacked_start(problem, x0);
        Matrix G = stacked_gradients(problem, X);
        Digraph g(1, {});
        const Matrix A = mixing_at(graphs, rule, 0, false, rec, &g);
        if (options.add_opt_form == AddOptForm::push) {
            Matrix Z = X;
            Matrix Yt = tracker_start(G, options.tracker_init);
            rec.snapshot(0, alpha, X, phi, Yt, G);
            for (std::size_t n = 0; n < options.max_iterations; ++n) {
                if (rec.should_stop()) {
                    rec.stop();
                    break;
                }
                Z = A * Z - alpha * Yt;
                phi = A * phi;
                if (phi.minCoeff() < phi_underflow_floor) throw NumericalUnderflowError("consensus weight underflow");
                X = phi.cwiseInverse().asDiagonal() * Z;
                const Matrix G_next = stacked_gradients(problem, X);
                Yt = A * Yt + G_next - G;
                G = G_next;
                rec.count(g, 2);
                rec.snapshot(n + 1, alpha, X, phi, phi.cwiseInverse().asDiagonal() * Yt, G);
            }
        } else {
            Matrix Y = tracker_start(G, options.tracker_init);
            rec.snapshot(0, alpha, X, phi, Y, G);
            for (std::size_t n = 0; n < options.max_iterations; ++n) {
                if (rec.should_stop()) {
                    rec.stop();
                    break;
                }
                const Vector phi_next = A * phi;
                if (phi_next.minCoeff() < phi_underflow_floor) throw NumericalUnderflowError("consensus weight underflow");
                const Vector inv = phi_next.cwiseInverse();
                const Matrix W = inv.asDiagonal() * A * phi.asDiagonal();
                X = W * X - alpha * (inv.cwiseProduct(phi)).asDiagonal() * Y;
                const Matrix G_next = stacked_gradients(problem, X);
                Y = W * Y + inv.asDiagonal() * (G_next - G);
                G = G_next;
                phi = phi_next;
                rec.count(g, 2);
                rec.snapshot(n + 1, alpha, X, phi, Y, G);
            }
        }
    });
}

RunRecord run_subgradient_push(const ProblemInstance& problem, const DigraphSequence& graphs, MixingRule rule,
                               const VariantOptions& options, const std::vector<Vector>& x0) {
    return drive(Algorithm::subgradient_push, problem, graphs, rule, options, [&](Recorder& rec) {
        const auto I = static_cast<Eigen::Index>(problem.agent_count);
        Vector phi = Vector::Ones(I);
        Matrix Z = stacked_start(problem, x0);
        Matrix X = Z;
        Matrix G = stacked_gradients(problem, X);
        const Matrix no_tracker;
        StepSizeCursor step(options.schedule);
        rec.snapshot(0, step.value(), X, phi, no_tracker, G);
        for (std::size_t n = 0; n < options.max_iterations; ++n) {
            if (rec.should_stop()) {
                rec.stop();
                break;
            }
            Digraph g(1, {});
            const Matrix A = mixing_at(graphs, rule, n, false, rec, &g);
            const double alpha = step.value();
            for (int round = 0; round < 2; ++round) {
                Z = A * (Z - alpha * G);
                phi = A * phi;
                if (phi.minCoeff() < phi_underflow_floor) throw NumericalUnderflowError("consensus weight underflow");
                X = phi.cwiseInverse().asDiagonal() * Z;
                G = stacked_gradients(problem, X);
                rec.count(g, 1);
            }
            step.advance();
            rec.snapshot(n + 1, step.value(), X, phi, no_tracker, G);
        }
    });
}

IterationConfig engine_config(const ProblemInstance& problem, const VariantOptions& options) {
    IterationConfig config;
    config.name = "sonata";
    config.direction = options.direction;
    config.surrogate = make_surrogate_factory(problem, options.surrogate);
    config.schedule = options.schedule;
    config.agent_step_sizes = options.agent_step_sizes;
    config.max_iterations = options.max_iterations;
    config.termination = options.termination;
    config.tracker_init = options.tracker_init;
    config.inner = options.inner;
    config.record_trajectory = options.record_trajectory;
    return config;
}

RunRecord run_variant(Algorithm algorithm, const ProblemInstance& problem, const DigraphSequence& graphs,
                      MixingRule rule, const VariantOptions& options, const std::vector<Vector>& x0) {
    switch (algorithm) {
        case Algorithm::sonata:
            validate_variant(algorithm, problem, graphs, rule, options);
            return run(problem, graphs, rule, engine_config(problem, options), x0);
        case Algorithm::sonata_next: return run_sonata_next(problem, graphs, rule, options, x0);
        case Algorithm::sonata_l: return run_sonata_l(problem, graphs, rule, options, x0);
        case Algorithm::sonata_next_l: return run_sonata_next_l(problem, graphs, rule, options, x0);
        case Algorithm::aug_dgm: return run_aug_dgm(problem, graphs, rule, options, x0);
        case Algorithm::diging: return run_diging(problem, graphs, rule, options, x0);
        case Algorithm::push_diging: return run_push_diging(problem, graphs, rule, options, x0);
        case Algorithm::add_opt: return run_add_opt(problem, graphs, rule, options, x0);
        case Algorithm::subgradient_push: return run_subgradient_push(problem, graphs, rule, options, x0);
    }
    throw ArgumentError("unknown variant");
}

}  // namespace sonata
