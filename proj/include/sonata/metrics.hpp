#pragma once

// Observer-side measurements. Nothing here is fed back to the agents.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "sonata/problems.hpp"
#include "sonata/types.hpp"

namespace sonata {

struct IterationMetrics {
    std::size_t n = 0;
    double alpha = 0.0;
    /// Optimality measure at the weighted average.
    double J = 0.0;
    /// Mean squared distance of the local copies from the weighted average.
    double D = 0.0;
    double U_zbar = 0.0;
    double phi_min = 1.0;
    double phi_max = 1.0;
    /// |sum_i phi_i - I|.
    double mass_err = 0.0;
    /// ||sum_i phi_i y_i - sum_i grad f_i(x_i)||_inf.
    double tracking_err = 0.0;
    /// Reference scale ||sum_i grad f_i(x_i)||_inf.
    double gradient_scale = 0.0;
    /// Messages sent so far.
    std::size_t transmissions = 0;
};

/// zbar = (1/I) sum_i phi_i x_i, with x_i the rows of X.
Vector weighted_average(const Matrix& X, const Vector& phi);
/// ||grad F(zbar)||_inf when G = 0 and K is the whole space, otherwise the
/// composite stationarity residual.
double optimality_measure(const ProblemInstance& problem, const Vector& zbar);
/// (1/I) sum_i ||x_i - zbar||^2.
double consensus_error(const Matrix& X, const Vector& zbar);

/// Snapshot of one iteration. Rows of X are the agents' x_i, rows of Y the
/// trackers y_i; `gradient_sum` is sum_i grad f_i(x_i). An empty Y means the
/// algorithm has no tracker and reports tracking_err = 0.
IterationMetrics observe(const ProblemInstance& problem, std::size_t n, double alpha, const Matrix& X,
                         const Vector& phi, const Matrix& Y, const Vector& gradient_sum);

enum class RunStatus { completed, terminated, failed };

struct RunRecord {
    std::string variant;
    std::vector<IterationMetrics> metrics;
    /// x_i per iteration (agents as rows) when recording is enabled.
    std::vector<Matrix> trajectory;
    Matrix final_x;
    Vector final_phi;
    RunStatus status = RunStatus::completed;
    std::string error_kind;
    std::string error_message;
    /// Smallest positive mixing weight seen over the run.
    double realized_kappa = 1.0;

    bool ok() const { return status != RunStatus::failed; }
    std::size_t iterations() const { return metrics.empty() ? 0 : metrics.back().n; }
};

/// `# variant=<name>` comment, the header
/// n,alpha,J,D,U_zbar,phi_min,phi_max,mass_err,tracking_err and one row per
/// iteration with round-trip precision.
void write_run_csv(std::ostream& out, const RunRecord& record);
std::string format_double(double v);

}  // namespace sonata
