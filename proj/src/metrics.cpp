#include "sonata/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "sonata/errors.hpp"

namespace sonata {

Vector weighted_average(const Matrix& X, const Vector& phi) {
    if (X.rows() != phi.size() || X.rows() == 0) throw ArgumentError("weighted average: shape mismatch");
    return (X.transpose() * phi) / static_cast<double>(X.rows());
}

double optimality_measure(const ProblemInstance& problem, const Vector& zbar) {
    return stationarity_residual(problem, zbar);
}

double consensus_error(const Matrix& X, const Vector& zbar) {
    if (X.cols() != zbar.size() || X.rows() == 0) throw ArgumentError("consensus error: shape mismatch");
    return (X.rowwise() - zbar.transpose()).rowwise().squaredNorm().mean();
}

IterationMetrics observe(const ProblemInstance& problem, std::size_t n, double alpha, const Matrix& X,
                         const Vector& phi, const Matrix& Y, const Vector& gradient_sum) {
    IterationMetrics m;
    m.n = n;
    m.alpha = alpha;
    const Vector zbar = weighted_average(X, phi);
    m.J = optimality_measure(problem, zbar);
    m.D = consensus_error(X, zbar);
    m.U_zbar = problem.objective(zbar);
    m.phi_min = phi.minCoeff();
    m.phi_max = phi.maxCoeff();
    m.mass_err = std::abs(phi.sum() - static_cast<double>(phi.size()));
    m.gradient_scale = gradient_sum.lpNorm<Eigen::Infinity>();
    if (Y.size() > 0) {
        m.tracking_err = (Y.transpose() * phi - gradient_sum).lpNorm<Eigen::Infinity>();
    }
    return m;
}

std::string format_double(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

void write_run_csv(std::ostream& out, const RunRecord& record) {
    out << "# variant=" << record.variant << '\n';
    out << "n,alpha,J,D,U_zbar,phi_min,phi_max,mass_err,tracking_err\n";
    for (const auto& m : record.metrics) {
        out << m.n << ',' << format_double(m.alpha) << ',' << format_double(m.J) << ',' << format_double(m.D) << ','
            << format_double(m.U_zbar) << ',' << format_double(m.phi_min) << ',' << format_double(m.phi_max) << ','
            << format_double(m.mass_err) << ',' << format_double(m.tracking_err) << '\n';
    }
}

}  // namespace sonata
