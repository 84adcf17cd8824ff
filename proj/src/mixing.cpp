#include "sonata/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "sonata/errors.hpp"

namespace sonata {

MixingRule parse_mixing_rule(std::string_view name) {
    if (name == "push-sum") return MixingRule::push_sum;
    if (name == "metropolis") return MixingRule::metropolis;
    if (name == "uniform") return MixingRule::uniform;
    if (name == "laplacian") return MixingRule::laplacian;
    throw ArgumentError("unknown mixing rule '" + std::string(name) + "'");
}

std::string_view mixing_rule_name(MixingRule rule) {
    switch (rule) {
        case MixingRule::push_sum: return "push-sum";
        case MixingRule::metropolis: return "metropolis";
        case MixingRule::uniform: return "uniform";
        case MixingRule::laplacian: return "laplacian";
    }
    return "unknown";
}

bool requires_symmetric_graph(MixingRule rule) { return rule != MixingRule::push_sum; }

MixingMatrix push_sum_weights(const Digraph& g) {
    const std::size_t n = g.vertex_count();
    MixingMatrix A{Matrix::Zero(n, n), 1.0};
    for (Vertex j = 0; j < n; ++j) {
        const double d = static_cast<double>(g.out_degree(j));
        for (Vertex i : g.out_neighbors(j)) A.entries(i, j) = 1.0 / d;
        A.kappa = std::min(A.kappa, 1.0 / d);
    }
    return A;
}

namespace {

std::size_t undirected_degree(const Digraph& g, Vertex i) { return g.out_degree(i) - 1; }

void require_symmetric(const Digraph& g, const char* rule) {
    if (!g.is_symmetric()) throw ArgumentError(std::string(rule) + " weights need an undirected graph");
}

}  // namespace

MixingMatrix metropolis_weights(const Digraph& g) {
    require_symmetric(g, "Metropolis");
    const std::size_t n = g.vertex_count();
    Matrix A = Matrix::Zero(n, n);
    for (const Edge& e : g.edges()) {
        const auto deg = std::max(undirected_degree(g, e.from), undirected_degree(g, e.to));
        A(e.to, e.from) = 1.0 / (1.0 + static_cast<double>(deg));
    }
    for (Vertex i = 0; i < n; ++i) {
        double off = 0.0;
        for (Vertex j : g.in_neighbors(i))
            if (j != i) off += A(i, j);
        A(i, i) = 1.0 - off;
    }
    const double kappa = realized_kappa(A);
    return {std::move(A), kappa};
}

MixingMatrix laplacian_weights(const Digraph& g, double epsilon) {
    require_symmetric(g, "Laplacian");
    const std::size_t n = g.vertex_count();
    std::size_t max_degree = 0;
    for (Vertex i = 0; i < n; ++i) max_degree = std::max(max_degree, undirected_degree(g, i));
    if (!(epsilon > 0.0) || (max_degree > 0 && !(epsilon < 1.0 / static_cast<double>(max_degree)))) {
        throw ArgumentError("Laplacian step must lie in (0, 1/max degree)");
    }
    Matrix A = Matrix::Zero(n, n);
    for (const Edge& e : g.edges()) A(e.to, e.from) = epsilon;
    for (Vertex i = 0; i < n; ++i) A(i, i) = 1.0 - epsilon * static_cast<double>(undirected_degree(g, i));
    const double kappa = realized_kappa(A);
    return {std::move(A), kappa};
}

MixingMatrix uniform_weights(const Digraph& g) {
    std::size_t max_degree = 0;
    for (Vertex i = 0; i < g.vertex_count(); ++i) max_degree = std::max(max_degree, undirected_degree(g, i));
    return laplacian_weights(g, 1.0 / (1.0 + static_cast<double>(max_degree)));
}

MixingMatrix build_mixing(MixingRule rule, const Digraph& g) {
    switch (rule) {
        case MixingRule::push_sum: return push_sum_weights(g);
        case MixingRule::metropolis: return metropolis_weights(g);
        case MixingRule::uniform: return uniform_weights(g);
        case MixingRule::laplacian: {
            std::size_t max_degree = 1;
            for (Vertex i = 0; i < g.vertex_count(); ++i)
                max_degree = std::max(max_degree, undirected_degree(g, i));
            return laplacian_weights(g, 0.5 / static_cast<double>(max_degree));
        }
    }
    throw ArgumentError("unknown mixing rule");
}

bool validate_assumption_d(const Matrix& A, const Digraph& g, double kappa) {
    const auto n = static_cast<Eigen::Index>(g.vertex_count());
    if (A.rows() != n || A.cols() != n) throw ArgumentError("mixing matrix does not match the graph size");
    if (!(kappa > 0.0)) return false;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double a = A(i, j);
            const bool linked = i == j || g.has_edge(static_cast<Vertex>(j), static_cast<Vertex>(i));
            if (linked ? !(a >= kappa) : a != 0.0) return false;
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        if (std::abs(A.col(j).sum() - 1.0) > column_sum_tolerance) return false;
    }
    return true;
}

bool is_doubly_stochastic(const Matrix& A, double tolerance) {
    if (A.rows() != A.cols() || (A.array() < 0.0).any()) return false;
    for (Eigen::Index k = 0; k < A.rows(); ++k) {
        if (std::abs(A.col(k).sum() - 1.0) > tolerance) return false;
        if (std::abs(A.row(k).sum() - 1.0) > tolerance) return false;
    }
    return true;
}

double realized_kappa(const Matrix& A) {
    double kappa = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < A.size(); ++k) {
        const double a = A.data()[k];
        if (a > 0.0) kappa = std::min(kappa, a);
    }
    return kappa;
}

Vector update_phi(const MixingMatrix& A, const Vector& phi) {
    if (A.entries.cols() != phi.size()) throw ArgumentError("phi length does not match the mixing matrix");
    if ((phi.array() <= 0.0).any() || !phi.allFinite()) {
        throw StateCorruptionError("consensus weight phi has a nonpositive entry");
    }
    return A.entries * phi;
}

Matrix induced_row_matrix(const MixingMatrix& A, const Vector& phi_old, const Vector& phi_new) {
    const Eigen::Index n = A.entries.rows();
    if (phi_old.size() != n || phi_new.size() != n) throw ArgumentError("phi length does not match");
    if ((phi_new.array() < phi_underflow_floor).any()) {
        throw NumericalUnderflowError("consensus weight phi underflowed");
    }
    Matrix W(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) W(i, j) = A.entries(i, j) * phi_old(j) / phi_new(i);
    return W;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
    char buffer[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buffer, sizeof buffer, "%.17g", m(i, j));
            out << (j ? "," : "") << buffer;
        }
        out << '\n';
    }
}

}  // namespace sonata
