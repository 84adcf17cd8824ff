#pragma once

// Column-stochastic weight matrices, the consensus weights phi they
// propagate, and the row-stochastic matrix they induce.

#include <iosfwd>
#include <string_view>

#include "sonata/digraph.hpp"
#include "sonata/types.hpp"

namespace sonata {

/// A[n]: a_ij > 0 only on in-edges (j, i) and the diagonal; columns sum to 1.
struct MixingMatrix {
    Matrix entries;
    /// Lower bound on the diagonal and on every edge weight.
    double kappa = 0.0;
};

enum class MixingRule { push_sum, metropolis, uniform, laplacian };

MixingRule parse_mixing_rule(std::string_view name);
std::string_view mixing_rule_name(MixingRule rule);
/// True for the rules that only apply to undirected graphs.
bool requires_symmetric_graph(MixingRule rule);

inline constexpr double column_sum_tolerance = 1e-12;
inline constexpr double phi_underflow_floor = 1e-300;

/// a_ij = 1 / d_j on in-edges and the diagonal.
MixingMatrix push_sum_weights(const Digraph& g);
/// a_ij = 1 / (1 + max(deg_i, deg_j)) on edges; doubly stochastic. Needs a
/// symmetric graph.
MixingMatrix metropolis_weights(const Digraph& g);
/// I - epsilon * L on an undirected graph. Requires 0 < epsilon < 1 / max degree.
MixingMatrix laplacian_weights(const Digraph& g, double epsilon);
/// Laplacian weights with the constant edge weight 1 / (1 + max degree).
MixingMatrix uniform_weights(const Digraph& g);
MixingMatrix build_mixing(MixingRule rule, const Digraph& g);

/// D1-D3 at level kappa: a_ii >= kappa, a_ij >= kappa exactly on edges (zero
/// elsewhere), and columns summing to 1 within column_sum_tolerance.
bool validate_assumption_d(const Matrix& A, const Digraph& g, double kappa);
bool is_doubly_stochastic(const Matrix& A, double tolerance = column_sum_tolerance);
/// Smallest positive entry.
double realized_kappa(const Matrix& A);

/// phi[n+1] = A phi[n]. Throws StateCorruptionError on a nonpositive input entry.
Vector update_phi(const MixingMatrix& A, const Vector& phi);
/// W = Diag(phi_new)^-1 A Diag(phi_old), row stochastic. Throws
/// NumericalUnderflowError if an entry of phi_new is below phi_underflow_floor.
Matrix induced_row_matrix(const MixingMatrix& A, const Vector& phi_old, const Vector& phi_new);

/// Row-major dense CSV with round-trip precision.
void write_matrix_csv(std::ostream& out, const Matrix& m);

}  // namespace sonata
