#pragma once

// Hand-rolled generators shared by the unit and property tests.

#include <cstddef>
#include <vector>

#include "sonata/digraph.hpp"
#include "sonata/rng.hpp"
#include "sonata/types.hpp"

namespace testing_support {

inline sonata::Vector random_vector(sonata::Rng& rng, std::size_t n, double scale = 1.0) {
    sonata::Vector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = scale * rng.normal();
    return v;
}

inline sonata::Matrix random_matrix(sonata::Rng& rng, std::size_t rows, std::size_t cols) {
    sonata::Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
    return m;
}

/// Random digraph where each ordered pair is an edge with probability p.
inline sonata::Digraph random_digraph(sonata::Rng& rng, std::size_t n, double p) {
    std::vector<sonata::Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && rng.bernoulli(p)) edges.push_back({i, j});
    return sonata::Digraph(n, edges);
}

/// Random digraph containing a Hamiltonian cycle, hence strongly connected.
inline sonata::Digraph random_connected_digraph(sonata::Rng& rng, std::size_t n, double p) {
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < n; ++k) order[k] = k;
    for (std::size_t k = n - 1; k > 0; --k) std::swap(order[k], order[rng.index(k + 1)]);
    std::vector<sonata::Edge> edges;
    std::vector<std::vector<bool>> present(n, std::vector<bool>(n, false));
    auto add = [&](std::size_t a, std::size_t b) {
        if (a != b && !present[a][b]) {
            present[a][b] = true;
            edges.push_back({a, b});
        }
    };
    if (n > 1)
        for (std::size_t k = 0; k < n; ++k) add(order[k], order[(k + 1) % n]);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (rng.bernoulli(p)) add(i, j);
    return sonata::Digraph(n, edges);
}

/// Column-stochastic matrix with positive diagonal on the pattern of g.
inline sonata::Matrix random_column_stochastic(sonata::Rng& rng, const sonata::Digraph& g) {
    const auto n = static_cast<Eigen::Index>(g.vertex_count());
    sonata::Matrix A = sonata::Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (auto i : g.out_neighbors(static_cast<std::size_t>(j))) A(static_cast<Eigen::Index>(i), j) = 0.1 + rng.uniform();
        A.col(j) /= A.col(j).sum();
    }
    return A;
}

}  // namespace testing_support
