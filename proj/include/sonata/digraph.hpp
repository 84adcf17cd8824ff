#pragma once

// Time-varying directed communication graphs.
//
// Vertices are 0-based. An edge {from, to} means agent `from` transmits to
// agent `to`. Self-loops are implicit: they are never stored in the edge set,
// but every neighborhood query includes the vertex itself.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sonata {

using Vertex = std::size_t;

struct Edge {
    Vertex from;
    Vertex to;
    auto operator<=>(const Edge&) const = default;
};

class Digraph {
public:
    /// Throws ArgumentError on out-of-range endpoints, explicit self-loops,
    /// or duplicate edges.
    Digraph(std::size_t vertex_count, std::vector<Edge> edges);

    std::size_t vertex_count() const noexcept { return vertex_count_; }
    /// Sorted by (from, to).
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    /// {j : (j, i) in E} plus i itself, ascending.
    const std::vector<Vertex>& in_neighbors(Vertex i) const;
    /// {j : (i, j) in E} plus i itself, ascending.
    const std::vector<Vertex>& out_neighbors(Vertex i) const;
    /// Size of out_neighbors(i); always >= 1.
    std::size_t out_degree(Vertex i) const { return out_neighbors(i).size(); }

    bool has_edge(Vertex from, Vertex to) const;
    /// True when every edge has its reverse, i.e. the graph is undirected.
    bool is_symmetric() const;

    bool operator==(const Digraph& other) const {
        return vertex_count_ == other.vertex_count_ && edges_ == other.edges_;
    }

private:
    void check_vertex(Vertex i) const;

    std::size_t vertex_count_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Vertex>> in_;
    std::vector<std::vector<Vertex>> out_;
};

/// Convenience wrappers around the member queries.
inline const std::vector<Vertex>& in_neighbors(const Digraph& g, Vertex i) { return g.in_neighbors(i); }
inline std::size_t out_degree(const Digraph& g, Vertex i) { return g.out_degree(i); }

Digraph complete_digraph(std::size_t vertex_count);
/// 0 -> 1 -> ... -> n-1 -> 0.
Digraph directed_cycle(std::size_t vertex_count);
/// Undirected ring, stored as a symmetric digraph.
Digraph undirected_ring(std::size_t vertex_count);
/// Undirected path 0 - 1 - ... - n-1.
Digraph undirected_path(std::size_t vertex_count);
/// Adds the reverse of every edge.
Digraph symmetrize(const Digraph& g);
/// Union of the edge sets; all graphs must share the vertex count.
Digraph graph_union(const std::vector<Digraph>& graphs);

/// Reachability from every vertex.
bool is_strongly_connected(const Digraph& g);

/// One agent cycle plus `random_out_edges` uniformly random out-neighbors per
/// agent. The cycle ordering is a permutation re-drawn from (seed, n).
/// Deterministic in (vertex_count, n, seed). Requires vertex_count >= 3.
Digraph generate_paper_topology(std::size_t vertex_count, std::size_t n, std::uint64_t seed,
                                std::size_t random_out_edges = 1);

/// A deterministic map n -> G[n].
class DigraphSequence {
public:
    using Generator = std::function<Digraph(std::size_t)>;

    DigraphSequence(std::size_t vertex_count, Generator generator,
                    std::optional<std::size_t> horizon = std::nullopt, bool is_static = false);

    /// Same graph at every slot.
    static DigraphSequence constant(Digraph g);
    /// Replays `graphs` periodically: slot n maps to graphs[n % size].
    static DigraphSequence replay(std::vector<Digraph> graphs);
    static DigraphSequence paper_topology(std::size_t vertex_count, std::uint64_t seed,
                                          std::size_t random_out_edges = 1);
    /// Undirected version of another sequence (each slot symmetrized).
    static DigraphSequence symmetrized(const DigraphSequence& base);

    Digraph at(std::size_t n) const;
    std::size_t vertex_count() const noexcept { return vertex_count_; }
    std::optional<std::size_t> horizon() const noexcept { return horizon_; }
    /// True when the same graph is used at every slot.
    bool is_static() const noexcept { return static_; }

private:
    std::size_t vertex_count_;
    Generator generator_;
    std::optional<std::size_t> horizon_;
    bool static_;
};

/// True iff for each k < windows, the union of G[kB], ..., G[(k+1)B - 1] is
/// strongly connected. B = 0 is an ArgumentError.
bool check_b_connectivity(const DigraphSequence& sequence, std::size_t B, std::size_t windows);

/// Line-oriented text form, one slot per line: "n: j>i, j>i, ...".
void write_digraph_sequence(std::ostream& out, const DigraphSequence& sequence, std::size_t slots);
std::string format_digraph_line(std::size_t n, const Digraph& g);
/// Parses the text form. Slots must appear as 0, 1, 2, ... in order.
std::vector<Digraph> read_digraph_sequence(std::istream& in, std::size_t vertex_count);

}  // namespace sonata
