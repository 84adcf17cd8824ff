#include "sonata/digraph.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "sonata/errors.hpp"
#include "sonata/rng.hpp"

namespace sonata {

Digraph::Digraph(std::size_t vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)), in_(vertex_count), out_(vertex_count) {
    if (vertex_count_ == 0) throw ArgumentError("digraph needs at least one vertex");
    std::sort(edges_.begin(), edges_.end());
    for (std::size_t k = 0; k < edges_.size(); ++k) {
        const Edge& e = edges_[k];
        if (e.from >= vertex_count_ || e.to >= vertex_count_) {
            throw ArgumentError("edge endpoint out of range");
        }
        if (e.from == e.to) throw ArgumentError("self-loops are implicit and must not be listed");
        if (k > 0 && edges_[k - 1] == e) throw ArgumentError("duplicate edge");
    }
    for (Vertex i = 0; i < vertex_count_; ++i) {
        in_[i].push_back(i);
        out_[i].push_back(i);
    }
    for (const Edge& e : edges_) {
        in_[e.to].push_back(e.from);
        out_[e.from].push_back(e.to);
    }
    for (Vertex i = 0; i < vertex_count_; ++i) {
        std::sort(in_[i].begin(), in_[i].end());
        std::sort(out_[i].begin(), out_[i].end());
    }
}

void Digraph::check_vertex(Vertex i) const {
    if (i >= vertex_count_) throw ArgumentError("vertex index out of range");
}

const std::vector<Vertex>& Digraph::in_neighbors(Vertex i) const {
    check_vertex(i);
    return in_[i];
}

const std::vector<Vertex>& Digraph::out_neighbors(Vertex i) const {
    check_vertex(i);
    return out_[i];
}

bool Digraph::has_edge(Vertex from, Vertex to) const {
    return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
}

bool Digraph::is_symmetric() const {
    return std::all_of(edges_.begin(), edges_.end(),
                       [this](const Edge& e) { return has_edge(e.to, e.from); });
}

Digraph complete_digraph(std::size_t vertex_count) {
    std::vector<Edge> edges;
    for (Vertex i = 0; i < vertex_count; ++i)
        for (Vertex j = 0; j < vertex_count; ++j)
            if (i != j) edges.push_back({i, j});
    return Digraph(vertex_count, std::move(edges));
}

Digraph directed_cycle(std::size_t vertex_count) {
    std::vector<Edge> edges;
    if (vertex_count > 1) {
        for (Vertex i = 0; i < vertex_count; ++i) edges.push_back({i, (i + 1) % vertex_count});
    }
    return Digraph(vertex_count, std::move(edges));
}

Digraph undirected_ring(std::size_t vertex_count) { return symmetrize(directed_cycle(vertex_count)); }

Digraph undirected_path(std::size_t vertex_count) {
    std::vector<Edge> edges;
    for (Vertex i = 0; i + 1 < vertex_count; ++i) {
        edges.push_back({i, i + 1});
        edges.push_back({i + 1, i});
    }
    return Digraph(vertex_count, std::move(edges));
}

Digraph symmetrize(const Digraph& g) {
    std::vector<Edge> edges = g.edges();
    for (const Edge& e : g.edges()) edges.push_back({e.to, e.from});
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return Digraph(g.vertex_count(), std::move(edges));
}

Digraph graph_union(const std::vector<Digraph>& graphs) {
    if (graphs.empty()) throw ArgumentError("union of zero graphs");
    const std::size_t n = graphs.front().vertex_count();
    std::vector<Edge> edges;
    for (const Digraph& g : graphs) {
        if (g.vertex_count() != n) throw ArgumentError("union of graphs with different vertex counts");
        edges.insert(edges.end(), g.edges().begin(), g.edges().end());
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return Digraph(n, std::move(edges));
}

bool is_strongly_connected(const Digraph& g) {
    const std::size_t n = g.vertex_count();
    std::vector<char> seen(n);
    for (Vertex source = 0; source < n; ++source) {
        std::fill(seen.begin(), seen.end(), 0);
        std::deque<Vertex> frontier{source};
        seen[source] = 1;
        std::size_t reached = 1;
        while (!frontier.empty()) {
            const Vertex u = frontier.front();
            frontier.pop_front();
            for (Vertex w : g.out_neighbors(u)) {
                if (!seen[w]) {
                    seen[w] = 1;
                    ++reached;
                    frontier.push_back(w);
                }
            }
        }
        if (reached != n) return false;
    }
    return true;
}

Digraph generate_paper_topology(std::size_t vertex_count, std::size_t n, std::uint64_t seed,
                                std::size_t random_out_edges) {
    if (vertex_count < 3) throw ArgumentError("paper topology needs at least 3 agents");
    if (random_out_edges + 1 > vertex_count - 1) {
        throw ArgumentError("too many random out-neighbors for the agent count");
    }
    Rng rng(derive_seed(seed, n));
    std::vector<Vertex> order(vertex_count);
    std::iota(order.begin(), order.end(), Vertex{0});
    for (std::size_t k = vertex_count - 1; k > 0; --k) std::swap(order[k], order[rng.index(k + 1)]);

    std::vector<Edge> edges;
    for (std::size_t k = 0; k < vertex_count; ++k) {
        edges.push_back({order[k], order[(k + 1) % vertex_count]});
    }
    for (Vertex i = 0; i < vertex_count; ++i) {
        std::vector<Vertex> picked;
        while (picked.size() < random_out_edges) {
            Vertex j = rng.index(vertex_count - 1);
            if (j >= i) ++j;
            if (std::find(picked.begin(), picked.end(), j) == picked.end()) picked.push_back(j);
        }
        for (Vertex j : picked) edges.push_back({i, j});
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return Digraph(vertex_count, std::move(edges));
}

DigraphSequence::DigraphSequence(std::size_t vertex_count, Generator generator,
                                 std::optional<std::size_t> horizon, bool is_static)
    : vertex_count_(vertex_count), generator_(std::move(generator)), horizon_(horizon), static_(is_static) {
    if (!generator_) throw ArgumentError("digraph sequence needs a generator");
}

DigraphSequence DigraphSequence::constant(Digraph g) {
    const std::size_t n = g.vertex_count();
    return DigraphSequence(n, [g = std::move(g)](std::size_t) { return g; }, std::nullopt, true);
}

DigraphSequence DigraphSequence::replay(std::vector<Digraph> graphs) {
    if (graphs.empty()) throw ArgumentError("replay sequence is empty");
    const std::size_t n = graphs.front().vertex_count();
    for (const Digraph& g : graphs) {
        if (g.vertex_count() != n) throw ArgumentError("replayed graphs differ in vertex count");
    }
    const std::size_t horizon = graphs.size();
    const bool all_same = std::all_of(graphs.begin(), graphs.end(),
                                      [&](const Digraph& g) { return g == graphs.front(); });
    return DigraphSequence(
        n, [graphs = std::move(graphs)](std::size_t slot) { return graphs[slot % graphs.size()]; },
        horizon, all_same);
}

DigraphSequence DigraphSequence::paper_topology(std::size_t vertex_count, std::uint64_t seed,
                                                std::size_t random_out_edges) {
    // Validate eagerly so configuration errors surface before a run starts.
    (void)generate_paper_topology(vertex_count, 0, seed, random_out_edges);
    return DigraphSequence(vertex_count, [=](std::size_t n) {
        return generate_paper_topology(vertex_count, n, seed, random_out_edges);
    });
}

DigraphSequence DigraphSequence::symmetrized(const DigraphSequence& base) {
    return DigraphSequence(
        base.vertex_count(), [base](std::size_t n) { return symmetrize(base.at(n)); }, base.horizon(),
        base.is_static());
}

Digraph DigraphSequence::at(std::size_t n) const {
    Digraph g = generator_(n);
    if (g.vertex_count() != vertex_count_) throw ArgumentError("generator changed the vertex count");
    return g;
}

bool check_b_connectivity(const DigraphSequence& sequence, std::size_t B, std::size_t windows) {
    if (B == 0) throw ArgumentError("B must be positive");
    if (windows == 0) throw ArgumentError("windows must be positive");
    for (std::size_t k = 0; k < windows; ++k) {
        std::vector<Digraph> slot_graphs;
        for (std::size_t t = k * B; t < (k + 1) * B; ++t) slot_graphs.push_back(sequence.at(t));
        if (!is_strongly_connected(graph_union(slot_graphs))) return false;
    }
    return true;
}

std::string format_digraph_line(std::size_t n, const Digraph& g) {
    std::ostringstream line;
    line << n << ':';
    bool first = true;
    for (const Edge& e : g.edges()) {
        line << (first ? " " : ", ") << e.from << '>' << e.to;
        first = false;
    }
    return line.str();
}

void write_digraph_sequence(std::ostream& out, const DigraphSequence& sequence, std::size_t slots) {
    for (std::size_t n = 0; n < slots; ++n) out << format_digraph_line(n, sequence.at(n)) << '\n';
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::size_t parse_index(const std::string& token, std::size_t line_number) {
    std::size_t used = 0;
    unsigned long long value = 0;
    try {
        value = std::stoull(token, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != token.size()) {
        throw ArgumentError("line " + std::to_string(line_number) + ": bad integer '" + token + "'");
    }
    return static_cast<std::size_t>(value);
}

}  // namespace

std::vector<Digraph> read_digraph_sequence(std::istream& in, std::size_t vertex_count) {
    std::vector<Digraph> graphs;
    std::string raw;
    std::size_t line_number = 0;
    while (std::getline(in, raw)) {
        ++line_number;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) {
            throw ArgumentError("line " + std::to_string(line_number) + ": missing ':'");
        }
        const std::size_t slot = parse_index(trim(line.substr(0, colon)), line_number);
        if (slot != graphs.size()) {
            throw ArgumentError("line " + std::to_string(line_number) + ": slots must be consecutive from 0");
        }
        std::vector<Edge> edges;
        std::stringstream rest(line.substr(colon + 1));
        std::string item;
        while (std::getline(rest, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            const auto arrow = item.find('>');
            if (arrow == std::string::npos) {
                throw ArgumentError("line " + std::to_string(line_number) + ": edge must look like j>i");
            }
            edges.push_back({parse_index(trim(item.substr(0, arrow)), line_number),
                             parse_index(trim(item.substr(arrow + 1)), line_number)});
        }
        graphs.emplace_back(vertex_count, std::move(edges));
    }
    return graphs;
}

}  // namespace sonata
