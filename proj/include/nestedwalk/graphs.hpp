#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nestedwalk/rng.hpp"

namespace nw::graphs {

// Undirected simple graph on vertices 0..n-1 stored as a symmetric bit
// matrix. This is the hidden input of the query model for all graph
// problems; the oracle module flattens it into the bit string indexed by
// ordered vertex pairs.
class Graph {
public:
    Graph() : n_(0) {}
    explicit Graph(int n);

    int n() const { return n_; }
    bool edge(int u, int v) const;
    void set_edge(int u, int v, bool present = true);

    int edge_count() const;
    std::vector<std::pair<int, int>> edges() const;

    static Graph complete(int n);
    static Graph random(int n, double p, rng::Stream& rng);

private:
    void check(int v) const;
    int n_;
    std::vector<std::uint8_t> adj_;  // row-major n*n, kept symmetric, zero diagonal
};

// Unordered vertex pairs over [n], not necessarily edges of any graph.
struct EdgeSet {
    std::vector<std::pair<int, int>> pairs;  // normalized u < v, deduplicated

    static EdgeSet of(std::vector<std::pair<int, int>> raw, int n);
    bool contains(int u, int v) const;
};

// Binary string flagging marked vertices of a template graph.
struct Marking {
    std::vector<std::uint8_t> bits;

    int size() const { return static_cast<int>(bits.size()); }
    bool marked(int v) const { return bits[static_cast<std::size_t>(v)] != 0; }
};

// Rank of the ordered pair (u,v), u < v, in the lexicographic enumeration of
// all pairs over [n]. This is the canonical index of adjacency bits in the
// query string.
int pair_index(int n, int u, int v);
std::pair<int, int> pair_of_index(int n, int idx);
inline std::int64_t pair_count(int n) { return std::int64_t(n) * (n - 1) / 2; }

Graph induced_subgraph(const Graph& g, const std::vector<int>& r);
Graph bipartite_subgraph(const Graph& g, const std::vector<int>& r, const std::vector<int>& s);
Graph edge_restricted(const Graph& g, const EdgeSet& f);

// Lexicographically least triangle, if any.
std::optional<std::array<int, 3>> has_triangle(const Graph& g);

// Lexicographically least marked adjacent pair, if any.
std::optional<std::pair<int, int>> has_graph_collision(const Graph& g, const Marking& m);

// Subgraph containment by an edge-preserving injection (default), or exact
// induced containment when `induced` is set. Brute force, |V(H)| <= 5.
bool contains_subgraph(const Graph& g, const Graph& h, bool induced = false);

// Text format: first line "n", then one "u v" edge per line; blank lines and
// '#' comments ignored.
Graph read_graph(std::istream& in);
Graph read_graph_file(const std::string& path);

}  // namespace nw::graphs
