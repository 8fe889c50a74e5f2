#include "nestedwalk/graphs.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "nestedwalk/common.hpp"

namespace nw {

Config& config() {
    static Config cfg;
    return cfg;
}

}  // namespace nw

namespace nw::graphs {

Graph::Graph(int n) : n_(n) {
    if (n < 0) throw std::invalid_argument("negative vertex count");
    adj_.assign(static_cast<std::size_t>(n) * n, 0);
}

void Graph::check(int v) const {
    if (v < 0 || v >= n_) throw std::invalid_argument("vertex index out of range");
}

bool Graph::edge(int u, int v) const {
    check(u);
    check(v);
    return adj_[static_cast<std::size_t>(u) * n_ + v] != 0;
}

void Graph::set_edge(int u, int v, bool present) {
    check(u);
    check(v);
    if (u == v) throw std::invalid_argument("self loops are not allowed");
    adj_[static_cast<std::size_t>(u) * n_ + v] = present ? 1 : 0;
    adj_[static_cast<std::size_t>(v) * n_ + u] = present ? 1 : 0;
}

int Graph::edge_count() const {
    int c = 0;
    for (int u = 0; u < n_; ++u)
        for (int v = u + 1; v < n_; ++v)
            if (edge(u, v)) ++c;
    return c;
}

std::vector<std::pair<int, int>> Graph::edges() const {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < n_; ++u)
        for (int v = u + 1; v < n_; ++v)
            if (edge(u, v)) e.emplace_back(u, v);
    return e;
}

Graph Graph::complete(int n) {
    Graph g(n);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) g.set_edge(u, v);
    return g;
}

Graph Graph::random(int n, double p, rng::Stream& rng) {
    Graph g(n);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.bernoulli(p)) g.set_edge(u, v);
    return g;
}

EdgeSet EdgeSet::of(std::vector<std::pair<int, int>> raw, int n) {
    std::set<std::pair<int, int>> norm;
    for (auto [u, v] : raw) {
        if (u == v) throw std::invalid_argument("edge with equal endpoints");
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw std::invalid_argument("edge endpoint out of range");
        norm.insert({std::min(u, v), std::max(u, v)});
    }
    EdgeSet s;
    s.pairs.assign(norm.begin(), norm.end());
    return s;
}

bool EdgeSet::contains(int u, int v) const {
    auto key = std::make_pair(std::min(u, v), std::max(u, v));
    return std::binary_search(pairs.begin(), pairs.end(), key);
}

int pair_index(int n, int u, int v) {
    if (u > v) std::swap(u, v);
    if (u < 0 || v >= n || u == v) throw std::invalid_argument("bad vertex pair");
    // pairs (0,1),(0,2),...,(0,n-1),(1,2),...
    return u * n - u * (u + 1) / 2 + (v - u - 1);
}

std::pair<int, int> pair_of_index(int n, int idx) {
    if (idx < 0 || idx >= pair_count(n)) throw std::invalid_argument("pair index out of range");
    int u = 0;
    int row = n - 1;
    while (idx >= row) {
        idx -= row;
        --row;
        ++u;
    }
    return {u, u + 1 + idx};
}

Graph induced_subgraph(const Graph& g, const std::vector<int>& r) {
    std::vector<int> vs = r;
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    for (int v : vs)
        if (v < 0 || v >= g.n()) throw std::invalid_argument("vertex index out of range");
    Graph out(static_cast<int>(vs.size()));
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = i + 1; j < vs.size(); ++j)
            if (g.edge(vs[i], vs[j])) out.set_edge(static_cast<int>(i), static_cast<int>(j));
    return out;
}

Graph bipartite_subgraph(const Graph& g, const std::vector<int>& r, const std::vector<int>& s) {
    std::set<int> rset(r.begin(), r.end()), sset(s.begin(), s.end());
    std::set<int> uni;
    for (int v : rset) {
        if (v < 0 || v >= g.n()) throw std::invalid_argument("vertex index out of range");
        uni.insert(v);
    }
    for (int v : sset) {
        if (v < 0 || v >= g.n()) throw std::invalid_argument("vertex index out of range");
        uni.insert(v);
    }
    std::vector<int> vs(uni.begin(), uni.end());
    Graph out(static_cast<int>(vs.size()));
    auto rank = [&](int v) {
        return static_cast<int>(std::lower_bound(vs.begin(), vs.end(), v) - vs.begin());
    };
    for (int u : rset)
        for (int v : sset) {
            if (u == v) continue;
            if (g.edge(u, v)) out.set_edge(rank(u), rank(v));
        }
    return out;
}

Graph edge_restricted(const Graph& g, const EdgeSet& f) {
    Graph out(g.n());
    for (auto [u, v] : f.pairs)
        if (g.edge(u, v)) out.set_edge(u, v);
    return out;
}

std::optional<std::array<int, 3>> has_triangle(const Graph& g) {
    for (int a = 0; a < g.n(); ++a)
        for (int b = a + 1; b < g.n(); ++b) {
            if (!g.edge(a, b)) continue;
            for (int c = b + 1; c < g.n(); ++c)
                if (g.edge(a, c) && g.edge(b, c)) return std::array<int, 3>{a, b, c};
        }
    return std::nullopt;
}

std::optional<std::pair<int, int>> has_graph_collision(const Graph& g, const Marking& m) {
    if (m.size() != g.n()) throw std::invalid_argument("marking length does not match graph");
    for (int a = 0; a < g.n(); ++a) {
        if (!m.marked(a)) continue;
        for (int b = a + 1; b < g.n(); ++b)
            if (m.marked(b) && g.edge(a, b)) return std::make_pair(a, b);
    }
    return std::nullopt;
}

namespace {

bool extend_injection(const Graph& g, const Graph& h, bool induced, std::vector<int>& map,
                      std::vector<char>& used, int next) {
    if (next == h.n()) return true;
    for (int cand = 0; cand < g.n(); ++cand) {
        if (used[cand]) continue;
        bool ok = true;
        for (int prev = 0; prev < next && ok; ++prev) {
            bool he = h.edge(prev, next);
            bool ge = g.edge(map[prev], cand);
            if (he && !ge) ok = false;
            if (induced && !he && ge) ok = false;
        }
        if (!ok) continue;
        map[next] = cand;
        used[cand] = 1;
        if (extend_injection(g, h, induced, map, used, next + 1)) return true;
        used[cand] = 0;
    }
    return false;
}

}  // namespace

bool contains_subgraph(const Graph& g, const Graph& h, bool induced) {
    if (h.n() > g.n()) throw std::invalid_argument("pattern larger than host graph");
    if (h.n() > 5) throw std::invalid_argument("pattern size limited to 5 vertices");
    std::vector<int> map(h.n(), -1);
    std::vector<char> used(g.n(), 0);
    return extend_injection(g, h, induced, map, used, 0);
}

Graph read_graph(std::istream& in) {
    std::string line;
    int n = -1;
    Graph g;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        if (n < 0) {
            if (!(ls >> n) || n < 0) {
                if (line.find_first_not_of(" \t\r") == std::string::npos) {
                    n = -1;
                    continue;
                }
                throw ParseError("graph file line " + std::to_string(lineno) +
                                 ": expected vertex count");
            }
            g = Graph(n);
            continue;
        }
        int u, v;
        if (!(ls >> u)) continue;  // blank
        if (!(ls >> v))
            throw ParseError("graph file line " + std::to_string(lineno) + ": expected 'u v'");
        std::string extra;
        if (ls >> extra)
            throw ParseError("graph file line " + std::to_string(lineno) + ": trailing tokens");
        if (u < 0 || v < 0 || u >= n || v >= n || u == v)
            throw ParseError("graph file line " + std::to_string(lineno) + ": bad edge");
        g.set_edge(u, v);
    }
    if (n < 0) throw ParseError("graph file missing vertex count");
    return g;
}

Graph read_graph_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open graph file: " + path);
    return read_graph(f);
}

}  // namespace nw::graphs
