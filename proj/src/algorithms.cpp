#include "nestedwalk/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>

#include "nestedwalk/common.hpp"

namespace nw::algorithms {

using graphs::Graph;
using graphs::Marking;
using hilbert::cx;
using hilbert::LinearOp;
using hilbert::RegisterLayout;
using walk::WalkLevelSpec;

namespace {

markov::MarkovChain single_state_chain(std::vector<int> label) {
    markov::MarkovChain c;
    c.n_states = 1;
    c.rows = {{{0, 1.0}}};
    c.pi = {1.0};
    c.delta = 1.0;
    c.labels = {std::move(label)};
    return c;
}

markov::MarkovChain johnson_or_single(int n, int r) {
    if (r == n) {
        std::vector<int> all(n);
        for (int i = 0; i < n; ++i) all[i] = i;
        return single_state_chain(std::move(all));
    }
    return markov::johnson_chain(n, r);
}

std::int64_t pow2(int bits) { return std::int64_t{1} << bits; }

Graph graph_from_bits(int nv, const std::vector<std::uint8_t>& bits) {
    Graph g(nv);
    int p = 0;
    for (int i = 0; i < nv; ++i)
        for (int j = i + 1; j < nv; ++j, ++p)
            if (bits[static_cast<std::size_t>(p)]) g.set_edge(i, j);
    return g;
}

}  // namespace

std::vector<std::pair<int, int>> subset_pairs(const std::vector<int>& r) {
    std::vector<std::pair<int, int>> out;
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = i + 1; j < r.size(); ++j) out.emplace_back(r[i], r[j]);
    return out;
}

double grover_schedule_success(int candidates, int marked) {
    if (marked <= 0) return 0.0;
    const double mu = static_cast<double>(marked) / candidates;
    const double theta = std::asin(std::min(1.0, std::sqrt(mu)));
    double fail = 1.0;
    for (int j = 1; j <= candidates; ++j) {
        const int k = walk::grover_iterations(static_cast<double>(j) / candidates);
        const double s = std::sin((2.0 * k + 1.0) * theta);
        fail *= 1.0 - s * s;
    }
    return 1.0 - fail;
}

long long grover_schedule_iterations(int candidates) {
    long long total = 0;
    for (int j = 1; j <= candidates; ++j)
        total += walk::grover_iterations(static_cast<double>(j) / candidates) + 1;
    return total;
}

// ---------------------------------------------------------------------------
// Graph collision walks

walk::WalkLevelSpec make_graph_collision_spec(const Graph& tmpl, int r1, int r2, const Marking& mk,
                                              int m) {
    if (tmpl.n() != r1 + r2) throw std::invalid_argument("template must have r1+r2 vertices");
    if (mk.size() != tmpl.n()) throw std::invalid_argument("marking length mismatch");
    if (!(r1 >= 1 && r1 <= r2)) throw std::invalid_argument("need 1 <= r1 <= r2");
    if (static_cast<long long>(r2) > static_cast<long long>(r1) * r1)
        throw std::invalid_argument("need r2 <= r1^2");
    if (m < 1 || m > r1) throw std::invalid_argument("need 1 <= m <= r1");

    WalkLevelSpec spec;
    spec.chain = markov::product_chain(johnson_or_single(r1, m), johnson_or_single(r2, m));
    const auto n_states = spec.chain.n_states;
    spec.layout = RegisterLayout({{"L", n_states + 1}, {"R", n_states + 1}, {"D", pow2(r1 + r2)}});
    spec.data_regs = {"D"};
    const int nv = r1 + r2;

    auto chain = spec.chain;  // labels copied into closures
    auto bits_of = [chain, mk, r1, m, nv](int u) {
        const auto& lab = chain.labels[static_cast<std::size_t>(u)];
        std::int64_t idx = 0;
        for (int i = 0; i < m; ++i) {
            const int v1 = lab[static_cast<std::size_t>(i)];
            if (mk.marked(v1)) idx |= std::int64_t{1} << v1;
            const int v2 = r1 + lab[static_cast<std::size_t>(m + i)];
            if (mk.marked(v2)) idx |= std::int64_t{1} << v2;
        }
        (void)nv;
        return idx;
    };
    spec.data_map = [layout = spec.layout, bits_of](int u) {
        auto d = hilbert::StateVector::basis(
            RegisterLayout({{"D", layout.reg(2).dim}}), bits_of(u));
        return d;
    };
    // Collision present among the stored bits: i1 in S1, i2 in S2 adjacent in
    // the template with both marking bits set.
    auto collide = [chain, tmpl, r1, m](int u, std::int64_t data) {
        const auto& lab = chain.labels[static_cast<std::size_t>(u)];
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const int a = lab[static_cast<std::size_t>(i)];
                const int b = r1 + lab[static_cast<std::size_t>(m + j)];
                if (!tmpl.edge(a, b)) continue;
                if ((data >> a & 1) && (data >> b & 1)) return true;
            }
        return false;
    };
    spec.basis_marked = collide;
    spec.marked = [collide, bits_of](int u) { return collide(u, bits_of(u)); };
    spec.epsilon = std::min(1.0, static_cast<double>(m) * m / (static_cast<double>(r1) * r2));
    spec.setup_queries = 2 * m;
    spec.update_queries = 4;
    spec.check_queries = 0;
    return spec;
}

bool graph_collision_walk(const Graph& tmpl, int r1, int r2, const Marking& mk, int m,
                          oracle::QueryOracle& o, rng::Stream& rng) {
    return walk::search(make_graph_collision_spec(tmpl, r1, r2, mk, m), o, rng);
}

walk::WalkLevelSpec make_collision_johnson_spec(const Graph& tmpl, const Marking& mk, int m) {
    const int nv = tmpl.n();
    if (mk.size() != nv) throw std::invalid_argument("marking length mismatch");
    if (m < 2 || m > nv) throw std::invalid_argument("need 2 <= m <= n");

    WalkLevelSpec spec;
    spec.chain = johnson_or_single(nv, m);
    spec.layout = RegisterLayout(
        {{"L", spec.chain.n_states + 1}, {"R", spec.chain.n_states + 1}, {"D", pow2(nv)}});
    spec.data_regs = {"D"};
    auto chain = spec.chain;
    auto bits_of = [chain, mk](int u) {
        std::int64_t idx = 0;
        for (int v : chain.labels[static_cast<std::size_t>(u)])
            if (mk.marked(v)) idx |= std::int64_t{1} << v;
        return idx;
    };
    spec.data_map = [dim = pow2(nv), bits_of](int u) {
        return hilbert::StateVector::basis(RegisterLayout({{"D", dim}}), bits_of(u));
    };
    auto collide = [chain, tmpl](int u, std::int64_t data) {
        const auto& lab = chain.labels[static_cast<std::size_t>(u)];
        for (std::size_t i = 0; i < lab.size(); ++i)
            for (std::size_t j = i + 1; j < lab.size(); ++j)
                if (tmpl.edge(lab[i], lab[j]) && (data >> lab[i] & 1) && (data >> lab[j] & 1))
                    return true;
        return false;
    };
    spec.basis_marked = collide;
    spec.marked = [collide, bits_of](int u) { return collide(u, bits_of(u)); };
    spec.epsilon = std::min(
        1.0, static_cast<double>(m) * (m - 1) / (static_cast<double>(nv) * (nv - 1)));
    spec.setup_queries = m;
    spec.update_queries = 2;
    spec.check_queries = 0;
    return spec;
}

namespace {

// Deterministic collision verdict used inside triangle checking: runs the
// collision walk end to end against a scratch oracle.
bool collision_verdict(const Graph& tmpl, const Marking& mk, int split_r1) {
    auto scratch = oracle::QueryOracle::from_marking(mk);
    auto rng = rng::stream(0, "collision-verdict");
    if (tmpl.n() == 2 && split_r1 == 1) {
        return walk::search(make_graph_collision_spec(tmpl, 1, 1, mk, 1), scratch, rng);
    }
    const int m = std::clamp(static_cast<int>(std::llround(std::pow(tmpl.n(), 2.0 / 3.0))), 2,
                             tmpl.n() - 1);
    return walk::search(make_collision_johnson_spec(tmpl, mk, m), scratch, rng);
}

// Declared query cost of one collision subcall (setup plus detection budget).
long long collision_budget(int nv, int split_r1) {
    Graph tmpl(nv);
    Marking mk;
    mk.bits.assign(static_cast<std::size_t>(nv), 0);
    WalkLevelSpec spec = (nv == 2 && split_r1 == 1)
                             ? make_graph_collision_spec(tmpl, 1, 1, mk, 1)
                             : make_collision_johnson_spec(
                                   tmpl, mk,
                                   std::clamp(static_cast<int>(std::llround(
                                                  std::pow(nv, 2.0 / 3.0))),
                                              2, nv - 1));
    return spec.setup_queries + walk::detect_budget(spec);
}

}  // namespace

// ---------------------------------------------------------------------------
// MSS triangle walk

walk::WalkLevelSpec make_triangle_mss_spec(const Graph& g, int r) {
    const int n = g.n();
    if (r < 2 || r > n) throw std::invalid_argument("need 2 <= r <= n");
    const int npairs = static_cast<int>(graphs::pair_count(r));

    WalkLevelSpec spec;
    spec.chain = johnson_or_single(n, r);
    spec.layout = RegisterLayout(
        {{"L", spec.chain.n_states + 1}, {"R", spec.chain.n_states + 1}, {"D", pow2(npairs)}});
    spec.data_regs = {"D"};

    auto chain = spec.chain;
    auto bits_of = [chain, g](int u) {
        const auto pairs = subset_pairs(chain.labels[static_cast<std::size_t>(u)]);
        std::int64_t idx = 0;
        for (std::size_t p = 0; p < pairs.size(); ++p)
            if (g.edge(pairs[p].first, pairs[p].second)) idx |= std::int64_t{1} << p;
        return idx;
    };
    spec.data_map = [dim = pow2(npairs), bits_of](int u) {
        return hilbert::StateVector::basis(RegisterLayout({{"D", dim}}), bits_of(u));
    };
    // Marked iff R holds two vertices of a triangle: a stored edge both of
    // whose endpoints are adjacent to some third vertex.
    spec.marked = [chain, g, n](int u) {
        const auto& lab = chain.labels[static_cast<std::size_t>(u)];
        for (std::size_t i = 0; i < lab.size(); ++i)
            for (std::size_t j = i + 1; j < lab.size(); ++j) {
                if (!g.edge(lab[i], lab[j])) continue;
                for (int k = 0; k < n; ++k)
                    if (g.edge(lab[i], k) && g.edge(lab[j], k)) return true;
            }
        return false;
    };
    spec.basis_marked = [marked = spec.marked](int u, std::int64_t) { return marked(u); };
    spec.epsilon =
        std::min(1.0, static_cast<double>(r) * r / (static_cast<double>(n) * n));
    spec.setup_queries = npairs;
    spec.update_queries = 2 * (r - 1);
    const long long flip_cost = r + collision_budget(r, r == 2 ? 1 : 0);
    spec.check_queries = grover_schedule_iterations(n) * flip_cost;

    // Realized checking: a Grover schedule over completion vertices k, one
    // collision walk on the stored subgraph per candidate, with the k-to-R
    // adjacency bits queried fresh.
    auto cache = std::make_shared<std::map<int, double>>();
    spec.check_procedure = [chain, g, n, r, bits_of, cache,
                            marked = spec.marked](int u) {
        oracle::FlipProcedure proc;
        proc.truth = marked(u);
        proc.queries = 0;  // charged through the enclosing detection budget
        proc.sample = [chain, g, n, r, bits_of, cache, u](rng::Stream& rng) {
            auto it = cache->find(u);
            if (it == cache->end()) {
                const auto& lab = chain.labels[static_cast<std::size_t>(u)];
                std::vector<std::uint8_t> bits(graphs::pair_count(r));
                const std::int64_t idx = bits_of(u);
                for (std::size_t p = 0; p < bits.size(); ++p) bits[p] = (idx >> p) & 1;
                const Graph stored = graph_from_bits(r, bits);
                int good = 0;
                for (int k = 0; k < n; ++k) {
                    Marking mk;
                    mk.bits.resize(static_cast<std::size_t>(r));
                    for (int i = 0; i < r; ++i)
                        mk.bits[static_cast<std::size_t>(i)] =
                            (lab[static_cast<std::size_t>(i)] == k)
                                ? 0
                                : g.edge(lab[static_cast<std::size_t>(i)], k);
                    if (collision_verdict(stored, mk, r == 2 ? 1 : 0)) ++good;
                }
                it = cache->emplace(u, grover_schedule_success(n, good)).first;
            }
            return rng.bernoulli(it->second);
        };
        return proc;
    };
    return spec;
}

bool triangle_mss(const Graph& g, int r, oracle::QueryOracle& o, rng::Stream& rng) {
    return walk::search(make_triangle_mss_spec(g, r), o, rng);
}

// ---------------------------------------------------------------------------
// Two-level sparsified triangle walk

walk::WalkLevelSpec make_triangle_3527_spec(const Graph& g, const TriangleParams& p) {
    const int n = g.n();
    const int r = p.r;
    if (r < 2 || r > n) throw std::invalid_argument("need 2 <= r <= n");
    const int npos = static_cast<int>(graphs::pair_count(r));
    const int t = std::max(1, static_cast<int>(std::llround(p.s * npos)));
    if (t > npos) throw std::invalid_argument("sparsification exceeds the potential edge count");

    markov::MarkovChain outer_chain = johnson_or_single(n, r);
    markov::MarkovChain inner_chain = johnson_or_single(npos, t);
    const auto n1 = outer_chain.n_states;
    const auto n2 = inner_chain.n_states;

    RegisterLayout layout({{"L", n1 + 1},
                           {"R", n1 + 1},
                           {"L2", n2 + 1},
                           {"R2", n2 + 1},
                           {"D2", pow2(t)}});
    RegisterLayout inner_layout({{"L2", n2 + 1}, {"R2", n2 + 1}, {"D2", pow2(t)}});

    // Inner data: the stored presence bit of each selected position (rank
    // order within T), for positions interpreted over the current R.
    auto inner_bits = [g](const std::vector<int>& R, const std::vector<int>& T) {
        const auto pairs = subset_pairs(R);
        std::int64_t idx = 0;
        for (std::size_t i = 0; i < T.size(); ++i) {
            const auto& e = pairs[static_cast<std::size_t>(T[i])];
            if (g.edge(e.first, e.second)) idx |= std::int64_t{1} << i;
        }
        return idx;
    };
    // Marked inner state: a stored present edge completed to a triangle by a
    // vertex outside R.
    auto inner_marked = [g, n](const std::vector<int>& R, const std::vector<int>& T) {
        const auto pairs = subset_pairs(R);
        std::set<int> in_r(R.begin(), R.end());
        for (int pos : T) {
            const auto& e = pairs[static_cast<std::size_t>(pos)];
            if (!g.edge(e.first, e.second)) continue;
            for (int k = 0; k < n; ++k) {
                if (in_r.count(k)) continue;
                if (g.edge(e.first, k) && g.edge(e.second, k)) return true;
            }
        }
        return false;
    };

    const long long flip_cost = r + collision_budget(r, r == 2 ? 1 : 0);
    const long long inner_check = grover_schedule_iterations(std::max(1, n - r)) * flip_cost;

    auto inner_family = [=](int u) {
        WalkLevelSpec in;
        in.chain = inner_chain;
        in.layout = inner_layout;
        in.reg_L = "L2";
        in.reg_R = "R2";
        in.data_regs = {"D2"};
        const std::vector<int> R = outer_chain.labels[static_cast<std::size_t>(u)];
        in.data_map = [=](int s) {
            return hilbert::StateVector::basis(
                RegisterLayout({{"D2", pow2(t)}}),
                inner_bits(R, inner_chain.labels[static_cast<std::size_t>(s)]));
        };
        in.marked = [=](int s) {
            return inner_marked(R, inner_chain.labels[static_cast<std::size_t>(s)]);
        };
        in.epsilon = static_cast<double>(t) / npos;  // realized sparsification ratio
        in.setup_queries = t;
        in.update_queries = 2;
        in.check_queries = inner_check;
        auto cache = std::make_shared<std::map<int, double>>();
        in.check_procedure = [=](int s) {
            oracle::FlipProcedure proc;
            proc.truth = in.marked ? inner_marked(R, inner_chain.labels[static_cast<std::size_t>(s)])
                                   : false;
            proc.queries = 0;
            proc.sample = [=](rng::Stream& rng) {
                auto it = cache->find(s);
                if (it == cache->end()) {
                    const auto& T = inner_chain.labels[static_cast<std::size_t>(s)];
                    const auto pairs = subset_pairs(R);
                    // Stored subgraph G_R(T) from the data bits.
                    Graph stored(r);
                    const std::int64_t bits = inner_bits(R, T);
                    std::map<int, int> rank;
                    for (int i = 0; i < r; ++i) rank[R[static_cast<std::size_t>(i)]] = i;
                    for (std::size_t i = 0; i < T.size(); ++i) {
                        if (!((bits >> i) & 1)) continue;
                        const auto& e = pairs[static_cast<std::size_t>(T[i])];
                        stored.set_edge(rank[e.first], rank[e.second]);
                    }
                    std::set<int> in_r(R.begin(), R.end());
                    int good = 0, candidates = 0;
                    for (int k = 0; k < n; ++k) {
                        if (in_r.count(k)) continue;
                        ++candidates;
                        Marking mk;
                        mk.bits.resize(static_cast<std::size_t>(r));
                        for (int i = 0; i < r; ++i)
                            mk.bits[static_cast<std::size_t>(i)] =
                                g.edge(R[static_cast<std::size_t>(i)], k);
                        if (collision_verdict(stored, mk, r == 2 ? 1 : 0)) ++good;
                    }
                    it = cache->emplace(s, grover_schedule_success(std::max(1, candidates), good))
                             .first;
                }
                return rng.bernoulli(it->second);
            };
            return proc;
        };
        return in;
    };

    // Outer spec: truncated data update with the Markov budget over the
    // per-branch symmetric-difference costs.
    WalkLevelSpec outer;
    outer.chain = outer_chain;
    outer.layout = layout;
    outer.data_regs = {"L2", "R2", "D2"};
    outer.epsilon = std::min(1.0, static_cast<double>(r) * r / (static_cast<double>(n) * n));
    outer.setup_queries = t;
    outer.marked = [=](int u) {
        // Two triangle vertices in R with the completing vertex outside.
        const auto& R = outer_chain.labels[static_cast<std::size_t>(u)];
        std::set<int> in_r(R.begin(), R.end());
        for (std::size_t i = 0; i < R.size(); ++i)
            for (std::size_t j = i + 1; j < R.size(); ++j) {
                if (!g.edge(R[i], R[j])) continue;
                for (int k = 0; k < n; ++k)
                    if (!in_r.count(k) && g.edge(R[i], k) && g.edge(R[j], k)) return true;
            }
        return false;
    };

    // Per-move truncation budgets and the transported-bit masks.
    auto move_cost = [=](const std::vector<int>& Ru, const std::vector<int>& Rv,
                         const std::vector<int>& T) {
        const auto pu = subset_pairs(Ru);
        const auto pv = subset_pairs(Rv);
        std::set<std::pair<int, int>> eo, en;
        for (int pos : T) {
            eo.insert(pu[static_cast<std::size_t>(pos)]);
            en.insert(pv[static_cast<std::size_t>(pos)]);
        }
        long long c = 0;
        for (const auto& e : eo)
            if (!en.count(e)) ++c;
        for (const auto& e : en)
            if (!eo.count(e)) ++c;
        return c;
    };

    long long q_max = 0;
    for (std::int64_t u = 0; u < n1; ++u)
        for (const auto& [v, prob] : outer_chain.rows[static_cast<std::size_t>(u)]) {
            double mean = 0.0;
            for (std::int64_t s = 0; s < n2; ++s)
                mean += static_cast<double>(
                            move_cost(outer_chain.labels[static_cast<std::size_t>(u)],
                                      outer_chain.labels[static_cast<std::size_t>(v)],
                                      inner_chain.labels[static_cast<std::size_t>(s)])) /
                        static_cast<double>(n2);
            q_max = std::max(q_max, static_cast<long long>(std::ceil(p.truncation_k * mean)));
        }
    outer.update_queries = q_max;

    outer.data_update = [=]() {
        std::map<std::int64_t, LinearOp> by_u;
        for (std::int64_t u = 0; u < n1; ++u) {
            std::map<std::int64_t, LinearOp> by_v;
            const auto& Ru = outer_chain.labels[static_cast<std::size_t>(u)];
            for (const auto& [v, prob] : outer_chain.rows[static_cast<std::size_t>(u)]) {
                if (v == u) continue;
                const auto& Rv = outer_chain.labels[static_cast<std::size_t>(v)];
                double mean = 0.0;
                for (std::int64_t s = 0; s < n2; ++s)
                    mean += static_cast<double>(move_cost(
                                Ru, Rv, inner_chain.labels[static_cast<std::size_t>(s)])) /
                            static_cast<double>(n2);
                const long long q =
                    static_cast<long long>(std::ceil(p.truncation_k * mean));
                std::map<std::int64_t, LinearOp> by_t;
                for (std::int64_t s = 0; s < n2; ++s) {
                    const auto& T = inner_chain.labels[static_cast<std::size_t>(s)];
                    if (move_cost(Ru, Rv, T) > q) continue;  // truncated: identity
                    const std::int64_t mask = inner_bits(Ru, T) ^ inner_bits(Rv, T);
                    if (mask == 0) continue;
                    std::vector<std::int64_t> perm(static_cast<std::size_t>(pow2(t)));
                    std::vector<cx> phase(static_cast<std::size_t>(pow2(t)), cx{1.0});
                    for (std::int64_t d = 0; d < pow2(t); ++d)
                        perm[static_cast<std::size_t>(d)] = d ^ mask;
                    by_t.emplace(s + 1,
                                 LinearOp::monomial({"D2"}, std::move(perm), std::move(phase)));
                }
                if (!by_t.empty()) by_v.emplace(v + 1, LinearOp::controlled("L2", std::move(by_t)));
            }
            if (!by_v.empty()) by_u.emplace(u + 1, LinearOp::controlled("R", std::move(by_v)));
        }
        return LinearOp::controlled("L", std::move(by_u));
    };

    return nested::compose_two_level(outer, inner_family);
}

bool triangle_nested_3527(const Graph& g, const TriangleParams& p, oracle::QueryOracle& o,
                          rng::Stream& rng) {
    return walk::search(make_triangle_3527_spec(g, p), o, rng);
}

// ---------------------------------------------------------------------------
// Vertex-pair nested triangle walk

walk::WalkLevelSpec make_triangle_97_spec(const Graph& g, const TriangleParams& p) {
    const int n = g.n();
    const int r1 = p.r1, r2 = p.r2, m = p.m;
    if (!(1 <= r1 && r1 <= r2 && r2 <= n))
        throw std::invalid_argument("need 1 <= r1 <= r2 <= n");
    if (static_cast<long long>(r2) > static_cast<long long>(r1) * r1)
        throw std::invalid_argument("need r2 <= r1^2");
    if (m < 1 || m > r1) throw std::invalid_argument("need 1 <= m <= r1");

    markov::MarkovChain outer_chain = johnson_or_single(n, r1);
    markov::MarkovChain inner_chain = johnson_or_single(n, r2);
    const auto n1 = outer_chain.n_states;
    const auto n2 = inner_chain.n_states;
    const int dbits = r1 * r2;

    RegisterLayout layout({{"L", n1 + 1},
                           {"R", n1 + 1},
                           {"L2", n2 + 1},
                           {"R2", n2 + 1},
                           {"D2", pow2(dbits)}});
    RegisterLayout inner_layout({{"L2", n2 + 1}, {"R2", n2 + 1}, {"D2", pow2(dbits)}});

    // Bipartite data bits G_{R1,R2}: bit i*r2+j holds the adjacency of
    // (R1[i], R2[j]); coinciding endpoints store 0.
    auto inner_bits = [g, r1, r2](const std::vector<int>& R1, const std::vector<int>& R2) {
        std::int64_t idx = 0;
        for (int i = 0; i < r1; ++i)
            for (int j = 0; j < r2; ++j) {
                const int a = R1[static_cast<std::size_t>(i)];
                const int b = R2[static_cast<std::size_t>(j)];
                if (a != b && g.edge(a, b)) idx |= std::int64_t{1} << (i * r2 + j);
            }
        return idx;
    };
    auto inner_marked = [g, n, r1, r2](const std::vector<int>& R1, const std::vector<int>& R2) {
        for (int i = 0; i < r1; ++i)
            for (int j = 0; j < r2; ++j) {
                const int a = R1[static_cast<std::size_t>(i)];
                const int b = R2[static_cast<std::size_t>(j)];
                if (a == b || !g.edge(a, b)) continue;
                for (int k = 0; k < n; ++k)
                    if (g.edge(a, k) && g.edge(b, k)) return true;
            }
        return false;
    };

    const long long flip_cost = (r1 + r2) + collision_budget(r1 + r2, r1);
    const long long inner_check = grover_schedule_iterations(n) * flip_cost;

    auto inner_family = [=](int u) {
        WalkLevelSpec in;
        in.chain = inner_chain;
        in.layout = inner_layout;
        in.reg_L = "L2";
        in.reg_R = "R2";
        in.data_regs = {"D2"};
        const std::vector<int> R1 = outer_chain.labels[static_cast<std::size_t>(u)];
        in.data_map = [=](int s) {
            return hilbert::StateVector::basis(
                RegisterLayout({{"D2", pow2(dbits)}}),
                inner_bits(R1, inner_chain.labels[static_cast<std::size_t>(s)]));
        };
        in.marked = [=](int s) {
            return inner_marked(R1, inner_chain.labels[static_cast<std::size_t>(s)]);
        };
        in.epsilon = static_cast<double>(r2) / n;
        in.setup_queries = r1 * r2;
        in.update_queries = 2 * r1;
        in.check_queries = inner_check;
        auto cache = std::make_shared<std::map<int, double>>();
        in.check_procedure = [=](int s) {
            const auto R2v = inner_chain.labels[static_cast<std::size_t>(s)];
            oracle::FlipProcedure proc;
            proc.truth = inner_marked(R1, R2v);
            proc.queries = 0;
            proc.sample = [=](rng::Stream& rng) {
                auto it = cache->find(s);
                if (it == cache->end()) {
                    // Bipartite template from the stored bits.
                    Graph tmpl(r1 + r2);
                    const std::int64_t bits = inner_bits(R1, R2v);
                    for (int i = 0; i < r1; ++i)
                        for (int j = 0; j < r2; ++j)
                            if ((bits >> (i * r2 + j)) & 1) tmpl.set_edge(i, r1 + j);
                    int good = 0;
                    for (int k = 0; k < n; ++k) {
                        Marking mk;
                        mk.bits.resize(static_cast<std::size_t>(r1 + r2));
                        for (int i = 0; i < r1; ++i)
                            mk.bits[static_cast<std::size_t>(i)] =
                                (R1[static_cast<std::size_t>(i)] == k)
                                    ? 0
                                    : g.edge(R1[static_cast<std::size_t>(i)], k);
                        for (int j = 0; j < r2; ++j)
                            mk.bits[static_cast<std::size_t>(r1 + j)] =
                                (R2v[static_cast<std::size_t>(j)] == k)
                                    ? 0
                                    : g.edge(R2v[static_cast<std::size_t>(j)], k);
                        auto scratch = oracle::QueryOracle::from_marking(mk);
                        auto vr = rng::stream(0, "collision-verdict");
                        if (walk::search(make_graph_collision_spec(tmpl, r1, r2, mk, m), scratch,
                                         vr))
                            ++good;
                    }
                    it = cache->emplace(s, grover_schedule_success(n, good)).first;
                }
                return rng.bernoulli(it->second);
            };
            return proc;
        };
        return in;
    };

    WalkLevelSpec outer;
    outer.chain = outer_chain;
    outer.layout = layout;
    outer.data_regs = {"L2", "R2", "D2"};
    outer.epsilon = static_cast<double>(r1) / n;
    outer.setup_queries = r1 * r2;
    outer.update_queries = 2 * r2;
    outer.marked = [=](int u) {
        const auto& R1 = outer_chain.labels[static_cast<std::size_t>(u)];
        auto tri = graphs::has_triangle(g);
        if (!tri) return false;
        // Any triangle vertex inside R1 marks the state.
        for (int a = 0; a < n; ++a) {
            bool in_r1 = std::find(R1.begin(), R1.end(), a) != R1.end();
            if (!in_r1) continue;
            for (int b = 0; b < n; ++b)
                for (int k = 0; k < n; ++k)
                    if (a != b && b != k && a != k && g.edge(a, b) && g.edge(b, k) &&
                        g.edge(a, k))
                        return true;
        }
        return false;
    };
    return nested::compose_two_level(outer, inner_family);
}

bool triangle_nested_97(const Graph& g, const TriangleParams& p, oracle::QueryOracle& o,
                        rng::Stream& rng) {
    return walk::search(make_triangle_97_spec(g, p), o, rng);
}

}  // namespace nw::algorithms
