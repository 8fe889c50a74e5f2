#pragma once

#include <vector>

#include "nestedwalk/graphs.hpp"
#include "nestedwalk/nested.hpp"
#include "nestedwalk/walk.hpp"

namespace nw::algorithms {

// Walk parameters. `r` drives the single-level triangle walk, (r, s) the
// two-level sparsified walk, (r1, r2) the vertex-pair nested walk, and m the
// collision subset size. When the asymptotic optima are fractional at desk
// scale the callers round to the nearest feasible integers.
struct TriangleParams {
    int r = 2;
    double s = 1.0;
    int r1 = 1;
    int r2 = 1;
    int m = 1;
    int truncation_k = 7;  // multiple of the mean used for the update budget
};

// Pairs of a sorted vertex subset in lexicographic (i, j) order; position p
// of the walk data refers to subset_pairs(R)[p].
std::vector<std::pair<int, int>> subset_pairs(const std::vector<int>& r);

// Single-level walk on J(n, r) with data G_R (one bit per subset pair).
// Checking searches a completing vertex via graph collision on the stored
// subgraph.
walk::WalkLevelSpec make_triangle_mss_spec(const graphs::Graph& g, int r);
bool triangle_mss(const graphs::Graph& g, int r, oracle::QueryOracle& o, rng::Stream& rng);

// Two-level walk: outer on J(n, r), inner on J(C(r,2), round(s*C(r,2)))
// over sparsified potential-edge subsets with data G_R(T). The outer update
// is a truncated controlled unitary with the Markov-budget cutoff.
walk::WalkLevelSpec make_triangle_3527_spec(const graphs::Graph& g, const TriangleParams& p);
bool triangle_nested_3527(const graphs::Graph& g, const TriangleParams& p, oracle::QueryOracle& o,
                          rng::Stream& rng);

// Two-level walk: outer on J(n, r1), inner on J(n, r2) with data G_{R1,R2};
// checking searches the third triangle vertex via bipartite graph collision.
walk::WalkLevelSpec make_triangle_97_spec(const graphs::Graph& g, const TriangleParams& p);
bool triangle_nested_97(const graphs::Graph& g, const TriangleParams& p, oracle::QueryOracle& o,
                        rng::Stream& rng);

// Bipartite graph collision on classes {0..r1-1} and {r1..r1+r2-1} of the
// template graph: a walk on J(r1,m) x J(r2,m) whose data holds the marking
// bits of S1 u S2. Checking costs 0 queries.
walk::WalkLevelSpec make_graph_collision_spec(const graphs::Graph& tmpl, int r1, int r2,
                                              const graphs::Marking& mk, int m);
bool graph_collision_walk(const graphs::Graph& tmpl, int r1, int r2, const graphs::Marking& mk,
                          int m, oracle::QueryOracle& o, rng::Stream& rng);

// Collision walk on J(n, m) over a general (not necessarily bipartite)
// template graph, used by the triangle checks for r >= 3.
walk::WalkLevelSpec make_collision_johnson_spec(const graphs::Graph& tmpl,
                                                const graphs::Marking& mk, int m);

// Success probability of the fixed Grover schedule over `candidates`
// elements of which `marked` are good: one run of grover_iterations(j/c)
// steps for each j = 1..c, succeeding if any measurement verifies.
double grover_schedule_success(int candidates, int marked);
long long grover_schedule_iterations(int candidates);

}  // namespace nw::algorithms
