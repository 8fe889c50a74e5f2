#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace nw::markov {

// Finite reversible Markov chain with exact stationary distribution and
// spectral gap. Transition rows are stored sparsely; constructors reject
// state counts above the configured ceiling.
//
// The gap is 1 - lambda2 where lambda2 is the second-largest *signed*
// eigenvalue of the symmetrized matrix diag(pi)^{1/2} P diag(pi)^{-1/2}.
// It can exceed 1 (e.g. the complete-graph walk); negative eigenvalues do
// not shrink it.
struct MarkovChain {
    std::int64_t n_states = 0;
    std::vector<std::vector<std::pair<int, double>>> rows;  // sparse P, row-stochastic
    std::vector<double> pi;
    double delta = 1.0;

    // Opaque state labels. Johnson chains store the sorted subset; product
    // chains concatenate the two factor labels with `label_split` marking
    // the length of the first part.
    std::vector<std::vector<int>> labels;
    int label_split = 0;

    double P(int u, int v) const;
};

// Uniform random walk on the Johnson graph J(n, r): states are the r-subsets
// of {0..n-1} in lexicographic order, adjacent when the symmetric difference
// has size 2, P[u][v] = 1/(r(n-r)).
MarkovChain johnson_chain(int n, int r);

// Recomputes 1 - lambda2 from P and pi. Dense eigendecomposition up to the
// configured threshold, a deflated shifted power iteration beyond it.
// Throws ContractError if the chain is not reversible.
double spectral_gap(const MarkovChain& chain);

// Tensor product: both coordinates move simultaneously, P = P1 (x) P2.
MarkovChain product_chain(const MarkovChain& a, const MarkovChain& b);

// Subset utilities shared by Johnson-chain consumers.
std::int64_t binomial(int n, int k);
std::vector<int> subset_unrank(int n, int r, std::int64_t rank);  // lexicographic
std::int64_t subset_rank(int n, const std::vector<int>& subset);

// Validation helpers (used by tests and the verify suites).
double max_row_sum_error(const MarkovChain& chain);
double max_detailed_balance_error(const MarkovChain& chain);
double max_stationarity_error(const MarkovChain& chain);  // |pi P - pi|_inf

}  // namespace nw::markov
