#include "nestedwalk/markov.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nestedwalk/common.hpp"

namespace nw::markov {

double MarkovChain::P(int u, int v) const {
    for (const auto& [j, p] : rows[u])
        if (j == v) return p;
    return 0.0;
}

std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;  // exact: product of i consecutive ints divisible by i!
    }
    return r;
}

std::vector<int> subset_unrank(int n, int r, std::int64_t rank) {
    std::vector<int> out;
    out.reserve(r);
    int v = 0;
    for (int slot = 0; slot < r; ++slot) {
        for (;; ++v) {
            std::int64_t block = binomial(n - v - 1, r - slot - 1);
            if (rank < block) break;
            rank -= block;
        }
        out.push_back(v++);
    }
    return out;
}

std::int64_t subset_rank(int n, const std::vector<int>& subset) {
    std::int64_t rank = 0;
    int prev = -1;
    const int r = static_cast<int>(subset.size());
    for (int slot = 0; slot < r; ++slot) {
        for (int v = prev + 1; v < subset[slot]; ++v) rank += binomial(n - v - 1, r - slot - 1);
        prev = subset[slot];
    }
    return rank;
}

MarkovChain johnson_chain(int n, int r) {
    if (r < 1 || r >= n) throw std::invalid_argument("johnson_chain requires 1 <= r < n");
    const std::int64_t states = binomial(n, r);
    if (states > config().chain_cap)
        throw CapacityError("johnson_chain: " + std::to_string(states) +
                            " states exceed the chain ceiling");
    MarkovChain c;
    c.n_states = states;
    c.pi.assign(states, 1.0 / static_cast<double>(states));
    c.rows.resize(states);
    c.labels.resize(states);
    const double p = 1.0 / (static_cast<double>(r) * (n - r));
    for (std::int64_t u = 0; u < states; ++u) {
        std::vector<int> s = subset_unrank(n, r, u);
        c.labels[u] = s;
        std::vector<char> in(n, 0);
        for (int v : s) in[v] = 1;
        auto& row = c.rows[u];
        row.reserve(static_cast<std::size_t>(r) * (n - r));
        for (int drop = 0; drop < r; ++drop) {
            std::vector<int> t = s;
            for (int add = 0; add < n; ++add) {
                if (in[add]) continue;
                t[drop] = add;
                std::vector<int> sorted = t;
                std::sort(sorted.begin(), sorted.end());
                row.emplace_back(static_cast<int>(subset_rank(n, sorted)), p);
            }
            t[drop] = s[drop];
        }
        std::sort(row.begin(), row.end());
    }
    c.delta = spectral_gap(c);
    return c;
}

double max_row_sum_error(const MarkovChain& chain) {
    double worst = 0.0;
    for (const auto& row : chain.rows) {
        double s = 0.0;
        for (const auto& [j, p] : row) s += p;
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

double max_detailed_balance_error(const MarkovChain& chain) {
    double worst = 0.0;
    for (std::int64_t u = 0; u < chain.n_states; ++u)
        for (const auto& [v, p] : chain.rows[u]) {
            const double lhs = chain.pi[u] * p;
            const double rhs = chain.pi[v] * chain.P(v, static_cast<int>(u));
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    return worst;
}

double max_stationarity_error(const MarkovChain& chain) {
    std::vector<double> out(chain.n_states, 0.0);
    for (std::int64_t u = 0; u < chain.n_states; ++u)
        for (const auto& [v, p] : chain.rows[u]) out[v] += chain.pi[u] * p;
    double worst = 0.0;
    for (std::int64_t v = 0; v < chain.n_states; ++v)
        worst = std::max(worst, std::abs(out[v] - chain.pi[v]));
    return worst;
}

namespace {

// Second-largest signed eigenvalue of the symmetrization, dense path.
double lambda2_dense(const MarkovChain& chain) {
    const auto n = chain.n_states;
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (std::int64_t u = 0; u < n; ++u)
        for (const auto& [v, p] : chain.rows[u])
            s(u, v) = std::sqrt(chain.pi[u] / chain.pi[v]) * p;
    // Enforce exact symmetry against roundoff before decomposing.
    s = 0.5 * (s + s.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    const auto& ev = es.eigenvalues();  // ascending
    return ev(n - 2);
}

// Deflated power iteration on (S + I)/2, whose spectrum is [0, 1] with the
// top eigenvector sqrt(pi).
double lambda2_iterative(const MarkovChain& chain) {
    const auto n = chain.n_states;
    std::vector<double> v1(n);
    for (std::int64_t i = 0; i < n; ++i) v1[i] = std::sqrt(chain.pi[i]);

    std::vector<double> x(n), y(n);
    std::uint64_t seed = 0x243f6a8885a308d3ULL;
    for (std::int64_t i = 0; i < n; ++i) {
        seed = seed * 6364136223846793005ULL + 1442695040888963407ULL;
        x[i] = static_cast<double>(seed >> 11) * 0x1.0p-53 - 0.5;
    }
    auto deflate = [&](std::vector<double>& w) {
        double d = 0.0;
        for (std::int64_t i = 0; i < n; ++i) d += v1[i] * w[i];
        for (std::int64_t i = 0; i < n; ++i) w[i] -= d * v1[i];
    };
    auto normalize = [&](std::vector<double>& w) {
        double s = 0.0;
        for (double t : w) s += t * t;
        s = std::sqrt(s);
        if (s == 0.0) return false;
        for (double& t : w) t /= s;
        return true;
    };
    deflate(x);
    if (!normalize(x)) return 1.0;

    double mu = 0.0;
    for (int it = 0; it < 200000; ++it) {
        // y = (S x + x)/2
        std::fill(y.begin(), y.end(), 0.0);
        for (std::int64_t u = 0; u < n; ++u) {
            const double xu = x[u];
            for (const auto& [v, p] : chain.rows[u])
                y[v] += std::sqrt(chain.pi[u] / chain.pi[v]) * p * xu;
        }
        for (std::int64_t i = 0; i < n; ++i) y[i] = 0.5 * (y[i] + x[i]);
        deflate(y);
        double next = 0.0;
        for (std::int64_t i = 0; i < n; ++i) next += x[i] * y[i];
        if (!normalize(y)) return 1.0;
        x.swap(y);
        if (it > 10 && std::abs(next - mu) < 1e-14) {
            mu = next;
            break;
        }
        mu = next;
    }
    return 2.0 * mu - 1.0;
}

}  // namespace

double spectral_gap(const MarkovChain& chain) {
    if (chain.n_states <= 0) throw std::invalid_argument("empty chain");
    if (max_row_sum_error(chain) > 1e-12 || max_detailed_balance_error(chain) > 1e-12)
        throw ContractError("spectral_gap requires a reversible row-stochastic chain");
    if (chain.n_states == 1) return 1.0;
    const double l2 = chain.n_states <= config().dense_eig_threshold ? lambda2_dense(chain)
                                                                     : lambda2_iterative(chain);
    return 1.0 - l2;
}

MarkovChain product_chain(const MarkovChain& a, const MarkovChain& b) {
    const std::int64_t states = a.n_states * b.n_states;
    if (states > config().chain_cap)
        throw CapacityError("product_chain: " + std::to_string(states) +
                            " states exceed the chain ceiling");
    MarkovChain c;
    c.n_states = states;
    c.pi.resize(states);
    c.rows.resize(states);
    const bool labeled = !a.labels.empty() && !b.labels.empty();
    if (labeled) {
        c.labels.resize(states);
        c.label_split = a.labels.empty() ? 0 : static_cast<int>(a.labels[0].size());
    }
    for (std::int64_t i = 0; i < a.n_states; ++i)
        for (std::int64_t j = 0; j < b.n_states; ++j) {
            const std::int64_t k = i * b.n_states + j;
            c.pi[k] = a.pi[i] * b.pi[j];
            auto& row = c.rows[k];
            row.reserve(a.rows[i].size() * b.rows[j].size());
            for (const auto& [i2, p1] : a.rows[i])
                for (const auto& [j2, p2] : b.rows[j])
                    row.emplace_back(static_cast<int>(i2 * b.n_states + j2), p1 * p2);
            std::sort(row.begin(), row.end());
            if (labeled) {
                c.labels[k] = a.labels[i];
                c.labels[k].insert(c.labels[k].end(), b.labels[j].begin(), b.labels[j].end());
            }
        }
    c.delta = spectral_gap(c);
    return c;
}

}  // namespace nw::markov
