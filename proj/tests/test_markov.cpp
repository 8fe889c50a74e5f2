#include <doctest.h>

#include <Eigen/Dense>

#include "nestedwalk/common.hpp"
#include "nestedwalk/markov.hpp"

using namespace nw;
using markov::MarkovChain;

namespace {

// Independent eigendecomposition oracle over the dense symmetrization.
double gap_oracle(const MarkovChain& c) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(c.n_states, c.n_states);
    for (std::int64_t u = 0; u < c.n_states; ++u)
        for (const auto& [v, p] : c.rows[static_cast<std::size_t>(u)])
            s(u, v) = std::sqrt(c.pi[static_cast<std::size_t>(u)] /
                                c.pi[static_cast<std::size_t>(v)]) *
                      p;
    Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    return 1.0 - es.eigenvalues()(c.n_states - 2);
}

MarkovChain complete_graph_walk(int k) {
    MarkovChain c;
    c.n_states = k;
    c.pi.assign(static_cast<std::size_t>(k), 1.0 / k);
    c.rows.resize(static_cast<std::size_t>(k));
    for (int u = 0; u < k; ++u)
        for (int v = 0; v < k; ++v)
            if (u != v) c.rows[static_cast<std::size_t>(u)].emplace_back(v, 1.0 / (k - 1));
    c.delta = markov::spectral_gap(c);
    return c;
}

}  // namespace

TEST_CASE("binomial and subset ranking") {
    CHECK(markov::binomial(10, 5) == 252);
    CHECK(markov::binomial(50, 10) == 10272278170LL);
    for (int n = 3; n <= 7; ++n)
        for (int r = 1; r < n; ++r) {
            const auto total = markov::binomial(n, r);
            for (std::int64_t k = 0; k < total; ++k) {
                const auto sub = markov::subset_unrank(n, r, k);
                CHECK(markov::subset_rank(n, sub) == k);
            }
        }
}

TEST_CASE("johnson chain structure") {
    const auto j42 = markov::johnson_chain(4, 2);
    CHECK(j42.n_states == 6);
    for (const auto& row : j42.rows) {
        CHECK(row.size() == 4);  // r(n-r) neighbors
        for (const auto& [v, p] : row) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
    }
    CHECK(j42.delta == doctest::Approx(1.0).epsilon(1e-9));

    const auto j52 = markov::johnson_chain(5, 2);
    CHECK(j52.n_states == 10);
    CHECK(j52.delta == doctest::Approx(5.0 / 6.0).epsilon(1e-9));
    CHECK(std::abs(j52.delta - gap_oracle(j52)) < 1e-9);

    CHECK(markov::johnson_chain(6, 3).delta == doctest::Approx(2.0 / 3.0).epsilon(1e-9));

    CHECK_THROWS_AS(markov::johnson_chain(50, 10), CapacityError);
    CHECK_THROWS_AS(markov::johnson_chain(3, 3), std::invalid_argument);
}

TEST_CASE("johnson gap matches the closed form exhaustively") {
    for (int n = 3; n <= 10; ++n)
        for (int r = 2; r < n; ++r) {
            const auto c = markov::johnson_chain(n, r);
            const double closed = double(n) / (double(r) * (n - r));
            CHECK(std::abs(c.delta - closed) < 1e-9);
            CHECK(std::abs(gap_oracle(c) - closed) < 1e-9);
            CHECK(markov::max_detailed_balance_error(c) < 1e-12);
            CHECK(markov::max_row_sum_error(c) < 1e-12);
            CHECK(markov::max_stationarity_error(c) < 1e-10);
        }
}

TEST_CASE("spectral gap conventions") {
    // Complete-graph walk: lambda2 = -1/(k-1), gap 1 + 1/(k-1).
    for (int k : {3, 5, 8}) {
        const auto c = complete_graph_walk(k);
        CHECK(c.delta == doctest::Approx(1.0 + 1.0 / (k - 1)).epsilon(1e-9));
    }
    // Two-state flip chain: eigenvalues +-1, gap 2 under 1 - lambda2.
    MarkovChain flip;
    flip.n_states = 2;
    flip.pi = {0.5, 0.5};
    flip.rows = {{{1, 1.0}}, {{0, 1.0}}};
    CHECK(markov::spectral_gap(flip) == doctest::Approx(2.0).epsilon(1e-12));

    // Non-reversible chain is rejected.
    MarkovChain bad;
    bad.n_states = 2;
    bad.pi = {0.5, 0.5};
    bad.rows = {{{0, 0.2}, {1, 0.8}}, {{0, 0.4}, {1, 0.6}}};
    CHECK_THROWS_AS(markov::spectral_gap(bad), ContractError);
}

TEST_CASE("iterative gap path agrees with the dense path") {
    const auto c = markov::johnson_chain(9, 4);  // 126 states
    const auto saved = config().dense_eig_threshold;
    config().dense_eig_threshold = 10;  // force the iterative branch
    const double iter_gap = markov::spectral_gap(c);
    config().dense_eig_threshold = saved;
    CHECK(std::abs(iter_gap - 9.0 / 20.0) < 1e-8);
}

TEST_CASE("product chains") {
    MarkovChain one;
    one.n_states = 1;
    one.pi = {1.0};
    one.rows = {{{0, 1.0}}};
    one.delta = 1.0;
    const auto p0 = markov::product_chain(one, one);
    CHECK(p0.n_states == 1);

    const auto j42 = markov::johnson_chain(4, 2);
    const auto prod = markov::product_chain(j42, j42);
    CHECK(prod.n_states == 36);
    // Eigenvalues of the product are pairwise products: second largest is
    // 1/4 here, so delta = 3/4.
    CHECK(prod.delta == doctest::Approx(0.75).epsilon(1e-9));
    for (double p : prod.pi) CHECK(p == doctest::Approx(1.0 / 36).epsilon(1e-12));
    CHECK(markov::max_detailed_balance_error(prod) < 1e-12);

    // Tensor spectrum, checked against the factor spectra.
    Eigen::MatrixXd p1 = Eigen::MatrixXd::Zero(6, 6);
    for (std::int64_t u = 0; u < 6; ++u)
        for (const auto& [v, pv] : j42.rows[static_cast<std::size_t>(u)]) p1(u, v) = pv;
    Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p1).eigenvalues();
    std::vector<double> expect;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) expect.push_back(ev(i) * ev(j));
    std::sort(expect.begin(), expect.end());
    Eigen::MatrixXd p2 = Eigen::MatrixXd::Zero(36, 36);
    for (std::int64_t u = 0; u < 36; ++u)
        for (const auto& [v, pv] : prod.rows[static_cast<std::size_t>(u)]) p2(u, v) = pv;
    Eigen::VectorXd ev2 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p2).eigenvalues();
    for (int i = 0; i < 36; ++i)
        CHECK(std::abs(ev2(i) - expect[static_cast<std::size_t>(i)]) < 1e-9);
}
