#include "nestedwalk/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace nw::oracle {

QueryOracle QueryOracle::from_graph(const graphs::Graph& g) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(graphs::pair_count(g.n())), 0);
    for (auto [u, v] : g.edges())
        bits[static_cast<std::size_t>(graphs::pair_index(g.n(), u, v))] = 1;
    return QueryOracle(std::move(bits));
}

QueryOracle QueryOracle::from_marking(const graphs::Marking& m) {
    return QueryOracle(m.bits);
}

void QueryOracle::charge(long long q) {
    if (q < 0) throw std::invalid_argument("negative query charge");
    count_ += q;
}

hilbert::LinearOp QueryOracle::bit_query(const hilbert::RegisterLayout& layout,
                                         const std::string& index_reg,
                                         const std::string& target_reg) {
    const auto ji = layout.require(index_reg);
    const auto bi = layout.require(target_reg);
    if (layout.reg(static_cast<std::size_t>(ji)).dim != static_cast<std::int64_t>(x_.size()))
        throw std::invalid_argument("index register dimension must equal |x|");
    if (layout.reg(static_cast<std::size_t>(bi)).dim != 2)
        throw std::invalid_argument("target register must have dimension 2");
    const std::int64_t n = static_cast<std::int64_t>(x_.size());
    // Local order (j, b): index j is the slow digit.
    std::vector<std::int64_t> perm(static_cast<std::size_t>(2 * n));
    std::vector<hilbert::cx> phase(static_cast<std::size_t>(2 * n), 1.0);
    for (std::int64_t j = 0; j < n; ++j)
        for (std::int64_t b = 0; b < 2; ++b)
            perm[static_cast<std::size_t>(2 * j + b)] = 2 * j + (b ^ x_[static_cast<std::size_t>(j)]);
    auto u = hilbert::LinearOp::monomial({index_reg, target_reg}, std::move(perm), std::move(phase));
    return hilbert::LinearOp::counted(std::move(u), &count_, 1);
}

int boost_repetitions(double target_error) {
    if (!(target_error > 0.0 && target_error < 1.0))
        throw std::invalid_argument("target error must lie in (0,1)");
    return static_cast<int>(std::ceil(18.0 * std::log(1.0 / target_error)));
}

FlipProcedure boost(const FlipProcedure& subroutine, double target_error) {
    const int k = boost_repetitions(target_error);
    FlipProcedure out;
    out.truth = subroutine.truth;
    out.queries = static_cast<long long>(k) * 2 * subroutine.queries;
    auto inner = subroutine.sample;
    out.sample = [inner, k](rng::Stream& rng) {
        int votes = 0;
        for (int i = 0; i < k; ++i)
            if (inner(rng)) ++votes;
        return votes * 2 > k;
    };
    return out;
}

double majority_success(double p, int k) {
    // P(Binomial(k, p) > k/2), evaluated with a running binomial pmf in log
    // space for stability at extreme p.
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    const int half = k / 2;  // votes must strictly exceed k/2
    double cdf_le_half = 0.0;
    double logpmf = k * std::log1p(-p);  // log P(X = 0)
    const double logit = std::log(p) - std::log1p(-p);
    for (int i = 0; i <= half; ++i) {
        cdf_le_half += std::exp(logpmf);
        logpmf += std::log(double(k - i) / double(i + 1)) + logit;
    }
    return std::min(1.0, std::max(0.0, 1.0 - cdf_le_half));
}

}  // namespace nw::oracle
