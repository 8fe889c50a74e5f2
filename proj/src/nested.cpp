#include "nestedwalk/nested.hpp"

#include <cmath>
#include <memory>

#include "nestedwalk/common.hpp"

namespace nw::nested {

using hilbert::cx;
using hilbert::LinearOp;
using hilbert::StateVector;
using walk::WalkLevelSpec;

namespace {

// Inner specs and derived quantities are materialized once per outer state
// and shared by the composed spec's closures.
struct ComposedCache {
    std::vector<WalkLevelSpec> inner;
    std::vector<bool> derived_marked;
    long long inner_budget = 0;
    double boost_target = 1.0;
    int boost_reps = 1;
};

}  // namespace

walk::WalkLevelSpec compose_two_level(const walk::WalkLevelSpec& outer,
                                      const SpecFamily& inner_family) {
    auto cache = std::make_shared<ComposedCache>();
    const auto n = outer.chain.n_states;
    cache->inner.reserve(static_cast<std::size_t>(n));
    cache->derived_marked.resize(static_cast<std::size_t>(n));

    const hilbert::RegisterLayout data_layout = outer.layout.sublayout(outer.data_regs);
    for (std::int64_t u = 0; u < n; ++u) {
        WalkLevelSpec in = inner_family(static_cast<int>(u));
        if (!in.layout.same_as(data_layout))
            throw ContractError(
                "inner walk layout must coincide with the outer data registers");
        bool any = false;
        for (std::int64_t s = 0; s < in.chain.n_states && !any; ++s)
            any = in.marked && in.marked(static_cast<int>(s));
        cache->derived_marked[static_cast<std::size_t>(u)] = any;
        if (outer.marked && outer.marked(static_cast<int>(u)) != any)
            throw ContractError("witness consistency violated: outer marked set disagrees with "
                                "inner nonemptiness at state " +
                                std::to_string(u));
        cache->inner.push_back(std::move(in));
    }

    // All inner walks share the chain shape; budgets use the first.
    cache->inner_budget = n > 0 ? walk::detect_budget(cache->inner[0]) : 0;
    const double outer_iters =
        std::max(1.0, std::ceil(config().budget_c0 / std::sqrt(outer.epsilon) *
                                std::max(1.0, 1.0 / std::sqrt(outer.chain.delta))));
    cache->boost_target = 1.0 / (64.0 * outer_iters);
    cache->boost_reps = oracle::boost_repetitions(cache->boost_target);

    WalkLevelSpec out = outer;
    out.marked = [cache](int u) { return cache->derived_marked[static_cast<std::size_t>(u)]; };
    out.basis_marked = nullptr;
    out.data_map = [cache](int u) {
        return walk::setup_state(cache->inner[static_cast<std::size_t>(u)]);
    };
    out.check_procedure = [cache](int u) {
        oracle::FlipProcedure raw;
        raw.truth = cache->derived_marked[static_cast<std::size_t>(u)];
        raw.queries = cache->inner_budget;
        raw.sample = [cache, u](rng::Stream& rng) {
            return walk::detect_sample(cache->inner[static_cast<std::size_t>(u)], &rng);
        };
        return oracle::boost(raw, cache->boost_target);
    };
    out.check_queries =
        static_cast<long long>(cache->boost_reps) * 2 * cache->inner_budget;
    // data_update: keep the outer-provided builder if any; otherwise the
    // default Householder transport over the composed data map applies.
    return out;
}

walk::WalkLevelSpec compose_k_level(const NestedWalkSpec& spec) {
    if (spec.depth < 1) throw std::invalid_argument("nesting depth must be >= 1");
    std::function<WalkLevelSpec(std::vector<int>)> build = [&](std::vector<int> prefix) {
        WalkLevelSpec level = spec.level(prefix);
        if (static_cast<int>(prefix.size()) == spec.depth - 1) return level;
        auto family = [&, prefix](int u) {
            std::vector<int> next = prefix;
            next.push_back(u);
            return build(next);
        };
        return compose_two_level(level, family);
    };
    return build({});
}

hilbert::LinearOp full_controlled(const TruncationInstance& t) {
    std::map<std::int64_t, LinearOp> blocks;
    for (std::size_t i = 0; i < t.branches.size(); ++i)
        blocks.emplace(static_cast<std::int64_t>(i), t.branches[i].op);
    return LinearOp::controlled(t.control_reg, std::move(blocks));
}

std::pair<hilbert::LinearOp, double> truncated_controlled(const TruncationInstance& t,
                                                          long long budget) {
    double mass = 0.0, truncated = 0.0;
    std::map<std::int64_t, LinearOp> blocks;
    for (std::size_t i = 0; i < t.branches.size(); ++i) {
        const double a2 = std::norm(t.branches[i].alpha);
        mass += a2;
        if (t.branches[i].cost <= budget)
            blocks.emplace(static_cast<std::int64_t>(i), t.branches[i].op);
        else
            truncated += a2;
    }
    if (std::abs(mass - 1.0) > 1e-9)
        throw ContractError("branch amplitudes must have unit total mass");
    return {LinearOp::controlled(t.control_reg, std::move(blocks)), truncated};
}

std::pair<long long, double> markov_budget(const TruncationInstance& t, double k) {
    if (k < 1.0) throw std::invalid_argument("markov_budget requires k >= 1");
    double mean = 0.0;
    for (const auto& b : t.branches) mean += std::norm(b.alpha) * static_cast<double>(b.cost);
    const long long q = static_cast<long long>(std::ceil(k * mean));
    return {q, 1.0 / k};
}

hilbert::StateVector branch_state(const TruncationInstance& t,
                                  const std::vector<hilbert::StateVector>& parts) {
    if (parts.size() != t.branches.size())
        throw std::invalid_argument("one target state per branch required");
    StateVector out(t.layout);
    const auto ci = static_cast<std::size_t>(t.layout.require(t.control_reg));
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < t.layout.size(); ++i)
        if (i != ci) rest.push_back(t.layout.reg(i).name);
    const auto offs = walk::sublayout_offsets(t.layout, rest);
    for (std::size_t b = 0; b < t.branches.size(); ++b) {
        const std::int64_t base =
            static_cast<std::int64_t>(b) * t.layout.stride(ci);
        for (std::int64_t s = 0; s < parts[b].dim(); ++s)
            out[base + offs[static_cast<std::size_t>(s)]] += t.branches[b].alpha * parts[b][s];
    }
    return out;
}

}  // namespace nw::nested
