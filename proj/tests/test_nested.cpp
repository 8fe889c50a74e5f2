#include <doctest.h>

#include <cmath>

#include "nestedwalk/common.hpp"
#include "nestedwalk/markov.hpp"
#include "nestedwalk/nested.hpp"
#include "nestedwalk/verify.hpp"

using namespace nw;
using hilbert::cx;
using hilbert::LinearOp;
using hilbert::RegisterLayout;
using hilbert::StateVector;
using walk::WalkLevelSpec;

namespace {

nested::TruncationInstance four_branch_instance() {
    nested::TruncationInstance t;
    t.layout = RegisterLayout({{"ctl", 4}, {"tgt", 2}});
    t.control_reg = "ctl";
    const std::vector<long long> costs{1, 1, 1, 10};
    for (int i = 0; i < 4; ++i) {
        nested::TruncationBranch b;
        b.alpha = 0.5;
        b.cost = costs[static_cast<std::size_t>(i)];
        // Small rotations keep Re<s|U|s> nonnegative.
        const double th = 0.3 + 0.2 * i;
        b.op = LinearOp::dense(
            {"tgt"}, {cx{std::cos(th)}, cx{-std::sin(th)}, cx{std::sin(th)}, cx{std::cos(th)}});
        t.branches.push_back(std::move(b));
    }
    return t;
}

double hypergeom_pmf(int population, int successes, int draws, int k) {
    auto logc = [](int n, int r) {
        return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
    };
    if (k < 0 || k > successes || draws - k > population - successes || draws - k < 0) return 0.0;
    return std::exp(logc(successes, k) + logc(population - successes, draws - k) -
                    logc(population, draws));
}

}  // namespace

TEST_CASE("truncated controlled unitary") {
    const auto t = four_branch_instance();

    // Budget above every branch cost: exact, zero error.
    const auto [full, err0] = nested::truncated_controlled(t, 10);
    CHECK(err0 == doctest::Approx(0.0));
    auto rng = rng::stream(31, "trunc");
    const auto s = verify::random_branch_state(t, rng);
    CHECK(verify::truncation_overlap(t, full, s) == doctest::Approx(1.0).epsilon(1e-12));

    // Budget zero with positive costs: identity, vacuous bound.
    const auto [ident, err1] = nested::truncated_controlled(t, 0);
    CHECK(err1 == doctest::Approx(1.0));
    const auto keep = ident.apply(s);
    for (std::int64_t i = 0; i < s.dim(); ++i) CHECK(std::abs(keep[i] - s[i]) < 1e-12);

    // Costs {1,1,1,10} uniform at budget 1: predicted error 1/4, overlap
    // stays above 3/4.
    const auto [trunc, err2] = nested::truncated_controlled(t, 1);
    CHECK(err2 == doctest::Approx(0.25));
    CHECK(verify::truncation_overlap(t, trunc, s) >= 0.75 - 1e-9);
}

TEST_CASE("markov budget") {
    const auto t = four_branch_instance();
    // mean = (1+1+1+10)/4 = 13/4.
    const auto [q1, b1] = nested::markov_budget(t, 1.0);
    CHECK(q1 == 4);
    CHECK(b1 == doctest::Approx(1.0));
    const auto [q7, b7] = nested::markov_budget(t, 7.0);
    CHECK(q7 == 23);
    CHECK(nested::truncated_controlled(t, q7).second <= b7);

    // Uniform costs never truncate.
    nested::TruncationInstance u;
    u.layout = RegisterLayout({{"ctl", 3}, {"tgt", 2}});
    u.control_reg = "ctl";
    for (int i = 0; i < 3; ++i) {
        nested::TruncationBranch b;
        b.alpha = 1.0 / std::sqrt(3.0);
        b.cost = 5;
        b.op = LinearOp::identity();
        u.branches.push_back(std::move(b));
    }
    for (double k : {1.0, 2.0, 7.0}) {
        const auto [q, bound] = nested::markov_budget(u, k);
        CHECK(nested::truncated_controlled(u, q).second == doctest::Approx(0.0));
        (void)bound;
    }

    CHECK_THROWS_AS(nested::markov_budget(t, 0.5), std::invalid_argument);
}

TEST_CASE("lemma bound on random instances") {
    auto rng = rng::stream(32, "lemma");
    for (int trial = 0; trial < 100; ++trial) {
        const auto t = verify::random_truncation_instance(rng, 16);
        long long maxc = 0;
        for (const auto& b : t.branches) maxc = std::max(maxc, b.cost);
        const long long q = static_cast<long long>(rng.next_below(static_cast<std::uint64_t>(maxc + 2)));
        const auto [approx, err] = nested::truncated_controlled(t, q);
        const auto s = verify::random_branch_state(t, rng);
        CHECK(verify::truncation_overlap(t, approx, s) >= 1.0 - err - 1e-9);
    }
}

TEST_CASE("hypergeometric degree instance") {
    // Amplitudes follow the degree distribution of a vertex in a random
    // s-fraction edge subset; costs equal the degree. With k = 7 the
    // truncation error stays far below 1/7.
    const int population = 190, successes = 19, draws = 57;  // r=20, s=0.3
    nested::TruncationInstance t;
    t.layout = RegisterLayout({{"ctl", successes + 1}, {"tgt", 2}});
    t.control_reg = "ctl";
    double mass = 0.0;
    for (int d = 0; d <= successes; ++d) {
        nested::TruncationBranch b;
        const double p = hypergeom_pmf(population, successes, draws, d);
        b.alpha = std::sqrt(p);
        b.cost = d;
        b.op = LinearOp::identity();
        mass += p;
        t.branches.push_back(std::move(b));
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    const auto [q, bound] = nested::markov_budget(t, 7.0);
    const auto [op, err] = nested::truncated_controlled(t, q);
    CHECK(err <= bound);
    CHECK(err <= 1e-6);  // far below 1/7 for a concentrated distribution
}

namespace {

// Synthetic two-level fixture: outer J(3,1) over inner J(3,1) with leaf
// marked sets driven by a bit table.
WalkLevelSpec toy_inner(const markov::MarkovChain& chain, const RegisterLayout& layout,
                        std::vector<char> leaf) {
    WalkLevelSpec in;
    in.chain = chain;
    in.layout = layout;
    in.reg_L = "L2";
    in.reg_R = "R2";
    in.marked = [leaf](int s) { return leaf[static_cast<std::size_t>(s)] != 0; };
    in.epsilon = 1.0 / 3.0;
    in.check_queries = 1;
    return in;
}

}  // namespace

TEST_CASE("two-level composition") {
    const auto chain = markov::johnson_chain(3, 1);
    RegisterLayout inner_layout({{"L2", 4}, {"R2", 4}});
    RegisterLayout full({{"L", 4}, {"R", 4}, {"L2", 4}, {"R2", 4}});

    WalkLevelSpec outer;
    outer.chain = chain;
    outer.layout = full;
    outer.data_regs = {"L2", "R2"};
    outer.epsilon = 1.0 / 3.0;
    outer.update_queries = 2;

    // Degenerate inner walks: all-marked when the outer state is marked.
    std::vector<char> outer_marked{1, 0, 1};
    auto family = [&](int u) {
        std::vector<char> leaf(3, outer_marked[static_cast<std::size_t>(u)] ? 1 : 0);
        return toy_inner(chain, inner_layout, leaf);
    };
    auto composed = nested::compose_two_level(outer, family);
    for (int u = 0; u < 3; ++u)
        CHECK(composed.marked(u) == (outer_marked[static_cast<std::size_t>(u)] != 0));

    // The composed check procedure reproduces the direct predicate after
    // boosting (degenerate inner walks are deterministic).
    auto rng = rng::stream(33, "compose");
    for (int u = 0; u < 3; ++u) {
        auto proc = composed.check_procedure(u);
        CHECK(proc.truth == (outer_marked[static_cast<std::size_t>(u)] != 0));
        for (int i = 0; i < 10; ++i)
            CHECK(proc.sample(rng) == (outer_marked[static_cast<std::size_t>(u)] != 0));
    }

    // Declared outer marked set must match the derived one.
    WalkLevelSpec wrong = outer;
    wrong.marked = [](int) { return false; };
    CHECK_THROWS_AS(nested::compose_two_level(wrong, family), ContractError);

    // The composed data map is the inner initial state.
    const auto d0 = composed.data_map(0);
    CHECK(d0.norm() == doctest::Approx(1.0));
    const auto dist = d0.register_distribution("L2");
    for (int s = 0; s < 3; ++s) CHECK(dist[static_cast<std::size_t>(s + 1)] ==
                                      doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // Checking applied twice returns the input (involution, exact backend).
    auto psi = walk::setup_state(composed);
    const auto before = psi.amps();
    const auto check_op = walk::checking_reflection(composed);
    check_op.apply_in_place(psi);
    check_op.apply_in_place(psi);
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(std::abs(psi.amps()[i] - before[i]) < 1e-6);
}

TEST_CASE("k-level composition") {
    const auto chain = markov::johnson_chain(3, 1);

    // Depth 1: the spec passes through unchanged.
    nested::NestedWalkSpec one;
    one.depth = 1;
    one.level = [&](std::span<const int>) {
        WalkLevelSpec leaf;
        leaf.chain = chain;
        leaf.layout = RegisterLayout({{"L", 4}, {"R", 4}});
        leaf.marked = [](int u) { return u == 1; };
        leaf.epsilon = 1.0 / 3.0;
        return leaf;
    };
    const auto flat = nested::compose_k_level(one);
    CHECK(flat.marked(1));
    CHECK_FALSE(flat.marked(0));

    // Depth 3 toy: exhaustive family of 64 inputs, verdicts equal the
    // brute-force triple OR.
    for (int input = 0; input < 64; ++input) {
        nested::NestedWalkSpec three;
        three.depth = 3;
        three.level = [&, input](std::span<const int> prefix) {
            WalkLevelSpec spec;
            spec.chain = chain;
            if (prefix.size() == 0) {
                spec.layout = RegisterLayout(
                    {{"L", 4}, {"R", 4}, {"L2", 4}, {"R2", 4}, {"L3", 4}, {"R3", 4}});
                spec.data_regs = {"L2", "R2", "L3", "R3"};
            } else if (prefix.size() == 1) {
                spec.reg_L = "L2";
                spec.reg_R = "R2";
                spec.layout = RegisterLayout({{"L2", 4}, {"R2", 4}, {"L3", 4}, {"R3", 4}});
                spec.data_regs = {"L3", "R3"};
            } else {
                spec.reg_L = "L3";
                spec.reg_R = "R3";
                spec.layout = RegisterLayout({{"L3", 4}, {"R3", 4}});
                const int u1 = prefix[0], u2 = prefix[1];
                spec.marked = [input, u1, u2](int u3) {
                    const int bit = (u1 + 2 * u2 + 4 * u3) % 6;
                    return ((input >> bit) & 1) != 0;
                };
            }
            spec.epsilon = 1.0 / 3.0;
            spec.check_queries = 1;
            return spec;
        };
        const auto composed = nested::compose_k_level(three);
        bool expect = false;
        for (int u1 = 0; u1 < 3; ++u1)
            for (int u2 = 0; u2 < 3; ++u2)
                for (int u3 = 0; u3 < 3; ++u3)
                    if ((input >> ((u1 + 2 * u2 + 4 * u3) % 6)) & 1) expect = true;
        bool got = false;
        for (int u = 0; u < 3; ++u) got = got || composed.marked(u);
        CHECK(got == expect);
    }

    CHECK_THROWS_AS(nested::compose_k_level({0, nullptr}), std::invalid_argument);
}

TEST_CASE("branch state assembly") {
    nested::TruncationInstance t;
    t.layout = RegisterLayout({{"ctl", 2}, {"tgt", 2}});
    t.control_reg = "ctl";
    for (int i = 0; i < 2; ++i) {
        nested::TruncationBranch b;
        b.alpha = (i == 0) ? cx{0.6} : cx{0.8};
        b.cost = 0;
        b.op = LinearOp::identity();
        t.branches.push_back(std::move(b));
    }
    RegisterLayout tgt({{"tgt", 2}});
    std::vector<StateVector> parts{StateVector::basis(tgt, 0), StateVector::basis(tgt, 1)};
    const auto s = nested::branch_state(t, parts);
    CHECK(std::abs(s[0] - cx{0.6}) < 1e-15);
    CHECK(std::abs(s[3] - cx{0.8}) < 1e-15);
    CHECK(s.norm() == doctest::Approx(1.0));
}
