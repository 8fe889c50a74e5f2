#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nestedwalk/graphs.hpp"
#include "nestedwalk/hilbert.hpp"
#include "nestedwalk/rng.hpp"

namespace nw::oracle {

// The black box O_x : |j,b> -> |j, b xor x_j> over a hidden bit string x,
// with an exact query counter. For graph problems x is the adjacency bit
// string indexed by ordered vertex pairs (graphs::pair_index).
//
// The counter is the only mutable state in the artifact. Composite
// procedures (setup, update, checking, detection) charge their declared
// per-application cost through charge(); the unitary returned by bit_query
// charges exactly 1 per application.
class QueryOracle {
public:
    explicit QueryOracle(std::vector<std::uint8_t> bits) : x_(std::move(bits)) {}

    static QueryOracle from_graph(const graphs::Graph& g);
    static QueryOracle from_marking(const graphs::Marking& m);

    int bit(std::size_t j) const { return x_.at(j); }
    std::size_t size() const { return x_.size(); }

    long long count() const { return count_; }
    void charge(long long q);
    long long* counter() { return &count_; }

    // |j,b> -> |j, b xor x_j> on the named index register (dimension |x|)
    // and 2-dimensional target register.
    hilbert::LinearOp bit_query(const hilbert::RegisterLayout& layout,
                                const std::string& index_reg, const std::string& target_reg);

private:
    std::vector<std::uint8_t> x_;
    long long count_ = 0;
};

// A bounded-error boolean procedure in phase-flip form. `sample` draws one
// invocation's verdict from the procedure's exact outcome distribution;
// `truth` is the predicate's ground-truth value; `queries` is the declared
// cost of one invocation.
struct FlipProcedure {
    std::function<bool(rng::Stream&)> sample;
    bool truth = false;
    long long queries = 0;
};

// Number of repetitions used by majority-vote boosting to reach the target
// error from a 2/3-correct procedure: ceil(18 ln(1/eps)).
int boost_repetitions(double target_error);

// Majority-vote boosting. The boosted procedure draws k independent
// invocations and takes the majority; its declared cost is k * 2 * the
// inner cost (compute and uncompute each answer bit).
FlipProcedure boost(const FlipProcedure& subroutine, double target_error);

// Exact success probability of a k-fold majority vote when each invocation
// is independently correct with probability p.
double majority_success(double p, int k);

}  // namespace nw::oracle
