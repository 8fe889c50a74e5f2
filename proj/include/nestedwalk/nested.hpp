#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nestedwalk/walk.hpp"

namespace nw::nested {

// Family of inner walk specs indexed by the outer state.
using SpecFamily = std::function<walk::WalkLevelSpec(int)>;

// Composes an outer walk with a family of inner walks: the outer data map
// becomes the inner initial state, the outer checking procedure becomes
// inner detection (boosted), and the outer update transports inner initial
// states. Witness consistency M_x = {u : M_x^u != empty} is validated
// exhaustively; a declared outer marked predicate that disagrees raises
// ContractError.
walk::WalkLevelSpec compose_two_level(const walk::WalkLevelSpec& outer,
                                      const SpecFamily& inner_family);

// k-level nesting as a right fold of compose_two_level. `level(prefix)`
// returns the walk at depth prefix.size() (so the outermost call has an
// empty prefix); depth k-1 specs are used as-is.
struct NestedWalkSpec {
    int depth = 1;
    std::function<walk::WalkLevelSpec(std::span<const int> prefix)> level;
};

walk::WalkLevelSpec compose_k_level(const NestedWalkSpec& spec);

// Controlled unitary with per-branch amplitudes and query costs, the input
// of the averaging lemma.
struct TruncationBranch {
    hilbert::cx alpha;
    hilbert::LinearOp op;
    long long cost = 0;
};

struct TruncationInstance {
    hilbert::RegisterLayout layout;  // [control, targets...]
    std::string control_reg;
    std::vector<TruncationBranch> branches;  // one per control value
};

// U = sum_i |i><i| (x) U_i.
hilbert::LinearOp full_controlled(const TruncationInstance& t);

// Truncation at the budget: branches with cost <= q keep their unitary,
// the rest act as the identity. Returns the operator and sum_{q_i > q}
// |alpha_i|^2, which bounds 1 - Re<Us|Ũs> on states with the declared
// branch amplitudes.
std::pair<hilbert::LinearOp, double> truncated_controlled(const TruncationInstance& t,
                                                          long long budget);

// Budget from Markov's inequality: q = ceil(k * mean cost), error <= 1/k.
std::pair<long long, double> markov_budget(const TruncationInstance& t, double k);

// |s> = sum_i alpha_i |i>|s_i> for per-branch target states.
hilbert::StateVector branch_state(const TruncationInstance& t,
                                  const std::vector<hilbert::StateVector>& parts);

}  // namespace nw::nested
