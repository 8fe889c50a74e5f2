#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nestedwalk/nested.hpp"

namespace nw::verify {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Spectral gaps of J(n,r) against the closed form for 2 <= r < n <= 10,
// detailed balance, and the tensor-spectrum property of product chains.
std::vector<CheckResult> verify_markov();

// Averaging-lemma bound on random truncation instances and the Markov
// budget guarantee at k = 7.
std::vector<CheckResult> verify_lemma(std::uint64_t seed);

// Witness consistency and inner-initial-state transport for the shipped
// composed specs on seeded graphs.
std::vector<CheckResult> verify_nesting(std::uint64_t seed);

// Exact query-count conventions: walk setup C(r,2), outer update 2(r-1),
// collision setup 2m and update 4.
std::vector<CheckResult> verify_counting(std::uint64_t seed);

std::vector<CheckResult> verify_all(std::uint64_t seed);

// Random instance with <= max_branches branches whose unitaries have
// numerical range in the right half plane (bounded generator angle), so the
// lemma bound is sharp rather than only 2x-loose.
nested::TruncationInstance random_truncation_instance(rng::Stream& rng, int max_branches);

// Random normalized states for each branch and the combined state.
hilbert::StateVector random_branch_state(const nested::TruncationInstance& t, rng::Stream& rng);

// Re<Us|Ũs> for the given state.
double truncation_overlap(const nested::TruncationInstance& t, const hilbert::LinearOp& approx,
                          const hilbert::StateVector& s);

// Exact inner-initial-state transport check: max amplitude error of the
// data registers over all adjacent (u, v) after applying U_D to
// |u>_L |v>_R |D(u)>.
double max_transport_error(const walk::WalkLevelSpec& spec);

}  // namespace nw::verify
