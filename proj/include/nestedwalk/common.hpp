#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nw {

// Thrown when a construction would exceed a configured size ceiling.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a declared contract between components is violated
// (non-reversible chain, witness inconsistency, layout mismatch on
// composition, ...).
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a procedure consumed more queries than its declared budget.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on malformed input files.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an optimization problem has no feasible point.
struct InfeasibleError : std::runtime_error {
    std::string details;
    explicit InfeasibleError(const std::string& msg, std::string det = {})
        : std::runtime_error(msg), details(std::move(det)) {}
};

struct Config {
    // Hard cap on the total dimension of any state vector.
    std::int64_t dim_cap = std::int64_t{1} << 22;
    // Ceiling on the number of states of any Markov chain.
    std::int64_t chain_cap = 100000;
    // Above this state count the spectral gap is computed iteratively
    // instead of by dense eigendecomposition.
    std::int64_t dense_eig_threshold = 2000;
    // Constant in the detection query budget  c0/sqrt(eps)*(U/sqrt(delta)+C).
    double budget_c0 = 30.0;
};

Config& config();

}  // namespace nw
