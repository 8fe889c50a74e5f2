#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nestedwalk/hilbert.hpp"
#include "nestedwalk/markov.hpp"
#include "nestedwalk/oracle.hpp"
#include "nestedwalk/rng.hpp"

namespace nw::walk {

// One level of a (possibly nested) walk: the chain, the data mapping, the
// marked predicate, and the declared per-application query costs.
//
// Layout convention: registers [L, R, <data...>], where L and R have
// dimension |Omega|+1 (digit 0 is the unset flag |0>, digit 1+u is state u)
// and the data registers carry |D_x(u)>.
struct WalkLevelSpec {
    markov::MarkovChain chain;
    hilbert::RegisterLayout layout;
    std::string reg_L = "L";
    std::string reg_R = "R";
    std::vector<std::string> data_regs;

    // u -> normalized state over the data sublayout; null means trivial data.
    std::function<hilbert::StateVector(int)> data_map;

    // Ground-truth membership of u in M_x.
    std::function<bool(int)> marked;

    // Optional diagonal predicate on (state, data basis index), for flat
    // specs whose checking reads the data register directly.
    std::function<bool(int, std::int64_t)> basis_marked;

    // Optional realized bounded-error checking procedure per state. When
    // present, verdict sampling draws through it; detection still applies
    // the exact reflection for the sampled verdict.
    std::function<oracle::FlipProcedure(int)> check_procedure;

    // Optional custom U_D builder; default transports |D(u)> to |D(v)> by a
    // Householder swap on the data registers, controlled on (L, R).
    std::function<hilbert::LinearOp()> data_update;

    double epsilon = 1.0;  // declared lower bound on pi(M_x) for nonempty M_x
    long long setup_queries = 0;
    long long update_queries = 0;
    long long check_queries = 0;

    std::int64_t n_states() const { return chain.n_states; }
};

// Reference initial state |pi^x> = sum_u sqrt(pi_u) |u>_L |0>_R |D_x(u)>_D,
// without touching any query counter.
hilbert::StateVector setup_state(const WalkLevelSpec& spec);

// Same state, charging the declared setup cost to the oracle.
hilbert::StateVector build_setup_state(const WalkLevelSpec& spec, oracle::QueryOracle& o);

// U_P : |u>_L|0>_R -> |u>_L sum_v sqrt(P_uv)|v>_R, extended to a unitary by
// per-branch Householder reflections (hence an involution). Costs 0 queries.
hilbert::LinearOp chain_update(const WalkLevelSpec& spec);

// U_D : |u>_L|v>_R|D_x(u)> -> |u>_L|v>_R|D_x(v)> on adjacent pairs.
hilbert::LinearOp data_update(const WalkLevelSpec& spec);

// The composite U_D U_P, charging the declared update cost per application.
hilbert::LinearOp apply_update(const WalkLevelSpec& spec, oracle::QueryOracle& o);

// Szegedy step W(P) on the L (x) R pair: the product of the reflection about
// span{|u>|p_u>} and the reflection about span{|p_v>|v>}.
hilbert::LinearOp szegedy_step(const WalkLevelSpec& spec);

// The checking unitary C: for marked u it maps |u> (x) |D(u)> to its
// negation and fixes the orthogonal complement of the data branch; for flat
// specs with a diagonal predicate it is the +-1 diagonal. Charges the
// declared checking cost per application when an oracle is supplied.
hilbert::LinearOp checking_reflection(const WalkLevelSpec& spec, oracle::QueryOracle* o = nullptr);

enum class Backend { ExactReflection, PhaseEstimation };

struct DetectOutcome {
    bool verdict = false;
    double fidelity = 0.0;        // |<pi^x | out>|
    double signed_overlap = 0.0;  // Re <pi^x | out>
    long long queries = 0;
};

// Declared query budget of one detection: ceil(c0/sqrt(eps) *
// (U/sqrt(delta) + C)).
long long detect_budget(const WalkLevelSpec& spec);

// Samples the detection verdict (nonemptiness of the sampled marked set).
// Deterministic ground truth when rng is null or no realized checking
// procedure is declared.
bool detect_sample(const WalkLevelSpec& spec, rng::Stream* rng);

// Theorem-1 map: phase flip on |pi^x> iff the (sampled) marked set is
// nonempty. The exact-reflection backend applies I - 2|pi^x><pi^x| directly;
// the phase-estimation backend runs phase estimation of the Grover iterate
// built from W(P), and requires a trivial data register.
DetectOutcome detect(const WalkLevelSpec& spec, hilbert::StateVector& state, Backend backend,
                     oracle::QueryOracle& o, rng::Stream* rng = nullptr);

// Builds |pi^x>, runs detection, and measures the phase-kickback control
// qubit. Correct with probability >= 2/3.
bool search(const WalkLevelSpec& spec, oracle::QueryOracle& o, rng::Stream& rng,
            Backend backend = Backend::ExactReflection);

// Plain amplitude amplification over a flat search space.
struct AmplificationProblem {
    hilbert::RegisterLayout layout;
    std::function<hilbert::StateVector(oracle::QueryOracle&)> setup;
    std::function<bool(std::int64_t)> marked_basis;
    long long flip_queries = 0;
};

// Iterates round(pi/(4 asin(sqrt(eps))) - 1/2) Grover steps, measures, and
// verifies the outcome; retries with the exponential-guessing schedule when
// the marked mass is unknown. One-sided: a true verdict is always backed by
// a verified marked element.
bool amplitude_amplification(const AmplificationProblem& prob, double epsilon,
                             oracle::QueryOracle& o, rng::Stream& rng);

// Grover iteration count used for a known mass bound.
int grover_iterations(double epsilon);

// Offsets of each data-sublayout basis index inside the full layout.
std::vector<std::int64_t> sublayout_offsets(const hilbert::RegisterLayout& full,
                                            const std::vector<std::string>& names);

}  // namespace nw::walk
