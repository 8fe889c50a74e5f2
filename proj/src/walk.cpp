#include "nestedwalk/walk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nestedwalk/common.hpp"

namespace nw::walk {

using hilbert::cx;
using hilbert::LinearOp;
using hilbert::RegisterLayout;
using hilbert::StateVector;

namespace {

void validate_layout(const WalkLevelSpec& spec) {
    const auto li = spec.layout.require(spec.reg_L);
    const auto ri = spec.layout.require(spec.reg_R);
    const auto want = spec.chain.n_states + 1;
    if (spec.layout.reg(static_cast<std::size_t>(li)).dim != want ||
        spec.layout.reg(static_cast<std::size_t>(ri)).dim != want)
        throw std::invalid_argument("L and R registers must have dimension |Omega|+1");
    for (const auto& d : spec.data_regs) spec.layout.require(d);
}

std::int64_t data_dim(const WalkLevelSpec& spec) {
    std::int64_t d = 1;
    for (const auto& name : spec.data_regs)
        d *= spec.layout.reg(static_cast<std::size_t>(spec.layout.require(name))).dim;
    return d;
}

}  // namespace

std::vector<std::int64_t> sublayout_offsets(const RegisterLayout& full,
                                            const std::vector<std::string>& names) {
    std::int64_t total = 1;
    std::vector<std::int64_t> dims, strides;
    for (const auto& n : names) {
        const auto i = static_cast<std::size_t>(full.require(n));
        dims.push_back(full.reg(i).dim);
        strides.push_back(full.stride(i));
        total *= full.reg(i).dim;
    }
    std::vector<std::int64_t> off(static_cast<std::size_t>(total), 0);
    for (std::int64_t s = 0; s < total; ++s) {
        std::int64_t rem = s, o = 0;
        for (std::size_t k = dims.size(); k-- > 0;) {
            o += (rem % dims[k]) * strides[k];
            rem /= dims[k];
        }
        off[static_cast<std::size_t>(s)] = o;
    }
    return off;
}

StateVector setup_state(const WalkLevelSpec& spec) {
    validate_layout(spec);
    StateVector out(spec.layout);
    const auto li = static_cast<std::size_t>(spec.layout.require(spec.reg_L));
    const auto dd = data_dim(spec);
    const auto offs = sublayout_offsets(spec.layout, spec.data_regs);
    for (std::int64_t u = 0; u < spec.chain.n_states; ++u) {
        const double a = std::sqrt(spec.chain.pi[static_cast<std::size_t>(u)]);
        const std::int64_t base = (u + 1) * spec.layout.stride(li);
        if (spec.data_map) {
            StateVector d = spec.data_map(static_cast<int>(u));
            if (d.dim() != dd) throw std::invalid_argument("data_map dimension mismatch");
            if (std::abs(d.norm() - 1.0) > 1e-9)
                throw ContractError("data_map(u) must be normalized");
            for (std::int64_t s = 0; s < dd; ++s)
                if (d[s] != cx{0.0}) out[base + offs[static_cast<std::size_t>(s)]] = a * d[s];
        } else {
            out[base] = a;
        }
    }
    return out;
}

StateVector build_setup_state(const WalkLevelSpec& spec, oracle::QueryOracle& o) {
    StateVector s = setup_state(spec);
    o.charge(spec.setup_queries);
    return s;
}

LinearOp chain_update(const WalkLevelSpec& spec) {
    validate_layout(spec);
    const auto n = spec.chain.n_states;
    std::map<std::int64_t, LinearOp> blocks;
    for (std::int64_t u = 0; u < n; ++u) {
        // Householder mapping |0>_R to sum_v sqrt(P_uv)|v+1>_R.
        std::vector<cx> w(static_cast<std::size_t>(n + 1), cx{0.0});
        w[0] = 1.0;
        for (const auto& [v, p] : spec.chain.rows[static_cast<std::size_t>(u)])
            w[static_cast<std::size_t>(v + 1)] -= std::sqrt(p);
        double nrm = std::sqrt(kernels::norm2(w));
        for (auto& c : w) c /= nrm;
        blocks.emplace(u + 1, LinearOp::rank_one({spec.reg_R}, std::move(w), cx{1.0}, cx{-2.0}));
    }
    return LinearOp::controlled(spec.reg_L, std::move(blocks));
}

LinearOp data_update(const WalkLevelSpec& spec) {
    validate_layout(spec);
    if (spec.data_update) return spec.data_update();
    if (!spec.data_map || spec.data_regs.empty()) return LinearOp::identity();
    const auto n = spec.chain.n_states;
    std::vector<StateVector> d;
    d.reserve(static_cast<std::size_t>(n));
    for (std::int64_t u = 0; u < n; ++u) d.push_back(spec.data_map(static_cast<int>(u)));

    std::map<std::int64_t, LinearOp> outer;
    for (std::int64_t u = 0; u < n; ++u) {
        std::map<std::int64_t, LinearOp> inner;
        for (const auto& [v, p] : spec.chain.rows[static_cast<std::size_t>(u)]) {
            if (v == u) continue;
            const cx ip = hilbert::inner_product(d[static_cast<std::size_t>(u)],
                                                 d[static_cast<std::size_t>(v)]);
            if (std::abs(ip.imag()) > 1e-12)
                throw ContractError("data transport requires a real data overlap");
            std::vector<cx> w(d[static_cast<std::size_t>(u)].amps());
            const auto& dv = d[static_cast<std::size_t>(v)].amps();
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= dv[i];
            const double nrm2 = kernels::norm2(w);
            if (nrm2 < 1e-24) continue;  // identical data, identity block
            const double nrm = std::sqrt(nrm2);
            for (auto& c : w) c /= nrm;
            inner.emplace(v + 1, LinearOp::rank_one(spec.data_regs, std::move(w), cx{1.0}, cx{-2.0}));
        }
        if (!inner.empty()) outer.emplace(u + 1, LinearOp::controlled(spec.reg_R, std::move(inner)));
    }
    return LinearOp::controlled(spec.reg_L, std::move(outer));
}

LinearOp apply_update(const WalkLevelSpec& spec, oracle::QueryOracle& o) {
    return LinearOp::counted(LinearOp::sequence({chain_update(spec), data_update(spec)}),
                             o.counter(), spec.update_queries);
}

namespace {

LinearOp swap_lr(const WalkLevelSpec& spec) {
    const auto li = static_cast<std::size_t>(spec.layout.require(spec.reg_L));
    const auto d = spec.layout.reg(li).dim;
    std::vector<std::int64_t> perm(static_cast<std::size_t>(d * d));
    std::vector<cx> phase(static_cast<std::size_t>(d * d), cx{1.0});
    for (std::int64_t i = 0; i < d; ++i)
        for (std::int64_t j = 0; j < d; ++j)
            perm[static_cast<std::size_t>(i * d + j)] = j * d + i;
    return LinearOp::monomial({spec.reg_L, spec.reg_R}, std::move(perm), std::move(phase));
}

LinearOp flag_reflection(const WalkLevelSpec& spec) {
    // 2|0><0| - I on the R register.
    const auto ri = static_cast<std::size_t>(spec.layout.require(spec.reg_R));
    std::vector<cx> diag(static_cast<std::size_t>(spec.layout.reg(ri).dim), cx{-1.0});
    diag[0] = 1.0;
    return LinearOp::diagonal({spec.reg_R}, std::move(diag));
}

}  // namespace

LinearOp szegedy_step(const WalkLevelSpec& spec) {
    if (markov::max_detailed_balance_error(spec.chain) > 1e-12)
        throw ContractError("szegedy_step requires a reversible chain");
    // One walk step: reflect about span{|u>|p_u>} (U_P-conjugated flag
    // reflection), then exchange the two registers. Its eigenphases are
    // arccos of the signed chain eigenvalues, so the phase gap around zero
    // is governed by 1 - lambda2; the product of this step with its swapped
    // twin is the two-reflection form.
    const LinearOp up = chain_update(spec);
    const LinearOp ref_a = LinearOp::sequence({up, flag_reflection(spec), up});
    return LinearOp::sequence({ref_a, swap_lr(spec)});
}

LinearOp checking_reflection(const WalkLevelSpec& spec, oracle::QueryOracle* o) {
    validate_layout(spec);
    LinearOp op;
    if (spec.basis_marked && data_dim(spec) > 1) {
        // Diagonal +-1 on (L, data).
        const auto li = static_cast<std::size_t>(spec.layout.require(spec.reg_L));
        const auto ldim = spec.layout.reg(li).dim;
        const auto dd = data_dim(spec);
        std::vector<std::string> targets{spec.reg_L};
        for (const auto& d : spec.data_regs) targets.push_back(d);
        std::vector<cx> diag(static_cast<std::size_t>(ldim * dd), cx{1.0});
        for (std::int64_t u = 0; u < spec.chain.n_states; ++u)
            for (std::int64_t d = 0; d < dd; ++d)
                if (spec.basis_marked(static_cast<int>(u), d))
                    diag[static_cast<std::size_t>((u + 1) * dd + d)] = -1.0;
        op = LinearOp::diagonal(std::move(targets), std::move(diag));
    } else if (spec.data_map && !spec.data_regs.empty()) {
        // Per-state reflection about |D(u)> on marked branches.
        std::map<std::int64_t, LinearOp> blocks;
        for (std::int64_t u = 0; u < spec.chain.n_states; ++u) {
            if (!spec.marked || !spec.marked(static_cast<int>(u))) continue;
            StateVector d = spec.data_map(static_cast<int>(u));
            blocks.emplace(u + 1,
                           LinearOp::rank_one(spec.data_regs, d.amps(), cx{1.0}, cx{-2.0}));
        }
        op = LinearOp::controlled(spec.reg_L, std::move(blocks));
    } else {
        const auto li = static_cast<std::size_t>(spec.layout.require(spec.reg_L));
        std::vector<cx> diag(static_cast<std::size_t>(spec.layout.reg(li).dim), cx{1.0});
        for (std::int64_t u = 0; u < spec.chain.n_states; ++u)
            if (spec.marked && spec.marked(static_cast<int>(u)))
                diag[static_cast<std::size_t>(u + 1)] = -1.0;
        op = LinearOp::diagonal({spec.reg_L}, std::move(diag));
    }
    if (o) return LinearOp::counted(std::move(op), o->counter(), spec.check_queries);
    return op;
}

long long detect_budget(const WalkLevelSpec& spec) {
    const double eps = spec.epsilon;
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon must lie in (0,1]");
    const double u = static_cast<double>(spec.update_queries);
    const double c = static_cast<double>(spec.check_queries);
    const double b =
        config().budget_c0 / std::sqrt(eps) * (u / std::sqrt(spec.chain.delta) + c);
    return static_cast<long long>(std::ceil(b));
}

bool detect_sample(const WalkLevelSpec& spec, rng::Stream* rng) {
    for (std::int64_t u = 0; u < spec.chain.n_states; ++u) {
        bool hit;
        if (spec.check_procedure && rng) {
            hit = spec.check_procedure(static_cast<int>(u)).sample(*rng);
        } else {
            if (!spec.marked) throw ContractError("spec has no marked predicate");
            hit = spec.marked(static_cast<int>(u));
        }
        if (hit) return true;
    }
    return false;
}

namespace {

DetectOutcome detect_exact(const WalkLevelSpec& spec, StateVector& state, oracle::QueryOracle& o,
                           rng::Stream* rng) {
    const bool verdict = detect_sample(spec, rng);
    const StateVector ref = setup_state(spec);
    if (verdict) hilbert::negated_projector_reflection(ref).apply_in_place(state);
    const cx s = hilbert::inner_product(ref, state);
    DetectOutcome out;
    out.verdict = verdict;
    out.fidelity = std::abs(s);
    out.signed_overlap = s.real();
    out.queries = detect_budget(spec);
    o.charge(out.queries);
    return out;
}

LinearOp qft_matrix(const std::vector<std::string>& targets, bool inverse) {
    const std::int64_t n = std::int64_t{1} << targets.size();
    std::vector<cx> m(static_cast<std::size_t>(n * n));
    const double sign = inverse ? -1.0 : 1.0;
    const double inv = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::int64_t j = 0; j < n; ++j)
        for (std::int64_t k = 0; k < n; ++k) {
            const double ang = sign * 2.0 * std::numbers::pi * double(j) * double(k) / double(n);
            m[static_cast<std::size_t>(j * n + k)] = cx{std::cos(ang), std::sin(ang)} * inv;
        }
    return LinearOp::dense(targets, std::move(m));
}

LinearOp hadamard(const std::string& target) {
    const double h = std::numbers::sqrt2 / 2.0;
    return LinearOp::dense({target}, {h, h, h, -h});
}

// Phase estimation of `unit` on the qubit block `anc` (anc[j] controls
// unit^(2^j)), a -1 phase on every nonzero estimate, and uncomputation.
LinearOp pe_flip(const std::vector<std::string>& anc, const LinearOp& unit) {
    std::vector<LinearOp> seq;
    for (const auto& a : anc) seq.push_back(hadamard(a));
    const LinearOp unit_dag = unit.adjoint();
    for (std::size_t j = 0; j < anc.size(); ++j) {
        std::vector<LinearOp> reps(static_cast<std::size_t>(1) << j, unit);
        seq.push_back(LinearOp::controlled(anc[j], {{1, LinearOp::sequence(std::move(reps))}}));
    }
    // Joint ancilla value m = sum_j anc[j] 2^j: list the block from the most
    // significant qubit down so the local index equals m.
    std::vector<std::string> block(anc.rbegin(), anc.rend());
    seq.push_back(qft_matrix(block, true));
    std::vector<cx> diag(static_cast<std::size_t>(1) << anc.size(), cx{-1.0});
    diag[0] = 1.0;
    seq.push_back(LinearOp::diagonal(block, std::move(diag)));
    seq.push_back(qft_matrix(block, false));
    for (std::size_t j = anc.size(); j-- > 0;) {
        std::vector<LinearOp> reps(static_cast<std::size_t>(1) << j, unit_dag);
        seq.push_back(LinearOp::controlled(anc[j], {{1, LinearOp::sequence(std::move(reps))}}));
    }
    for (const auto& a : anc) seq.push_back(hadamard(a));
    return LinearOp::sequence(std::move(seq));
}

int pe_bits(double x) {
    // ceil(log2(1/sqrt(x))) + 3, clamped to at least 3 ancilla qubits.
    const double raw = std::ceil(std::log2(1.0 / std::sqrt(x)));
    return std::max(0, static_cast<int>(raw)) + 3;
}

DetectOutcome detect_phase_estimation(const WalkLevelSpec& spec, StateVector& state,
                                      oracle::QueryOracle& o, rng::Stream* rng) {
    if (data_dim(spec) != 1)
        throw ContractError(
            "phase-estimation backend supports flat specs with a trivial data register");
    if (!spec.basis_marked && !spec.marked)
        throw ContractError("spec has no marked predicate");

    const int t_w = pe_bits(spec.chain.delta);
    const int t_g = pe_bits(spec.epsilon);

    std::vector<hilbert::Register> regs;
    for (std::size_t i = 0; i < spec.layout.size(); ++i) regs.push_back(spec.layout.reg(i));
    std::vector<std::string> anc_w, anc_g;
    for (int j = 0; j < t_w; ++j) {
        anc_w.push_back("pe_w" + std::to_string(j));
        regs.push_back({anc_w.back(), 2});
    }
    for (int j = 0; j < t_g; ++j) {
        anc_g.push_back("pe_g" + std::to_string(j));
        regs.push_back({anc_g.back(), 2});
    }
    RegisterLayout big(regs);
    const std::int64_t anc_total = std::int64_t{1} << (t_w + t_g);

    const long long before = o.count();

    // Marked flip C on the L register, charged per application.
    const auto li = static_cast<std::size_t>(spec.layout.require(spec.reg_L));
    std::vector<cx> cdiag(static_cast<std::size_t>(spec.layout.reg(li).dim), cx{1.0});
    for (std::int64_t u = 0; u < spec.chain.n_states; ++u) {
        const bool m = spec.basis_marked ? spec.basis_marked(static_cast<int>(u), 0)
                                         : spec.marked(static_cast<int>(u));
        if (m) cdiag[static_cast<std::size_t>(u + 1)] = -1.0;
    }
    const LinearOp cflip = LinearOp::counted(LinearOp::diagonal({spec.reg_L}, std::move(cdiag)),
                                             o.counter(), spec.check_queries);

    const LinearOp w = szegedy_step(spec);
    const LinearOp up = chain_update(spec);
    const LinearOp r_pi = LinearOp::sequence({up, pe_flip(anc_w, w), up});
    const LinearOp grover = LinearOp::sequence({cflip, r_pi});
    const LinearOp circuit = pe_flip(anc_g, grover);

    StateVector psi(big);
    for (std::int64_t i = 0; i < state.dim(); ++i) psi[i * anc_total] = state[i];
    circuit.apply_in_place(psi);

    // Compare against the reference state embedded with all ancillas at 0.
    const StateVector ref = setup_state(spec);
    long double re = 0.0L, im = 0.0L;
    for (std::int64_t i = 0; i < state.dim(); ++i) {
        const cx t = std::conj(ref[i]) * psi[i * anc_total];
        re += t.real();
        im += t.imag();
    }
    const cx s{static_cast<double>(re), static_cast<double>(im)};

    // Hand back the walk-register part (ancillas return to |0> up to the
    // estimation error).
    for (std::int64_t i = 0; i < state.dim(); ++i) state[i] = psi[i * anc_total];
    const double n = state.norm();
    if (n > 1e-12)
        for (auto& a : state.amps()) a /= n;

    DetectOutcome out;
    out.verdict = s.real() < 0.0;
    out.fidelity = std::abs(s);
    out.signed_overlap = s.real();
    out.queries = o.count() - before;
    if (out.queries > detect_budget(spec))
        throw BudgetError("phase-estimation detection exceeded its query budget");
    (void)rng;
    return out;
}

}  // namespace

DetectOutcome detect(const WalkLevelSpec& spec, StateVector& state, Backend backend,
                     oracle::QueryOracle& o, rng::Stream* rng) {
    validate_layout(spec);
    if (!state.layout().same_as(spec.layout))
        throw std::invalid_argument("state layout does not match the spec");
    if (std::abs(state.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("detect requires a normalized state");
    if (backend == Backend::ExactReflection) return detect_exact(spec, state, o, rng);
    return detect_phase_estimation(spec, state, o, rng);
}

bool search(const WalkLevelSpec& spec, oracle::QueryOracle& o, rng::Stream& rng, Backend backend) {
    StateVector psi = build_setup_state(spec, o);
    const DetectOutcome d = detect(spec, psi, backend, o, &rng);
    // Phase kickback on a |+> control: P(measure 1) = (1 - Re<pi|out>)/2.
    const double p1 = std::clamp((1.0 - d.signed_overlap) / 2.0, 0.0, 1.0);
    return rng.bernoulli(p1);
}

int grover_iterations(double epsilon) {
    const double theta = std::asin(std::min(1.0, std::sqrt(epsilon)));
    return std::max(0, static_cast<int>(std::llround(std::numbers::pi / (4.0 * theta) - 0.5)));
}

bool amplitude_amplification(const AmplificationProblem& prob, double epsilon,
                             oracle::QueryOracle& o, rng::Stream& rng) {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("epsilon must lie in (0,1]");
    const StateVector psi0 = prob.setup(o);
    const std::int64_t n = psi0.dim();
    std::vector<cx> diag(static_cast<std::size_t>(n), cx{1.0});
    for (std::int64_t i = 0; i < n; ++i)
        if (prob.marked_basis(i)) diag[static_cast<std::size_t>(i)] = -1.0;
    std::vector<std::string> all;
    for (std::size_t i = 0; i < prob.layout.size(); ++i) all.push_back(prob.layout.reg(i).name);
    const LinearOp flip =
        LinearOp::counted(LinearOp::diagonal(all, std::move(diag)), o.counter(), prob.flip_queries);
    const LinearOp refl = hilbert::reflection_about(psi0);

    auto run = [&](int iters) -> bool {
        StateVector s = psi0;
        for (int i = 0; i < iters; ++i) {
            flip.apply_in_place(s);
            refl.apply_in_place(s);
        }
        // Measure in the computational basis.
        double u = rng.next_double();
        std::int64_t picked = n - 1;
        double acc = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            acc += std::norm(s[i]);
            if (u < acc) {
                picked = i;
                break;
            }
        }
        return prob.marked_basis(picked);
    };

    const double theta = std::asin(std::min(1.0, std::sqrt(epsilon)));
    const int k0 = grover_iterations(epsilon);
    long long spent = k0;
    if (run(k0)) return true;

    // Unknown-mass wrapper: exponentially growing random iteration counts.
    const long long budget = static_cast<long long>(std::ceil(9.0 / std::sqrt(epsilon))) + k0 + 8;
    const std::uint64_t m_cap = static_cast<std::uint64_t>(std::ceil(1.0 / theta)) + 1;
    std::uint64_t m = 2;
    while (spent < budget) {
        const int k = static_cast<int>(rng.next_below(std::min(m, m_cap)));
        spent += std::max(1, k);
        if (run(k)) return true;
        m = std::min(m_cap, m * 6 / 5 + 1);
    }
    return false;
}

}  // namespace nw::walk
