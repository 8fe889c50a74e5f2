#include "nestedwalk/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "nestedwalk/algorithms.hpp"
#include "nestedwalk/common.hpp"

namespace nw::verify {

using hilbert::cx;
using hilbert::LinearOp;
using hilbert::StateVector;

namespace {

CheckResult check(const std::string& name, bool pass, const std::string& detail = {}) {
    return CheckResult{name, pass, detail};
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

}  // namespace

std::vector<CheckResult> verify_markov() {
    std::vector<CheckResult> out;
    double worst_gap = 0.0, worst_db = 0.0;
    for (int n = 3; n <= 10; ++n)
        for (int r = 2; r < n; ++r) {
            const auto c = markov::johnson_chain(n, r);
            const double closed = static_cast<double>(n) / (static_cast<double>(r) * (n - r));
            worst_gap = std::max(worst_gap, std::abs(c.delta - closed));
            worst_db = std::max(worst_db, markov::max_detailed_balance_error(c));
        }
    out.push_back(check("johnson_gap_closed_form", worst_gap <= 1e-9,
                        "max |delta - n/(r(n-r))| = " + fmt(worst_gap)));
    out.push_back(
        check("detailed_balance", worst_db <= 1e-12, "max violation = " + fmt(worst_db)));

    // Tensor spectrum of a product chain.
    const auto j42 = markov::johnson_chain(4, 2);
    const auto prod = markov::product_chain(j42, j42);
    Eigen::MatrixXd p1 = Eigen::MatrixXd::Zero(j42.n_states, j42.n_states);
    for (std::int64_t u = 0; u < j42.n_states; ++u)
        for (const auto& [v, pv] : j42.rows[static_cast<std::size_t>(u)]) p1(u, v) = pv;
    Eigen::VectorXd ev1 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p1).eigenvalues();
    std::vector<double> expect;
    for (int i = 0; i < ev1.size(); ++i)
        for (int j = 0; j < ev1.size(); ++j) expect.push_back(ev1(i) * ev1(j));
    std::sort(expect.begin(), expect.end());
    Eigen::MatrixXd p2 = Eigen::MatrixXd::Zero(prod.n_states, prod.n_states);
    for (std::int64_t u = 0; u < prod.n_states; ++u)
        for (const auto& [v, pv] : prod.rows[static_cast<std::size_t>(u)]) p2(u, v) = pv;
    Eigen::VectorXd ev2 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p2).eigenvalues();
    double worst = 0.0;
    for (int i = 0; i < ev2.size(); ++i)
        worst = std::max(worst, std::abs(ev2(i) - expect[static_cast<std::size_t>(i)]));
    out.push_back(check("product_tensor_spectrum", worst <= 1e-9,
                        "max eigenvalue mismatch = " + fmt(worst)));
    out.push_back(check("product_gap", std::abs(prod.delta - 0.75) <= 1e-9,
                        "delta = " + fmt(prod.delta)));
    return out;
}

nested::TruncationInstance random_truncation_instance(rng::Stream& rng, int max_branches) {
    const int nb = 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_branches - 1)));
    const int d = 2 + static_cast<int>(rng.next_below(4));  // target dimension 2..5
    nested::TruncationInstance t;
    t.layout = hilbert::RegisterLayout({{"ctl", nb}, {"tgt", d}});
    t.control_reg = "ctl";

    // Random amplitudes.
    std::vector<double> w(static_cast<std::size_t>(nb));
    double s = 0.0;
    for (auto& x : w) {
        x = 0.05 + rng.next_double();
        s += x;
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double ang = 2.0 * std::numbers::pi * rng.next_double();
        const double mag = std::sqrt(w[i] / s);
        nested::TruncationBranch b;
        b.alpha = cx{mag * std::cos(ang), mag * std::sin(ang)};
        b.cost = static_cast<long long>(rng.next_below(21));
        // Random unitary exp(iH) with eigenvalues of H in [-pi/2, pi/2]:
        // its numerical range stays in the right half plane, which keeps the
        // averaging bound sharp (see the lemma's inner-product expansion).
        Eigen::MatrixXcd a(d, d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
                a(r, c) = cx{rng.next_double() - 0.5, rng.next_double() - 0.5};
        Eigen::MatrixXcd h = (a + a.adjoint()) / 2.0;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
        const double scale =
            (std::numbers::pi / 2.0) * rng.next_double() /
            std::max(1e-12, std::max(std::abs(es.eigenvalues()(0)),
                                     std::abs(es.eigenvalues()(d - 1))));
        Eigen::VectorXcd phases(d);
        for (int i2 = 0; i2 < d; ++i2) {
            const double th = es.eigenvalues()(i2) * scale;
            phases(i2) = cx{std::cos(th), std::sin(th)};
        }
        Eigen::MatrixXcd u =
            es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
        std::vector<cx> m(static_cast<std::size_t>(d) * d);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) m[static_cast<std::size_t>(r * d + c)] = u(r, c);
        b.op = LinearOp::dense({"tgt"}, std::move(m));
        t.branches.push_back(std::move(b));
    }
    return t;
}

hilbert::StateVector random_branch_state(const nested::TruncationInstance& t, rng::Stream& rng) {
    const auto d = t.layout.reg(1).dim;
    std::vector<StateVector> parts;
    const hilbert::RegisterLayout tgt({{"tgt", d}});
    for (std::size_t b = 0; b < t.branches.size(); ++b) {
        StateVector s(tgt);
        for (std::int64_t i = 0; i < d; ++i)
            s[i] = cx{rng.next_double() - 0.5, rng.next_double() - 0.5};
        s.normalize();
        parts.push_back(std::move(s));
    }
    return nested::branch_state(t, parts);
}

double truncation_overlap(const nested::TruncationInstance& t, const hilbert::LinearOp& approx,
                          const hilbert::StateVector& s) {
    const StateVector exact = nested::full_controlled(t).apply(s);
    const StateVector approxed = approx.apply(s);
    return hilbert::inner_product(exact, approxed).real();
}

std::vector<CheckResult> verify_lemma(std::uint64_t seed) {
    std::vector<CheckResult> out;
    auto rng = rng::stream(seed, "verify-lemma");
    double worst_slack = 1.0;
    bool bound_ok = true, markov_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        const auto t = random_truncation_instance(rng, 16);
        long long maxc = 0;
        for (const auto& b : t.branches) maxc = std::max(maxc, b.cost);
        const long long q = static_cast<long long>(rng.next_below(static_cast<std::uint64_t>(maxc + 2)));
        const auto [approx, err] = nested::truncated_controlled(t, q);
        const StateVector s = random_branch_state(t, rng);
        const double overlap = truncation_overlap(t, approx, s);
        if (overlap < 1.0 - err - 1e-9) bound_ok = false;
        worst_slack = std::min(worst_slack, overlap - (1.0 - err));

        const auto [q7, bound7] = nested::markov_budget(t, 7.0);
        const auto [approx7, err7] = nested::truncated_controlled(t, q7);
        if (err7 > bound7 + 1e-15) markov_ok = false;
    }
    out.push_back(check("lemma_overlap_bound", bound_ok,
                        "min slack over 100 instances = " + fmt(worst_slack)));
    out.push_back(check("markov_budget_k7", markov_ok, "predicted error <= 1/7 in all cases"));
    return out;
}

double max_transport_error(const walk::WalkLevelSpec& spec) {
    const LinearOp ud = walk::data_update(spec);
    const auto li = static_cast<std::size_t>(spec.layout.require(spec.reg_L));
    const auto ri = static_cast<std::size_t>(spec.layout.require(spec.reg_R));
    const auto offs = walk::sublayout_offsets(spec.layout, spec.data_regs);
    double worst = 0.0;
    for (std::int64_t u = 0; u < spec.chain.n_states; ++u) {
        const StateVector du = spec.data_map(static_cast<int>(u));
        for (const auto& [v, p] : spec.chain.rows[static_cast<std::size_t>(u)]) {
            if (v == u) continue;
            StateVector st(spec.layout);
            const std::int64_t base =
                (u + 1) * spec.layout.stride(li) + (v + 1) * spec.layout.stride(ri);
            for (std::int64_t s = 0; s < du.dim(); ++s)
                st[base + offs[static_cast<std::size_t>(s)]] = du[s];
            ud.apply_in_place(st);
            const StateVector dv = spec.data_map(v);
            for (std::int64_t s = 0; s < dv.dim(); ++s)
                worst = std::max(worst,
                                 std::abs(st[base + offs[static_cast<std::size_t>(s)]] - dv[s]));
        }
    }
    return worst;
}

std::vector<CheckResult> verify_nesting(std::uint64_t seed) {
    std::vector<CheckResult> out;
    auto rng = rng::stream(seed, "verify-nesting");

    for (int g_idx = 0; g_idx < 3; ++g_idx) {
        const auto g = graphs::Graph::random(6, 0.5, rng);
        // Construction itself validates witness consistency exhaustively.
        algorithms::TriangleParams p35;
        p35.r = 3;
        p35.s = 1.0 / 3.0;
        bool built = true;
        double terr35 = -1.0, terr97 = -1.0;
        try {
            const auto spec35 = algorithms::make_triangle_3527_spec(g, p35);
            terr35 = max_transport_error(spec35);
            algorithms::TriangleParams p97;
            p97.r1 = 2;
            p97.r2 = 2;
            p97.m = 1;
            const auto spec97 = algorithms::make_triangle_97_spec(g, p97);
            terr97 = max_transport_error(spec97);
        } catch (const ContractError& e) {
            built = false;
            out.push_back(check("witness_consistency_g" + std::to_string(g_idx), false, e.what()));
        }
        if (built) {
            out.push_back(check("witness_consistency_g" + std::to_string(g_idx), true,
                                "validated at composition"));
            out.push_back(check("transport_3527_g" + std::to_string(g_idx), terr35 <= 1e-9,
                                "max amplitude error = " + fmt(terr35)));
            out.push_back(check("transport_97_g" + std::to_string(g_idx), terr97 <= 1e-9,
                                "max amplitude error = " + fmt(terr97)));
        }
    }
    return out;
}

std::vector<CheckResult> verify_counting(std::uint64_t seed) {
    std::vector<CheckResult> out;
    auto rng = rng::stream(seed, "verify-counting");
    bool setup_ok = true, update_ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 4 + static_cast<int>(rng.next_below(3));  // 4..6
        const int r = 2 + static_cast<int>(rng.next_below(2));  // 2..3
        const auto g = graphs::Graph::random(n, 0.5, rng);
        const auto spec = algorithms::make_triangle_mss_spec(g, r);
        oracle::QueryOracle o = oracle::QueryOracle::from_graph(g);
        auto psi = walk::build_setup_state(spec, o);
        if (o.count() != graphs::pair_count(r)) setup_ok = false;
        const long long before = o.count();
        auto step = walk::apply_update(spec, o);
        step.apply_in_place(psi);
        if (o.count() - before != 2 * (r - 1)) update_ok = false;
    }
    out.push_back(check("mss_setup_queries", setup_ok, "setup = C(r,2) across 50 runs"));
    out.push_back(check("mss_update_queries", update_ok, "update = 2(r-1) across 50 runs"));

    bool gc_ok = true;
    for (int trial = 0; trial < 10; ++trial) {
        const auto tmpl = graphs::Graph::random(6, 0.5, rng);
        graphs::Marking mk;
        mk.bits.resize(6);
        for (auto& b : mk.bits) b = rng.next_below(2);
        const auto spec = algorithms::make_graph_collision_spec(tmpl, 3, 3, mk, 2);
        oracle::QueryOracle o = oracle::QueryOracle::from_marking(mk);
        auto psi = walk::build_setup_state(spec, o);
        if (o.count() != 4) gc_ok = false;  // 2m with m = 2
        const long long before = o.count();
        auto step = walk::apply_update(spec, o);
        step.apply_in_place(psi);
        if (o.count() - before != 4) gc_ok = false;
    }
    out.push_back(check("collision_query_convention", gc_ok, "setup 2m, update 4 per step"));
    return out;
}

std::vector<CheckResult> verify_all(std::uint64_t seed) {
    std::vector<CheckResult> out;
    for (auto&& v : {verify_markov(), verify_lemma(seed), verify_nesting(seed),
                     verify_counting(seed)})
        out.insert(out.end(), v.begin(), v.end());
    return out;
}

}  // namespace nw::verify
