// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria are numbered and pinned to their stated tolerances.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "nestedwalk/algorithms.hpp"
#include "nestedwalk/costmodel.hpp"
#include "nestedwalk/verify.hpp"

using namespace nw;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& label, const std::function<bool(std::string&)>& fn) {
    std::string detail;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        ok = fn(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    std::printf("[%s] %2d. %-58s (%6.2f s)%s%s\n", ok ? "PASS" : "FAIL", number, label.c_str(),
                secs, detail.empty() ? "" : "  -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

bool boosted_verdict(const walk::WalkLevelSpec& spec, double target, rng::Stream& rng) {
    oracle::FlipProcedure proc;
    proc.queries = 1;
    proc.sample = [&spec](rng::Stream& r) { return walk::detect_sample(spec, &r); };
    return oracle::boost(proc, target).sample(rng);
}

}  // namespace

int main() {
    criterion(1, "spectral gap of J(n,r) equals n/(r(n-r)) within 1e-9", [](std::string& d) {
        double worst = 0.0;
        for (int n = 3; n <= 10; ++n)
            for (int r = 2; r < n; ++r) {
                const auto c = markov::johnson_chain(n, r);
                worst = std::max(worst, std::abs(c.delta - double(n) / (double(r) * (n - r))));
            }
        d = "max deviation " + std::to_string(worst);
        return worst <= 1e-9;
    });

    criterion(2, "exact LP optima 13/10, 35/27, 9/7 with the stated vertices",
              [](std::string& d) {
                  using nw::Rational;
                  const auto m = costmodel::optimize_exponents(costmodel::mss_cost_expr(),
                                                               costmodel::mss_constraints());
                  const auto a = costmodel::optimize_exponents(costmodel::t3527_cost_expr(),
                                                               costmodel::t3527_constraints());
                  const auto b = costmodel::optimize_exponents(costmodel::t97_cost_expr(),
                                                               costmodel::t97_constraints());
                  d = m.optimum.str() + ", " + a.optimum.str() + ", " + b.optimum.str();
                  return m.optimum == Rational(13, 10) &&
                         m.assignment.at("rho") == Rational(3, 5) &&
                         a.optimum == Rational(35, 27) &&
                         a.assignment.at("rho") == Rational(2, 3) &&
                         a.assignment.at("sigma") == Rational(-1, 27) &&
                         b.optimum == Rational(9, 7) &&
                         b.assignment.at("rho1") == Rational(4, 7) &&
                         b.assignment.at("rho2") == Rational(5, 7);
              });

    criterion(3, "numeric exponent fit matches each LP optimum within 0.01",
              [](std::string& d) {
                  const std::vector<double> grid{1e3, 3.1623e4, 1e6, 3.1623e7, 1e9};
                  struct Case {
                      costmodel::CostExpr expr;
                      std::vector<costmodel::Constraint> cons;
                      double target;
                  };
                  const std::vector<Case> cases{
                      {costmodel::mss_cost_expr(), costmodel::mss_constraints(), 13.0 / 10.0},
                      {costmodel::t3527_cost_expr(), costmodel::t3527_constraints(), 35.0 / 27.0},
                      {costmodel::t97_cost_expr(), costmodel::t97_constraints(), 9.0 / 7.0}};
                  double worst = 0.0;
                  for (const auto& c : cases) {
                      const auto opt = costmodel::optimize_exponents(c.expr, c.cons);
                      const auto model = costmodel::numeric_model(c.expr, c.cons, opt.assignment);
                      const double slope = costmodel::fit_exponent(model, grid);
                      worst = std::max(worst, std::abs(slope - c.target));
                  }
                  d = "max |slope - optimum| = " + std::to_string(worst);
                  return worst < 0.01;
              });

    criterion(4, "K3 program yields exactly 9/7 over all valid orderings", [](std::string& d) {
        using nw::Rational;
        const auto k3 = costmodel::canonical_k3_program();
        const auto base = costmodel::optimize_program(k3);
        if (base.optimum != Rational(9, 7)) return false;
        const auto all = costmodel::all_valid_orderings(k3.H);
        int agree = 0;
        for (const auto& p : all)
            if (costmodel::optimize_program(p).optimum == Rational(9, 7)) ++agree;
        d = std::to_string(agree) + "/" + std::to_string(all.size()) +
            " orderings (8 up to vertex relabeling)";
        return agree == static_cast<int>(all.size()) && all.size() == 48;
    });

    criterion(5, "averaging lemma bound and Markov budget on 100 instances",
              [](std::string& d) {
                  auto rng = rng::stream(0, "acceptance-lemma");
                  double min_slack = 1.0;
                  for (int trial = 0; trial < 100; ++trial) {
                      const auto t = verify::random_truncation_instance(rng, 16);
                      long long maxc = 0;
                      for (const auto& b : t.branches) maxc = std::max(maxc, b.cost);
                      const long long q = static_cast<long long>(
                          rng.next_below(static_cast<std::uint64_t>(maxc + 2)));
                      const auto [approx, err] = nested::truncated_controlled(t, q);
                      const auto s = verify::random_branch_state(t, rng);
                      const double overlap = verify::truncation_overlap(t, approx, s);
                      min_slack = std::min(min_slack, overlap - (1.0 - err));
                      if (overlap < 1.0 - err - 1e-9) return false;
                      const auto [q7, bound7] = nested::markov_budget(t, 7.0);
                      if (nested::truncated_controlled(t, q7).second > bound7) return false;
                  }
                  d = "min overlap slack " + std::to_string(min_slack);
                  return true;
              });

    criterion(6, "detection fidelity on J(8,2), both backends", [](std::string& d) {
        auto chain = markov::johnson_chain(8, 2);
        walk::WalkLevelSpec spec;
        spec.chain = chain;
        spec.layout = hilbert::RegisterLayout(
            {{"L", chain.n_states + 1}, {"R", chain.n_states + 1}});
        spec.marked = [chain](int u) {
            for (int v : chain.labels[static_cast<std::size_t>(u)])
                if (v == 0) return true;
            return false;
        };
        spec.epsilon = 0.25;
        spec.check_queries = 1;
        oracle::QueryOracle o({0});

        auto psi = walk::setup_state(spec);
        const auto pe = walk::detect(spec, psi, walk::Backend::PhaseEstimation, o);
        if (!(pe.verdict && pe.signed_overlap < 0.0 && pe.fidelity >= 0.9)) return false;

        walk::WalkLevelSpec empty = spec;
        empty.marked = [](int) { return false; };
        empty.epsilon = 0.25;
        auto psi2 = walk::setup_state(empty);
        const auto pe2 = walk::detect(empty, psi2, walk::Backend::PhaseEstimation, o);
        if (!(!pe2.verdict && pe2.fidelity >= 0.99)) return false;

        auto psi3 = walk::setup_state(spec);
        const auto ex = walk::detect(spec, psi3, walk::Backend::ExactReflection, o);
        auto psi4 = walk::setup_state(empty);
        const auto ex2 = walk::detect(empty, psi4, walk::Backend::ExactReflection, o);
        d = "pe marked fid " + std::to_string(pe.fidelity) + ", empty fid " +
            std::to_string(pe2.fidelity);
        return ex.fidelity >= 1.0 - 1e-9 && ex2.fidelity >= 1.0 - 1e-9 && ex.verdict &&
               !ex2.verdict;
    });

    criterion(7, "nested triangle walks agree with brute force on 200 graphs",
              [](std::string& d) {
                  auto rng = rng::stream(0, "acceptance-nested");
                  algorithms::TriangleParams p35;
                  p35.r = 3;
                  p35.s = 1.0 / 3.0;
                  algorithms::TriangleParams p97;
                  p97.r1 = 2;
                  p97.r2 = 2;
                  p97.m = 1;
                  int disagreements = 0;
                  for (int i = 0; i < 200; ++i) {
                      const auto g = graphs::Graph::random(6, 0.35, rng);
                      const bool truth = graphs::has_triangle(g).has_value();
                      const auto s35 = algorithms::make_triangle_3527_spec(g, p35);
                      const auto s97 = algorithms::make_triangle_97_spec(g, p97);
                      // One state-backed run of each walk, then the boosted
                      // verdict at target error 1e-3.
                      oracle::QueryOracle o1 = oracle::QueryOracle::from_graph(g);
                      oracle::QueryOracle o2 = oracle::QueryOracle::from_graph(g);
                      (void)walk::search(s35, o1, rng);
                      (void)walk::search(s97, o2, rng);
                      if (boosted_verdict(s35, 1e-3, rng) != truth) ++disagreements;
                      if (boosted_verdict(s97, 1e-3, rng) != truth) ++disagreements;
                  }
                  d = std::to_string(disagreements) + " disagreements";
                  return disagreements == 0;
              });

    criterion(8, "graph collision on 500 instances, exact query conventions",
              [](std::string& d) {
                  auto rng = rng::stream(0, "acceptance-collision");
                  int disagreements = 0;
                  for (int i = 0; i < 500; ++i) {
                      graphs::Graph bip(6);
                      for (int a = 0; a < 3; ++a)
                          for (int b = 3; b < 6; ++b)
                              if (rng.bernoulli(0.5)) bip.set_edge(a, b);
                      graphs::Marking mk;
                      mk.bits.resize(6);
                      for (auto& bb : mk.bits) bb = rng.next_below(2);
                      const bool truth = graphs::has_graph_collision(bip, mk).has_value();
                      const auto spec = algorithms::make_graph_collision_spec(bip, 3, 3, mk, 2);

                      oracle::QueryOracle o = oracle::QueryOracle::from_marking(mk);
                      auto psi = walk::build_setup_state(spec, o);
                      if (o.count() != 4) return false;  // setup = 2m
                      auto step = walk::apply_update(spec, o);
                      step.apply_in_place(psi);
                      if (o.count() != 8) return false;  // +4 per step

                      oracle::FlipProcedure proc;
                      proc.queries = 1;
                      proc.sample = [&](rng::Stream& r2) {
                          oracle::QueryOracle o2 = oracle::QueryOracle::from_marking(mk);
                          return walk::search(spec, o2, r2);
                      };
                      if (oracle::boost(proc, 1e-3).sample(rng) != truth) ++disagreements;
                  }
                  d = std::to_string(disagreements) + " disagreements";
                  return disagreements == 0;
              });

    criterion(9, "walk setup costs C(r,2) and each update 2(r-1), 50 runs",
              [](std::string& d) {
                  auto rng = rng::stream(0, "acceptance-counting");
                  for (int trial = 0; trial < 50; ++trial) {
                      const int n = 4 + static_cast<int>(rng.next_below(3));
                      const int r = 2 + static_cast<int>(rng.next_below(2));
                      const auto g = graphs::Graph::random(n, 0.5, rng);
                      const auto spec = algorithms::make_triangle_mss_spec(g, r);
                      oracle::QueryOracle o = oracle::QueryOracle::from_graph(g);
                      auto psi = walk::build_setup_state(spec, o);
                      if (o.count() != graphs::pair_count(r)) return false;
                      const auto step = walk::apply_update(spec, o);
                      step.apply_in_place(psi);
                      step.apply_in_place(psi);
                      if (o.count() != graphs::pair_count(r) + 2 * (2 * (r - 1))) return false;
                  }
                  d = "exact across 50 seeded runs";
                  return true;
              });

    criterion(10, "witness consistency and exact inner-state transport", [](std::string& d) {
        auto rng = rng::stream(0, "acceptance-nesting");
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) {
            const auto g = graphs::Graph::random(6, 0.45, rng);
            algorithms::TriangleParams p35;
            p35.r = 3;
            p35.s = 1.0 / 3.0;
            // Composition validates M_x = {u : M_x^u nonempty} exhaustively
            // and throws on any violation.
            const auto s35 = algorithms::make_triangle_3527_spec(g, p35);
            worst = std::max(worst, verify::max_transport_error(s35));
            algorithms::TriangleParams p97;
            p97.r1 = 2;
            p97.r2 = 2;
            p97.m = 1;
            const auto s97 = algorithms::make_triangle_97_spec(g, p97);
            worst = std::max(worst, verify::max_transport_error(s97));
        }
        d = "max transport amplitude error " + std::to_string(worst);
        return worst <= 1e-9;
    });

    std::printf("%s: %d/10 criteria passed\n", g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                10 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
