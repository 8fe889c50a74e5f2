// Command-line surface: run walk simulations, evaluate and optimize the
// cost formulas, and execute the invariant verification suites. Output is
// one JSON object on stdout (deterministic for a fixed seed and flags);
// --pretty switches to a human-readable summary including wall time.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "nestedwalk/algorithms.hpp"
#include "nestedwalk/common.hpp"
#include "nestedwalk/costmodel.hpp"
#include "nestedwalk/verify.hpp"

using njson = nlohmann::ordered_json;
using namespace nw;

namespace {

struct CommonOpts {
    std::uint64_t seed = 0;
    bool pretty = false;
    std::int64_t cap = 0;
};

void apply_cap(const CommonOpts& c) {
    if (const char* env = std::getenv("NESTEDWALK_CAP")) config().dim_cap = std::atoll(env);
    if (c.cap > 0) config().dim_cap = c.cap;
}

void emit(const njson& report, const CommonOpts& c, double wall_ms) {
    if (c.pretty) {
        njson shown = report;
        shown["wall_time_ms"] = wall_ms;
        std::cout << shown.dump(2) << "\n";
    } else {
        std::cout << report.dump() << "\n";
    }
}

std::string term_string(const costmodel::Term& t) {
    std::string s = t.base.str();
    for (const auto& m : t.mins) s += " + " + m.coeff.str() + "*" + m.key;
    return s;
}

int cmd_spectral(int n, int r, const CommonOpts& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto chain = markov::johnson_chain(n, r);
    const double closed = static_cast<double>(n) / (static_cast<double>(r) * (n - r));
    njson rep;
    rep["command"] = "spectral";
    rep["parameters"] = {{"n", n}, {"r", r}};
    rep["seed"] = c.seed;
    rep["states"] = chain.n_states;
    rep["delta"] = chain.delta;
    rep["closed_form"] = closed;
    rep["difference"] = chain.delta - closed;
    rep["wall_time_ms"] = nullptr;
    const auto t1 = std::chrono::steady_clock::now();
    emit(rep, c, std::chrono::duration<double, std::milli>(t1 - t0).count());
    return 0;
}

int cmd_triangle(const std::string& file, const std::string& algo, algorithms::TriangleParams p,
                 int trials, const std::string& backend, const CommonOpts& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto g = graphs::read_graph_file(file);
    const bool truth = graphs::has_triangle(g).has_value();
    const auto be = backend == "pe" ? walk::Backend::PhaseEstimation
                                    : walk::Backend::ExactReflection;

    walk::WalkLevelSpec spec;
    if (algo == "mss")
        spec = algorithms::make_triangle_mss_spec(g, p.r);
    else if (algo == "nested3527")
        spec = algorithms::make_triangle_3527_spec(g, p);
    else if (algo == "nested97")
        spec = algorithms::make_triangle_97_spec(g, p);
    else
        throw ParseError("unknown algorithm '" + algo + "'");

    int agree = 0, said_true = 0;
    long long total_queries = 0;
    for (int t = 0; t < trials; ++t) {
        auto rng = rng::substream(c.seed, "triangle-trial", static_cast<std::uint64_t>(t));
        oracle::QueryOracle o = oracle::QueryOracle::from_graph(g);
        const bool v = walk::search(spec, o, rng, be);
        total_queries += o.count();
        if (v) ++said_true;
        if (v == truth) ++agree;
    }
    njson rep;
    rep["command"] = "triangle";
    rep["parameters"] = {{"graph", file}, {"algo", algo},   {"r", p.r},
                         {"s", p.s},      {"r1", p.r1},     {"r2", p.r2},
                         {"m", p.m},      {"trials", trials}, {"backend", backend}};
    rep["seed"] = c.seed;
    rep["verdicts"] = {{"brute_force", truth},
                       {"true_rate", trials ? double(said_true) / trials : 0.0},
                       {"success_rate", trials ? double(agree) / trials : 0.0}};
    rep["query_count"] = {{"setup_per_trial", spec.setup_queries},
                          {"detect_budget_per_trial", walk::detect_budget(spec)},
                          {"total", total_queries}};
    rep["fidelities"] = {{"detect", be == walk::Backend::ExactReflection ? 1.0 : -1.0}};
    rep["wall_time_ms"] = nullptr;
    const auto t1 = std::chrono::steady_clock::now();
    emit(rep, c, std::chrono::duration<double, std::milli>(t1 - t0).count());
    return 0;
}

int cmd_collision(const std::string& file, const std::string& marked_csv, int r1, int r2, int m,
                  int trials, const CommonOpts& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto g = graphs::read_graph_file(file);
    if (g.n() != r1 + r2) throw ParseError("collision template must have r1+r2 vertices");
    graphs::Marking mk;
    mk.bits.assign(static_cast<std::size_t>(g.n()), 0);
    std::stringstream ss(marked_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        const int v = std::stoi(tok);
        if (v < 0 || v >= g.n()) throw ParseError("marked vertex out of range");
        mk.bits[static_cast<std::size_t>(v)] = 1;
    }
    bool truth = false;
    for (int a = 0; a < r1; ++a)
        for (int b = r1; b < r1 + r2; ++b)
            if (g.edge(a, b) && mk.marked(a) && mk.marked(b)) truth = true;

    const auto spec = algorithms::make_graph_collision_spec(g, r1, r2, mk, m);
    int agree = 0, said_true = 0;
    long long total_queries = 0;
    for (int t = 0; t < trials; ++t) {
        auto rng = rng::substream(c.seed, "collision-trial", static_cast<std::uint64_t>(t));
        oracle::QueryOracle o = oracle::QueryOracle::from_marking(mk);
        const bool v = walk::search(spec, o, rng);
        total_queries += o.count();
        if (v) ++said_true;
        if (v == truth) ++agree;
    }
    njson rep;
    rep["command"] = "collision";
    rep["parameters"] = {{"graph", file}, {"marked", marked_csv}, {"r1", r1},
                         {"r2", r2},      {"m", m},               {"trials", trials}};
    rep["seed"] = c.seed;
    rep["verdicts"] = {{"brute_force", truth},
                       {"true_rate", trials ? double(said_true) / trials : 0.0},
                       {"success_rate", trials ? double(agree) / trials : 0.0}};
    rep["query_count"] = {{"setup_per_trial", spec.setup_queries},
                          {"detect_budget_per_trial", walk::detect_budget(spec)},
                          {"total", total_queries}};
    rep["wall_time_ms"] = nullptr;
    const auto t1 = std::chrono::steady_clock::now();
    emit(rep, c, std::chrono::duration<double, std::milli>(t1 - t0).count());
    return 0;
}

int cmd_detect(int n, int r, int marked_vertex, const std::string& backend, const CommonOpts& c) {
    const auto t0 = std::chrono::steady_clock::now();
    walk::WalkLevelSpec spec;
    spec.chain = markov::johnson_chain(n, r);
    spec.layout = hilbert::RegisterLayout(
        {{"L", spec.chain.n_states + 1}, {"R", spec.chain.n_states + 1}});
    const auto chain = spec.chain;
    spec.marked = [chain, marked_vertex](int u) {
        if (marked_vertex < 0) return false;
        for (int v : chain.labels[static_cast<std::size_t>(u)])
            if (v == marked_vertex) return true;
        return false;
    };
    int cnt = 0;
    for (std::int64_t u = 0; u < chain.n_states; ++u) cnt += spec.marked(static_cast<int>(u));
    spec.epsilon = cnt > 0 ? double(cnt) / double(chain.n_states) : 1.0;
    spec.check_queries = 1;
    oracle::QueryOracle o({0});
    auto psi = walk::setup_state(spec);
    const auto be =
        backend == "pe" ? walk::Backend::PhaseEstimation : walk::Backend::ExactReflection;
    const auto out = walk::detect(spec, psi, be, o);
    njson rep;
    rep["command"] = "detect";
    rep["parameters"] = {
        {"n", n}, {"r", r}, {"marked_vertex", marked_vertex}, {"backend", backend}};
    rep["seed"] = c.seed;
    rep["verdict"] = out.verdict;
    rep["fidelities"] = {{"detect", out.fidelity}};
    rep["signed_overlap"] = out.signed_overlap;
    rep["query_count"] = out.queries;
    rep["wall_time_ms"] = nullptr;
    const auto t1 = std::chrono::steady_clock::now();
    emit(rep, c, std::chrono::duration<double, std::milli>(t1 - t0).count());
    return 0;
}

int cmd_cost(const std::string& formula, bool fit, const CommonOpts& c) {
    const auto t0 = std::chrono::steady_clock::now();
    costmodel::CostExpr expr;
    std::vector<costmodel::Constraint> cons;
    costmodel::OptimizeResult opt;
    njson rep;
    rep["command"] = "cost";
    rep["parameters"] = {{"formula", formula}, {"fit", fit}};
    rep["seed"] = c.seed;

    if (formula.rfind("program:", 0) == 0) {
        const auto p = costmodel::parse_program_file(formula.substr(8));
        expr = costmodel::evaluate_program(p);
        opt = costmodel::optimize_program(p);
        const auto cmp = costmodel::edge_local_cost_comparison(p);
        rep["edge_local_comparison"] = {
            {"sqrt_convention", cmp.sqrt_convention.optimum.str()},
            {"conditional_convention", cmp.conditional_convention.optimum.str()},
            {"strictly_better", cmp.strictly_better}};
    } else {
        if (formula == "mss") {
            expr = costmodel::mss_cost_expr();
            cons = costmodel::mss_constraints();
        } else if (formula == "t3527") {
            expr = costmodel::t3527_cost_expr();
            cons = costmodel::t3527_constraints();
        } else if (formula == "t97") {
            expr = costmodel::t97_cost_expr();
            cons = costmodel::t97_constraints();
        } else {
            throw ParseError("unknown formula '" + formula + "'");
        }
        opt = costmodel::optimize_exponents(expr, cons);
    }
    if (!opt.feasible) {
        njson err;
        err["error"] = "infeasible";
        err["violated"] = opt.violated;
        std::cout << err.dump() << "\n";
        return 4;
    }
    rep["feasible"] = true;
    rep["optimal_exponent"] = {{"rational", opt.optimum.str()},
                               {"float", opt.optimum.to_double()}};
    njson asn = njson::object();
    for (const auto& [k, v] : opt.assignment) asn[k] = v.str();
    rep["assignment"] = asn;
    njson terms = njson::array();
    for (const auto& t : expr.terms) terms.push_back(term_string(t));
    rep["terms"] = terms;
    if (fit) {
        const auto model = costmodel::numeric_model(expr, cons, opt.assignment);
        const double slope =
            costmodel::fit_exponent(model, {1e3, 3.16e4, 1e6, 3.16e7, 1e9});
        rep["fit_exponent"] = slope;
        rep["fit_difference"] = slope - opt.optimum.to_double();
    }
    rep["wall_time_ms"] = nullptr;
    const auto t1 = std::chrono::steady_clock::now();
    emit(rep, c, std::chrono::duration<double, std::milli>(t1 - t0).count());
    return 0;
}

int cmd_verify(const std::string& suite, const CommonOpts& c) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<verify::CheckResult> checks;
    if (suite == "markov")
        checks = verify::verify_markov();
    else if (suite == "lemma")
        checks = verify::verify_lemma(c.seed);
    else if (suite == "nesting")
        checks = verify::verify_nesting(c.seed);
    else if (suite == "counting")
        checks = verify::verify_counting(c.seed);
    else if (suite == "all")
        checks = verify::verify_all(c.seed);
    else
        throw ParseError("unknown suite '" + suite + "'");

    int failed = 0;
    njson arr = njson::array();
    for (const auto& ck : checks) {
        arr.push_back({{"name", ck.name}, {"pass", ck.pass}, {"detail", ck.detail}});
        if (!ck.pass) ++failed;
    }
    njson rep;
    rep["command"] = "verify";
    rep["parameters"] = {{"suite", suite}};
    rep["seed"] = c.seed;
    rep["checks"] = arr;
    rep["passed"] = static_cast<int>(checks.size()) - failed;
    rep["failed"] = failed;
    rep["wall_time_ms"] = nullptr;
    const auto t1 = std::chrono::steady_clock::now();
    emit(rep, c, std::chrono::duration<double, std::milli>(t1 - t0).count());
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nested quantum walk simulator and cost-model engine"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    CommonOpts common;
    app.add_option("--seed", common.seed, "global 64-bit seed");
    app.add_flag("--pretty", common.pretty, "human-readable output with wall time");
    app.add_option("--cap", common.cap, "state-vector dimension ceiling");

    auto* sp = app.add_subcommand("spectral", "Johnson graph spectral gap");
    int n = 5, r = 2;
    sp->add_option("--n", n, "vertex count")->required();
    sp->add_option("--r", r, "subset size")->required();

    auto* tr = app.add_subcommand("triangle", "triangle finding walks");
    std::string graph_file, algo = "mss", backend = "exact";
    algorithms::TriangleParams params;
    int trials = 50;
    tr->add_option("--graph", graph_file, "graph file")->required();
    tr->add_option("--algo", algo, "mss | nested3527 | nested97");
    tr->add_option("--r", params.r, "outer subset size (mss, nested3527)");
    tr->add_option("--s", params.s, "sparsification fraction (nested3527)");
    tr->add_option("--r1", params.r1, "outer subset size (nested97)");
    tr->add_option("--r2", params.r2, "inner subset size (nested97)");
    tr->add_option("--m", params.m, "collision subset size");
    tr->add_option("--trials", trials, "number of independent runs");
    tr->add_option("--backend", backend, "exact | pe");

    auto* co = app.add_subcommand("collision", "bipartite graph collision walk");
    std::string marked_csv;
    int r1 = 3, r2 = 3, m = 2, gtrials = 50;
    co->add_option("--graph", graph_file, "bipartite template, classes 0..r1-1 / r1..")
        ->required();
    co->add_option("--marked", marked_csv, "comma-separated marked vertices")->required();
    co->add_option("--r1", r1, "first class size");
    co->add_option("--r2", r2, "second class size");
    co->add_option("--m", m, "walk subset size");
    co->add_option("--trials", gtrials, "number of independent runs");

    auto* de = app.add_subcommand("detect", "single detection on J(n,r)");
    int dn = 8, dr = 2, dmv = 0;
    std::string dbackend = "pe";
    de->add_option("--n", dn, "vertex count");
    de->add_option("--r", dr, "subset size");
    de->add_option("--marked-vertex", dmv, "states containing this vertex are marked (-1: none)");
    de->add_option("--backend", dbackend, "exact | pe");

    auto* cs = app.add_subcommand("cost", "cost formulas and subgraph programs");
    std::string formula = "mss";
    bool fit = false;
    cs->add_option("--formula", formula, "mss | t3527 | t97 | program:<file>");
    cs->add_flag("--fit", fit, "numeric exponent cross-check");

    auto* vf = app.add_subcommand("verify", "invariant suites");
    std::string suite = "all";
    vf->add_option("--suite", suite, "markov | lemma | nesting | counting | all");

    CLI11_PARSE(app, argc, argv);

    try {
        apply_cap(common);
        if (sp->parsed()) return cmd_spectral(n, r, common);
        if (tr->parsed()) return cmd_triangle(graph_file, algo, params, trials, backend, common);
        if (co->parsed()) return cmd_collision(graph_file, marked_csv, r1, r2, m, gtrials, common);
        if (de->parsed()) return cmd_detect(dn, dr, dmv, dbackend, common);
        if (cs->parsed()) return cmd_cost(formula, fit, common);
        if (vf->parsed()) return cmd_verify(suite, common);
    } catch (const ParseError& e) {
        std::cout << njson{{"error", e.what()}}.dump() << "\n";
        return 3;
    } catch (const CapacityError& e) {
        std::cout << njson{{"error", e.what()}}.dump() << "\n";
        return 2;
    } catch (const InfeasibleError& e) {
        std::cout << njson{{"error", e.what()}, {"details", e.details}}.dump() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cout << njson{{"error", e.what()}}.dump() << "\n";
        return 5;
    }
    return 0;
}
