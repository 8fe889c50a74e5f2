#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "nestedwalk/graphs.hpp"
#include "nestedwalk/rational.hpp"

namespace nw::costmodel {

// Affine form over named exponent variables: c + sum coef[v] * v, read as
// the base-n exponent of a product of powers (parameters are n^variable).
struct Affine {
    Rational c;
    std::map<std::string, Rational> coef;

    Affine() = default;
    explicit Affine(Rational constant) : c(constant) {}
    Affine(Rational constant, std::map<std::string, Rational> coefficients)
        : c(constant), coef(std::move(coefficients)) {}

    Affine& add(const Affine& o, const Rational& scale = Rational(1));
    Rational eval(const std::map<std::string, Rational>& x) const;
    double eval(const std::map<std::string, double>& x) const;
    std::string str() const;
};

Affine var(const std::string& name, Rational coeff = Rational(1));

// min(a, b) contributions that keep terms exact under the leading-order
// semantics; orientation is resolved during optimization.
struct MinPiece {
    Rational coeff;
    Affine a, b;
    std::string key;  // shared-orientation identity, e.g. "min(rho1,rho2)"
};

// One Õ term: base + sum coeff * min(a_i, b_i).
struct Term {
    Affine base;
    std::vector<MinPiece> mins;

    Rational eval(const std::map<std::string, Rational>& x) const;
    double eval(const std::map<std::string, double>& x) const;
};

// Max-of-terms cost expression (leading-order Õ semantics: sums become max).
struct CostExpr {
    std::vector<Term> terms;

    Rational eval(const std::map<std::string, Rational>& x) const;
    double eval(const std::map<std::string, double>& x) const;
    static CostExpr constant(Rational c);
    static CostExpr single(Affine a);
};

// lhs >= 0.
struct Constraint {
    Term lhs;
    std::string name;
};

Constraint ge0(Affine lhs, std::string name);

// Corollary-1 shape: S + (1/sqrt(eps))((1/sqrt(delta)) U + C).
CostExpr cost_single_level(const CostExpr& s, const CostExpr& u, const CostExpr& c,
                           const Affine& eps, const Affine& delta);

// Two-level shape: S + (1/sqrt(e1))((1/sqrt(d1)) U1 +
//                 (1/sqrt(e2))((1/sqrt(d2)) U2 + C2)).
CostExpr cost_two_level(const CostExpr& s, const CostExpr& u1, const CostExpr& u2,
                        const CostExpr& c2, const Affine& eps1, const Affine& delta1,
                        const Affine& eps2, const Affine& delta2);

struct LevelCost {
    CostExpr update;
    Affine eps, delta;
};

// General k-level shape: S + sum_i (prod_{j<=i} 1/sqrt(eps_j)) U_i/sqrt(d_i)
// + (prod_j 1/sqrt(eps_j)) C.
CostExpr cost_k_level(const std::vector<LevelCost>& levels, const CostExpr& s, const CostExpr& c);

struct OptimizeResult {
    bool feasible = false;
    Rational optimum;
    std::map<std::string, Rational> assignment;
    std::vector<std::string> violated;  // constraint names, when infeasible
};

// Exact min-max over the exponents: minimize z subject to z >= every term
// and the constraints, solved by a rational simplex. min() pieces are
// resolved by enumerating orientations together with their side constraints.
OptimizeResult optimize_exponents(const CostExpr& expr, const std::vector<Constraint>& cons);

// ---------------------------------------------------------------------------
// Subgraph-containment programs (Setup / LoadVertex / LoadEdge)

struct Instruction {
    enum Kind { Setup, LoadVertex, LoadEdge } kind = Setup;
    int i = 0, j = 0;  // 1-indexed pattern vertices
};

struct SubgraphProgram {
    graphs::Graph H;  // pattern on vertices 1..k (stored 0-indexed)
    std::vector<Instruction> instructions;

    void validate() const;  // setup first, edges after endpoints, each item once
};

// Global/local cost table evaluation: sum_t (prod_{t'<t} g_{t'}) l_t in
// exponent form, with variables rho_i (set sizes) and phi_ij (edge densities).
CostExpr evaluate_program(const SubgraphProgram& p);

// Parameter-domain constraints: 0 <= rho_i <= 1, 0 <= phi_ij <=
// max(rho_i, rho_j), and the degree hypothesis (for every i some incident j
// has phi_ij + rho_j - rho_i >= 0, enumerated over witnesses).
OptimizeResult optimize_program(const SubgraphProgram& p);

// Vertices i violating the degree hypothesis at a concrete assignment.
std::vector<int> degree_hypothesis_violations(const graphs::Graph& h,
                                              const std::map<std::string, Rational>& x);

struct EdgeConventionReport {
    OptimizeResult sqrt_convention;         // local edge cost sqrt(r_i r_j), always
    OptimizeResult conditional_convention;  // sqrt(r_i r_j) or max(r_i, r_j)
    bool strictly_better = false;           // sqrt convention beats the conditional one
};

EdgeConventionReport edge_local_cost_comparison(const SubgraphProgram& p);

// Program text format: line 1 "H: k u1-v1 u2-v2 ..." (1-indexed), then one
// instruction per line: "setup" | "loadvertex i" | "loadedge i j".
SubgraphProgram parse_program(std::istream& in);
SubgraphProgram parse_program_file(const std::string& path);
SubgraphProgram canonical_k3_program();
std::vector<SubgraphProgram> all_valid_orderings(const graphs::Graph& h);

// ---------------------------------------------------------------------------
// Numeric cross-check

struct NumericCostModel {
    std::vector<std::string> vars;
    std::function<double(double n, const std::map<std::string, double>&)> cost;
    std::map<std::string, double> seed;
    // Feasibility penalty support: constraints evaluated numerically.
    std::vector<Constraint> constraints;
};

// Least-squares slope of log(cost) versus log(n), where cost is minimized
// per n by coordinate descent seeded at `seed`.
double fit_exponent(const NumericCostModel& model, const std::vector<double>& n_values);

NumericCostModel numeric_model(const CostExpr& expr, const std::vector<Constraint>& cons,
                               const std::map<std::string, Rational>& seed);

// The three triangle cost formulas with their constraint sets.
CostExpr mss_cost_expr();
std::vector<Constraint> mss_constraints();
CostExpr t3527_cost_expr();
std::vector<Constraint> t3527_constraints();
CostExpr t97_cost_expr();
std::vector<Constraint> t97_constraints();

}  // namespace nw::costmodel
