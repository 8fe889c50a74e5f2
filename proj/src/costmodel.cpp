#include "nestedwalk/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nestedwalk/common.hpp"

namespace nw::costmodel {

Affine& Affine::add(const Affine& o, const Rational& scale) {
    c += o.c * scale;
    for (const auto& [k, v] : o.coef) {
        auto it = coef.find(k);
        if (it == coef.end())
            coef.emplace(k, v * scale);
        else {
            it->second += v * scale;
            if (it->second == Rational(0)) coef.erase(it);
        }
    }
    return *this;
}

Rational Affine::eval(const std::map<std::string, Rational>& x) const {
    Rational r = c;
    for (const auto& [k, v] : coef) {
        auto it = x.find(k);
        if (it == x.end()) throw std::invalid_argument("unassigned variable " + k);
        r += v * it->second;
    }
    return r;
}

double Affine::eval(const std::map<std::string, double>& x) const {
    double r = c.to_double();
    for (const auto& [k, v] : coef) {
        auto it = x.find(k);
        if (it == x.end()) throw std::invalid_argument("unassigned variable " + k);
        r += v.to_double() * it->second;
    }
    return r;
}

std::string Affine::str() const {
    std::string s = c.str();
    for (const auto& [k, v] : coef) s += " + " + v.str() + "*" + k;
    return s;
}

Affine var(const std::string& name, Rational coeff) {
    Affine a;
    a.coef.emplace(name, coeff);
    return a;
}

Rational Term::eval(const std::map<std::string, Rational>& x) const {
    Rational r = base.eval(x);
    for (const auto& m : mins) r += m.coeff * std::min(m.a.eval(x), m.b.eval(x));
    return r;
}

double Term::eval(const std::map<std::string, double>& x) const {
    double r = base.eval(x);
    for (const auto& m : mins) r += m.coeff.to_double() * std::min(m.a.eval(x), m.b.eval(x));
    return r;
}

Rational CostExpr::eval(const std::map<std::string, Rational>& x) const {
    if (terms.empty()) throw std::invalid_argument("empty cost expression");
    Rational best = terms.front().eval(x);
    for (std::size_t i = 1; i < terms.size(); ++i) best = std::max(best, terms[i].eval(x));
    return best;
}

double CostExpr::eval(const std::map<std::string, double>& x) const {
    double best = -1e300;
    for (const auto& t : terms) best = std::max(best, t.eval(x));
    return best;
}

CostExpr CostExpr::constant(Rational c) {
    CostExpr e;
    e.terms.push_back(Term{Affine(c), {}});
    return e;
}

CostExpr CostExpr::single(Affine a) {
    CostExpr e;
    e.terms.push_back(Term{std::move(a), {}});
    return e;
}

Constraint ge0(Affine lhs, std::string name) {
    return Constraint{Term{std::move(lhs), {}}, std::move(name)};
}

namespace {

// terms of `e`, each shifted by `shift`.
void append_shifted(CostExpr& out, const CostExpr& e, const Affine& shift) {
    for (const auto& t : e.terms) {
        Term n = t;
        n.base.add(shift);
        out.terms.push_back(std::move(n));
    }
}

Affine half_inv(const Affine& a) {  // -(1/2) a, the exponent of 1/sqrt(n^a)
    Affine r;
    r.add(a, Rational(-1, 2));
    return r;
}

}  // namespace

CostExpr cost_single_level(const CostExpr& s, const CostExpr& u, const CostExpr& c,
                           const Affine& eps, const Affine& delta) {
    CostExpr out;
    append_shifted(out, s, Affine(Rational(0)));
    Affine ue = half_inv(eps);
    ue.add(half_inv(delta));
    append_shifted(out, u, ue);
    append_shifted(out, c, half_inv(eps));
    return out;
}

CostExpr cost_two_level(const CostExpr& s, const CostExpr& u1, const CostExpr& u2,
                        const CostExpr& c2, const Affine& eps1, const Affine& delta1,
                        const Affine& eps2, const Affine& delta2) {
    std::vector<LevelCost> levels{{u1, eps1, delta1}, {u2, eps2, delta2}};
    return cost_k_level(levels, s, c2);
}

CostExpr cost_k_level(const std::vector<LevelCost>& levels, const CostExpr& s, const CostExpr& c) {
    if (levels.empty()) throw std::invalid_argument("at least one level required");
    CostExpr out;
    append_shifted(out, s, Affine(Rational(0)));
    Affine eps_prefix;
    for (const auto& lv : levels) {
        eps_prefix.add(half_inv(lv.eps));
        Affine shift = eps_prefix;
        shift.add(half_inv(lv.delta));
        append_shifted(out, lv.update, shift);
    }
    append_shifted(out, c, eps_prefix);
    return out;
}

// ---------------------------------------------------------------------------
// Exact rational simplex: min c.y subject to A y <= b, y >= 0.

namespace {

struct SimplexOutcome {
    enum Status { Optimal, Infeasible, Unbounded } status = Infeasible;
    Rational objective;
    std::vector<Rational> y;
};

class Simplex {
public:
    Simplex(std::vector<std::vector<Rational>> a, std::vector<Rational> b, std::vector<Rational> c)
        : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {}

    SimplexOutcome solve() {
        const std::size_t m = a_.size(), n = c_.size();
        // Normalize rows so every b_i >= 0.
        std::vector<int> flipped(m, 0);
        for (std::size_t i = 0; i < m; ++i)
            if (b_[i] < Rational(0)) {
                flipped[i] = 1;
                b_[i] = -b_[i];
                for (auto& v : a_[i]) v = -v;
            }
        // Columns: structural (n) + slack (m, coefficient +1 or -1 for
        // flipped rows) + artificial for flipped rows.
        n_ = n;
        cols_ = n + m;
        art_begin_ = cols_;
        for (std::size_t i = 0; i < m; ++i)
            if (flipped[i]) ++cols_;
        tab_.assign(m, std::vector<Rational>(cols_ + 1, Rational(0)));
        basis_.assign(m, 0);
        std::size_t art = art_begin_;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) tab_[i][j] = a_[i][j];
            tab_[i][n + i] = flipped[i] ? Rational(-1) : Rational(1);
            tab_[i][cols_] = b_[i];
            if (flipped[i]) {
                tab_[i][art] = Rational(1);
                basis_[i] = art++;
            } else {
                basis_[i] = n + i;
            }
        }
        if (art_begin_ < cols_) {
            // Phase 1: minimize the artificial sum.
            std::vector<Rational> phase1(cols_, Rational(0));
            for (std::size_t j = art_begin_; j < cols_; ++j) phase1[j] = Rational(1);
            if (!run(phase1)) return {SimplexOutcome::Unbounded, Rational(0), {}};
            Rational val(0);
            for (std::size_t i = 0; i < m; ++i)
                if (basis_[i] >= art_begin_) val += tab_[i][cols_];
            if (val != Rational(0)) return {SimplexOutcome::Infeasible, Rational(0), {}};
            // Pivot any artificials remaining in the basis at level zero.
            for (std::size_t i = 0; i < m; ++i) {
                if (basis_[i] < art_begin_) continue;
                for (std::size_t j = 0; j < art_begin_; ++j)
                    if (tab_[i][j] != Rational(0)) {
                        pivot(i, j);
                        break;
                    }
            }
        }
        std::vector<Rational> phase2(cols_, Rational(0));
        for (std::size_t j = 0; j < n; ++j) phase2[j] = c_[j];
        banned_artificials_ = true;
        if (!run(phase2)) return {SimplexOutcome::Unbounded, Rational(0), {}};
        SimplexOutcome out;
        out.status = SimplexOutcome::Optimal;
        out.y.assign(n, Rational(0));
        for (std::size_t i = 0; i < m; ++i)
            if (basis_[i] < n) out.y[basis_[i]] = tab_[i][cols_];
        out.objective = Rational(0);
        for (std::size_t j = 0; j < n; ++j) out.objective += c_[j] * out.y[j];
        return out;
    }

private:
    bool run(const std::vector<Rational>& cost) {
        const std::size_t m = tab_.size();
        for (;;) {
            // Reduced costs: c_j - c_B B^{-1} A_j, computed directly.
            std::size_t enter = cols_;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (banned_artificials_ && j >= art_begin_) continue;
                bool basic = false;
                for (std::size_t i = 0; i < m; ++i)
                    if (basis_[i] == j) basic = true;
                if (basic) continue;
                Rational red = cost[j];
                for (std::size_t i = 0; i < m; ++i)
                    red -= cost[basis_[i]] * tab_[i][j];
                if (red < Rational(0)) {
                    enter = j;  // Bland: first improving column
                    break;
                }
            }
            if (enter == cols_) return true;
            std::size_t leave = m;
            Rational best(0);
            for (std::size_t i = 0; i < m; ++i) {
                if (tab_[i][enter] <= Rational(0)) continue;
                Rational ratio = tab_[i][cols_] / tab_[i][enter];
                if (leave == m || ratio < best ||
                    (ratio == best && basis_[i] < basis_[leave]))
                    leave = i, best = ratio;
            }
            if (leave == m) return false;  // unbounded
            pivot(leave, enter);
        }
    }

    void pivot(std::size_t row, std::size_t col) {
        const std::size_t m = tab_.size();
        const Rational p = tab_[row][col];
        for (auto& v : tab_[row]) v /= p;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row) continue;
            const Rational f = tab_[i][col];
            if (f == Rational(0)) continue;
            for (std::size_t j = 0; j <= cols_; ++j) tab_[i][j] -= f * tab_[row][j];
        }
        basis_[row] = col;
    }

    std::vector<std::vector<Rational>> a_;
    std::vector<Rational> b_;
    std::vector<Rational> c_;
    std::vector<std::vector<Rational>> tab_;
    std::vector<std::size_t> basis_;
    std::size_t n_ = 0, cols_ = 0, art_begin_ = 0;
    bool banned_artificials_ = false;
};

// Resolved linear program: min z s.t. z >= terms, affine constraints >= 0.
struct ResolvedProgram {
    std::vector<Affine> terms;
    std::vector<std::pair<Affine, std::string>> cons;  // lhs >= 0
};

std::vector<std::string> collect_vars(const ResolvedProgram& rp) {
    std::set<std::string> names;
    for (const auto& t : rp.terms)
        for (const auto& [k, v] : t.coef) names.insert(k);
    for (const auto& [a, nm] : rp.cons)
        for (const auto& [k, v] : a.coef) names.insert(k);
    return {names.begin(), names.end()};
}

OptimizeResult solve_resolved(const ResolvedProgram& rp) {
    const auto vars = collect_vars(rp);
    const std::size_t nv = vars.size();
    auto vindex = [&](const std::string& s) {
        return static_cast<std::size_t>(
            std::lower_bound(vars.begin(), vars.end(), s) - vars.begin());
    };
    // Columns: x_i = p_i - q_i (free variables), then z = zp - zq.
    const std::size_t ncols = 2 * nv + 2;
    std::vector<std::vector<Rational>> a;
    std::vector<Rational> b;
    // term - z <= 0  ->  sum coef*x - z <= -const
    for (const auto& t : rp.terms) {
        std::vector<Rational> row(ncols, Rational(0));
        for (const auto& [k, v] : t.coef) {
            row[2 * vindex(k)] = v;
            row[2 * vindex(k) + 1] = -v;
        }
        row[2 * nv] = Rational(-1);
        row[2 * nv + 1] = Rational(1);
        a.push_back(std::move(row));
        b.push_back(-t.c);
    }
    // lhs >= 0  ->  -lhs <= 0  ->  -sum coef x <= const
    for (const auto& [lhs, name] : rp.cons) {
        std::vector<Rational> row(ncols, Rational(0));
        for (const auto& [k, v] : lhs.coef) {
            row[2 * vindex(k)] = -v;
            row[2 * vindex(k) + 1] = v;
        }
        a.push_back(std::move(row));
        b.push_back(lhs.c);
    }
    std::vector<Rational> c(ncols, Rational(0));
    c[2 * nv] = Rational(1);
    c[2 * nv + 1] = Rational(-1);

    Simplex sx(std::move(a), std::move(b), std::move(c));
    const auto sol = sx.solve();
    OptimizeResult out;
    if (sol.status != SimplexOutcome::Optimal) {
        out.feasible = false;
        return out;
    }
    out.feasible = true;
    out.optimum = sol.objective;
    for (std::size_t i = 0; i < nv; ++i)
        out.assignment[vars[i]] = sol.y[2 * i] - sol.y[2 * i + 1];
    return out;
}

// Orientation keys appearing in expr/constraints, in deterministic order.
std::vector<std::string> min_keys(const CostExpr& expr, const std::vector<Constraint>& cons) {
    std::set<std::string> keys;
    for (const auto& t : expr.terms)
        for (const auto& m : t.mins) keys.insert(m.key);
    for (const auto& cn : cons)
        for (const auto& m : cn.lhs.mins) keys.insert(m.key);
    return {keys.begin(), keys.end()};
}

Affine resolve_term(const Term& t, const std::map<std::string, bool>& pick_a,
                    std::vector<std::pair<Affine, std::string>>* side_cons) {
    Affine r = t.base;
    for (const auto& m : t.mins) {
        const bool a_side = pick_a.at(m.key);
        const Affine& chosen = a_side ? m.a : m.b;
        const Affine& other = a_side ? m.b : m.a;
        r.add(chosen, m.coeff);
        if (side_cons) {
            // chosen <= other
            Affine diff = other;
            diff.add(chosen, Rational(-1));
            side_cons->push_back({diff, "orientation(" + m.key + ")"});
        }
    }
    return r;
}

}  // namespace

OptimizeResult optimize_exponents(const CostExpr& expr, const std::vector<Constraint>& cons) {
    if (expr.terms.empty()) throw std::invalid_argument("empty cost expression");
    const auto keys = min_keys(expr, cons);
    if (keys.size() > 20) throw CapacityError("too many min() orientations to enumerate");

    OptimizeResult best;
    std::vector<std::string> last_violated;
    const std::size_t combos = std::size_t{1} << keys.size();
    for (std::size_t mask = 0; mask < combos; ++mask) {
        std::map<std::string, bool> pick;
        for (std::size_t i = 0; i < keys.size(); ++i) pick[keys[i]] = (mask >> i) & 1;
        ResolvedProgram rp;
        std::vector<std::pair<Affine, std::string>> side;
        for (const auto& t : expr.terms) rp.terms.push_back(resolve_term(t, pick, &side));
        for (const auto& cn : cons)
            rp.cons.push_back({resolve_term(cn.lhs, pick, &side), cn.name});
        for (auto& s : side) rp.cons.push_back(std::move(s));
        const OptimizeResult r = solve_resolved(rp);
        if (!r.feasible) continue;
        if (!best.feasible || r.optimum < best.optimum) best = r;
    }
    if (!best.feasible) {
        // Conflict diagnostic: a constraint joins the violated set when its
        // removal makes the system feasible (under some orientation).
        for (std::size_t drop = 0; drop < cons.size(); ++drop) {
            std::vector<Constraint> reduced;
            for (std::size_t i = 0; i < cons.size(); ++i)
                if (i != drop) reduced.push_back(cons[i]);
            bool feasible_without = false;
            for (std::size_t mask = 0; mask < combos && !feasible_without; ++mask) {
                std::map<std::string, bool> pick;
                for (std::size_t i = 0; i < keys.size(); ++i) pick[keys[i]] = (mask >> i) & 1;
                ResolvedProgram rp;
                std::vector<std::pair<Affine, std::string>> side;
                for (const auto& t : expr.terms) rp.terms.push_back(resolve_term(t, pick, &side));
                for (const auto& cn : reduced)
                    rp.cons.push_back({resolve_term(cn.lhs, pick, &side), cn.name});
                for (auto& s : side) rp.cons.push_back(std::move(s));
                feasible_without = solve_resolved(rp).feasible;
            }
            if (feasible_without) best.violated.push_back(cons[drop].name);
        }
        if (best.violated.empty())
            for (const auto& cn : cons) best.violated.push_back(cn.name);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Subgraph programs

namespace {

std::string rho(int i) { return "rho" + std::to_string(i); }
std::string phi(int i, int j) {
    if (i > j) std::swap(i, j);
    return "phi" + std::to_string(i) + "_" + std::to_string(j);
}

MinPiece min_rho(int i, int j, Rational coeff) {
    if (i > j) std::swap(i, j);
    return MinPiece{coeff, var(rho(i)), var(rho(j)), "min(" + rho(i) + "," + rho(j) + ")"};
}

}  // namespace

void SubgraphProgram::validate() const {
    const int k = H.n();
    const auto edges = H.edges();
    if (instructions.empty() || instructions.front().kind != Instruction::Setup)
        throw std::invalid_argument("program must start with setup");
    if (static_cast<int>(instructions.size()) != k + static_cast<int>(edges.size()) + 1)
        throw std::invalid_argument("program must have k + |E(H)| + 1 instructions");
    std::set<int> seen_v;
    std::set<std::pair<int, int>> seen_e;
    for (std::size_t t = 1; t < instructions.size(); ++t) {
        const auto& ins = instructions[t];
        if (ins.kind == Instruction::Setup) throw std::invalid_argument("duplicate setup");
        if (ins.kind == Instruction::LoadVertex) {
            if (ins.i < 1 || ins.i > k) throw std::invalid_argument("loadvertex out of range");
            if (!seen_v.insert(ins.i).second)
                throw std::invalid_argument("vertex loaded twice");
        } else {
            int a = std::min(ins.i, ins.j), b = std::max(ins.i, ins.j);
            if (a < 1 || b > k || a == b) throw std::invalid_argument("loadedge out of range");
            if (!H.edge(a - 1, b - 1))
                throw std::invalid_argument("loadedge names a non-edge of H");
            if (!seen_v.count(a) || !seen_v.count(b))
                throw std::invalid_argument("loadedge precedes its endpoints");
            if (!seen_e.insert({a, b}).second) throw std::invalid_argument("edge loaded twice");
        }
    }
    if (static_cast<int>(seen_v.size()) != k) throw std::invalid_argument("missing vertices");
    if (seen_e.size() != edges.size()) throw std::invalid_argument("missing edges");
}

CostExpr evaluate_program(const SubgraphProgram& p) {
    p.validate();
    const auto edges = p.H.edges();  // 0-indexed
    CostExpr out;
    // Running prefix of global costs: affine part plus min pieces.
    Term prefix;
    for (const auto& ins : p.instructions) {
        // Local terms of this instruction, each one Õ term.
        std::vector<Term> locals;
        if (ins.kind == Instruction::Setup) {
            for (auto [a, b] : edges) {
                Term t;
                t.base.add(var(phi(a + 1, b + 1)));
                t.mins.push_back(min_rho(a + 1, b + 1, Rational(1)));
                locals.push_back(std::move(t));
            }
        } else if (ins.kind == Instruction::LoadVertex) {
            for (auto [a, b] : edges) {
                const int other = (a + 1 == ins.i) ? b + 1 : (b + 1 == ins.i) ? a + 1 : 0;
                if (other == 0) continue;
                // sqrt(n) * d_ij * min(1, r_j/r_i)
                //   = 1/2 + phi_ij + min(rho_i, rho_j) - rho_i.
                Term t;
                t.base = Affine(Rational(1, 2));
                t.base.add(var(phi(ins.i, other)));
                t.base.add(var(rho(ins.i), Rational(-1)));
                t.mins.push_back(min_rho(ins.i, other, Rational(1)));
                locals.push_back(std::move(t));
            }
        } else {
            Term t;
            t.base.add(var(rho(ins.i), Rational(1, 2)));
            t.base.add(var(rho(ins.j), Rational(1, 2)));
            locals.push_back(std::move(t));
        }
        for (auto& l : locals) {
            Term total = prefix;
            total.base.add(l.base);
            for (auto& m : l.mins) total.mins.push_back(m);
            out.terms.push_back(std::move(total));
        }
        // Append this instruction's global cost to the prefix.
        if (ins.kind == Instruction::LoadVertex) {
            prefix.base.add(Affine(Rational(1, 2)));
            prefix.base.add(var(rho(ins.i), Rational(-1, 2)));
        } else if (ins.kind == Instruction::LoadEdge) {
            // sqrt(max(r_i, r_j) / d_ij) = (rho_i + rho_j - min - phi)/2.
            prefix.base.add(var(rho(ins.i), Rational(1, 2)));
            prefix.base.add(var(rho(ins.j), Rational(1, 2)));
            prefix.base.add(var(phi(ins.i, ins.j), Rational(-1, 2)));
            prefix.mins.push_back(min_rho(ins.i, ins.j, Rational(-1, 2)));
        }
    }
    return out;
}

namespace {

std::vector<Constraint> program_domain_constraints(const graphs::Graph& h) {
    std::vector<Constraint> cons;
    for (int i = 1; i <= h.n(); ++i) {
        cons.push_back(ge0(var(rho(i)), rho(i) + ">=0"));
        Affine up(Rational(1));
        up.add(var(rho(i)), Rational(-1));
        cons.push_back(ge0(up, rho(i) + "<=1"));
    }
    for (auto [a, b] : h.edges()) {
        const int i = a + 1, j = b + 1;
        cons.push_back(ge0(var(phi(i, j)), phi(i, j) + ">=0"));
        // phi <= max(rho_i, rho_j) = rho_i + rho_j - min.
        Term up;
        up.base.add(var(rho(i)));
        up.base.add(var(rho(j)));
        up.base.add(var(phi(i, j)), Rational(-1));
        up.mins.push_back(min_rho(i, j, Rational(-1)));
        cons.push_back(Constraint{std::move(up), phi(i, j) + "<=max"});
    }
    return cons;
}

// Enumerates degree-hypothesis witness choices: one incident edge per
// vertex with phi_ij + rho_j - rho_i >= 0.
void witness_combos(const graphs::Graph& h, std::size_t vertex,
                    std::vector<Constraint>& acc,
                    const std::function<void(const std::vector<Constraint>&)>& emit) {
    if (vertex == static_cast<std::size_t>(h.n())) {
        emit(acc);
        return;
    }
    const int i = static_cast<int>(vertex) + 1;
    for (int j = 1; j <= h.n(); ++j) {
        if (j == i || !h.edge(i - 1, j - 1)) continue;
        Affine lhs = var(phi(i, j));
        lhs.add(var(rho(j)));
        lhs.add(var(rho(i)), Rational(-1));
        acc.push_back(ge0(lhs, "hyp(" + std::to_string(i) + "->" + std::to_string(j) + ")"));
        witness_combos(h, vertex + 1, acc, emit);
        acc.pop_back();
    }
}

}  // namespace

OptimizeResult optimize_program(const SubgraphProgram& p) {
    const CostExpr expr = evaluate_program(p);
    const auto base_cons = program_domain_constraints(p.H);
    OptimizeResult best;
    std::vector<Constraint> acc;
    witness_combos(p.H, 0, acc, [&](const std::vector<Constraint>& witness) {
        std::vector<Constraint> cons = base_cons;
        cons.insert(cons.end(), witness.begin(), witness.end());
        const OptimizeResult r = optimize_exponents(expr, cons);
        if (r.feasible && (!best.feasible || r.optimum < best.optimum)) best = r;
    });
    if (!best.feasible) {
        throw InfeasibleError("no witness assignment satisfies the degree hypothesis");
    }
    return best;
}

std::vector<int> degree_hypothesis_violations(const graphs::Graph& h,
                                              const std::map<std::string, Rational>& x) {
    std::vector<int> bad;
    for (int i = 1; i <= h.n(); ++i) {
        bool ok = false;
        for (int j = 1; j <= h.n() && !ok; ++j) {
            if (j == i || !h.edge(i - 1, j - 1)) continue;
            Affine lhs = var(phi(i, j));
            lhs.add(var(rho(j)));
            lhs.add(var(rho(i)), Rational(-1));
            if (lhs.eval(x) >= Rational(0)) ok = true;
        }
        if (!ok) bad.push_back(i);
    }
    return bad;
}

EdgeConventionReport edge_local_cost_comparison(const SubgraphProgram& p) {
    EdgeConventionReport rep;
    rep.sqrt_convention = optimize_program(p);

    // Conditional convention: the local cost of LoadEdge(i,j) is
    // max(r_i, r_j) when d_ij min(r_i,r_j) >= max(r_i,r_j); enumerate the
    // sparsity side per edge.
    const auto edges = p.H.edges();
    const auto base_cons = program_domain_constraints(p.H);
    OptimizeResult best;
    const std::size_t combos = std::size_t{1} << edges.size();
    for (std::size_t mask = 0; mask < combos; ++mask) {
        // Rebuild the program cost with per-edge local-cost choice.
        CostExpr expr = evaluate_program(p);
        std::vector<Constraint> cons = base_cons;
        bool usable = true;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const int i = edges[e].first + 1, j = edges[e].second + 1;
            // d*min - max as a term: phi + 2*min - rho_i - rho_j.
            Term gap;
            gap.base.add(var(phi(i, j)));
            gap.base.add(var(rho(i)), Rational(-1));
            gap.base.add(var(rho(j)), Rational(-1));
            gap.mins.push_back(min_rho(i, j, Rational(2)));
            if ((mask >> e) & 1) {
                // Dense side: local cost max(r_i, r_j); requires gap >= 0.
                cons.push_back(Constraint{gap, "dense-edge"});
                // Replace the sqrt(r_i r_j) local term exponent with max:
                // rho_i + rho_j - min. Locate the LoadEdge term: it is the
                // unique term whose base adds rho_i/2 + rho_j/2 after the
                // matching prefix; simpler to recompute the whole program
                // with a flag, so adjust below.
            } else {
                Term sparse;
                sparse.base.add(gap.base, Rational(-1));
                sparse.mins.push_back(min_rho(i, j, Rational(-2)));
                cons.push_back(Constraint{sparse, "sparse-edge"});
            }
        }
        if (!usable) continue;
        // Recompute terms with the max-form local cost on selected edges.
        CostExpr adjusted;
        Term prefix;
        std::map<std::pair<int, int>, std::size_t> edge_index;
        for (std::size_t e = 0; e < edges.size(); ++e)
            edge_index[{edges[e].first + 1, edges[e].second + 1}] = e;
        for (const auto& ins : p.instructions) {
            std::vector<Term> locals;
            if (ins.kind == Instruction::Setup) {
                for (auto [a, b] : edges) {
                    Term t;
                    t.base.add(var(phi(a + 1, b + 1)));
                    t.mins.push_back(min_rho(a + 1, b + 1, Rational(1)));
                    locals.push_back(std::move(t));
                }
            } else if (ins.kind == Instruction::LoadVertex) {
                for (auto [a, b] : edges) {
                    const int other = (a + 1 == ins.i) ? b + 1 : (b + 1 == ins.i) ? a + 1 : 0;
                    if (other == 0) continue;
                    Term t;
                    t.base = Affine(Rational(1, 2));
                    t.base.add(var(phi(ins.i, other)));
                    t.base.add(var(rho(ins.i), Rational(-1)));
                    t.mins.push_back(min_rho(ins.i, other, Rational(1)));
                    locals.push_back(std::move(t));
                }
            } else {
                const int a = std::min(ins.i, ins.j), b = std::max(ins.i, ins.j);
                const std::size_t e = edge_index.at({a, b});
                Term t;
                if ((mask >> e) & 1) {
                    // max(r_i, r_j) = rho_i + rho_j - min.
                    t.base.add(var(rho(a)));
                    t.base.add(var(rho(b)));
                    t.mins.push_back(min_rho(a, b, Rational(-1)));
                } else {
                    t.base.add(var(rho(a)), Rational(1, 2));
                    t.base.add(var(rho(b)), Rational(1, 2));
                }
                locals.push_back(std::move(t));
            }
            for (auto& l : locals) {
                Term total = prefix;
                total.base.add(l.base);
                for (auto& mn : l.mins) total.mins.push_back(mn);
                adjusted.terms.push_back(std::move(total));
            }
            if (ins.kind == Instruction::LoadVertex) {
                prefix.base.add(Affine(Rational(1, 2)));
                prefix.base.add(var(rho(ins.i), Rational(-1, 2)));
            } else if (ins.kind == Instruction::LoadEdge) {
                prefix.base.add(var(rho(ins.i), Rational(1, 2)));
                prefix.base.add(var(rho(ins.j), Rational(1, 2)));
                prefix.base.add(var(phi(ins.i, ins.j), Rational(-1, 2)));
                prefix.mins.push_back(min_rho(ins.i, ins.j, Rational(-1, 2)));
            }
        }
        // Solve with witnesses as in optimize_program.
        std::vector<Constraint> acc;
        witness_combos(p.H, 0, acc, [&](const std::vector<Constraint>& witness) {
            std::vector<Constraint> all = cons;
            all.insert(all.end(), witness.begin(), witness.end());
            const OptimizeResult r = optimize_exponents(adjusted, all);
            if (r.feasible && (!best.feasible || r.optimum < best.optimum)) best = r;
        });
    }
    rep.conditional_convention = best;
    rep.strictly_better =
        best.feasible && rep.sqrt_convention.feasible &&
        rep.sqrt_convention.optimum < best.optimum;
    return rep;
}

SubgraphProgram parse_program(std::istream& in) {
    std::string line;
    SubgraphProgram p;
    bool have_header = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (!have_header) {
            if (tok != "H:")
                throw ParseError("program line " + std::to_string(lineno) +
                                 ": expected 'H: k edges...'");
            int k;
            if (!(ls >> k) || k < 1 || k > 5)
                throw ParseError("pattern size must lie in 1..5");
            p.H = graphs::Graph(k);
            std::string e;
            while (ls >> e) {
                const auto dash = e.find('-');
                if (dash == std::string::npos)
                    throw ParseError("bad edge token '" + e + "'");
                const int u = std::stoi(e.substr(0, dash));
                const int v = std::stoi(e.substr(dash + 1));
                if (u < 1 || v < 1 || u > k || v > k || u == v)
                    throw ParseError("bad edge endpoints in '" + e + "'");
                p.H.set_edge(u - 1, v - 1);
            }
            have_header = true;
            continue;
        }
        Instruction ins;
        if (tok == "setup") {
            ins.kind = Instruction::Setup;
        } else if (tok == "loadvertex") {
            ins.kind = Instruction::LoadVertex;
            if (!(ls >> ins.i)) throw ParseError("loadvertex needs a vertex");
        } else if (tok == "loadedge") {
            ins.kind = Instruction::LoadEdge;
            if (!(ls >> ins.i >> ins.j)) throw ParseError("loadedge needs two vertices");
        } else {
            throw ParseError("unknown instruction '" + tok + "'");
        }
        p.instructions.push_back(ins);
    }
    if (!have_header) throw ParseError("program file missing 'H:' header");
    p.validate();
    return p;
}

SubgraphProgram parse_program_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open program file: " + path);
    return parse_program(f);
}

SubgraphProgram canonical_k3_program() {
    SubgraphProgram p;
    p.H = graphs::Graph::complete(3);
    p.instructions = {{Instruction::Setup, 0, 0},    {Instruction::LoadVertex, 1, 0},
                      {Instruction::LoadVertex, 2, 0}, {Instruction::LoadEdge, 1, 2},
                      {Instruction::LoadVertex, 3, 0}, {Instruction::LoadEdge, 1, 3},
                      {Instruction::LoadEdge, 2, 3}};
    return p;
}

std::vector<SubgraphProgram> all_valid_orderings(const graphs::Graph& h) {
    std::vector<Instruction> items;
    for (int i = 1; i <= h.n(); ++i) items.push_back({Instruction::LoadVertex, i, 0});
    for (auto [a, b] : h.edges()) items.push_back({Instruction::LoadEdge, a + 1, b + 1});
    std::sort(items.begin(), items.end(), [](const Instruction& x, const Instruction& y) {
        if (x.kind != y.kind) return x.kind < y.kind;
        if (x.i != y.i) return x.i < y.i;
        return x.j < y.j;
    });
    std::vector<SubgraphProgram> out;
    do {
        SubgraphProgram p;
        p.H = h;
        p.instructions.push_back({Instruction::Setup, 0, 0});
        p.instructions.insert(p.instructions.end(), items.begin(), items.end());
        try {
            p.validate();
        } catch (const std::invalid_argument&) {
            continue;
        }
        out.push_back(std::move(p));
    } while (std::next_permutation(
        items.begin(), items.end(), [](const Instruction& x, const Instruction& y) {
            if (x.kind != y.kind) return x.kind < y.kind;
            if (x.i != y.i) return x.i < y.i;
            return x.j < y.j;
        }));
    return out;
}

// ---------------------------------------------------------------------------
// Numeric cross-check

double fit_exponent(const NumericCostModel& model, const std::vector<double>& n_values) {
    if (n_values.size() < 3) throw std::invalid_argument("need at least 3 sample sizes");
    std::vector<double> lx, ly;
    for (double n : n_values) {
        std::map<std::string, double> x;
        for (const auto& v : model.vars) {
            auto it = model.seed.find(v);
            x[v] = it == model.seed.end() ? 0.0 : it->second;
        }
        auto feasible = [&](const std::map<std::string, double>& p) {
            for (const auto& cn : model.constraints)
                if (cn.lhs.eval(p) < -1e-12) return false;
            return true;
        };
        auto objective = [&](std::map<std::string, double>& p) {
            if (!feasible(p)) return 1e280;
            return model.cost(n, p);
        };
        // Coordinate descent with golden-section line searches.
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int sweep = 0; sweep < 80; ++sweep) {
            for (const auto& v : model.vars) {
                double lo = 0.0, hi = 1.0;  // exponents live in [0,1]
                double a = lo, b = hi;
                double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
                for (int it = 0; it < 60; ++it) {
                    x[v] = c1;
                    const double f1 = objective(x);
                    x[v] = c2;
                    const double f2 = objective(x);
                    if (f1 < f2)
                        b = c2;
                    else
                        a = c1;
                    c1 = b - gr * (b - a);
                    c2 = a + gr * (b - a);
                }
                x[v] = (a + b) / 2.0;
                if (!feasible(x)) x[v] = model.seed.at(v);
            }
        }
        const double cost = model.cost(n, x);
        lx.push_back(std::log(n));
        ly.push_back(std::log(cost));
    }
    // Least squares slope.
    const std::size_t k = lx.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

NumericCostModel numeric_model(const CostExpr& expr, const std::vector<Constraint>& cons,
                               const std::map<std::string, Rational>& seed) {
    NumericCostModel m;
    std::set<std::string> names;
    for (const auto& t : expr.terms) {
        for (const auto& [k, v] : t.base.coef) names.insert(k);
        for (const auto& mn : t.mins) {
            for (const auto& [k, v] : mn.a.coef) names.insert(k);
            for (const auto& [k, v] : mn.b.coef) names.insert(k);
        }
    }
    m.vars.assign(names.begin(), names.end());
    for (const auto& [k, v] : seed) m.seed[k] = v.to_double();
    m.constraints = cons;
    m.cost = [expr](double n, const std::map<std::string, double>& x) {
        // max over terms of n^term(x)
        double best = -1e300;
        for (const auto& t : expr.terms) best = std::max(best, t.eval(x));
        return std::pow(n, best);
    };
    return m;
}

// ---------------------------------------------------------------------------
// The triangle formulas

CostExpr mss_cost_expr() {
    // r^2 + n sqrt(r) + n^{3/2} / r^{1/3},   r = n^rho
    CostExpr e;
    e.terms.push_back(Term{var("rho", Rational(2)), {}});
    Affine t2(Rational(1));
    t2.add(var("rho", Rational(1, 2)));
    e.terms.push_back(Term{t2, {}});
    Affine t3(Rational(3, 2));
    t3.add(var("rho", Rational(-1, 3)));
    e.terms.push_back(Term{t3, {}});
    return e;
}

std::vector<Constraint> mss_constraints() {
    Affine up(Rational(1));
    up.add(var("rho", Rational(-1)));
    return {ge0(var("rho"), "rho>=0"), ge0(up, "rho<=1")};
}

CostExpr t3527_cost_expr() {
    // s r^2 + n s sqrt(r) + n + n^{3/2} / (sqrt(s) r^{1/3})
    CostExpr e;
    Affine t1 = var("sigma");
    t1.add(var("rho", Rational(2)));
    e.terms.push_back(Term{t1, {}});
    Affine t2(Rational(1));
    t2.add(var("sigma"));
    t2.add(var("rho", Rational(1, 2)));
    e.terms.push_back(Term{t2, {}});
    e.terms.push_back(Term{Affine(Rational(1)), {}});
    Affine t4(Rational(3, 2));
    t4.add(var("sigma", Rational(-1, 2)));
    t4.add(var("rho", Rational(-1, 3)));
    e.terms.push_back(Term{t4, {}});
    return e;
}

std::vector<Constraint> t3527_constraints() {
    Affine up(Rational(1));
    up.add(var("rho", Rational(-1)));
    Affine nonpos;  // sigma <= 0
    nonpos.add(var("sigma", Rational(-1)));
    Affine sum = var("sigma");  // s > 1/r: sigma + rho >= 0
    sum.add(var("rho"));
    return {ge0(var("rho"), "rho>=0"), ge0(up, "rho<=1"), ge0(nonpos, "sigma<=0"),
            ge0(sum, "sigma+rho>=0")};
}

CostExpr t97_cost_expr() {
    // r1 r2 + sqrt(n) r2 + n sqrt(r1) + n^{3/2} / (r1 r2)^{1/6}
    CostExpr e;
    Affine t1 = var("rho1");
    t1.add(var("rho2"));
    e.terms.push_back(Term{t1, {}});
    Affine t2(Rational(1, 2));
    t2.add(var("rho2"));
    e.terms.push_back(Term{t2, {}});
    Affine t3(Rational(1));
    t3.add(var("rho1", Rational(1, 2)));
    e.terms.push_back(Term{t3, {}});
    Affine t4(Rational(3, 2));
    t4.add(var("rho1", Rational(-1, 6)));
    t4.add(var("rho2", Rational(-1, 6)));
    e.terms.push_back(Term{t4, {}});
    return e;
}

std::vector<Constraint> t97_constraints() {
    Affine order = var("rho2");  // rho1 <= rho2
    order.add(var("rho1", Rational(-1)));
    Affine up(Rational(1));
    up.add(var("rho2", Rational(-1)));
    return {ge0(var("rho1"), "rho1>=0"), ge0(order, "rho1<=rho2"), ge0(up, "rho2<=1")};
}

}  // namespace nw::costmodel
