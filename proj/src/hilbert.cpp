#include "nestedwalk/hilbert.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nestedwalk/common.hpp"

namespace nw::hilbert {

RegisterLayout::RegisterLayout(std::vector<Register> regs) : regs_(std::move(regs)) {
    total_ = 1;
    for (const auto& r : regs_) {
        if (r.dim < 1) throw std::invalid_argument("register dimension must be >= 1");
        for (const auto& o : regs_)
            if (&o != &r && o.name == r.name)
                throw std::invalid_argument("duplicate register name: " + r.name);
        if (total_ > config().dim_cap / r.dim)
            throw CapacityError("layout exceeds the dimension cap of " +
                                std::to_string(config().dim_cap));
        total_ *= r.dim;
    }
    strides_.resize(regs_.size());
    std::int64_t s = 1;
    for (std::size_t i = regs_.size(); i-- > 0;) {
        strides_[i] = s;
        s *= regs_[i].dim;
    }
}

int RegisterLayout::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < regs_.size(); ++i)
        if (regs_[i].name == name) return static_cast<int>(i);
    return -1;
}

int RegisterLayout::require(std::string_view name) const {
    int i = index_of(name);
    if (i < 0) throw std::invalid_argument("no register named '" + std::string(name) + "'");
    return i;
}

std::int64_t RegisterLayout::pack(std::span<const std::int64_t> digits) const {
    if (digits.size() != regs_.size()) throw std::invalid_argument("digit count mismatch");
    std::int64_t idx = 0;
    for (std::size_t i = 0; i < regs_.size(); ++i) {
        if (digits[i] < 0 || digits[i] >= regs_[i].dim)
            throw std::invalid_argument("digit out of range for register " + regs_[i].name);
        idx += digits[i] * strides_[i];
    }
    return idx;
}

RegisterLayout RegisterLayout::sublayout(std::span<const std::string> names) const {
    std::vector<Register> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(regs_[static_cast<std::size_t>(require(n))]);
    return RegisterLayout(out);
}

bool RegisterLayout::same_as(const RegisterLayout& other) const {
    if (regs_.size() != other.regs_.size()) return false;
    for (std::size_t i = 0; i < regs_.size(); ++i)
        if (regs_[i].name != other.regs_[i].name || regs_[i].dim != other.regs_[i].dim)
            return false;
    return true;
}

StateVector::StateVector(RegisterLayout layout)
    : layout_(std::move(layout)), amp_(static_cast<std::size_t>(layout_.total_dim()), cx{0.0}) {}

StateVector StateVector::basis(const RegisterLayout& layout, std::span<const std::int64_t> digits) {
    StateVector s(layout);
    s.amp_[static_cast<std::size_t>(layout.pack(digits))] = 1.0;
    return s;
}

StateVector StateVector::basis(const RegisterLayout& layout, std::int64_t index) {
    if (index < 0 || index >= layout.total_dim())
        throw std::invalid_argument("basis index out of range");
    StateVector s(layout);
    s.amp_[static_cast<std::size_t>(index)] = 1.0;
    return s;
}

double StateVector::norm() const { return std::sqrt(kernels::norm2(amp_)); }

void StateVector::normalize() {
    const double n = norm();
    if (n == 0.0) throw std::invalid_argument("cannot normalize the zero vector");
    for (auto& a : amp_) a /= n;
}

std::vector<double> StateVector::register_distribution(std::string_view reg) const {
    const int ri = layout_.require(reg);
    std::vector<double> probs(static_cast<std::size_t>(layout_.reg(ri).dim), 0.0);
    for (std::int64_t i = 0; i < dim(); ++i)
        probs[static_cast<std::size_t>(layout_.digit(i, ri))] += std::norm(amp_[i]);
    return probs;
}

cx inner_product(const StateVector& a, const StateVector& b) {
    if (!a.layout().same_as(b.layout())) throw std::invalid_argument("layout mismatch");
    return kernels::dot(a.amps(), b.amps());
}

// ---------------------------------------------------------------------------
// LinearOp

LinearOp::LinearOp() : node_(Identity{}) {}

LinearOp LinearOp::identity() { return LinearOp(); }

LinearOp LinearOp::dense(std::vector<std::string> targets, std::vector<cx> matrix) {
    LinearOp op;
    std::int64_t d = static_cast<std::int64_t>(std::llround(std::sqrt(double(matrix.size()))));
    if (d * d != static_cast<std::int64_t>(matrix.size()))
        throw std::invalid_argument("dense operator matrix is not square");
    op.targets_ = std::move(targets);
    op.node_ = Dense{std::move(matrix), d};
    return op;
}

LinearOp LinearOp::monomial(std::vector<std::string> targets, std::vector<std::int64_t> perm,
                            std::vector<cx> phase) {
    if (perm.size() != phase.size()) throw std::invalid_argument("monomial size mismatch");
    std::vector<char> seen(perm.size(), 0);
    for (std::int64_t p : perm) {
        if (p < 0 || p >= static_cast<std::int64_t>(perm.size()) || seen[p])
            throw std::invalid_argument("monomial permutation is not a bijection");
        seen[p] = 1;
    }
    LinearOp op;
    op.targets_ = std::move(targets);
    op.node_ = Monomial{std::move(perm), std::move(phase)};
    return op;
}

LinearOp LinearOp::diagonal(std::vector<std::string> targets, std::vector<cx> diag) {
    LinearOp op;
    op.targets_ = std::move(targets);
    op.node_ = Diag{std::move(diag)};
    return op;
}

LinearOp LinearOp::rank_one(std::vector<std::string> targets, std::vector<cx> w, cx a, cx b) {
    LinearOp op;
    op.targets_ = std::move(targets);
    op.node_ = RankOne{std::move(w), a, b};
    return op;
}

LinearOp LinearOp::controlled(std::string control, std::map<std::int64_t, LinearOp> blocks) {
    for (const auto& [c, block] : blocks)
        for (const auto& t : block.targets_)
            if (t == control)
                throw std::invalid_argument("controlled block acts on its own control register");
    LinearOp op;
    op.node_ = std::make_shared<Controlled>(Controlled{std::move(control), std::move(blocks)});
    return op;
}

LinearOp LinearOp::sequence(std::vector<LinearOp> factors) {
    LinearOp op;
    op.node_ = std::make_shared<Sequence>(Sequence{std::move(factors)});
    return op;
}

LinearOp LinearOp::counted(LinearOp inner, long long* counter, long long queries) {
    LinearOp op;
    op.node_ = std::make_shared<Counted>(
        Counted{std::make_shared<LinearOp>(std::move(inner)), counter, queries});
    return op;
}

LinearOp LinearOp::adjoint() const {
    LinearOp out;
    out.targets_ = targets_;
    if (std::holds_alternative<Identity>(node_)) {
        out.node_ = Identity{};
    } else if (const auto* d = std::get_if<Dense>(&node_)) {
        std::vector<cx> m(d->m.size());
        for (std::int64_t r = 0; r < d->d; ++r)
            for (std::int64_t c = 0; c < d->d; ++c) m[c * d->d + r] = std::conj(d->m[r * d->d + c]);
        out.node_ = Dense{std::move(m), d->d};
    } else if (const auto* mo = std::get_if<Monomial>(&node_)) {
        std::vector<std::int64_t> perm(mo->perm.size());
        std::vector<cx> phase(mo->phase.size());
        for (std::size_t l = 0; l < mo->perm.size(); ++l) {
            perm[static_cast<std::size_t>(mo->perm[l])] = static_cast<std::int64_t>(l);
            phase[static_cast<std::size_t>(mo->perm[l])] = std::conj(mo->phase[l]);
        }
        out.node_ = Monomial{std::move(perm), std::move(phase)};
    } else if (const auto* di = std::get_if<Diag>(&node_)) {
        std::vector<cx> d2(di->d.size());
        for (std::size_t i = 0; i < d2.size(); ++i) d2[i] = std::conj(di->d[i]);
        out.node_ = Diag{std::move(d2)};
    } else if (const auto* r1 = std::get_if<RankOne>(&node_)) {
        out.node_ = RankOne{r1->w, std::conj(r1->a), std::conj(r1->b)};
    } else if (const auto* ct = std::get_if<std::shared_ptr<Controlled>>(&node_)) {
        std::map<std::int64_t, LinearOp> blocks;
        for (const auto& [c, b] : (*ct)->blocks) blocks.emplace(c, b.adjoint());
        return controlled((*ct)->control, std::move(blocks));
    } else if (const auto* sq = std::get_if<std::shared_ptr<Sequence>>(&node_)) {
        std::vector<LinearOp> rev;
        rev.reserve((*sq)->factors.size());
        for (auto it = (*sq)->factors.rbegin(); it != (*sq)->factors.rend(); ++it)
            rev.push_back(it->adjoint());
        return sequence(std::move(rev));
    } else if (const auto* cn = std::get_if<std::shared_ptr<Counted>>(&node_)) {
        return counted((*cn)->inner->adjoint(), (*cn)->counter, (*cn)->queries);
    }
    return out;
}

namespace {

struct Slicing {
    std::vector<std::int64_t> local_offsets;   // size = product of target dims
    std::vector<std::int64_t> outer_dims;      // non-target, non-fixed registers
    std::vector<std::int64_t> outer_strides;
    std::int64_t base0 = 0;                    // contribution of fixed digits
    std::int64_t outer_count = 1;

    std::int64_t outer_base(std::int64_t rank) const {
        std::int64_t base = base0;
        for (std::size_t i = outer_dims.size(); i-- > 0;) {
            base += (rank % outer_dims[i]) * outer_strides[i];
            rank /= outer_dims[i];
        }
        return base;
    }
};

using Fixed = std::vector<std::pair<int, std::int64_t>>;

Slicing make_slicing(const RegisterLayout& layout, const std::vector<std::string>& targets,
                     const Fixed& fixed) {
    Slicing s;
    std::vector<int> tidx;
    tidx.reserve(targets.size());
    for (const auto& t : targets) tidx.push_back(layout.require(t));

    std::vector<char> is_target(layout.size(), 0);
    for (int i : tidx) is_target[static_cast<std::size_t>(i)] = 1;
    std::vector<char> is_fixed(layout.size(), 0);
    for (const auto& [ri, val] : fixed) {
        if (is_target[static_cast<std::size_t>(ri)])
            throw std::invalid_argument("operator acts on a constrained control register");
        is_fixed[static_cast<std::size_t>(ri)] = 1;
        s.base0 += val * layout.stride(static_cast<std::size_t>(ri));
    }

    std::int64_t dt = 1;
    for (int i : tidx) dt *= layout.reg(static_cast<std::size_t>(i)).dim;
    s.local_offsets.assign(static_cast<std::size_t>(dt), 0);
    for (std::int64_t l = 0; l < dt; ++l) {
        std::int64_t rem = l, off = 0;
        for (std::size_t k = tidx.size(); k-- > 0;) {
            const auto d = layout.reg(static_cast<std::size_t>(tidx[k])).dim;
            off += (rem % d) * layout.stride(static_cast<std::size_t>(tidx[k]));
            rem /= d;
        }
        s.local_offsets[static_cast<std::size_t>(l)] = off;
    }

    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (is_target[i] || is_fixed[i]) continue;
        s.outer_dims.push_back(layout.reg(i).dim);
        s.outer_strides.push_back(layout.stride(i));
        s.outer_count *= layout.reg(i).dim;
    }
    return s;
}

thread_local std::vector<cx> t_scratch_in;
thread_local std::vector<cx> t_scratch_out;

}  // namespace

struct ApplyContext {
    const RegisterLayout& layout;
    std::vector<cx>& amps;

    void apply(const LinearOp& op, Fixed& fixed) {
        const auto& node = op.node_;
        if (std::holds_alternative<LinearOp::Identity>(node)) return;
        if (const auto* cn = std::get_if<std::shared_ptr<LinearOp::Counted>>(&node)) {
            if ((*cn)->counter) *(*cn)->counter += (*cn)->queries;
            apply(*(*cn)->inner, fixed);
            return;
        }
        if (const auto* sq = std::get_if<std::shared_ptr<LinearOp::Sequence>>(&node)) {
            for (const auto& f : (*sq)->factors) apply(f, fixed);
            return;
        }
        if (const auto* ct = std::get_if<std::shared_ptr<LinearOp::Controlled>>(&node)) {
            const int ci = layout.require((*ct)->control);
            for (const auto& [cval, block] : (*ct)->blocks) {
                if (cval < 0 || cval >= layout.reg(static_cast<std::size_t>(ci)).dim)
                    throw std::invalid_argument("control value out of range");
                fixed.emplace_back(ci, cval);
                apply(block, fixed);
                fixed.pop_back();
            }
            return;
        }
        apply_primitive(op, fixed);
    }

    void apply_primitive(const LinearOp& op, const Fixed& fixed) {
        const Slicing s = make_slicing(layout, op.targets_, fixed);
        const std::int64_t dt = static_cast<std::int64_t>(s.local_offsets.size());

        if (const auto* d = std::get_if<LinearOp::Dense>(&op.node_)) {
            if (d->d != dt) throw std::invalid_argument("dense operator dimension mismatch");
            for_each_slice(s, [&](std::int64_t base) {
                auto& xin = t_scratch_in;
                auto& xout = t_scratch_out;
                xin.resize(static_cast<std::size_t>(dt));
                xout.resize(static_cast<std::size_t>(dt));
                for (std::int64_t l = 0; l < dt; ++l)
                    xin[static_cast<std::size_t>(l)] = amps[base + s.local_offsets[l]];
                kernels::dense_slice(d->m, xin, xout);
                for (std::int64_t l = 0; l < dt; ++l)
                    amps[base + s.local_offsets[l]] = xout[static_cast<std::size_t>(l)];
            });
        } else if (const auto* mo = std::get_if<LinearOp::Monomial>(&op.node_)) {
            if (static_cast<std::int64_t>(mo->perm.size()) != dt)
                throw std::invalid_argument("monomial operator dimension mismatch");
            for_each_slice(s, [&](std::int64_t base) {
                auto& xin = t_scratch_in;
                xin.resize(static_cast<std::size_t>(dt));
                for (std::int64_t l = 0; l < dt; ++l)
                    xin[static_cast<std::size_t>(l)] = amps[base + s.local_offsets[l]];
                for (std::int64_t l = 0; l < dt; ++l)
                    amps[base + s.local_offsets[static_cast<std::size_t>(mo->perm[l])]] =
                        mo->phase[static_cast<std::size_t>(l)] * xin[static_cast<std::size_t>(l)];
            });
        } else if (const auto* di = std::get_if<LinearOp::Diag>(&op.node_)) {
            if (static_cast<std::int64_t>(di->d.size()) != dt)
                throw std::invalid_argument("diagonal operator dimension mismatch");
            for_each_slice(s, [&](std::int64_t base) {
                for (std::int64_t l = 0; l < dt; ++l)
                    amps[base + s.local_offsets[l]] *= di->d[static_cast<std::size_t>(l)];
            });
        } else if (const auto* r1 = std::get_if<LinearOp::RankOne>(&op.node_)) {
            if (static_cast<std::int64_t>(r1->w.size()) != dt)
                throw std::invalid_argument("rank-one operator dimension mismatch");
            const bool whole = (s.outer_count == 1 && s.base0 == 0 && contiguous(s));
            if (whole) {
                // Fast path: the operator covers the full vector in order.
                const cx ip = kernels::dot(r1->w, amps);
                kernels::scale_add(amps, r1->a, r1->w, r1->b * ip);
            } else {
                for_each_slice(s, [&](std::int64_t base) {
                    long double re = 0.0L, im = 0.0L;
                    for (std::int64_t l = 0; l < dt; ++l) {
                        const cx t = std::conj(r1->w[static_cast<std::size_t>(l)]) *
                                     amps[base + s.local_offsets[l]];
                        re += t.real();
                        im += t.imag();
                    }
                    const cx ip{static_cast<double>(re), static_cast<double>(im)};
                    for (std::int64_t l = 0; l < dt; ++l) {
                        auto& a = amps[base + s.local_offsets[l]];
                        a = r1->a * a + r1->b * ip * r1->w[static_cast<std::size_t>(l)];
                    }
                });
            }
        } else {
            throw std::logic_error("unhandled primitive node");
        }
    }

    static bool contiguous(const Slicing& s) {
        for (std::size_t l = 0; l < s.local_offsets.size(); ++l)
            if (s.local_offsets[l] != static_cast<std::int64_t>(l)) return false;
        return true;
    }

    template <typename F>
    void for_each_slice(const Slicing& s, F&& f) {
        if (kernels::parallel_enabled() && s.outer_count >= 64) {
#pragma omp parallel for schedule(static)
            for (std::int64_t rank = 0; rank < s.outer_count; ++rank) f(s.outer_base(rank));
        } else {
            for (std::int64_t rank = 0; rank < s.outer_count; ++rank) f(s.outer_base(rank));
        }
    }
};

void LinearOp::apply_in_place(StateVector& s) const {
    ApplyContext ctx{s.layout(), s.amps()};
    Fixed fixed;
    ctx.apply(*this, fixed);
}

StateVector LinearOp::apply(const StateVector& s) const {
    StateVector out = s;
    apply_in_place(out);
    return out;
}

std::vector<cx> LinearOp::to_dense(const RegisterLayout& layout) const {
    const std::int64_t n = layout.total_dim();
    if (n > 4096) throw CapacityError("to_dense limited to dimension 4096");
    std::vector<cx> m(static_cast<std::size_t>(n) * n);
    for (std::int64_t c = 0; c < n; ++c) {
        StateVector e = StateVector::basis(layout, c);
        apply_in_place(e);
        for (std::int64_t r = 0; r < n; ++r) m[static_cast<std::size_t>(r) * n + c] = e[r];
    }
    return m;
}

LinearOp reflection_about(const StateVector& psi) {
    if (std::abs(psi.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("reflection_about requires a normalized state");
    std::vector<std::string> targets;
    for (std::size_t i = 0; i < psi.layout().size(); ++i)
        targets.push_back(psi.layout().reg(i).name);
    return LinearOp::rank_one(std::move(targets), psi.amps(), cx{-1.0}, cx{2.0});
}

LinearOp negated_projector_reflection(const StateVector& psi) {
    if (std::abs(psi.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("reflection requires a normalized state");
    std::vector<std::string> targets;
    for (std::size_t i = 0; i < psi.layout().size(); ++i)
        targets.push_back(psi.layout().reg(i).name);
    return LinearOp::rank_one(std::move(targets), psi.amps(), cx{1.0}, cx{-2.0});
}

LinearOp controlled_unitary(const std::string& control_reg,
                            const std::map<std::int64_t, LinearOp>& ops) {
    return LinearOp::controlled(control_reg, ops);
}

}  // namespace nw::hilbert
