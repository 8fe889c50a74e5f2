#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nestedwalk/kernels.hpp"

namespace nw::hilbert {

using cx = std::complex<double>;

struct Register {
    std::string name;
    std::int64_t dim;
};

// Ordered list of named registers. The first register is the slowest index:
// a basis index decomposes as digits in mixed radix, most significant first.
class RegisterLayout {
public:
    RegisterLayout() = default;
    explicit RegisterLayout(std::vector<Register> regs);

    std::int64_t total_dim() const { return total_; }
    std::size_t size() const { return regs_.size(); }
    const Register& reg(std::size_t i) const { return regs_[i]; }
    std::int64_t stride(std::size_t i) const { return strides_[i]; }

    int index_of(std::string_view name) const;  // -1 if absent
    int require(std::string_view name) const;

    std::int64_t digit(std::int64_t basis, std::size_t reg_idx) const {
        return (basis / strides_[reg_idx]) % regs_[reg_idx].dim;
    }
    std::int64_t pack(std::span<const std::int64_t> digits) const;

    // Sub-layout over the named registers, in the order given.
    RegisterLayout sublayout(std::span<const std::string> names) const;

    bool same_as(const RegisterLayout& other) const;

private:
    std::vector<Register> regs_;
    std::vector<std::int64_t> strides_;
    std::int64_t total_ = 1;
};

class StateVector {
public:
    explicit StateVector(RegisterLayout layout);  // all-zero amplitudes

    static StateVector basis(const RegisterLayout& layout, std::span<const std::int64_t> digits);
    static StateVector basis(const RegisterLayout& layout, std::int64_t index);

    const RegisterLayout& layout() const { return layout_; }
    std::vector<cx>& amps() { return amp_; }
    const std::vector<cx>& amps() const { return amp_; }
    cx& operator[](std::int64_t i) { return amp_[static_cast<std::size_t>(i)]; }
    const cx& operator[](std::int64_t i) const { return amp_[static_cast<std::size_t>(i)]; }
    std::int64_t dim() const { return static_cast<std::int64_t>(amp_.size()); }

    double norm() const;
    void normalize();

    // Probability of each value of one register (partial trace diagonal).
    std::vector<double> register_distribution(std::string_view reg) const;

private:
    RegisterLayout layout_;
    std::vector<cx> amp_;
};

cx inner_product(const StateVector& a, const StateVector& b);

// Linear operator on a subset of registers of a layout, represented as a
// tree of primitives. Unitary inputs yield unitary operators; apply is
// norm-preserving up to roundoff.
class LinearOp {
public:
    LinearOp();  // identity

    static LinearOp identity();
    // Row-major dim x dim matrix over the listed target registers (local
    // index = mixed radix over targets in the given order).
    static LinearOp dense(std::vector<std::string> targets, std::vector<cx> matrix);
    // out[perm[l]] = phase[l] * in[l]; perm must be a bijection.
    static LinearOp monomial(std::vector<std::string> targets, std::vector<std::int64_t> perm,
                             std::vector<cx> phase);
    static LinearOp diagonal(std::vector<std::string> targets, std::vector<cx> diag);
    // v -> a*v + b*<w|v>w on the targets; w need not be normalized.
    static LinearOp rank_one(std::vector<std::string> targets, std::vector<cx> w, cx a, cx b);
    // Block-diagonal over the control register: acts as blocks[c] where the
    // control digit equals c, identity for missing entries.
    static LinearOp controlled(std::string control, std::map<std::int64_t, LinearOp> blocks);
    // Product; factors are applied first-to-last.
    static LinearOp sequence(std::vector<LinearOp> factors);
    // Charges `queries` to the counter each time the operator is applied.
    static LinearOp counted(LinearOp inner, long long* counter, long long queries);

    LinearOp adjoint() const;

    void apply_in_place(StateVector& s) const;
    StateVector apply(const StateVector& s) const;

    // Dense materialization (test oracle; dimension-limited).
    std::vector<cx> to_dense(const RegisterLayout& layout) const;

private:
    struct Dense {
        std::vector<cx> m;
        std::int64_t d;
    };
    struct Monomial {
        std::vector<std::int64_t> perm;
        std::vector<cx> phase;
    };
    struct Diag {
        std::vector<cx> d;
    };
    struct RankOne {
        std::vector<cx> w;
        cx a, b;
    };
    struct Controlled {
        std::string control;
        std::map<std::int64_t, LinearOp> blocks;
    };
    struct Sequence {
        std::vector<LinearOp> factors;
    };
    struct Counted {
        std::shared_ptr<LinearOp> inner;
        long long* counter;
        long long queries;
    };
    struct Identity {};

    using Node = std::variant<Identity, Dense, Monomial, Diag, RankOne,
                              std::shared_ptr<Controlled>, std::shared_ptr<Sequence>,
                              std::shared_ptr<Counted>>;

    std::vector<std::string> targets_;
    Node node_;

    friend struct ApplyContext;
};

// 2|psi><psi| - I on all registers of psi's layout.
LinearOp reflection_about(const StateVector& psi);

// I - 2|psi><psi| (the Householder form; maps psi to -psi, fixes the
// orthogonal complement).
LinearOp negated_projector_reflection(const StateVector& psi);

// Spec-level convenience: block-diagonal controlled operator from a map of
// per-control-index operators.
LinearOp controlled_unitary(const std::string& control_reg,
                            const std::map<std::int64_t, LinearOp>& ops);

}  // namespace nw::hilbert
