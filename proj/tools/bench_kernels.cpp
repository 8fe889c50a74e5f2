// Compares the OpenMP apply kernels against their serial reference twins on
// representative operator shapes, and checks that both produce identical
// amplitudes.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "nestedwalk/hilbert.hpp"
#include "nestedwalk/rng.hpp"

using namespace nw;
using hilbert::cx;
using hilbert::LinearOp;
using hilbert::RegisterLayout;
using hilbert::StateVector;

namespace {

StateVector random_state(const RegisterLayout& layout, rng::Stream& rng) {
    StateVector s(layout);
    for (std::int64_t i = 0; i < s.dim(); ++i)
        s[i] = cx{rng.next_double() - 0.5, rng.next_double() - 0.5};
    s.normalize();
    return s;
}

double time_apply(const LinearOp& op, const StateVector& input, int reps, bool parallel,
                  StateVector* out) {
    kernels::set_parallel(parallel);
    StateVector work = input;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) op.apply_in_place(work);
    const auto t1 = std::chrono::steady_clock::now();
    kernels::set_parallel(true);
    if (out) *out = work;
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

double max_diff(const StateVector& a, const StateVector& b) {
    double d = 0.0;
    for (std::int64_t i = 0; i < a.dim(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

void bench(const char* name, const LinearOp& op, const StateVector& input, int reps) {
    StateVector serial = input, parallel = input;
    const double ts = time_apply(op, input, reps, false, &serial);
    const double tp = time_apply(op, input, reps, true, &parallel);
    std::printf("%-24s %10.3f ms %10.3f ms %8.2fx   max|diff| = %.3g\n", name, ts, tp,
                ts / tp, max_diff(serial, parallel));
}

}  // namespace

int main(int argc, char** argv) {
    int bits = 20;
    if (argc > 1) bits = std::atoi(argv[1]);
    auto rng = rng::stream(1, "bench");
    RegisterLayout layout({{"A", std::int64_t{1} << (bits - 6)}, {"B", 8}, {"C", 8}});
    const StateVector psi = random_state(layout, rng);
    std::printf("state dimension: %lld\n", static_cast<long long>(layout.total_dim()));
    std::printf("%-24s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    // 8x8 dense unitary on one register (Hadamard-like rows).
    std::vector<cx> m(64);
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
            m[static_cast<std::size_t>(r * 8 + c)] =
                cx{((__builtin_popcount(r & c) & 1) ? -1.0 : 1.0) / std::sqrt(8.0), 0.0};
    bench("dense 8x8 (reg B)", LinearOp::dense({"B"}, m), psi, 5);

    std::vector<cx> diag(8);
    for (int i = 0; i < 8; ++i) diag[static_cast<std::size_t>(i)] = cx{i % 2 ? -1.0 : 1.0};
    bench("diagonal (reg C)", LinearOp::diagonal({"C"}, diag), psi, 20);

    std::vector<std::int64_t> perm(64);
    std::vector<cx> phase(64, cx{1.0});
    for (std::int64_t i = 0; i < 64; ++i) perm[static_cast<std::size_t>(i)] = i ^ 21;
    bench("xor permutation (B,C)", LinearOp::monomial({"B", "C"}, perm, phase), psi, 20);

    bench("reflection (full)", hilbert::reflection_about(psi), psi, 5);
    return 0;
}
