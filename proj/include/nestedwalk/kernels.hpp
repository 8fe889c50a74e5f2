#pragma once

#include <complex>
#include <span>

namespace nw::kernels {

using cx = std::complex<double>;

// Global switch for OpenMP parallel kernels. Reductions (dot, norm2) are
// always serial so that amplitudes and derived probabilities are bit-stable
// across thread counts; only elementwise and slice-wise work parallelizes.
void set_parallel(bool on);
bool parallel_enabled();

cx dot(std::span<const cx> a, std::span<const cx> b);
double norm2(std::span<const cx> a);

// v <- a*v + b*w, elementwise.
void scale_add(std::span<cx> v, cx a, std::span<const cx> w, cx b);

// y <- M x for a row-major d x d matrix over one gathered slice.
void dense_slice(std::span<const cx> m, std::span<const cx> x, std::span<cx> y);

// Plain serial twins, kept as the reference implementations for tests and
// the kernel benchmark.
namespace reference {
cx dot(std::span<const cx> a, std::span<const cx> b);
void scale_add(std::span<cx> v, cx a, std::span<const cx> w, cx b);
void dense_slice(std::span<const cx> m, std::span<const cx> x, std::span<cx> y);
}  // namespace reference

}  // namespace nw::kernels
