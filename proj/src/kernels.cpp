#include "nestedwalk/kernels.hpp"

#include <omp.h>

namespace nw::kernels {

namespace {
bool g_parallel = true;
}

void set_parallel(bool on) { g_parallel = on; }
bool parallel_enabled() { return g_parallel; }

cx dot(std::span<const cx> a, std::span<const cx> b) {
    // Deterministic serial accumulation in extended precision: results must
    // not depend on the thread count.
    long double re = 0.0L, im = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const cx t = std::conj(a[i]) * b[i];
        re += t.real();
        im += t.imag();
    }
    return {static_cast<double>(re), static_cast<double>(im)};
}

double norm2(std::span<const cx> a) {
    long double s = 0.0L;
    for (const cx& v : a) s += std::norm(v);
    return static_cast<double>(s);
}

void scale_add(std::span<cx> v, cx a, std::span<const cx> w, cx b) {
    const std::int64_t n = static_cast<std::int64_t>(v.size());
    if (g_parallel && n >= 4096) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) v[i] = a * v[i] + b * w[i];
    } else {
        for (std::int64_t i = 0; i < n; ++i) v[i] = a * v[i] + b * w[i];
    }
}

void dense_slice(std::span<const cx> m, std::span<const cx> x, std::span<cx> y) {
    const std::size_t d = x.size();
    for (std::size_t r = 0; r < d; ++r) {
        cx acc = 0.0;
        const cx* row = m.data() + r * d;
        for (std::size_t c = 0; c < d; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

namespace reference {

cx dot(std::span<const cx> a, std::span<const cx> b) {
    cx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

void scale_add(std::span<cx> v, cx a, std::span<const cx> w, cx b) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * v[i] + b * w[i];
}

void dense_slice(std::span<const cx> m, std::span<const cx> x, std::span<cx> y) {
    const std::size_t d = x.size();
    for (std::size_t r = 0; r < d; ++r) {
        cx acc = 0.0;
        for (std::size_t c = 0; c < d; ++c) acc += m[r * d + c] * x[c];
        y[r] = acc;
    }
}

}  // namespace reference

}  // namespace nw::kernels
