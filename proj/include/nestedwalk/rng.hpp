#pragma once

#include <cstdint>
#include <string_view>

namespace nw::rng {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

// Deterministic splittable generator. All randomness in the project flows
// from one 64-bit seed through named streams, so that runs are reproducible
// across platforms and thread counts. std:: distributions are deliberately
// avoided (they are not portable across standard libraries).
class Stream {
public:
    explicit Stream(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() { return detail::splitmix64(state_); }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), n >= 1, by rejection.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return next_double() < p; }

private:
    std::uint64_t state_;
};

// Independent stream for a named subsystem derived from the global seed.
inline Stream stream(std::uint64_t seed, std::string_view name) {
    std::uint64_t s = seed ^ detail::fnv1a(name);
    detail::splitmix64(s);
    return Stream(s);
}

// Sub-stream, e.g. per trial index.
inline Stream substream(std::uint64_t seed, std::string_view name, std::uint64_t index) {
    std::uint64_t s = seed ^ detail::fnv1a(name);
    s = detail::splitmix64(s) ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    detail::splitmix64(s);
    return Stream(s);
}

}  // namespace nw::rng
