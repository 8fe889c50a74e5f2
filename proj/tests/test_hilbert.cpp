#include <doctest.h>

#include <Eigen/Dense>

#include "nestedwalk/common.hpp"
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

std::vector<cx> random_unitary(int d, rng::Stream& rng) {
    Eigen::MatrixXcd a(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) a(r, c) = cx{rng.next_double() - 0.5, rng.next_double() - 0.5};
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    Eigen::MatrixXcd q = qr.householderQ();
    std::vector<cx> m(static_cast<std::size_t>(d) * d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) m[static_cast<std::size_t>(r * d + c)] = q(r, c);
    return m;
}

// Naive dense multiply oracle.
std::vector<cx> dense_mult(const std::vector<cx>& m, const std::vector<cx>& x) {
    const std::size_t d = x.size();
    std::vector<cx> y(d, cx{0.0});
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) y[r] += m[r * d + c] * x[c];
    return y;
}

}  // namespace

TEST_CASE("layout digits and capacity") {
    RegisterLayout layout({{"L", 3}, {"R", 4}, {"D", 2}});
    CHECK(layout.total_dim() == 24);
    const std::vector<std::int64_t> digits{2, 1, 1};
    const auto idx = layout.pack(digits);
    CHECK(layout.digit(idx, 0) == 2);
    CHECK(layout.digit(idx, 1) == 1);
    CHECK(layout.digit(idx, 2) == 1);
    CHECK_THROWS_AS(RegisterLayout({{"A", 2}, {"A", 3}}), std::invalid_argument);

    const auto saved = config().dim_cap;
    config().dim_cap = 16;
    CHECK_THROWS_AS(RegisterLayout({{"L", 5}, {"R", 5}}), CapacityError);
    config().dim_cap = saved;
}

TEST_CASE("apply basics") {
    RegisterLayout layout({{"q", 2}});
    const StateVector zero = StateVector::basis(layout, 0);
    CHECK(LinearOp::identity().apply(zero).amps() == zero.amps());

    const LinearOp x = LinearOp::monomial({"q"}, {1, 0}, {cx{1.0}, cx{1.0}});
    const StateVector one = x.apply(zero);
    CHECK(std::abs(one[1] - cx{1.0}) < 1e-15);
}

TEST_CASE("dense apply against the multiply oracle") {
    auto rng = rng::stream(11, "hilbert");
    RegisterLayout layout({{"a", 2}, {"b", 4}});
    const auto m = random_unitary(8, rng);
    const LinearOp op = LinearOp::dense({"a", "b"}, m);
    for (int trial = 0; trial < 10; ++trial) {
        const StateVector s = random_state(layout, rng);
        const StateVector got = op.apply(s);
        const auto want = dense_mult(m, s.amps());
        for (std::int64_t i = 0; i < 8; ++i) CHECK(std::abs(got[i] - want[static_cast<std::size_t>(i)]) < 1e-12);
    }
    // Unitarity: U U^dagger = I.
    const LinearOp round_trip = LinearOp::sequence({op, op.adjoint()});
    const StateVector s = random_state(layout, rng);
    const StateVector back = round_trip.apply(s);
    for (std::int64_t i = 0; i < 8; ++i) CHECK(std::abs(back[i] - s[i]) < 1e-12);
}

TEST_CASE("reflections") {
    auto rng = rng::stream(12, "hilbert");
    RegisterLayout layout({{"a", 8}});
    const StateVector psi = random_state(layout, rng);
    const LinearOp refl = hilbert::reflection_about(psi);

    // +1 eigenvector.
    const StateVector same = refl.apply(psi);
    CHECK(std::abs(hilbert::inner_product(psi, same) - cx{1.0}) < 1e-12);

    // -1 on the orthogonal complement.
    StateVector phi = random_state(layout, rng);
    const cx overlap = hilbert::inner_product(psi, phi);
    for (std::int64_t i = 0; i < 8; ++i) phi[i] -= overlap * psi[i];
    phi.normalize();
    const StateVector flipped = refl.apply(phi);
    for (std::int64_t i = 0; i < 8; ++i) CHECK(std::abs(flipped[i] + phi[i]) < 1e-12);

    // Linearity on (psi + phi)/sqrt(2) against the dense construction.
    StateVector mix(layout);
    for (std::int64_t i = 0; i < 8; ++i) mix[i] = (psi[i] + phi[i]) / std::sqrt(2.0);
    const StateVector out = refl.apply(mix);
    for (std::int64_t i = 0; i < 8; ++i)
        CHECK(std::abs(out[i] - (psi[i] - phi[i]) / std::sqrt(2.0)) < 1e-12);

    // Involution.
    const StateVector twice = refl.apply(out);
    for (std::int64_t i = 0; i < 8; ++i) CHECK(std::abs(twice[i] - mix[i]) < 1e-9);

    StateVector unnormalized(layout);
    unnormalized[0] = 2.0;
    CHECK_THROWS_AS(hilbert::reflection_about(unnormalized), std::invalid_argument);
}

TEST_CASE("inner product") {
    RegisterLayout layout({{"a", 4}});
    auto rng = rng::stream(13, "hilbert");
    const StateVector s = random_state(layout, rng);
    CHECK(std::abs(hilbert::inner_product(s, s) - cx{1.0}) < 1e-12);
    CHECK(std::abs(hilbert::inner_product(StateVector::basis(layout, 0),
                                          StateVector::basis(layout, 3))) < 1e-15);
    const StateVector t = random_state(layout, rng);
    cx direct = 0.0;
    for (std::int64_t i = 0; i < 4; ++i) direct += std::conj(s[i]) * t[i];
    CHECK(std::abs(hilbert::inner_product(s, t) - direct) < 1e-12);

    RegisterLayout other({{"b", 4}});
    CHECK_THROWS_AS(hilbert::inner_product(s, StateVector::basis(other, 0)),
                    std::invalid_argument);
}

TEST_CASE("controlled operators") {
    RegisterLayout layout({{"c", 2}, {"t", 2}});
    // All-identity blocks act as identity.
    const LinearOp allid = LinearOp::controlled("c", {});
    auto rng = rng::stream(14, "hilbert");
    const StateVector s = random_state(layout, rng);
    CHECK(allid.apply(s).amps() == s.amps());

    // {I, X} on (control, target) is CNOT.
    const LinearOp cnot =
        LinearOp::controlled("c", {{1, LinearOp::monomial({"t"}, {1, 0}, {cx{1.0}, cx{1.0}})}});
    CHECK(std::abs(cnot.apply(StateVector::basis(layout, {std::vector<std::int64_t>{1, 0}}))
                       .amps()[3] -
                   cx{1.0}) < 1e-15);
    CHECK(std::abs(cnot.apply(StateVector::basis(layout, {std::vector<std::int64_t>{0, 1}}))
                       .amps()[1] -
                   cx{1.0}) < 1e-15);

    // Random blocks against a dense block-diagonal oracle.
    RegisterLayout layout3({{"c", 3}, {"t", 4}});
    std::map<std::int64_t, LinearOp> blocks;
    std::vector<std::vector<cx>> mats;
    for (int b = 0; b < 3; ++b) {
        mats.push_back(random_unitary(4, rng));
        blocks.emplace(b, LinearOp::dense({"t"}, mats.back()));
    }
    const LinearOp ctl = hilbert::controlled_unitary("c", blocks);
    const StateVector in3 = random_state(layout3, rng);
    const StateVector got = ctl.apply(in3);
    for (int b = 0; b < 3; ++b) {
        std::vector<cx> slice(4);
        for (int i = 0; i < 4; ++i) slice[static_cast<std::size_t>(i)] = in3[b * 4 + i];
        const auto want = dense_mult(mats[static_cast<std::size_t>(b)], slice);
        for (int i = 0; i < 4; ++i)
            CHECK(std::abs(got[b * 4 + i] - want[static_cast<std::size_t>(i)]) < 1e-12);
    }

    // Commutes with projectors onto control basis states.
    for (int b = 0; b < 3; ++b) {
        StateVector proj_then = in3;
        for (std::int64_t i = 0; i < 12; ++i)
            if (layout3.digit(i, 0) != b) proj_then[i] = 0.0;
        proj_then = ctl.apply(proj_then);
        StateVector then_proj = got;
        for (std::int64_t i = 0; i < 12; ++i)
            if (layout3.digit(i, 0) != b) then_proj[i] = 0.0;
        for (std::int64_t i = 0; i < 12; ++i)
            CHECK(std::abs(proj_then[i] - then_proj[i]) < 1e-12);
    }

    CHECK_THROWS_AS(
        LinearOp::controlled("c", {{0, LinearOp::diagonal({"c"}, {cx{1.0}, cx{1.0}})}}),
        std::invalid_argument);
}

TEST_CASE("norm preservation on random states") {
    auto rng = rng::stream(15, "hilbert");
    RegisterLayout layout({{"a", 4}, {"b", 4}});
    const LinearOp u = LinearOp::dense({"a"}, random_unitary(4, rng));
    const LinearOp v = LinearOp::dense({"b"}, random_unitary(4, rng));
    const LinearOp both = LinearOp::sequence({u, v});
    for (int i = 0; i < 100; ++i) {
        const StateVector s = random_state(layout, rng);
        CHECK(std::abs(both.apply(s).norm() - 1.0) < 1e-9);
    }
}

TEST_CASE("serial and parallel kernels agree bitwise") {
    auto rng = rng::stream(16, "hilbert");
    RegisterLayout layout({{"a", 64}, {"b", 8}, {"c", 4}});
    const StateVector s = random_state(layout, rng);
    const LinearOp op = LinearOp::sequence(
        {LinearOp::dense({"b"}, random_unitary(8, rng)),
         hilbert::reflection_about(s),
         LinearOp::diagonal({"c"}, {cx{1.0}, cx{-1.0}, cx{1.0}, cx{-1.0}})});
    kernels::set_parallel(false);
    const StateVector serial = op.apply(s);
    kernels::set_parallel(true);
    const StateVector parallel = op.apply(s);
    CHECK(serial.amps() == parallel.amps());
}

TEST_CASE("register distribution") {
    RegisterLayout layout({{"a", 2}, {"b", 2}});
    StateVector s(layout);
    s[0] = std::sqrt(0.5);
    s[3] = std::sqrt(0.5);
    const auto dist = s.register_distribution("a");
    CHECK(dist[0] == doctest::Approx(0.5));
    CHECK(dist[1] == doctest::Approx(0.5));
}
