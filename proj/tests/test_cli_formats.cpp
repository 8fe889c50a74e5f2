#include <doctest.h>

#include <sstream>

#include "nestedwalk/common.hpp"
#include "nestedwalk/graphs.hpp"
#include "nestedwalk/rng.hpp"

using namespace nw;

TEST_CASE("named rng streams are independent and reproducible") {
    auto a1 = rng::stream(0, "alpha");
    auto a2 = rng::stream(0, "alpha");
    auto b = rng::stream(0, "beta");
    const auto x1 = a1.next_u64();
    CHECK(x1 == a2.next_u64());
    CHECK(x1 != b.next_u64());

    auto s0 = rng::substream(7, "trial", 0);
    auto s1 = rng::substream(7, "trial", 1);
    CHECK(s0.next_u64() != s1.next_u64());

    // Bernoulli and bounded draws stay in range.
    auto r = rng::stream(9, "range");
    for (int i = 0; i < 1000; ++i) {
        const double d = r.next_double();
        CHECK(d >= 0.0);
        CHECK(d < 1.0);
        CHECK(r.next_below(7) < 7);
    }
}

TEST_CASE("graph files round-trip through the documented format") {
    std::istringstream in("5\n0 1\n1 2\n# trailing comment\n");
    const auto g = graphs::read_graph(in);
    CHECK(g.n() == 5);
    CHECK(g.edge_count() == 2);

    std::istringstream dup("3\n0 1\n0 1\n");
    const auto g2 = graphs::read_graph(dup);  // duplicate edges collapse
    CHECK(g2.edge_count() == 1);

    std::istringstream selfloop("3\n1 1\n");
    CHECK_THROWS_AS(graphs::read_graph(selfloop), ParseError);
    std::istringstream trailing("3\n0 1 2\n");
    CHECK_THROWS_AS(graphs::read_graph(trailing), ParseError);
}
