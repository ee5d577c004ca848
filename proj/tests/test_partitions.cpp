#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "sigseg/grid.hpp"
#include "sigseg/partitions.hpp"

using namespace sigseg;

namespace {

Partition random_partition(std::mt19937_64& rng, int max_interior = 6) {
    std::uniform_int_distribution<int> count(0, max_interior);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    std::set<double> pts{0.0, 1.0};
    const int k = count(rng);
    while (static_cast<int>(pts.size()) < k + 2) pts.insert(u(rng));
    return Partition(std::vector<double>(pts.begin(), pts.end()));
}

}  // namespace

TEST_CASE("partitions validate their endpoints and ordering", "[partitions]") {
    CHECK_NOTHROW(Partition({0.0, 1.0}));
    CHECK_NOTHROW(Partition({0.0, 0.5, 1.0}));
    CHECK_THROWS_AS(Partition({0.1, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Partition({0.0, 0.9}), std::invalid_argument);
    CHECK_THROWS_AS(Partition({0.0, 0.5, 0.5, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Partition({0.0, 0.7, 0.3, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Partition({0.0}), std::invalid_argument);
}

TEST_CASE("grid partitions validate index ranges", "[partitions]") {
    const Grid g(4);
    CHECK_NOTHROW(GridPartition(g, {0, 2, 4}));
    CHECK_THROWS_AS(GridPartition(g, {1, 4}), std::invalid_argument);
    CHECK_THROWS_AS(GridPartition(g, {0, 3}), std::invalid_argument);
    CHECK_THROWS_AS(GridPartition(g, {0, 2, 2, 4}), std::invalid_argument);
    CHECK_THROWS_AS(GridPartition(g, {0, 5}), std::invalid_argument);

    const GridPartition p(g, {0, 2, 4});
    const Partition real = p.to_partition();
    CHECK(real.points == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(p.blocks() == 2);
}

TEST_CASE("Hausdorff distance on simple pairs", "[partitions]") {
    CHECK(hausdorff_distance(Partition({0.0, 1.0}), Partition({0.0, 1.0})) == 0.0);
    CHECK(hausdorff_distance(Partition({0.0, 1.0}), Partition({0.0, 0.5, 1.0})) ==
          Catch::Approx(0.5));
    CHECK(hausdorff_distance(Partition({0.0, 0.3, 1.0}), Partition({0.0, 0.4, 1.0})) ==
          Catch::Approx(0.1));
}

TEST_CASE("Hausdorff distance satisfies the metric axioms", "[partitions]") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const Partition a = random_partition(rng);
        const Partition b = random_partition(rng);
        const Partition c = random_partition(rng);
        const double dab = hausdorff_distance(a, b);
        const double dba = hausdorff_distance(b, a);
        const double dac = hausdorff_distance(a, c);
        const double dbc = hausdorff_distance(b, c);
        CHECK(dab == dba);
        CHECK(dab >= 0.0);
        CHECK(dac <= dab + dbc + 1e-15);
        CHECK(hausdorff_distance(a, a) == 0.0);
        if (a.points != b.points) CHECK(dab > 0.0);
    }
}

TEST_CASE("interval decomposition lists consecutive open intervals", "[partitions]") {
    const auto one = intervals(Partition({0.0, 1.0}));
    REQUIRE(one.intervals.size() == 1);
    CHECK(one.intervals[0] == std::pair<double, double>{0.0, 1.0});

    const auto two = intervals(Partition({0.0, 0.5, 1.0}));
    REQUIRE(two.intervals.size() == 2);
    CHECK(two.intervals[0] == std::pair<double, double>{0.0, 0.5});
    CHECK(two.intervals[1] == std::pair<double, double>{0.5, 1.0});

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Partition p = random_partition(rng);
        CHECK(intervals(p).intervals.size() == p.points.size() - 1);
    }
}

TEST_CASE("jump count is the number of interior breakpoints", "[partitions]") {
    CHECK(jump_count(Partition({0.0, 1.0})) == 0);
    CHECK(jump_count(Partition({0.0, 0.3, 1.0})) == 1);
    CHECK(jump_count(Partition({0.0, 0.2, 0.7, 1.0})) == 2);
    CHECK(jump_count(GridPartition(Grid(8), {0, 4, 8})) == 1);
}

TEST_CASE("threshold extraction records the left endpoint of the new block", "[partitions]") {
    const DiscreteSignal f(Grid(3), {0.0, 0.05, 1.0});
    const GridPartition p = threshold_partition(f, 0.5);
    CHECK(p.indices == std::vector<int>{0, 2, 3});

    const GridPartition coarse = threshold_partition(f, 10.0);
    CHECK(coarse.indices == std::vector<int>{0, 3});

    const DiscreteSignal inc(Grid(4), {0.0, 0.1, 0.2, 0.3});
    const GridPartition full = threshold_partition(inc, 0.0);
    CHECK(full.indices == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("threshold extraction is monotone in the threshold", "[partitions]") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v(16);
        for (auto& x : v) x = u(rng);
        const DiscreteSignal f(Grid(16), std::move(v));
        const GridPartition lo = threshold_partition(f, 0.2);
        const GridPartition hi = threshold_partition(f, 0.8);
        CHECK(std::includes(lo.indices.begin(), lo.indices.end(), hi.indices.begin(),
                            hi.indices.end()));
    }
}

TEST_CASE("default jump threshold scales like mu sqrt(gamma/n)", "[partitions]") {
    CHECK(bz_jump_threshold(0.25, 2.0, 4) == Catch::Approx(2.0 * std::sqrt(0.0625)));
    CHECK(bz_jump_threshold(0.0, 1.0, 8) == 0.0);
}

TEST_CASE("interval matching reproduces identical partitions", "[partitions]") {
    const Partition p({0.0, 0.25, 0.6, 1.0});
    const IntervalMatch m = match_intervals(p, p);
    REQUIRE(m.in_regime);
    REQUIRE(m.matched.size() == 3);
    for (std::size_t i = 0; i + 1 < p.points.size(); ++i) {
        CHECK(m.matched[i].first == p.points[i]);
        CHECK(m.matched[i].second == p.points[i + 1]);
    }
}

TEST_CASE("interval matching pairs nearby breakpoints", "[partitions]") {
    const Partition limit({0.0, 0.5, 1.0});
    const Partition approx({0.0, 0.5004, 1.0});
    const IntervalMatch m = match_intervals(approx, limit);
    REQUIRE(m.in_regime);
    CHECK(m.delta0 == Catch::Approx(0.5 / 3.0));
    REQUIRE(m.matched.size() == 2);
    CHECK(m.matched[0] == std::pair<double, double>{0.0, 0.5004});
    CHECK(m.matched[1] == std::pair<double, double>{0.5004, 1.0});
}

TEST_CASE("interval matching declines when not yet Hausdorff-close", "[partitions]") {
    const IntervalMatch m = match_intervals(Partition({0.0, 1.0}), Partition({0.0, 0.5, 1.0}));
    CHECK_FALSE(m.in_regime);
    CHECK(m.matched.empty());
}

TEST_CASE("nearby refinements carry at least as many points", "[partitions]") {
    // Surrogate for lower semicontinuity of the point count: when an
    // approximation is Hausdorff-close, each limit interval is matched with a
    // distinct approximating interval, so the approximation cannot have fewer
    // points than the limit.
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const Partition p = random_partition(rng, 4);
        const double d0 = p.min_gap() / 3.0;
        std::set<double> pts{0.0, 1.0};
        for (std::size_t i = 1; i + 1 < p.points.size(); ++i)
            pts.insert(std::clamp(p.points[i] + 0.4 * d0 * jitter(rng), 0.001, 0.999));
        // Sprinkle extra points so the approximation is a strict refinement.
        std::uniform_real_distribution<double> u(0.01, 0.99);
        pts.insert(u(rng));
        const Partition pk{std::vector<double>(pts.begin(), pts.end())};

        const IntervalMatch m = match_intervals(pk, p);
        if (!m.in_regime) continue;  // extra point may break closeness; skip
        REQUIRE(m.matched.size() == p.points.size() - 1);
        for (std::size_t i = 0; i + 1 < m.matched.size(); ++i) {
            CHECK(m.matched[i].second <= m.matched[i + 1].first);   // disjoint
            CHECK(m.matched[i].first < m.matched[i + 1].first);     // distinct lefts
        }
        CHECK(pk.points.size() >= p.points.size());
    }
}
