#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "manav/geometry.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace manav;

TEST_CASE("contains classifies interior, boundary and exterior points") {
    const HPolytope box = make_box(-1.0, -1.0, 1.0, 1.0);
    CHECK(contains(box, Vec2(0.0, 0.0), 0.0));
    CHECK(contains(box, Vec2(1.0, 0.0), 0.0));
    CHECK_FALSE(contains(box, Vec2(1.001, 0.0), 1e-6));
    CHECK_THROWS_AS(make_box(1.0, 0.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("minkowski_sum adds centers and concatenates generators") {
    Zonotope a;
    a.center = Vec2(1.0, 2.0);
    a.generators.resize(2, 0);
    Zonotope b;
    b.center = Vec2(3.0, 4.0);
    b.generators.resize(2, 0);
    const Zonotope point_sum = minkowski_sum(a, b);
    CHECK(point_sum.center == Vec2(4.0, 6.0));
    CHECK(point_sum.num_generators() == 0);

    Zonotope square;
    square.generators.resize(2, 2);
    square.generators.col(0) = Vec2(1.0, 0.0);
    square.generators.col(1) = Vec2(0.0, 1.0);
    const Zonotope shifted = minkowski_sum(square, a);
    CHECK(shifted.center == Vec2(1.0, 2.0));
    CHECK(shifted.num_generators() == 2);

    const Zonotope doubled = minkowski_sum(square, square);
    CHECK(support(doubled, Vec2(1.0, 0.0)) == doctest::Approx(2.0));
    CHECK(support(doubled, Vec2(-1.0, 0.0)) == doctest::Approx(2.0));
}

TEST_CASE("regular_hexagon has 3 generators and vertices on the circumcircle") {
    const Zonotope hex = regular_hexagon(1.0);
    CHECK(hex.num_generators() == 3);
    const std::vector<Vec2> ring = vertices(to_hpolytope(hex));
    REQUIRE(ring.size() == 6);
    for (const Vec2& v : ring) {
        CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
    for (int k = 0; k < 360; ++k) {
        const double a = k * std::numbers::pi / 180.0;
        const double w = support(hex, Vec2(std::cos(a), std::sin(a))) +
                         support(hex, Vec2(-std::cos(a), -std::sin(a)));
        CHECK(w >= std::sqrt(3.0) - 1e-9);
        CHECK(w <= 2.0 + 1e-9);
    }
    const Zonotope big = regular_hexagon(2.0);
    for (const Vec2& v : vertices(to_hpolytope(big))) {
        CHECK(v.norm() == doctest::Approx(2.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(regular_hexagon(0.0), std::invalid_argument);
}

TEST_CASE("bloat offsets halfspaces outward by the margin") {
    const HPolytope box = make_box(-1.0, -1.0, 1.0, 1.0);

    const HPolytope same = bloat(box, 0.0);
    for (const Vec2& v : vertices(same)) {
        CHECK(oracle::point_in_convex(vertices(box), v, 1e-12));
    }
    CHECK(area(same) == doctest::Approx(area(box)));

    const HPolytope grown = bloat(box, 0.1);
    const std::vector<Vec2> ring = vertices(grown);
    double xmax = 0.0, ymax = 0.0;
    for (const Vec2& v : ring) {
        xmax = std::max(xmax, v.x());
        ymax = std::max(ymax, v.y());
    }
    CHECK(xmax == doctest::Approx(1.1));
    CHECK(ymax == doctest::Approx(1.1));
    CHECK(area(grown) == doctest::Approx(2.2 * 2.2));

    const HPolytope tri = from_vertices({{0.0, 0.0}, {2.0, 0.0}, {0.0, 2.0}});
    const HPolytope fat = bloat(tri, 0.2);
    const std::vector<Vec2> fat_ring = vertices(fat);
    for (const Vec2& v : vertices(tri)) {
        double edge = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < fat_ring.size(); ++i) {
            edge = std::min(edge, oracle::point_segment_distance(
                                      v, fat_ring[i], fat_ring[(i + 1) % fat_ring.size()]));
        }
        CHECK(edge >= 0.2 - 1e-9);
    }
    CHECK_THROWS_AS(bloat(box, -0.1), std::invalid_argument);
}

TEST_CASE("bloat is monotone in the margin") {
    const HPolytope tri = normalized(from_vertices({{0.0, 0.0}, {3.0, 1.0}, {1.0, 2.5}}));
    const HPolytope small = bloat(tri, 0.1);
    const HPolytope large = bloat(tri, 0.35);
    REQUIRE(small.num_halfspaces() == large.num_halfspaces());
    for (int i = 0; i < small.num_halfspaces(); ++i) {
        CHECK(small.b(i) <= large.b(i) + 1e-12);
    }
}

TEST_CASE("zonotope to halfspace conversion preserves the support function") {
    Zonotope z;
    z.center = Vec2(0.3, -0.7);
    z.generators.resize(2, 3);
    z.generators.col(0) = Vec2(1.0, 0.2);
    z.generators.col(1) = Vec2(-0.4, 0.9);
    z.generators.col(2) = Vec2(0.1, 0.5);
    const HPolytope poly = to_hpolytope(z);
    for (int k = 0; k < 360; ++k) {
        const double a = k * std::numbers::pi / 180.0;
        const Vec2 d(std::cos(a), std::sin(a));
        CHECK(support(poly, d) == doctest::Approx(oracle::zonotope_support(z, d)).epsilon(1e-9));
    }
}

TEST_CASE("partition covers free space and respects obstacles") {
    const HPolytope box = make_box(0.0, 0.0, 4.0, 4.0);

    SUBCASE("no obstacles yields the box itself") {
        const ConvexPartition part = partition_free_space(box, {});
        REQUIRE(part.cells.size() == 1);
        CHECK(area(part.cells[0]) == doctest::Approx(16.0));
    }

    SUBCASE("centered hole splits the box and preserves area") {
        const HPolytope hole = make_box(1.5, 1.5, 2.5, 2.5);
        const ConvexPartition part = partition_free_space(box, {hole});
        CHECK(part.cells.size() >= 4);
        double total = 0.0;
        for (const HPolytope& cell : part.cells) {
            total += area(cell);
        }
        CHECK(total == doctest::Approx(16.0 - 1.0).epsilon(1e-6));
    }

    SUBCASE("obstacle covering the box leaves nothing") {
        const HPolytope cover = make_box(-1.0, -1.0, 5.0, 5.0);
        const ConvexPartition part = partition_free_space(box, {cover});
        CHECK(part.cells.empty());
    }
}

TEST_CASE("partition cells avoid obstacle interiors at sampled points") {
    const HPolytope box = make_box(0.0, 0.0, 5.0, 5.0);
    const std::vector<HPolytope> obstacles{
        bloat(from_vertices({{1.0, 1.0}, {2.0, 1.2}, {1.6, 2.1}}), 0.2),
        bloat(make_box(3.0, 2.5, 4.2, 3.8), 0.2)};
    const ConvexPartition part = partition_free_space(box, obstacles);
    REQUIRE_FALSE(part.cells.empty());

    std::vector<std::vector<Vec2>> rings;
    for (const HPolytope& cell : part.cells) {
        rings.push_back(vertices(cell));
    }
    std::vector<std::vector<Vec2>> obstacle_rings;
    for (const HPolytope& ob : obstacles) {
        obstacle_rings.push_back(vertices(ob));
    }

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(0.0, 5.0);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        const Vec2 p(coord(rng), coord(rng));
        bool in_cell = false;
        for (const auto& ring : rings) {
            in_cell = in_cell || oracle::point_in_convex(ring, p, 1e-9);
        }
        if (!in_cell) {
            continue;
        }
        ++checked;
        for (const auto& ob : obstacle_rings) {
            CHECK_FALSE(oracle::point_in_convex(ob, p, -1e-9));
        }
    }
    CHECK(checked > 5000);

    double total = 0.0;
    for (const auto& ring : rings) {
        total += oracle::shoelace(ring);
    }
    double obstacle_area = 0.0;
    for (const auto& ob : obstacle_rings) {
        obstacle_area += oracle::shoelace(ob);
    }
    CHECK(total == doctest::Approx(25.0 - obstacle_area).epsilon(1e-6));
}

TEST_CASE("polytopes_intersect matches separating-axis expectations") {
    const HPolytope a = make_box(0.0, 0.0, 1.0, 1.0);
    CHECK(polytopes_intersect(a, make_box(0.5, 0.5, 1.5, 1.5)));
    CHECK_FALSE(polytopes_intersect(a, make_box(1.2, 0.0, 2.0, 1.0)));
    CHECK(polytopes_intersect(a, make_box(1.0, 0.0, 2.0, 1.0)));  // shared edge
    CHECK(polytopes_intersect(a, make_box(0.2, 0.2, 0.8, 0.8)));  // containment
}

TEST_CASE("clip_polygon returns the intersection area") {
    const std::vector<Vec2> square{{0.0, 0.0}, {2.0, 0.0}, {2.0, 2.0}, {0.0, 2.0}};
    const std::vector<Vec2> clipped = clip_polygon(square, make_box(1.0, 1.0, 3.0, 3.0));
    CHECK(oracle::shoelace(clipped) == doctest::Approx(1.0));
    const std::vector<Vec2> outside = clip_polygon(square, make_box(5.0, 5.0, 6.0, 6.0));
    CHECK(outside.empty());
}

TEST_CASE("vertex ring round-trips through the halfspace form") {
    const std::vector<Vec2> ring{{0.0, 0.0}, {3.0, 0.5}, {2.5, 2.0}, {0.5, 2.5}};
    const std::vector<Vec2> back = vertices(from_vertices(ring));
    REQUIRE(back.size() == ring.size());
    CHECK(oracle::shoelace(back) == doctest::Approx(oracle::shoelace(ring)).epsilon(1e-9));
    for (const Vec2& v : ring) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec2& w : back) {
            best = std::min(best, (v - w).norm());
        }
        CHECK(best == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("polyline_length accumulates segment lengths") {
    CHECK(polyline_length({{0.0, 0.0}, {3.0, 4.0}}) == doctest::Approx(5.0));
    CHECK(polyline_length({{0.0, 0.0}}) == doctest::Approx(0.0));
    CHECK(polyline_length({{0.0, 0.0}, {1.0, 0.0}, {1.0, 2.0}}) == doctest::Approx(3.0));
}
