#pragma once

#include "manav/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace manav {

// World description: a rectangular arena with two obstacle classes. Mapped
// obstacles are known to the global planner; unmapped ones only appear in the
// local map once the vehicle is close.
struct Scenario {
    std::uint64_t seed = 0;
    Vec2 arena_min = Vec2::Zero();
    Vec2 arena_max = Vec2(10.0, 10.0);
    std::vector<HPolytope> mapped;
    std::vector<HPolytope> unmapped;
    Vec2 start = Vec2(1.0, 1.0);
    double start_heading = 0.0;  // rad
    Vec2 goal = Vec2(9.0, 9.0);
    double robot_radius = 0.15;  // meters

    HPolytope arena_box() const { return make_box(arena_min.x(), arena_min.y(),
                                                  arena_max.x(), arena_max.y()); }
};

// Sampling parameters for random maps. Mapped obstacles must be strictly
// larger than unmapped ones (disjoint size ranges).
struct MapSpec {
    Vec2 arena_min = Vec2::Zero();
    Vec2 arena_max = Vec2(10.0, 10.0);
    int mapped_count = 6;
    int unmapped_count = 3;
    double mapped_radius_min = 0.6;
    double mapped_radius_max = 1.0;
    double unmapped_radius_min = 0.25;
    double unmapped_radius_max = 0.5;
    Vec2 start = Vec2(1.0, 1.0);
    double start_heading = 0.0;
    Vec2 goal = Vec2(9.0, 9.0);
    double robot_radius = 0.15;
    double obstacle_gap = 1.0;        // min separation between obstacles
    double wall_clearance = 0.8;      // min obstacle distance to the arena walls
    double endpoint_clearance = 0.8;  // min obstacle distance to start/goal
    int attempt_budget = 20000;
};

// Side length of the square local map extracted around the vehicle.
inline constexpr double kLocalMapSize = 2.1;  // meters

// Rejection-samples convex obstacles (4–7 vertices each, inscribed in a
// randomly scaled circle) until separation and endpoint-clearance constraints
// hold. Deterministic for a given seed.
Scenario generate_map(std::uint64_t seed, const MapSpec& spec = {});

// Convex partition of the free space inside the local box centered at q_veh
// (clipped to the arena). Every obstacle, mapped or unmapped, is bloated by
// `bloat_margin` before subtraction.
ConvexPartition local_map(const Scenario& scenario, const Vec2& q_veh, double bloat_margin);

// Human-readable single-document serialization with explicit units in keys.
void write_scenario(std::ostream& os, const Scenario& s);
Scenario read_scenario(std::istream& is);

}  // namespace manav
