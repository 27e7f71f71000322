#include "manav/scenario.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

namespace manav {

namespace {

// One polygon ring as [[x, y], ...] in meters.
nlohmann::json ring_json(const HPolytope& poly) {
    nlohmann::json ring = nlohmann::json::array();
    for (const Vec2& v : vertices(poly)) {
        ring.push_back({v.x(), v.y()});
    }
    return ring;
}

std::vector<HPolytope> read_rings(const nlohmann::json& arr) {
    std::vector<HPolytope> out;
    for (const auto& ring : arr) {
        std::vector<Vec2> pts;
        for (const auto& p : ring) {
            pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        }
        out.push_back(from_vertices(pts));
    }
    return out;
}

}  // namespace

Scenario generate_map(std::uint64_t seed, const MapSpec& spec) {
    if (spec.mapped_count < 0 || spec.unmapped_count < 0) {
        throw std::invalid_argument("generate_map: obstacle counts must be nonnegative");
    }
    if (spec.unmapped_radius_max >= spec.mapped_radius_min) {
        throw std::invalid_argument("generate_map: size ranges must be disjoint, mapped larger");
    }
    if (spec.wall_clearance < 0.0) {
        throw std::invalid_argument("generate_map: negative wall clearance");
    }
    if ((spec.arena_max - spec.arena_min).minCoeff() <=
        2.0 * (spec.mapped_radius_max + spec.wall_clearance)) {
        throw std::invalid_argument("generate_map: arena too small for the obstacle size");
    }

    Scenario s;
    s.seed = seed;
    s.arena_min = spec.arena_min;
    s.arena_max = spec.arena_max;
    s.start = spec.start;
    s.start_heading = spec.start_heading;
    s.goal = spec.goal;
    s.robot_radius = spec.robot_radius;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> vertex_count(4, 7);
    int attempts_left = spec.attempt_budget;

    const auto sample_class = [&](int count, double r_min, double r_max,
                                  std::vector<HPolytope>& out) {
        while (static_cast<int>(out.size()) < count) {
            if (--attempts_left < 0) {
                throw std::runtime_error("generate_map: rejection budget exhausted");
            }
            const double radius = r_min + (r_max - r_min) * unit(rng);
            // Keeping obstacles off the walls keeps the free-space boundary
            // triangles well shaped, so route waypoints stay inside the arena.
            const double inset = radius + spec.wall_clearance;
            const Vec2 lo = spec.arena_min + Vec2(inset, inset);
            const Vec2 hi = spec.arena_max - Vec2(inset, inset);
            const Vec2 center(lo.x() + (hi.x() - lo.x()) * unit(rng),
                              lo.y() + (hi.y() - lo.y()) * unit(rng));
            const int k = vertex_count(rng);
            std::vector<double> ang(static_cast<std::size_t>(k));
            for (double& a : ang) {
                a = 2.0 * std::numbers::pi * unit(rng);
            }
            std::sort(ang.begin(), ang.end());
            bool thin = ang.front() + 2.0 * std::numbers::pi - ang.back() < 0.25;
            for (int i = 0; i + 1 < k && !thin; ++i) {
                thin = ang[static_cast<std::size_t>(i) + 1] - ang[static_cast<std::size_t>(i)] < 0.25;
            }
            if (thin) {
                continue;
            }
            const double sx = 0.7 + 0.3 * unit(rng);
            const double sy = 0.7 + 0.3 * unit(rng);
            std::vector<Vec2> ring;
            ring.reserve(static_cast<std::size_t>(k));
            for (const double a : ang) {
                ring.push_back(center + Vec2(radius * sx * std::cos(a), radius * sy * std::sin(a)));
            }
            const HPolytope poly = from_vertices(ring);

            const HPolytope gap_poly = bloat(poly, spec.obstacle_gap);
            bool clash = false;
            for (const HPolytope& other : s.mapped) {
                clash = clash || polytopes_intersect(gap_poly, other);
            }
            for (const HPolytope& other : s.unmapped) {
                clash = clash || polytopes_intersect(gap_poly, other);
            }
            const HPolytope keepout = bloat(poly, spec.endpoint_clearance);
            if (clash || contains(keepout, s.start, 0.0) || contains(keepout, s.goal, 0.0)) {
                continue;
            }
            out.push_back(poly);
        }
    };
    sample_class(spec.mapped_count, spec.mapped_radius_min, spec.mapped_radius_max, s.mapped);
    sample_class(spec.unmapped_count, spec.unmapped_radius_min, spec.unmapped_radius_max,
                 s.unmapped);
    return s;
}

ConvexPartition local_map(const Scenario& scenario, const Vec2& q_veh, double bloat_margin) {
    if (bloat_margin < 0.0) {
        throw std::invalid_argument("local_map: negative bloat margin");
    }
    const double half = 0.5 * kLocalMapSize;
    const double xmin = std::max(scenario.arena_min.x(), q_veh.x() - half);
    const double ymin = std::max(scenario.arena_min.y(), q_veh.y() - half);
    const double xmax = std::min(scenario.arena_max.x(), q_veh.x() + half);
    const double ymax = std::min(scenario.arena_max.y(), q_veh.y() + half);
    if (xmin >= xmax || ymin >= ymax) {
        throw std::invalid_argument("local_map: vehicle outside the arena");
    }
    const HPolytope box = make_box(xmin, ymin, xmax, ymax);

    std::vector<HPolytope> bloated;
    bloated.reserve(scenario.mapped.size() + scenario.unmapped.size());
    for (const HPolytope& o : scenario.mapped) {
        bloated.push_back(bloat(o, bloat_margin));
    }
    for (const HPolytope& o : scenario.unmapped) {
        bloated.push_back(bloat(o, bloat_margin));
    }
    return partition_free_space(box, bloated);
}

void write_scenario(std::ostream& os, const Scenario& s) {
    nlohmann::json mapped = nlohmann::json::array();
    for (const HPolytope& o : s.mapped) {
        mapped.push_back(ring_json(o));
    }
    nlohmann::json unmapped = nlohmann::json::array();
    for (const HPolytope& o : s.unmapped) {
        unmapped.push_back(ring_json(o));
    }
    const nlohmann::json j{{"seed", s.seed},
                           {"arena_m", {s.arena_min.x(), s.arena_min.y(), s.arena_max.x(),
                                        s.arena_max.y()}},
                           {"start_m", {s.start.x(), s.start.y()}},
                           {"start_heading_rad", s.start_heading},
                           {"goal_m", {s.goal.x(), s.goal.y()}},
                           {"robot_radius_m", s.robot_radius},
                           {"mapped_obstacles_m", mapped},
                           {"unmapped_obstacles_m", unmapped}};
    os << j.dump(2) << '\n';
}

Scenario read_scenario(std::istream& is) {
    nlohmann::json j;
    is >> j;
    Scenario s;
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto& arena = j.at("arena_m");
    s.arena_min = Vec2(arena.at(0).get<double>(), arena.at(1).get<double>());
    s.arena_max = Vec2(arena.at(2).get<double>(), arena.at(3).get<double>());
    s.start = Vec2(j.at("start_m").at(0).get<double>(), j.at("start_m").at(1).get<double>());
    s.start_heading = j.at("start_heading_rad").get<double>();
    s.goal = Vec2(j.at("goal_m").at(0).get<double>(), j.at("goal_m").at(1).get<double>());
    s.robot_radius = j.at("robot_radius_m").get<double>();
    s.mapped = read_rings(j.at("mapped_obstacles_m"));
    s.unmapped = read_rings(j.at("unmapped_obstacles_m"));
    if ((s.arena_max - s.arena_min).minCoeff() <= 0.0) {
        throw std::invalid_argument("read_scenario: degenerate arena");
    }
    return s;
}

}  // namespace manav
