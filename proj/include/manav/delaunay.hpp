// Constrained Delaunay triangulation (Bowyer–Watson insertion + edge flips
// to enforce constraint segments). Predicates are evaluated in long double
// with a relative-error filter, which is ample for metre-scale maps.
#pragma once

#include "manav/geometry.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

namespace manav {

struct Triangle {
    std::array<int, 3> v;          // CCW vertex indices
    std::array<int, 3> neighbor;   // neighbor[i] faces edge (v[i+1], v[i+2]); −1 = hull
};

struct TriangulationMesh {
    std::vector<Vec2> points;
    std::vector<Triangle> triangles;
    // Constrained edges as sorted vertex-index pairs.
    std::vector<std::pair<int, int>> constrained_edges;

    Vec2 circumcenter(int tri) const;
    Vec2 centroid(int tri) const;
    bool is_constrained(int a, int b) const;
};

// How many triangulations have been built process-wide. Lets tests assert
// that graph surgery does not silently re-triangulate.
std::uint64_t triangulation_count();
void reset_triangulation_count();

// Triangulates the points with the given segments (index pairs into points)
// forced to appear as edges. Crossing segments are split at their
// intersections; duplicate points are merged.
TriangulationMesh constrained_delaunay(std::vector<Vec2> points,
                                       std::vector<std::pair<int, int>> segments);

// Recomputes Triangle::neighbor from shared edges (e.g. after dropping triangles).
void rebuild_adjacency(TriangulationMesh& mesh);

// Constrained Delaunay triangulation of box minus the obstacle union: obstacle
// and box edges become constraints, triangles with centroid inside an obstacle
// are dropped, and adjacency is rebuilt over the survivors. Boundary edges
// longer than max_edge are split into equal parts before triangulating; long
// unsplit boundary edges produce triangles whose circumcenters land far
// outside the region.
TriangulationMesh triangulate_free_space(
    const HPolytope& box, const std::vector<HPolytope>& obstacles,
    double max_edge = std::numeric_limits<double>::infinity());

}  // namespace manav
