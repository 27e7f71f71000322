// Convex-set primitives: halfspace polytopes, zonotopes, obstacle bloating,
// and convex partitioning of obstacle-free space.
#pragma once

#include <Eigen/Dense>
#include <vector>

namespace manav {

using Vec2 = Eigen::Vector2d;

// Intersection of halfspaces A*p <= b. Row normals point outward.
struct HPolytope {
    Eigen::MatrixX2d A;
    Eigen::VectorXd b;

    int num_halfspaces() const { return static_cast<int>(A.rows()); }
};

// center ⊕ { Σ ξ_i g_i : ξ_i ∈ [−1,1] }
struct Zonotope {
    Vec2 center = Vec2::Zero();
    Eigen::Matrix2Xd generators;

    int num_generators() const { return static_cast<int>(generators.cols()); }
};

// Convex cells with pairwise disjoint interiors covering a free-space region.
struct ConvexPartition {
    std::vector<HPolytope> cells;
    HPolytope bounding_box;
};

// Vertex tolerance for coincident points; double-precision safe for a ~10 m arena.
inline constexpr double kGeomTol = 1e-9;

HPolytope make_box(double xmin, double ymin, double xmax, double ymax);

// Builds the halfspace representation of a convex CCW vertex ring.
HPolytope from_vertices(const std::vector<Vec2>& ring);

// Enumerates the vertices of a bounded polytope as a CCW ring.
std::vector<Vec2> vertices(const HPolytope& poly);

bool contains(const HPolytope& poly, const Vec2& p, double tol);

// Returns a copy with every row normal scaled to unit length.
HPolytope normalized(const HPolytope& poly);

// Offsets every halfspace outward by margin (normals are normalized first).
HPolytope bloat(const HPolytope& obstacle, double margin);

Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b);

// Support function h(d) = d·c + Σ |d·g_i|.
double support(const Zonotope& z, const Vec2& dir);
double support(const HPolytope& poly, const Vec2& dir);

// Regular hexagon of the given circumradius, centered at the origin,
// as a zonotope with exactly 3 generators.
Zonotope regular_hexagon(double circumradius);

// Exact halfspace representation of a 2-D zonotope.
HPolytope to_hpolytope(const Zonotope& z);

double polygon_area(const std::vector<Vec2>& ring);
double area(const HPolytope& poly);

// True when the two polytopes share at least one point (separating-axis test).
bool polytopes_intersect(const HPolytope& a, const HPolytope& b);

// Arc length of an open polyline.
double polyline_length(const std::vector<Vec2>& pts);

// Sutherland–Hodgman clip of a convex CCW ring against a convex polytope.
std::vector<Vec2> clip_polygon(const std::vector<Vec2>& ring, const HPolytope& clip);

// Triangulates box minus the union of the obstacles, then greedily merges
// triangles across inessential diagonals (Hertel–Mehlhorn). Cells are convex
// and cover the free space; an empty free space yields zero cells.
ConvexPartition partition_free_space(const HPolytope& box,
                                     const std::vector<HPolytope>& obstacles);

}  // namespace manav
