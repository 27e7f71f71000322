// Approximate medial axis of free space: circumcenters of 3-connected
// triangles become graph nodes, chains of 2-connected circumcenters become
// corridor edges. Blocked corridors are deleted from the graph without ever
// re-triangulating.
#pragma once

#include "manav/delaunay.hpp"
#include "manav/geometry.hpp"

#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace manav {

enum class NodeKind { permanent, endpoint, backtrack };

// Corridor multigraph. Parallel corridors between the same node pair are kept
// as distinct chains; adjacency(i,j) = 1 iff at least one chain survives.
// Chains are stored oriented from the lower node index to the higher.
struct MedialAxisGraph {
    std::vector<Vec2> node_pos;
    std::vector<int> node_triangle;    // −1 when the node has no home triangle
    std::vector<NodeKind> node_kind;
    Eigen::MatrixXi adjacency;
    std::map<std::pair<int, int>, std::vector<std::vector<Vec2>>> chains;

    int num_nodes() const { return static_cast<int>(node_pos.size()); }
};

struct RouteChain {
    int from = -1;
    int to = -1;
    std::vector<Vec2> polyline;  // oriented along travel, from → to
};

struct Route {
    std::vector<int> nodes;           // visited node ids, chains.size() + 1 entries
    std::vector<RouteChain> chains;
    std::vector<Vec2> waypoints;      // flattened polyline, consecutive duplicates removed
    double cost = 0.0;
};

// Free-space mesh: box minus obstacles, obstacle-interior triangles removed.
// max_edge bounds the boundary segment length (see triangulate_free_space).
TriangulationMesh triangulate(const HPolytope& box, const std::vector<HPolytope>& obstacles,
                              double max_edge = std::numeric_limits<double>::infinity());

MedialAxisGraph build_graph(const TriangulationMesh& mesh);

// Circumcenter nearest to q_veh among triangles in the same connected
// component of free space; ties broken toward the lowest triangle index.
std::pair<Vec2, int> nearest_circumcenter(const TriangulationMesh& mesh, const Vec2& q_veh);

// Appends a node to the graph and returns its id.
int add_node(MedialAxisGraph& graph, const Vec2& pos, int triangle, NodeKind kind);

// Registers a chain between nodes a and b (polyline given a → b) and sets adjacency.
void add_chain(MedialAxisGraph& graph, int a, int b, std::vector<Vec2> polyline);

// Adds temporary nodes at start and goal, each connected along circumcenter
// sequences to the nearest graph nodes (or directly to each other when they
// share a corridor). Returns (start node id, goal node id).
std::pair<int, int> attach_endpoints(MedialAxisGraph& graph, const TriangulationMesh& mesh,
                                     const Vec2& start, const Vec2& goal);

// A* over chain arc lengths; among parallel chains the cheapest is used.
// Empty optional when start and goal are disconnected.
std::optional<Route> shortest_route(const MedialAxisGraph& graph, int start_node, int goal_node);

// Deletes the route chain containing p_near from the chain map and zeroes the
// adjacency entry when its chain set empties. The mesh is never touched.
// Returns the index of the removed chain within route.chains.
int remove_current_corridor(MedialAxisGraph& graph, const Route& route, const Vec2& p_near);

// Inserts a temporary node at q_veh chained backward along circumcenters to
// last_node, so the next search can back out of a deleted corridor. Any
// previous backtrack node (other than last_node itself) is purged first.
// Returns the new node id.
int add_backtrack_edge(MedialAxisGraph& graph, const TriangulationMesh& mesh,
                       const Vec2& q_veh, int last_node);

// Removes all nodes of the given kind (and their chains) except `keep`.
// Node ids shift down; returns the new id of `keep` (−1 when keep = −1).
int purge_nodes(MedialAxisGraph& graph, NodeKind kind, int keep = -1);

}  // namespace manav
