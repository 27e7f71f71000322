#include "manav/medial_axis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace manav {

namespace {

int triangle_degree(const TriangulationMesh& mesh, int t) {
    int d = 0;
    for (int n : mesh.triangles[t].neighbor) {
        d += n >= 0 ? 1 : 0;
    }
    return d;
}

struct Walk {
    enum Kind { node, dead_end, cycle, target } kind = dead_end;
    int terminal = -1;
    std::vector<int> through;  // 2-connected triangles strictly between the ends
};

// Follows the corridor entered by stepping from `from` into `first` until a
// 3-connected triangle, a dead end, the optional target triangle, or a return
// to the origin (pure 2-connected cycle).
Walk walk_corridor(const TriangulationMesh& mesh, int from, int first, int target) {
    Walk w;
    int prev = from;
    int cur = first;
    while (true) {
        if (cur == target) {
            w.kind = Walk::target;
            w.terminal = cur;
            return w;
        }
        if (cur == from) {
            w.kind = Walk::cycle;
            return w;
        }
        const int d = triangle_degree(mesh, cur);
        if (d >= 3) {
            w.kind = Walk::node;
            w.terminal = cur;
            return w;
        }
        if (d <= 1) {
            w.kind = Walk::dead_end;
            return w;
        }
        w.through.push_back(cur);
        int next = -1;
        for (int n : mesh.triangles[cur].neighbor) {
            if (n >= 0 && n != prev) {
                next = n;
            }
        }
        prev = cur;
        cur = next;
    }
}

void append_deduped(std::vector<Vec2>& poly, const Vec2& p) {
    if (poly.empty() || (poly.back() - p).norm() > kGeomTol) {
        poly.push_back(p);
    }
}

std::vector<Vec2> reversed(std::vector<Vec2> poly) {
    std::reverse(poly.begin(), poly.end());
    return poly;
}

bool same_polyline(const std::vector<Vec2>& a, const std::vector<Vec2>& b, double tol) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] - b[i]).norm() > tol) {
            return false;
        }
    }
    return true;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * ab)).norm();
}

// Zero inside the triangle, otherwise the distance to its nearest edge.
double point_triangle_distance(const TriangulationMesh& mesh, int t, const Vec2& p) {
    const auto& v = mesh.triangles[t].v;
    bool inside = true;
    double edge = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        const Vec2& a = mesh.points[v[i]];
        const Vec2& b = mesh.points[v[(i + 1) % 3]];
        const Vec2 ab = b - a;
        inside = inside && ab.x() * (p - a).y() - ab.y() * (p - a).x() >= -kGeomTol;
        edge = std::min(edge, point_segment_distance(p, a, b));
    }
    return inside ? 0.0 : edge;
}

// Triangle indices adjacency-connected to `seed`.
std::vector<char> triangle_component(const TriangulationMesh& mesh, int seed) {
    std::vector<char> in(mesh.triangles.size(), 0);
    std::queue<int> bfs;
    bfs.push(seed);
    in[seed] = 1;
    while (!bfs.empty()) {
        const int t = bfs.front();
        bfs.pop();
        for (int n : mesh.triangles[t].neighbor) {
            if (n >= 0 && !in[n]) {
                in[n] = 1;
                bfs.push(n);
            }
        }
    }
    return in;
}

}  // namespace

TriangulationMesh triangulate(const HPolytope& box, const std::vector<HPolytope>& obstacles,
                              double max_edge) {
    return triangulate_free_space(box, obstacles, max_edge);
}

std::pair<Vec2, int> nearest_circumcenter(const TriangulationMesh& mesh, const Vec2& q_veh) {
    if (mesh.triangles.empty()) {
        throw std::invalid_argument("nearest_circumcenter: empty mesh");
    }
    // Restrict to the free-space component the vehicle occupies, so a nearby
    // circumcenter across a wall can never win.
    int seed = 0;
    double seed_d = std::numeric_limits<double>::infinity();
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const double d = point_triangle_distance(mesh, t, q_veh);
        if (d < seed_d) {
            seed_d = d;
            seed = t;
        }
    }
    const std::vector<char> component = triangle_component(mesh, seed);
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        if (!component[t]) {
            continue;
        }
        const double d2 = (mesh.circumcenter(t) - q_veh).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = t;
        }
    }
    return {mesh.circumcenter(best), best};
}

int add_node(MedialAxisGraph& graph, const Vec2& pos, int triangle, NodeKind kind) {
    graph.node_pos.push_back(pos);
    graph.node_triangle.push_back(triangle);
    graph.node_kind.push_back(kind);
    const int n = graph.num_nodes();
    Eigen::MatrixXi grown = Eigen::MatrixXi::Zero(n, n);
    if (n > 1) {
        grown.topLeftCorner(n - 1, n - 1) = graph.adjacency;
    }
    graph.adjacency = std::move(grown);
    return n - 1;
}

void add_chain(MedialAxisGraph& graph, int a, int b, std::vector<Vec2> polyline) {
    if (a < 0 || b < 0 || a >= graph.num_nodes() || b >= graph.num_nodes()) {
        throw std::invalid_argument("add_chain: node id out of range");
    }
    if (a == b) {
        throw std::invalid_argument("add_chain: self-loop chains not allowed");
    }
    if (a > b) {
        std::swap(a, b);
        std::reverse(polyline.begin(), polyline.end());
    }
    std::vector<Vec2> clean;
    for (const Vec2& p : polyline) {
        append_deduped(clean, p);
    }
    graph.chains[{a, b}].push_back(std::move(clean));
    graph.adjacency(a, b) = 1;
    graph.adjacency(b, a) = 1;
}

MedialAxisGraph build_graph(const TriangulationMesh& mesh) {
    MedialAxisGraph g;
    const int nt = static_cast<int>(mesh.triangles.size());
    std::vector<int> node_of(nt, -1);
    for (int t = 0; t < nt; ++t) {
        if (triangle_degree(mesh, t) == 3) {
            node_of[t] = g.num_nodes();
            g.node_pos.push_back(mesh.circumcenter(t));
            g.node_triangle.push_back(t);
            g.node_kind.push_back(NodeKind::permanent);
        }
    }
    g.adjacency = Eigen::MatrixXi::Zero(g.num_nodes(), g.num_nodes());

    for (int t = 0; t < nt; ++t) {
        if (node_of[t] < 0) {
            continue;
        }
        for (int slot = 0; slot < 3; ++slot) {
            const int first = mesh.triangles[t].neighbor[slot];
            if (first < 0) {
                continue;
            }
            const Walk w = walk_corridor(mesh, t, first, -1);
            // Dead-end corridors terminate without a node; 2-connected cycles
            // would be self-loops and are dropped (adjacency diagonal is zero).
            if (w.kind != Walk::node) {
                continue;
            }
            const int other = node_of[w.terminal];
            if (node_of[t] >= other) {
                continue;  // each chain recorded once, low node → high node
            }
            std::vector<Vec2> poly;
            append_deduped(poly, mesh.circumcenter(t));
            for (int mid : w.through) {
                append_deduped(poly, mesh.circumcenter(mid));
            }
            append_deduped(poly, mesh.circumcenter(w.terminal));
            add_chain(g, node_of[t], other, std::move(poly));
        }
    }
    return g;
}

std::pair<int, int> attach_endpoints(MedialAxisGraph& graph, const TriangulationMesh& mesh,
                                     const Vec2& start, const Vec2& goal) {
    const auto [cc_s, tri_s] = nearest_circumcenter(mesh, start);
    const auto [cc_g, tri_g] = nearest_circumcenter(mesh, goal);
    (void)cc_s;
    (void)cc_g;

    std::vector<int> node_of(mesh.triangles.size(), -1);
    for (int i = 0; i < graph.num_nodes(); ++i) {
        if (graph.node_kind[i] == NodeKind::permanent && graph.node_triangle[i] >= 0) {
            node_of[graph.node_triangle[i]] = i;
        }
    }

    const int s_id = add_node(graph, start, tri_s, NodeKind::endpoint);
    const int g_id = add_node(graph, goal, tri_g, NodeKind::endpoint);

    // Connects `id` (at pos, home triangle tri) to the nodes reachable through
    // its corridor; a walk reaching other_tri links the endpoints directly
    // when other_tri is not itself a node triangle.
    auto attach_one = [&](int id, const Vec2& pos, int tri, int other_tri, int other_id,
                          const Vec2& other_pos, bool add_direct) {
        if (triangle_degree(mesh, tri) == 3) {
            if (node_of[tri] < 0) {
                throw std::logic_error("attach_endpoints: graph does not match mesh");
            }
            add_chain(graph, id, node_of[tri], {pos, mesh.circumcenter(tri)});
            return;
        }
        for (int slot = 0; slot < 3; ++slot) {
            const int first = mesh.triangles[tri].neighbor[slot];
            if (first < 0) {
                continue;
            }
            const Walk w = walk_corridor(mesh, tri, first, other_tri);
            if (w.kind != Walk::node && w.kind != Walk::target) {
                continue;
            }
            std::vector<Vec2> poly;
            append_deduped(poly, pos);
            append_deduped(poly, mesh.circumcenter(tri));
            for (int mid : w.through) {
                append_deduped(poly, mesh.circumcenter(mid));
            }
            append_deduped(poly, mesh.circumcenter(w.terminal));
            if (w.kind == Walk::node || node_of[w.terminal] >= 0) {
                add_chain(graph, id, node_of[w.terminal], std::move(poly));
            } else if (add_direct) {
                append_deduped(poly, other_pos);
                add_chain(graph, id, other_id, std::move(poly));
            }
        }
    };

    if (tri_s == tri_g) {
        add_chain(graph, s_id, g_id, {start, goal});
        attach_one(s_id, start, tri_s, -1, -1, Vec2::Zero(), false);
        attach_one(g_id, goal, tri_g, -1, -1, Vec2::Zero(), false);
    } else {
        attach_one(s_id, start, tri_s, tri_g, g_id, goal, true);
        attach_one(g_id, goal, tri_g, tri_s, s_id, start, false);
    }
    return {s_id, g_id};
}

std::optional<Route> shortest_route(const MedialAxisGraph& graph, int start_node,
                                    int goal_node) {
    const int n = graph.num_nodes();
    if (start_node < 0 || goal_node < 0 || start_node >= n || goal_node >= n) {
        throw std::invalid_argument("shortest_route: node id out of range");
    }
    if (start_node == goal_node) {
        Route r;
        r.nodes = {start_node};
        r.waypoints = {graph.node_pos[start_node]};
        return r;
    }

    struct HalfEdge {
        int to;
        double len;
        const std::vector<Vec2>* poly;
        bool rev;  // stored polyline runs to → from
    };
    std::vector<std::vector<HalfEdge>> out(n);
    for (const auto& [key, set] : graph.chains) {
        for (const auto& poly : set) {
            const double len = polyline_length(poly);
            out[key.first].push_back({key.second, len, &poly, false});
            out[key.second].push_back({key.first, len, &poly, true});
        }
    }

    const auto h = [&](int u) { return (graph.node_pos[u] - graph.node_pos[goal_node]).norm(); };
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    std::vector<const HalfEdge*> via(n, nullptr);
    std::vector<int> parent(n, -1);
    using Entry = std::tuple<double, int>;  // (f, node) — node index breaks ties
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    dist[start_node] = 0.0;
    open.emplace(h(start_node), start_node);
    while (!open.empty()) {
        const auto [f, u] = open.top();
        open.pop();
        if (f > dist[u] + h(u) + 1e-12) {
            continue;  // stale entry
        }
        if (u == goal_node) {
            break;
        }
        for (const HalfEdge& e : out[u]) {
            const double nd = dist[u] + e.len;
            if (nd < dist[e.to]) {
                dist[e.to] = nd;
                parent[e.to] = u;
                via[e.to] = &e;
                open.emplace(nd + h(e.to), e.to);
            }
        }
    }
    if (!std::isfinite(dist[goal_node])) {
        return std::nullopt;
    }

    Route r;
    r.cost = dist[goal_node];
    std::vector<int> rev_nodes;
    std::vector<const HalfEdge*> rev_edges;
    for (int u = goal_node; u != -1; u = parent[u]) {
        rev_nodes.push_back(u);
        if (via[u] != nullptr) {
            rev_edges.push_back(via[u]);
        }
    }
    std::reverse(rev_nodes.begin(), rev_nodes.end());
    std::reverse(rev_edges.begin(), rev_edges.end());
    r.nodes = rev_nodes;
    for (std::size_t i = 0; i < rev_edges.size(); ++i) {
        RouteChain rc;
        rc.from = rev_nodes[i];
        rc.to = rev_nodes[i + 1];
        rc.polyline = rev_edges[i]->rev ? reversed(*rev_edges[i]->poly) : *rev_edges[i]->poly;
        for (const Vec2& p : rc.polyline) {
            append_deduped(r.waypoints, p);
        }
        r.chains.push_back(std::move(rc));
    }
    return r;
}

int remove_current_corridor(MedialAxisGraph& graph, const Route& route, const Vec2& p_near) {
    constexpr double tol = 1e-9;
    int pick = -1;
    bool interior_found = false;
    for (std::size_t i = 0; i < route.chains.size(); ++i) {
        const auto& poly = route.chains[i].polyline;
        for (std::size_t j = 0; j < poly.size(); ++j) {
            if ((poly[j] - p_near).norm() >= tol) {
                continue;
            }
            const bool interior = j > 0 && j + 1 < poly.size();
            if (interior && !interior_found) {
                pick = static_cast<int>(i);
                interior_found = true;
            } else if (!interior_found) {
                pick = static_cast<int>(i);  // latest endpoint match wins
            }
        }
    }
    if (pick < 0) {
        throw std::invalid_argument("remove_current_corridor: p_near is not on the route");
    }

    const RouteChain& rc = route.chains[static_cast<std::size_t>(pick)];
    const int a = std::min(rc.from, rc.to);
    const int b = std::max(rc.from, rc.to);
    const auto it = graph.chains.find({a, b});
    if (it == graph.chains.end()) {
        throw std::invalid_argument("remove_current_corridor: route chain not in the graph");
    }
    const std::vector<Vec2> want = rc.from <= rc.to ? rc.polyline : reversed(rc.polyline);
    auto& set = it->second;
    int found = -1;
    for (std::size_t k = 0; k < set.size() && found < 0; ++k) {
        if (same_polyline(set[k], want, tol)) {
            found = static_cast<int>(k);
        }
    }
    if (found < 0) {
        throw std::invalid_argument("remove_current_corridor: route chain not in the graph");
    }
    set.erase(set.begin() + found);
    if (set.empty()) {
        graph.chains.erase(it);
        graph.adjacency(a, b) = 0;
        graph.adjacency(b, a) = 0;
    }
    return pick;
}

int add_backtrack_edge(MedialAxisGraph& graph, const TriangulationMesh& mesh,
                       const Vec2& q_veh, int last_node) {
    if (last_node < 0 || last_node >= graph.num_nodes()) {
        throw std::invalid_argument("add_backtrack_edge: last_node out of range");
    }
    last_node = purge_nodes(graph, NodeKind::backtrack, last_node);
    const int target = graph.node_triangle[last_node];
    if (target < 0) {
        throw std::invalid_argument("add_backtrack_edge: last node has no home triangle");
    }
    const auto [cc_q, tri_q] = nearest_circumcenter(mesh, q_veh);
    (void)cc_q;
    const int id = add_node(graph, q_veh, tri_q, NodeKind::backtrack);
    if (tri_q == target) {
        add_chain(graph, id, last_node, {q_veh, graph.node_pos[last_node]});
        return id;
    }
    for (int slot = 0; slot < 3; ++slot) {
        const int first = mesh.triangles[tri_q].neighbor[slot];
        if (first < 0) {
            continue;
        }
        const Walk w = walk_corridor(mesh, tri_q, first, target);
        if (w.kind != Walk::target) {
            continue;
        }
        std::vector<Vec2> poly;
        append_deduped(poly, q_veh);
        append_deduped(poly, mesh.circumcenter(tri_q));
        for (int mid : w.through) {
            append_deduped(poly, mesh.circumcenter(mid));
        }
        append_deduped(poly, mesh.circumcenter(target));
        append_deduped(poly, graph.node_pos[last_node]);
        add_chain(graph, id, last_node, std::move(poly));
        return id;
    }
    throw std::runtime_error("add_backtrack_edge: no circumcenter path back to the last node");
}

int purge_nodes(MedialAxisGraph& graph, NodeKind kind, int keep) {
    const int n = graph.num_nodes();
    if (keep >= n) {
        throw std::invalid_argument("purge_nodes: keep id out of range");
    }
    std::vector<int> remap(n, -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        if (graph.node_kind[i] != kind || i == keep) {
            remap[i] = next++;
        }
    }
    if (next == n) {
        return keep;
    }

    MedialAxisGraph out;
    for (int i = 0; i < n; ++i) {
        if (remap[i] >= 0) {
            out.node_pos.push_back(graph.node_pos[i]);
            out.node_triangle.push_back(graph.node_triangle[i]);
            out.node_kind.push_back(graph.node_kind[i]);
        }
    }
    out.adjacency = Eigen::MatrixXi::Zero(next, next);
    for (auto& [key, set] : graph.chains) {
        const int a = remap[key.first];
        const int b = remap[key.second];
        if (a < 0 || b < 0) {
            continue;
        }
        // remap is monotone, so a < b still holds and orientation is preserved
        out.chains[{a, b}] = std::move(set);
        out.adjacency(a, b) = 1;
        out.adjacency(b, a) = 1;
    }
    graph = std::move(out);
    return keep >= 0 ? remap[keep] : -1;
}

}  // namespace manav
