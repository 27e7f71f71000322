#include "manav/delaunay.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <stdexcept>

namespace manav {

namespace {

std::atomic<std::uint64_t> g_triangulation_count{0};

// Filtered predicates: evaluate in long double and compare against a
// permanent-scaled threshold; ambiguous results are treated as degenerate.
constexpr long double kFilterEps = 1e-15L;

long double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    const long double detl = (static_cast<long double>(b.x()) - a.x()) *
                                 (static_cast<long double>(c.y()) - a.y()) -
                             (static_cast<long double>(b.y()) - a.y()) *
                                 (static_cast<long double>(c.x()) - a.x());
    const long double perm = std::abs((static_cast<long double>(b.x()) - a.x()) *
                                      (static_cast<long double>(c.y()) - a.y())) +
                             std::abs((static_cast<long double>(b.y()) - a.y()) *
                                      (static_cast<long double>(c.x()) - a.x()));
    if (std::abs(detl) <= kFilterEps * perm) {
        return 0.0L;
    }
    return detl;
}

// >0 iff p lies strictly inside the circumcircle of CCW triangle (a,b,c).
long double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
    const long double adx = a.x() - p.x(), ady = a.y() - p.y();
    const long double bdx = b.x() - p.x(), bdy = b.y() - p.y();
    const long double cdx = c.x() - p.x(), cdy = c.y() - p.y();
    const long double ad = adx * adx + ady * ady;
    const long double bd = bdx * bdx + bdy * bdy;
    const long double cd = cdx * cdx + cdy * cdy;
    const long double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                            ad * (bdx * cdy - bdy * cdx);
    const long double perm = std::abs(adx * bdy * cd) + std::abs(adx * bd * cdy) +
                             std::abs(ady * bdx * cd) + std::abs(ady * bd * cdx) +
                             std::abs(ad * bdx * cdy) + std::abs(ad * bdy * cdx);
    if (std::abs(det) <= kFilterEps * perm) {
        return 0.0L;
    }
    return det;
}

bool proper_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const long double o1 = orient(a, b, c);
    const long double o2 = orient(a, b, d);
    const long double o3 = orient(c, d, a);
    const long double o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && o1 != 0 && o2 != 0 &&
           ((o3 > 0) != (o4 > 0)) && o3 != 0 && o4 != 0;
}

// p strictly between a and b (collinear, not coincident with either endpoint).
bool strictly_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    if ((p - a).norm() < kGeomTol || (p - b).norm() < kGeomTol) {
        return false;
    }
    const Vec2 d = b - a;
    const double len = d.norm();
    if (len < kGeomTol) {
        return false;
    }
    if (std::abs(static_cast<double>(orient(a, b, p))) > kGeomTol * len) {
        return false;
    }
    const double t = d.dot(p - a) / (len * len);
    return t > 0.0 && t < 1.0;
}

Vec2 segment_intersection(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double denom = static_cast<double>(orient(c, d, a) - orient(c, d, b));
    const double t = static_cast<double>(orient(c, d, a)) / denom;
    return a + t * (b - a);
}

struct Builder {
    std::vector<Vec2> pts;
    std::vector<std::array<int, 3>> tris;
    std::vector<std::array<int, 3>> adj;  // adj[t][i] faces edge (v[i+1], v[i+2])
    std::map<std::pair<int, int>, bool> constrained;

    static std::pair<int, int> key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

    bool is_constrained(int a, int b) const { return constrained.count(key(a, b)) > 0; }

    void rebuild_adj() {
        adj.assign(tris.size(), {-1, -1, -1});
        std::map<std::pair<int, int>, std::pair<int, int>> seen;  // edge -> (tri, slot)
        for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
            for (int i = 0; i < 3; ++i) {
                const auto e = key(tris[t][(i + 1) % 3], tris[t][(i + 2) % 3]);
                auto it = seen.find(e);
                if (it == seen.end()) {
                    seen[e] = {t, i};
                } else {
                    adj[t][i] = it->second.first;
                    adj[it->second.first][it->second.second] = t;
                    seen.erase(it);
                }
            }
        }
    }

    int edge_slot(int t, int a, int b) const {
        for (int i = 0; i < 3; ++i) {
            const int u = tris[t][(i + 1) % 3];
            const int v = tris[t][(i + 2) % 3];
            if ((u == a && v == b) || (u == b && v == a)) {
                return i;
            }
        }
        return -1;
    }

    void push_ccw(int a, int b, int c) {
        if (orient(pts[a], pts[b], pts[c]) < 0) {
            std::swap(b, c);
        }
        tris.push_back({a, b, c});
    }

    void insert_point(int p) {
        rebuild_adj();
        // Containing triangle (closed), by exhaustive orientation scan.
        int start = -1;
        for (int t = 0; t < static_cast<int>(tris.size()) && start < 0; ++t) {
            bool in = true;
            for (int i = 0; i < 3; ++i) {
                in = in && orient(pts[tris[t][i]], pts[tris[t][(i + 1) % 3]], pts[p]) >= 0;
            }
            if (in) {
                start = t;
            }
        }
        if (start < 0) {
            throw std::runtime_error("constrained_delaunay: point outside super-triangle");
        }
        // Cavity: connected flood over triangles whose circumcircle contains p.
        std::vector<char> bad(tris.size(), 0);
        std::deque<int> work{start};
        bad[start] = 1;
        while (!work.empty()) {
            const int t = work.front();
            work.pop_front();
            for (int i = 0; i < 3; ++i) {
                const int n = adj[t][i];
                if (n < 0 || bad[n]) {
                    continue;
                }
                if (incircle(pts[tris[n][0]], pts[tris[n][1]], pts[tris[n][2]], pts[p]) > 0) {
                    bad[n] = 1;
                    work.push_back(n);
                }
            }
        }
        // Fan p to the cavity boundary.
        std::vector<std::array<int, 2>> boundary;
        for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
            if (!bad[t]) {
                continue;
            }
            for (int i = 0; i < 3; ++i) {
                const int n = adj[t][i];
                if (n < 0 || !bad[n]) {
                    boundary.push_back({tris[t][(i + 1) % 3], tris[t][(i + 2) % 3]});
                }
            }
        }
        std::vector<std::array<int, 3>> kept;
        for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
            if (!bad[t]) {
                kept.push_back(tris[t]);
            }
        }
        tris = std::move(kept);
        for (const auto& e : boundary) {
            if (orient(pts[e[0]], pts[e[1]], pts[p]) != 0) {
                push_ccw(e[0], e[1], p);
            }
        }
    }

    // Flips the diagonal shared by the two triangles adjacent to edge (a,b).
    // Returns false when the surrounding quad is not strictly convex.
    bool flip(int a, int b) {
        rebuild_adj();
        int t1 = -1, t2 = -1;
        for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
            if (edge_slot(t, a, b) >= 0) {
                (t1 < 0 ? t1 : t2) = t;
            }
        }
        if (t1 < 0 || t2 < 0) {
            return false;
        }
        const int w1 = tris[t1][edge_slot(t1, a, b)];
        const int w2 = tris[t2][edge_slot(t2, a, b)];
        // New diagonal (w1,w2) must properly cross (a,b).
        if (!proper_cross(pts[a], pts[b], pts[w1], pts[w2])) {
            return false;
        }
        tris.erase(tris.begin() + std::max(t1, t2));
        tris.erase(tris.begin() + std::min(t1, t2));
        push_ccw(w1, w2, a);
        push_ccw(w2, w1, b);
        return true;
    }

    void enforce_segment(int a, int b) {
        const std::size_t cap = 4 * tris.size() * tris.size() + 64;
        for (std::size_t iter = 0; iter < cap; ++iter) {
            bool exists = false;
            for (int t = 0; t < static_cast<int>(tris.size()) && !exists; ++t) {
                exists = edge_slot(t, a, b) >= 0;
            }
            if (exists) {
                constrained[key(a, b)] = true;
                return;
            }
            bool flipped = false;
            std::vector<std::pair<int, int>> crossing;
            for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
                for (int i = 0; i < 3; ++i) {
                    const int u = tris[t][(i + 1) % 3];
                    const int v = tris[t][(i + 2) % 3];
                    if (u < v && proper_cross(pts[a], pts[b], pts[u], pts[v])) {
                        crossing.emplace_back(u, v);
                    }
                }
            }
            for (const auto& [u, v] : crossing) {
                if (is_constrained(u, v)) {
                    throw std::runtime_error("constrained_delaunay: crossing constraints");
                }
                if (flip(u, v)) {
                    flipped = true;
                    break;
                }
            }
            if (!flipped) {
                throw std::runtime_error("constrained_delaunay: cannot recover segment");
            }
        }
        throw std::runtime_error("constrained_delaunay: segment enforcement diverged");
    }

    // Lawson pass restoring the Delaunay criterion away from constraints.
    void legalize() {
        const std::size_t cap = 16 * tris.size() * tris.size() + 256;
        for (std::size_t iter = 0; iter < cap; ++iter) {
            rebuild_adj();
            bool flipped = false;
            for (int t = 0; t < static_cast<int>(tris.size()) && !flipped; ++t) {
                for (int i = 0; i < 3 && !flipped; ++i) {
                    const int n = adj[t][i];
                    if (n <= t) {
                        continue;  // visit each interior edge once
                    }
                    const int u = tris[t][(i + 1) % 3];
                    const int v = tris[t][(i + 2) % 3];
                    if (is_constrained(u, v)) {
                        continue;
                    }
                    const int w = tris[n][edge_slot(n, u, v)];
                    if (incircle(pts[tris[t][0]], pts[tris[t][1]], pts[tris[t][2]], pts[w]) > 0) {
                        flipped = flip(u, v);
                    }
                }
            }
            if (!flipped) {
                return;
            }
        }
        throw std::runtime_error("constrained_delaunay: legalization diverged");
    }
};

}  // namespace

std::uint64_t triangulation_count() { return g_triangulation_count.load(); }

void reset_triangulation_count() { g_triangulation_count.store(0); }

Vec2 TriangulationMesh::circumcenter(int tri) const {
    const Vec2& a = points[triangles[tri].v[0]];
    const Vec2& b = points[triangles[tri].v[1]];
    const Vec2& c = points[triangles[tri].v[2]];
    const double d = 2.0 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    if (std::abs(d) < 1e-14) {
        throw std::runtime_error("circumcenter: degenerate triangle");
    }
    const double b2 = (b - a).squaredNorm();
    const double c2 = (c - a).squaredNorm();
    const Vec2 rel(((c - a).y() * b2 - (b - a).y() * c2) / d,
                   ((b - a).x() * c2 - (c - a).x() * b2) / d);
    return a + rel;
}

Vec2 TriangulationMesh::centroid(int tri) const {
    return (points[triangles[tri].v[0]] + points[triangles[tri].v[1]] +
            points[triangles[tri].v[2]]) /
           3.0;
}

bool TriangulationMesh::is_constrained(int a, int b) const {
    const std::pair<int, int> e{std::min(a, b), std::max(a, b)};
    return std::binary_search(constrained_edges.begin(), constrained_edges.end(), e);
}

void rebuild_adjacency(TriangulationMesh& mesh) {
    std::map<std::pair<int, int>, std::pair<int, int>> seen;
    for (auto& t : mesh.triangles) {
        t.neighbor = {-1, -1, -1};
    }
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        for (int i = 0; i < 3; ++i) {
            const int a = mesh.triangles[t].v[(i + 1) % 3];
            const int b = mesh.triangles[t].v[(i + 2) % 3];
            const std::pair<int, int> e{std::min(a, b), std::max(a, b)};
            auto it = seen.find(e);
            if (it == seen.end()) {
                seen[e] = {t, i};
            } else {
                if (mesh.triangles[t].neighbor[i] != -1) {
                    throw std::logic_error("rebuild_adjacency: edge shared by >2 triangles");
                }
                mesh.triangles[t].neighbor[i] = it->second.first;
                mesh.triangles[it->second.first].neighbor[it->second.second] = t;
                seen.erase(it);
            }
        }
    }
}

TriangulationMesh constrained_delaunay(std::vector<Vec2> points,
                                       std::vector<std::pair<int, int>> segments) {
    g_triangulation_count.fetch_add(1);

    // Merge coincident input points and remap segment endpoints.
    std::vector<Vec2> pts;
    std::vector<int> remap(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        int found = -1;
        for (std::size_t j = 0; j < pts.size() && found < 0; ++j) {
            if ((pts[j] - points[i]).norm() < kGeomTol) {
                found = static_cast<int>(j);
            }
        }
        if (found < 0) {
            found = static_cast<int>(pts.size());
            pts.push_back(points[i]);
        }
        remap[i] = found;
    }
    std::vector<std::pair<int, int>> segs;
    for (const auto& [a, b] : segments) {
        if (a < 0 || b < 0 || a >= static_cast<int>(points.size()) ||
            b >= static_cast<int>(points.size())) {
            throw std::invalid_argument("constrained_delaunay: segment index out of range");
        }
        if (remap[a] != remap[b]) {
            segs.emplace_back(remap[a], remap[b]);
        }
    }

    // Split segments at mutual crossings and at points lying on them, so that
    // afterwards segments meet only at shared endpoints.
    auto add_point = [&pts](const Vec2& p) {
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if ((pts[j] - p).norm() < kGeomTol) {
                return static_cast<int>(j);
            }
        }
        pts.push_back(p);
        return static_cast<int>(pts.size() - 1);
    };
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < segs.size() && !changed; ++i) {
            const auto [a, b] = segs[i];
            for (int p = 0; p < static_cast<int>(pts.size()) && !changed; ++p) {
                if (p != a && p != b && strictly_on_segment(pts[p], pts[a], pts[b])) {
                    segs[i] = {a, p};
                    segs.emplace_back(p, b);
                    changed = true;
                }
            }
            for (std::size_t j = i + 1; j < segs.size() && !changed; ++j) {
                const auto [c, d] = segs[j];
                if (proper_cross(pts[a], pts[b], pts[c], pts[d])) {
                    const int x = add_point(segment_intersection(pts[a], pts[b], pts[c], pts[d]));
                    // The intersection can merge into an existing endpoint; a
                    // segment only splits when the point is interior to it.
                    const bool splits_i = x != a && x != b;
                    const bool splits_j = x != c && x != d;
                    if (!splits_i && !splits_j) {
                        continue;  // touching within tolerance, not a crossing
                    }
                    segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(j));
                    segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(i));
                    for (const auto& piece : {std::pair{a, x}, {x, b}, {c, x}, {x, d}}) {
                        if (piece.first != piece.second) {
                            segs.push_back(piece);
                        }
                    }
                    changed = true;
                }
            }
        }
    }
    std::sort(segs.begin(), segs.end(), [](auto u, auto v) {
        return Builder::key(u.first, u.second) < Builder::key(v.first, v.second);
    });
    segs.erase(std::unique(segs.begin(), segs.end(),
                           [](auto u, auto v) {
                               return Builder::key(u.first, u.second) ==
                                      Builder::key(v.first, v.second);
                           }),
               segs.end());

    TriangulationMesh mesh;
    mesh.points = pts;
    if (pts.size() < 3) {
        return mesh;
    }

    Builder bld;
    bld.pts = pts;
    // Super-triangle far outside the data so the hull triangulates cleanly.
    Vec2 lo = pts[0], hi = pts[0];
    for (const Vec2& p : pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const Vec2 mid = 0.5 * (lo + hi);
    const double r = std::max((hi - lo).norm(), 1.0) * 64.0;
    const int n_real = static_cast<int>(pts.size());
    for (int i = 0; i < 3; ++i) {
        const double th = std::numbers::pi * (0.5 + 2.0 * i / 3.0);
        bld.pts.push_back(mid + r * Vec2(std::cos(th), std::sin(th)));
    }
    bld.push_ccw(n_real, n_real + 1, n_real + 2);
    for (int p = 0; p < n_real; ++p) {
        bld.insert_point(p);
    }
    for (const auto& [a, b] : segs) {
        bld.enforce_segment(a, b);
    }
    bld.legalize();

    for (const auto& t : bld.tris) {
        if (t[0] < n_real && t[1] < n_real && t[2] < n_real) {
            mesh.triangles.push_back({{t[0], t[1], t[2]}, {-1, -1, -1}});
        }
    }
    for (const auto& [e, flag] : bld.constrained) {
        (void)flag;
        mesh.constrained_edges.push_back(e);
    }
    std::sort(mesh.constrained_edges.begin(), mesh.constrained_edges.end());
    rebuild_adjacency(mesh);
    return mesh;
}

TriangulationMesh triangulate_free_space(const HPolytope& box,
                                         const std::vector<HPolytope>& obstacles,
                                         double max_edge) {
    const std::vector<Vec2> box_ring = vertices(box);
    if (box_ring.size() < 3) {
        throw std::invalid_argument("triangulate_free_space: degenerate bounding box");
    }
    if (!(max_edge > 0.0)) {
        throw std::invalid_argument("triangulate_free_space: max_edge must be positive");
    }

    std::vector<Vec2> pts;
    std::vector<std::pair<int, int>> segs;
    auto add_ring = [&pts, &segs, max_edge](const std::vector<Vec2>& ring) {
        const int n = static_cast<int>(ring.size());
        std::vector<Vec2> dense;
        for (int i = 0; i < n; ++i) {
            const Vec2& a = ring[static_cast<std::size_t>(i)];
            const Vec2& b = ring[static_cast<std::size_t>((i + 1) % n)];
            const double len = (b - a).norm();
            const int parts = std::isfinite(max_edge)
                                  ? std::max(1, static_cast<int>(std::ceil(len / max_edge)))
                                  : 1;
            for (int j = 0; j < parts; ++j) {
                dense.push_back(a + (b - a) * (static_cast<double>(j) / parts));
            }
        }
        const int base = static_cast<int>(pts.size());
        const int m = static_cast<int>(dense.size());
        pts.insert(pts.end(), dense.begin(), dense.end());
        for (int i = 0; i < m; ++i) {
            segs.emplace_back(base + i, base + (i + 1) % m);
        }
    };
    add_ring(box_ring);

    std::vector<HPolytope> clipped;
    for (const HPolytope& ob : obstacles) {
        const std::vector<Vec2> full = vertices(ob);
        if (full.size() < 3) {
            throw std::invalid_argument("triangulate_free_space: degenerate obstacle");
        }
        const std::vector<Vec2> ring = clip_polygon(full, box);
        if (ring.size() >= 3 && std::abs(polygon_area(ring)) > kGeomTol) {
            clipped.push_back(from_vertices(ring));
            add_ring(ring);
        }
    }

    TriangulationMesh mesh = constrained_delaunay(pts, segs);

    std::vector<Triangle> kept;
    for (const Triangle& t : mesh.triangles) {
        const Vec2 c =
            (mesh.points[t.v[0]] + mesh.points[t.v[1]] + mesh.points[t.v[2]]) / 3.0;
        bool inside = false;
        for (const HPolytope& ob : clipped) {
            inside = inside || contains(ob, c, -kGeomTol);
        }
        if (!inside) {
            kept.push_back(t);
        }
    }
    mesh.triangles = std::move(kept);
    rebuild_adjacency(mesh);
    return mesh;
}

}  // namespace manav
