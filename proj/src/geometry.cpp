#include "manav/geometry.hpp"

#include "manav/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

namespace manav {

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

HPolytope make_box(double xmin, double ymin, double xmax, double ymax) {
    if (xmin > xmax || ymin > ymax) {
        throw std::invalid_argument("make_box: inverted bounds");
    }
    HPolytope box;
    box.A.resize(4, 2);
    box.b.resize(4);
    box.A << 1, 0, -1, 0, 0, 1, 0, -1;
    box.b << xmax, -xmin, ymax, -ymin;
    return box;
}

HPolytope from_vertices(const std::vector<Vec2>& ring_in) {
    if (ring_in.size() < 3) {
        throw std::invalid_argument("from_vertices: need at least 3 vertices");
    }
    std::vector<Vec2> ring = ring_in;
    if (polygon_area(ring) < 0.0) {
        std::reverse(ring.begin(), ring.end());
    }
    std::vector<Vec2> normals;
    std::vector<double> offsets;
    const int n = static_cast<int>(ring.size());
    for (int i = 0; i < n; ++i) {
        const Vec2& p = ring[i];
        const Vec2& q = ring[(i + 1) % n];
        const Vec2 d = q - p;
        const double len = d.norm();
        if (len < kGeomTol) {
            continue;  // repeated vertex
        }
        const Vec2 nrm(d.y() / len, -d.x() / len);  // outward for CCW rings
        const double off = nrm.dot(p);
        bool dup = false;
        for (std::size_t k = 0; k < normals.size() && !dup; ++k) {
            dup = (normals[k] - nrm).norm() < 1e-9 && std::abs(offsets[k] - off) < 1e-9;
        }
        if (!dup) {
            normals.push_back(nrm);
            offsets.push_back(off);
        }
    }
    HPolytope out;
    out.A.resize(static_cast<int>(normals.size()), 2);
    out.b.resize(static_cast<int>(normals.size()));
    for (std::size_t k = 0; k < normals.size(); ++k) {
        out.A.row(static_cast<int>(k)) = normals[k].transpose();
        out.b(static_cast<int>(k)) = offsets[k];
    }
    return out;
}

bool contains(const HPolytope& poly, const Vec2& p, double tol) {
    for (int i = 0; i < poly.num_halfspaces(); ++i) {
        const double nrm = poly.A.row(i).norm();
        if (nrm < kGeomTol) {
            continue;  // degenerate row constrains nothing
        }
        if (poly.A.row(i).dot(p) - poly.b(i) > tol * nrm) {
            return false;
        }
    }
    return true;
}

HPolytope normalized(const HPolytope& poly) {
    HPolytope out = poly;
    for (int i = 0; i < out.num_halfspaces(); ++i) {
        const double nrm = out.A.row(i).norm();
        if (nrm < kGeomTol) {
            throw std::invalid_argument("normalized: zero-norm halfspace row");
        }
        out.A.row(i) /= nrm;
        out.b(i) /= nrm;
    }
    return out;
}

HPolytope bloat(const HPolytope& obstacle, double margin) {
    if (margin < 0.0) {
        throw std::invalid_argument("bloat: negative margin");
    }
    HPolytope out = normalized(obstacle);
    out.b.array() += margin;
    return out;
}

std::vector<Vec2> vertices(const HPolytope& poly) {
    const HPolytope p = normalized(poly);
    const int m = p.num_halfspaces();
    std::vector<Vec2> pts;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            Eigen::Matrix2d M;
            M.row(0) = p.A.row(i);
            M.row(1) = p.A.row(j);
            if (std::abs(M.determinant()) < 1e-12) {
                continue;
            }
            const Vec2 x = M.inverse() * Vec2(p.b(i), p.b(j));
            if (contains(p, x, 1e-7)) {
                pts.push_back(x);
            }
        }
    }
    std::vector<Vec2> uniq;
    for (const Vec2& q : pts) {
        bool dup = false;
        for (const Vec2& u : uniq) {
            dup = dup || (q - u).norm() < 1e-7;
        }
        if (!dup) {
            uniq.push_back(q);
        }
    }
    if (uniq.size() < 3) {
        return uniq;
    }
    Vec2 c = Vec2::Zero();
    for (const Vec2& q : uniq) {
        c += q;
    }
    c /= static_cast<double>(uniq.size());
    std::sort(uniq.begin(), uniq.end(), [&c](const Vec2& a, const Vec2& b) {
        return std::atan2(a.y() - c.y(), a.x() - c.x()) < std::atan2(b.y() - c.y(), b.x() - c.x());
    });
    return uniq;
}

Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b) {
    Zonotope out;
    out.center = a.center + b.center;
    out.generators.resize(2, a.num_generators() + b.num_generators());
    out.generators << a.generators, b.generators;
    return out;
}

double support(const Zonotope& z, const Vec2& dir) {
    double h = dir.dot(z.center);
    for (int i = 0; i < z.num_generators(); ++i) {
        h += std::abs(dir.dot(z.generators.col(i)));
    }
    return h;
}

double support(const HPolytope& poly, const Vec2& dir) {
    const std::vector<Vec2> verts = vertices(poly);
    if (verts.empty()) {
        throw std::invalid_argument("support: empty or unbounded polytope");
    }
    double h = dir.dot(verts[0]);
    for (const Vec2& v : verts) {
        h = std::max(h, dir.dot(v));
    }
    return h;
}

Zonotope regular_hexagon(double circumradius) {
    if (circumradius <= 0.0) {
        throw std::invalid_argument("regular_hexagon: circumradius must be positive");
    }
    // Three generators of length r/2 at 0°, 60°, 120° span a regular hexagon
    // with vertices on the circle of radius r.
    Zonotope z;
    z.generators.resize(2, 3);
    const double g = 0.5 * circumradius;
    for (int i = 0; i < 3; ++i) {
        const double th = std::numbers::pi / 3.0 * i;
        z.generators.col(i) = g * Vec2(std::cos(th), std::sin(th));
    }
    return z;
}

HPolytope to_hpolytope(const Zonotope& z) {
    // Each generator contributes a facet pair with normal perpendicular to it.
    std::vector<Vec2> normals;
    for (int i = 0; i < z.num_generators(); ++i) {
        const Vec2 g = z.generators.col(i);
        if (g.norm() < kGeomTol) {
            continue;
        }
        const Vec2 n = Vec2(-g.y(), g.x()).normalized();
        bool dup = false;
        for (const Vec2& u : normals) {
            dup = dup || (u - n).norm() < 1e-12 || (u + n).norm() < 1e-12;
        }
        if (!dup) {
            normals.push_back(n);
        }
    }
    if (normals.empty()) {
        throw std::invalid_argument("to_hpolytope: zonotope has no nonzero generators");
    }
    HPolytope out;
    out.A.resize(2 * static_cast<int>(normals.size()), 2);
    out.b.resize(2 * static_cast<int>(normals.size()));
    for (std::size_t k = 0; k < normals.size(); ++k) {
        const Vec2& n = normals[k];
        out.A.row(2 * static_cast<int>(k)) = n.transpose();
        out.A.row(2 * static_cast<int>(k) + 1) = -n.transpose();
        out.b(2 * static_cast<int>(k)) = support(z, n);
        out.b(2 * static_cast<int>(k) + 1) = support(z, -n);
    }
    return out;
}

double polygon_area(const std::vector<Vec2>& ring) {
    // Shoelace; positive for CCW orientation.
    double s = 0.0;
    const int n = static_cast<int>(ring.size());
    for (int i = 0; i < n; ++i) {
        s += cross2(ring[i], ring[(i + 1) % n]);
    }
    return 0.5 * s;
}

double area(const HPolytope& poly) {
    const std::vector<Vec2> verts = vertices(poly);
    if (verts.size() < 3) {
        return 0.0;
    }
    return polygon_area(verts);
}

double polyline_length(const std::vector<Vec2>& pts) {
    double s = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        s += (pts[i] - pts[i - 1]).norm();
    }
    return s;
}

bool polytopes_intersect(const HPolytope& a, const HPolytope& b) {
    const std::vector<Vec2> va = vertices(a);
    const std::vector<Vec2> vb = vertices(b);
    const auto separates = [](const HPolytope& p, const std::vector<Vec2>& other) {
        for (int i = 0; i < p.num_halfspaces(); ++i) {
            bool all_outside = true;
            for (const Vec2& v : other) {
                if (p.A.row(i).dot(v) <= p.b(i)) {
                    all_outside = false;
                    break;
                }
            }
            if (all_outside) {
                return true;
            }
        }
        return false;
    };
    return !separates(a, vb) && !separates(b, va);
}

std::vector<Vec2> clip_polygon(const std::vector<Vec2>& ring, const HPolytope& clip) {
    std::vector<Vec2> poly = ring;
    const HPolytope c = normalized(clip);
    for (int i = 0; i < c.num_halfspaces() && !poly.empty(); ++i) {
        const Vec2 n = c.A.row(i).transpose();
        const double b = c.b(i);
        std::vector<Vec2> next;
        const int m = static_cast<int>(poly.size());
        for (int j = 0; j < m; ++j) {
            const Vec2& p = poly[j];
            const Vec2& q = poly[(j + 1) % m];
            const double dp = n.dot(p) - b;
            const double dq = n.dot(q) - b;
            if (dp <= kGeomTol) {
                next.push_back(p);
            }
            if ((dp < -kGeomTol && dq > kGeomTol) || (dp > kGeomTol && dq < -kGeomTol)) {
                next.push_back(p + dp / (dp - dq) * (q - p));
            }
        }
        poly = std::move(next);
    }
    return poly;
}

namespace {

// Splices two CCW rings that share directed edge a→b in `p` and b→a in `q`.
// Returns an empty ring when the union would pinch (rings share more than
// the one edge) or fail to stay convex.
std::vector<int> merge_rings(const std::vector<int>& p, const std::vector<int>& q,
                             int a, int b, const std::vector<Vec2>& pts) {
    const int np = static_cast<int>(p.size());
    const int nq = static_cast<int>(q.size());
    int ia = -1;
    for (int i = 0; i < np; ++i) {
        if (p[i] == a && p[(i + 1) % np] == b) {
            ia = i;
        }
    }
    int ib = -1;
    for (int i = 0; i < nq; ++i) {
        if (q[i] == b && q[(i + 1) % nq] == a) {
            ib = i;
        }
    }
    if (ia < 0 || ib < 0) {
        return {};
    }
    std::vector<int> merged;
    merged.reserve(np + nq - 2);
    for (int i = 0; i < np; ++i) {
        merged.push_back(p[(ia + 1 + i) % np]);  // b … a
    }
    for (int i = 2; i < nq; ++i) {
        merged.push_back(q[(ib + i) % nq]);  // interior of q between a and b
    }
    std::unordered_set<int> seen(merged.begin(), merged.end());
    if (seen.size() != merged.size()) {
        return {};
    }
    const int n = static_cast<int>(merged.size());
    for (int i = 0; i < n; ++i) {
        const Vec2& u = pts[merged[i]];
        const Vec2& v = pts[merged[(i + 1) % n]];
        const Vec2& w = pts[merged[(i + 2) % n]];
        if (cross2(v - u, w - v) < -kGeomTol) {
            return {};  // reflex corner
        }
    }
    return merged;
}

}  // namespace

ConvexPartition partition_free_space(const HPolytope& box,
                                     const std::vector<HPolytope>& obstacles) {
    const TriangulationMesh mesh = triangulate_free_space(box, obstacles);

    // Seed one cell per free triangle.
    std::vector<std::vector<int>> cells;
    for (const Triangle& t : mesh.triangles) {
        cells.push_back({t.v[0], t.v[1], t.v[2]});
    }

    // Hertel–Mehlhorn: greedily drop diagonals whose removal keeps both cells'
    // union convex. Constrained edges are obstacle or box boundary and stay.
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            for (std::size_t j = i + 1; j < cells.size(); ++j) {
                const int ni = static_cast<int>(cells[i].size());
                std::vector<int> merged;
                for (int e = 0; e < ni && merged.empty(); ++e) {
                    const int a = cells[i][e];
                    const int b = cells[i][(e + 1) % ni];
                    if (mesh.is_constrained(a, b)) {
                        continue;
                    }
                    merged = merge_rings(cells[i], cells[j], a, b, mesh.points);
                }
                if (!merged.empty()) {
                    cells[i] = std::move(merged);
                    cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(j));
                    changed = true;
                    --j;
                }
            }
        }
    }

    ConvexPartition out;
    out.bounding_box = box;
    for (const std::vector<int>& ring : cells) {
        std::vector<Vec2> poly;
        poly.reserve(ring.size());
        for (int idx : ring) {
            poly.push_back(mesh.points[idx]);
        }
        out.cells.push_back(from_vertices(poly));
    }
    return out;
}

}  // namespace manav
