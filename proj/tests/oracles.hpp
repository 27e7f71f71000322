// Reference implementations the tests check library results against. Each is
// written independently of the library code path it validates; the only
// shared component is solve_qp, which the brute-force enumerator calls after
// pinning every binary through added equality rows.
#pragma once

#include "manav/geometry.hpp"
#include "manav/miqp.hpp"
#include "manav/qp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <vector>

namespace oracle {

using manav::Vec2;

inline double shoelace(const std::vector<Vec2>& ring) {
    double twice = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[(i + 1) % ring.size()];
        twice += a.x() * b.y() - a.y() * b.x();
    }
    return 0.5 * twice;
}

inline bool point_in_convex(const std::vector<Vec2>& ring, const Vec2& p, double tol) {
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[(i + 1) % ring.size()];
        const Vec2 e = b - a;
        if (e.x() * (p - a).y() - e.y() * (p - a).x() < -tol * e.norm()) {
            return false;
        }
    }
    return true;
}

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * ab)).norm();
}

// Signed distance to a convex CCW ring: negative inside, positive outside.
inline double signed_ring_distance(const std::vector<Vec2>& ring, const Vec2& p) {
    double edge = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ring.size(); ++i) {
        edge = std::min(edge, point_segment_distance(p, ring[i], ring[(i + 1) % ring.size()]));
    }
    return point_in_convex(ring, p, 0.0) ? -edge : edge;
}

inline double arc_length(const std::vector<Vec2>& pts) {
    double len = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        len += (pts[i] - pts[i - 1]).norm();
    }
    return len;
}

inline double polygon_support(const std::vector<Vec2>& ring, const Vec2& dir) {
    double h = -std::numeric_limits<double>::infinity();
    for (const Vec2& v : ring) {
        h = std::max(h, dir.dot(v));
    }
    return h;
}

inline double zonotope_support(const manav::Zonotope& z, const Vec2& dir) {
    double h = dir.dot(z.center);
    for (int i = 0; i < z.num_generators(); ++i) {
        h += std::abs(dir.dot(z.generators.col(i)));
    }
    return h;
}

// Exact membership for a zonotope: facet normals of a 2-D zonotope are the
// perpendiculars of its generators, so checking support along them suffices.
inline bool point_in_zonotope(const manav::Zonotope& z, const Vec2& p, double tol) {
    for (int i = 0; i < z.num_generators(); ++i) {
        const Vec2 g = z.generators.col(i);
        const Vec2 n(-g.y(), g.x());
        if (n.norm() == 0.0) {
            continue;
        }
        const Vec2 u = n.normalized();
        if (std::abs(u.dot(p)) > zonotope_support(z, u) + tol) {
            return false;
        }
    }
    return true;
}

// QP for the MIQP with every binary pinned to the given values through
// appended equality rows; relaxed [0,1] boxes are unnecessary once pinned.
inline manav::QProblem pin_binaries(const manav::MIQProblem& p,
                                    const std::map<int, int>& values) {
    const int n = p.num_vars();
    manav::QProblem qp;
    qp.H = p.H.sparseView();
    qp.f = p.f;
    qp.f0 = p.f0;
    const int me = static_cast<int>(p.A_eq.rows());
    Eigen::MatrixXd G(me + static_cast<int>(values.size()), n);
    Eigen::VectorXd h(G.rows());
    G.topRows(me) = p.A_eq;
    h.head(me) = p.b_eq;
    int row = me;
    for (const auto& [idx, val] : values) {
        G.row(row).setZero();
        G(row, idx) = 1.0;
        h(row) = static_cast<double>(val);
        ++row;
    }
    qp.G = G.sparseView();
    qp.h = h;
    qp.C = p.A_in.sparseView();
    qp.d = p.b_in;
    return qp;
}

struct Enumeration {
    double best_j = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_z;
    int solves = 0;
    std::vector<double> objectives;  // one entry per assignment, +inf = infeasible
};

// Brute force over all 2^B binary assignments.
inline Enumeration enumerate_miqp(const manav::MIQProblem& p) {
    Enumeration out;
    const auto& bins = p.binaries;
    const std::uint64_t total = std::uint64_t{1} << bins.size();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        std::map<int, int> values;
        for (std::size_t i = 0; i < bins.size(); ++i) {
            values[bins[i]] = static_cast<int>((mask >> i) & 1U);
        }
        const manav::QPResult r = manav::solve_qp(pin_binaries(p, values));
        ++out.solves;
        out.objectives.push_back(r.feasible ? r.objective
                                            : std::numeric_limits<double>::infinity());
        if (r.feasible && r.objective < out.best_j) {
            out.best_j = r.objective;
            out.best_z = Eigen::VectorXd();  // assignment-level oracle; z unused
        }
    }
    return out;
}

// Brute force restricted to one-hot rows: binaries are grouped per step and
// exactly one per group is active. Groups are given as index lists.
inline Enumeration enumerate_onehot(const manav::MIQProblem& p,
                                    const std::vector<std::vector<int>>& groups) {
    Enumeration out;
    std::vector<std::size_t> pick(groups.size(), 0);
    while (true) {
        std::map<int, int> values;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            for (std::size_t i = 0; i < groups[g].size(); ++i) {
                values[groups[g][i]] = i == pick[g] ? 1 : 0;
            }
        }
        const manav::QPResult r = manav::solve_qp(pin_binaries(p, values));
        ++out.solves;
        out.objectives.push_back(r.feasible ? r.objective
                                            : std::numeric_limits<double>::infinity());
        if (r.feasible && r.objective < out.best_j) {
            out.best_j = r.objective;
        }
        std::size_t g = 0;
        while (g < groups.size() && ++pick[g] == groups[g].size()) {
            pick[g++] = 0;
        }
        if (g == groups.size()) {
            break;
        }
    }
    return out;
}

// Random bounded MIQP with a known feasible integral point, so the optimum is
// finite and enumeration always has a witness.
inline manav::MIQProblem random_miqp(std::mt19937_64& rng, int max_binaries = 6,
                                     int max_continuous = 12) {
    std::uniform_int_distribution<int> nb(1, max_binaries);
    std::uniform_int_distribution<int> nc(1, max_continuous);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int B = nb(rng);
    const int n = B + nc(rng);
    manav::MIQProblem p;
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            M(i, j) = gauss(rng);
        }
    }
    p.H = M.transpose() * M + 0.5 * Eigen::MatrixXd::Identity(n, n);
    p.f.resize(n);
    for (int i = 0; i < n; ++i) {
        p.f(i) = gauss(rng);
    }
    p.f0 = gauss(rng);
    for (int i = 0; i < B; ++i) {
        p.binaries.push_back(i);
    }

    Eigen::VectorXd witness(n);
    for (int i = 0; i < n; ++i) {
        witness(i) = i < B ? std::round(unit(rng)) : gauss(rng);
    }
    const int m_in = std::uniform_int_distribution<int>(0, 6)(rng);
    p.A_in.resize(m_in, n);
    p.b_in.resize(m_in);
    for (int r = 0; r < m_in; ++r) {
        for (int j = 0; j < n; ++j) {
            p.A_in(r, j) = gauss(rng);
        }
        p.b_in(r) = p.A_in.row(r).dot(witness) + unit(rng);
    }
    const int m_eq = std::uniform_int_distribution<int>(0, 2)(rng);
    p.A_eq.resize(m_eq, n);
    p.b_eq.resize(m_eq);
    for (int r = 0; r < m_eq; ++r) {
        for (int j = 0; j < n; ++j) {
            p.A_eq(r, j) = gauss(rng);
        }
        p.b_eq(r) = p.A_eq.row(r).dot(witness);
    }
    return p;
}

// Least-squares KKT multipliers on the active set; returns the stationarity
// residual norm and the most negative inequality multiplier.
inline std::pair<double, double> kkt_check(const manav::QProblem& qp, const Eigen::VectorXd& z,
                                           double active_tol) {
    const Eigen::MatrixXd H(qp.H);
    const Eigen::MatrixXd G(qp.G);
    const Eigen::MatrixXd C(qp.C);
    const Eigen::VectorXd grad = H * z + qp.f;
    std::vector<int> active;
    for (int i = 0; i < C.rows(); ++i) {
        if (C.row(i).dot(z) >= qp.d(i) - active_tol) {
            active.push_back(i);
        }
    }
    const int me = static_cast<int>(G.rows());
    const int ma = static_cast<int>(active.size());
    if (me + ma == 0) {
        return {grad.norm(), 0.0};
    }
    Eigen::MatrixXd At(qp.f.size(), me + ma);
    for (int i = 0; i < me; ++i) {
        At.col(i) = G.row(i).transpose();
    }
    for (int i = 0; i < ma; ++i) {
        At.col(me + i) = C.row(active[i]).transpose();
    }
    const Eigen::VectorXd mults = At.colPivHouseholderQr().solve(-grad);
    const double stat = (grad + At * mults).norm();
    double min_mult = 0.0;
    for (int i = 0; i < ma; ++i) {
        min_mult = std::min(min_mult, mults(me + i));
    }
    return {stat, min_mult};
}

// Least-squares slope of log t against log n.
inline double fit_power_law(const std::vector<double>& n, const std::vector<double>& t) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double x = std::log(n[i]);
        const double y = std::log(t[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(n.size());
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace oracle
