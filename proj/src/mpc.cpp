#include "manav/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace manav {

namespace {

constexpr double kSpeedEps = 1e-6;  // below this the heading is undefined

// Index map of the stacked decision vector (before slacks are appended).
struct Layout {
    int N = 0;
    int cells = 0;

    int state(int k, int j) const { return 4 * k + j; }
    int input(int k, int j) const { return 4 * (N + 1) + 2 * k + j; }
    int binary(int k, int c) const {  // k = 1..N
        return 4 * (N + 1) + 2 * N + (k - 1) * cells + c;
    }
    int num_vars() const { return 4 * (N + 1) + 2 * N + N * cells; }
};

constexpr double kSigns[4][2] = {{1.0, 1.0}, {1.0, -1.0}, {-1.0, 1.0}, {-1.0, -1.0}};

void validate_config(const MPCConfig& config) {
    if (config.N < 1) {
        throw std::invalid_argument("mpc: horizon must be at least 1");
    }
    if (config.dt <= 0.0) {
        throw std::invalid_argument("mpc: step length must be positive");
    }
    if (config.v_min >= config.v_max) {
        throw std::invalid_argument("mpc: v_min must be below v_max");
    }
}

}  // namespace

MIQProblem build_problem(const FlatState& x0, const TerminalSpec& terminal,
                         const ConvexPartition& partition, const MPCConfig& config) {
    validate_config(config);
    if (partition.cells.empty()) {
        throw std::invalid_argument("build_problem: empty partition, no local free space");
    }
    if (partition.bounding_box.num_halfspaces() < 3) {
        throw std::invalid_argument("build_problem: partition lacks a bounding box");
    }
    for (const HPolytope& cell : partition.cells) {
        if (cell.num_halfspaces() < 3) {
            throw std::invalid_argument("build_problem: degenerate partition cell");
        }
    }

    const Layout lay{config.N, static_cast<int>(partition.cells.size())};
    const int N = config.N;
    const int n = lay.num_vars();
    const double dt = config.dt;

    Eigen::Matrix4d Ad = Eigen::Matrix4d::Identity();
    Ad(0, 2) = dt;
    Ad(1, 3) = dt;
    Eigen::Matrix<double, 4, 2> Bd;
    Bd << 0.5 * dt * dt, 0.0, 0.0, 0.5 * dt * dt, dt, 0.0, 0.0, dt;

    // Big-M per cell face: the largest violation any point of the bounding box
    // can produce, so a deactivated row never cuts into the box.
    std::vector<Eigen::VectorXd> big_m(partition.cells.size());
    int face_rows = 0;
    for (std::size_t c = 0; c < partition.cells.size(); ++c) {
        const HPolytope& cell = partition.cells[c];
        big_m[c].resize(cell.num_halfspaces());
        for (int i = 0; i < cell.num_halfspaces(); ++i) {
            const Vec2 a = cell.A.row(i).transpose();
            big_m[c](i) = std::max(0.0, support(partition.bounding_box, a) - cell.b(i));
        }
        face_rows += cell.num_halfspaces();
    }

    const HPolytope hex = to_hpolytope(
        Zonotope{terminal.reference + terminal.deviation.center, terminal.deviation.generators});

    MIQProblem p;
    const int m_eq = 4 + 4 * N + N + 2;
    const int m_in = 4 * N + 4 * N + N * face_rows + hex.num_halfspaces();
    p.H = Eigen::MatrixXd::Zero(n, n);
    p.f = Eigen::VectorXd::Zero(n);
    p.A_eq = Eigen::MatrixXd::Zero(m_eq, n);
    p.b_eq = Eigen::VectorXd::Zero(m_eq);
    p.A_in = Eigen::MatrixXd::Zero(m_in, n);
    p.b_in = Eigen::VectorXd::Zero(m_in);

    // Cost: stage references are (terminal.reference, zero velocity) at all k.
    const Eigen::Vector4d ref(terminal.reference.x(), terminal.reference.y(), 0.0, 0.0);
    for (int k = 0; k <= N; ++k) {
        const Eigen::Matrix4d& Q = k == N ? config.Q_N : config.Q_k;
        p.H.block<4, 4>(lay.state(k, 0), lay.state(k, 0)) = 2.0 * Q;
        p.f.segment<4>(lay.state(k, 0)) = -2.0 * (Q * ref);
        p.f0 += ref.dot(Q * ref);
    }
    for (int k = 0; k < N; ++k) {
        p.H.block<2, 2>(lay.input(k, 0), lay.input(k, 0)) = 2.0 * config.R_k;
    }

    // Equalities: initial state, dynamics recursion, one active cell per step,
    // zero terminal velocity.
    int r = 0;
    for (int j = 0; j < 4; ++j, ++r) {
        p.A_eq(r, lay.state(0, j)) = 1.0;
    }
    p.b_eq.head<4>() << x0.position.x(), x0.position.y(), x0.velocity.x(), x0.velocity.y();
    for (int k = 0; k < N; ++k) {
        for (int j = 0; j < 4; ++j, ++r) {
            p.A_eq(r, lay.state(k + 1, j)) = 1.0;
            for (int i = 0; i < 4; ++i) {
                p.A_eq(r, lay.state(k, i)) -= Ad(j, i);
            }
            for (int i = 0; i < 2; ++i) {
                p.A_eq(r, lay.input(k, i)) -= Bd(j, i);
            }
        }
    }
    for (int k = 1; k <= N; ++k, ++r) {
        for (int c = 0; c < lay.cells; ++c) {
            p.A_eq(r, lay.binary(k, c)) = 1.0;
        }
        p.b_eq(r) = 1.0;
    }
    p.A_eq(r, lay.state(N, 2)) = 1.0;
    ++r;
    p.A_eq(r, lay.state(N, 3)) = 1.0;

    // Inequalities. Input bounds first: they stay hard under soften().
    r = 0;
    const double a_max = config.v_min * config.omega_max;
    for (int k = 0; k < N; ++k) {
        for (const auto& s : kSigns) {
            p.A_in(r, lay.input(k, 0)) = s[0];
            p.A_in(r, lay.input(k, 1)) = s[1];
            p.b_in(r) = a_max;
            ++r;
        }
    }
    for (int k = 1; k <= N; ++k) {
        for (const auto& s : kSigns) {
            p.A_in(r, lay.state(k, 2)) = s[0];
            p.A_in(r, lay.state(k, 3)) = s[1];
            p.b_in(r) = config.v_max;
            ++r;
        }
    }
    for (int k = 1; k <= N; ++k) {
        for (std::size_t c = 0; c < partition.cells.size(); ++c) {
            const HPolytope& cell = partition.cells[c];
            for (int i = 0; i < cell.num_halfspaces(); ++i, ++r) {
                p.A_in(r, lay.state(k, 0)) = cell.A(i, 0);
                p.A_in(r, lay.state(k, 1)) = cell.A(i, 1);
                p.A_in(r, lay.binary(k, static_cast<int>(c))) = big_m[c](i);
                p.b_in(r) = cell.b(i) + big_m[c](i);
            }
        }
    }
    for (int i = 0; i < hex.num_halfspaces(); ++i, ++r) {
        p.A_in(r, lay.state(N, 0)) = hex.A(i, 0);
        p.A_in(r, lay.state(N, 1)) = hex.A(i, 1);
        p.b_in(r) = hex.b(i);
    }

    p.binaries.reserve(static_cast<std::size_t>(N) * lay.cells);
    for (int k = 1; k <= N; ++k) {
        for (int c = 0; c < lay.cells; ++c) {
            p.binaries.push_back(lay.binary(k, c));
        }
    }
    return p;
}

MIQProblem soften(const MIQProblem& problem, double weight, int skip_leading_inequalities) {
    const int m_in = static_cast<int>(problem.A_in.rows());
    if (skip_leading_inequalities < 0 || skip_leading_inequalities > m_in) {
        throw std::invalid_argument("soften: hard-row count out of range");
    }
    if (weight <= 0.0) {
        throw std::invalid_argument("soften: weight must be positive");
    }
    const int n = problem.num_vars();
    const int ns = m_in - skip_leading_inequalities;

    MIQProblem s;
    s.f0 = problem.f0;
    s.binaries = problem.binaries;
    s.H = Eigen::MatrixXd::Zero(n + ns, n + ns);
    s.H.topLeftCorner(n, n) = problem.H;
    s.H.bottomRightCorner(ns, ns) = 2.0 * weight * Eigen::MatrixXd::Identity(ns, ns);
    s.f = Eigen::VectorXd::Zero(n + ns);
    s.f.head(n) = problem.f;
    s.A_eq = Eigen::MatrixXd::Zero(problem.A_eq.rows(), n + ns);
    s.A_eq.leftCols(n) = problem.A_eq;
    s.b_eq = problem.b_eq;

    // Softened row i gains −s_i; each slack gets a nonnegativity row below.
    s.A_in = Eigen::MatrixXd::Zero(m_in + ns, n + ns);
    s.A_in.topLeftCorner(m_in, n) = problem.A_in;
    for (int j = 0; j < ns; ++j) {
        s.A_in(skip_leading_inequalities + j, n + j) = -1.0;
        s.A_in(m_in + j, n + j) = -1.0;
    }
    s.b_in = Eigen::VectorXd::Zero(m_in + ns);
    s.b_in.head(m_in) = problem.b_in;
    return s;
}

Vec2 lookahead_reference(const Route& route, const Vec2& q_veh, double distance) {
    const std::vector<Vec2>& w = route.waypoints;
    if (w.empty()) {
        throw std::invalid_argument("lookahead_reference: empty route");
    }
    if (distance <= 0.0) {
        throw std::invalid_argument("lookahead_reference: distance must be positive");
    }
    if (w.size() == 1) {
        return w.front();
    }

    // Arc length of the polyline point closest to the vehicle.
    double best_d2 = std::numeric_limits<double>::infinity();
    double s_star = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        const Vec2 d = w[i + 1] - w[i];
        const double len2 = d.squaredNorm();
        if (len2 < kGeomTol * kGeomTol) {
            continue;
        }
        const double t = std::clamp((q_veh - w[i]).dot(d) / len2, 0.0, 1.0);
        const double d2 = (w[i] + t * d - q_veh).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            s_star = acc + t * std::sqrt(len2);
        }
        acc += std::sqrt(len2);
    }

    const double target = s_star + distance;
    acc = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        const Vec2 d = w[i + 1] - w[i];
        const double len = d.norm();
        if (len < kGeomTol) {
            continue;
        }
        if (acc + len >= target) {
            return w[i] + ((target - acc) / len) * d;
        }
        acc += len;
    }
    return w.back();
}

std::vector<StepReference> flat_to_unicycle(const std::vector<FlatState>& states,
                                            const std::vector<Vec2>& inputs) {
    if (states.empty() || inputs.size() + 1 != states.size()) {
        throw std::invalid_argument("flat_to_unicycle: need one input per state transition");
    }
    std::vector<StepReference> refs(states.size());
    std::vector<char> has_heading(states.size(), 0);
    for (std::size_t k = 0; k < states.size(); ++k) {
        const Vec2 v = states[k].velocity;
        const Vec2 a = k < inputs.size() ? inputs[k] : Vec2(Vec2::Zero());
        const double speed = v.norm();
        refs[k].v_r = speed;
        if (speed > kSpeedEps) {
            refs[k].theta_r = std::atan2(v.y(), v.x());
            refs[k].omega_r = (v.x() * a.y() - v.y() * a.x()) / v.squaredNorm();
            has_heading[k] = 1;
        }
    }
    // Zero-speed steps hold the previous heading; a stationary prefix adopts
    // the first defined one.
    double theta = 0.0;
    bool seen = false;
    for (std::size_t k = 0; k < refs.size(); ++k) {
        if (has_heading[k]) {
            if (!seen) {
                for (std::size_t j = 0; j < k; ++j) {
                    refs[j].theta_r = refs[k].theta_r;
                }
            }
            theta = refs[k].theta_r;
            seen = true;
        } else {
            refs[k].theta_r = theta;
        }
    }
    return refs;
}

PlanResult plan(const FlatState& x0, const Route& route, const ConvexPartition& partition,
                const MPCConfig& config) {
    validate_config(config);
    const Vec2 ref = lookahead_reference(route, x0.position, config.lookahead);
    const TerminalSpec terminal{ref, regular_hexagon(config.terminal_radius)};
    const MIQProblem hard = build_problem(x0, terminal, partition, config);
    const MIQProblem soft = soften(hard, config.slack_weight, 4 * config.N);

    const Layout lay{config.N, static_cast<int>(partition.cells.size())};
    MIQPOptions options;
    options.iteration_limit = config.iteration_limit;
    // Percent-level suboptimality is irrelevant for tracking, and the big-M
    // relaxation bound often plateaus just below the incumbent; loose gaps
    // stop the search there. Bound certification happens before the gap test
    // and is unaffected.
    options.abs_gap = 1e-2;
    options.rel_gap = 5e-2;
    // Incumbent seeding: two candidate cell sequences, each restricted to
    // steps between touching cells (independent per-step rounding often jumps
    // across disconnected cells, forcing the fixed-binary plan onto slacks).
    const int num_cells = lay.cells;
    std::vector<char> touching(static_cast<std::size_t>(num_cells) * num_cells, 0);
    for (int c = 0; c < num_cells; ++c) {
        for (int e = c; e < num_cells; ++e) {
            const char t = polytopes_intersect(partition.cells[static_cast<std::size_t>(c)],
                                               partition.cells[static_cast<std::size_t>(e)])
                               ? 1
                               : 0;
            touching[static_cast<std::size_t>(c) * num_cells + e] = t;
            touching[static_cast<std::size_t>(e) * num_cells + c] = t;
        }
    }
    std::vector<std::vector<Vec2>> rings(partition.cells.size());
    std::vector<Vec2> centroids(partition.cells.size());
    for (std::size_t c = 0; c < partition.cells.size(); ++c) {
        rings[c] = vertices(partition.cells[c]);
        Vec2 acc = Vec2::Zero();
        for (const Vec2& v : rings[c]) {
            acc += v;
        }
        centroids[c] = acc / static_cast<double>(rings[c].size());
    }
    // Closest point of a cell to p, and its distance.
    const auto project_cell = [&](int c, const Vec2& p) -> std::pair<Vec2, double> {
        if (contains(partition.cells[static_cast<std::size_t>(c)], p, 0.0)) {
            return {p, 0.0};
        }
        const auto& ring = rings[static_cast<std::size_t>(c)];
        Vec2 best = ring.front();
        double best_d = (best - p).norm();
        for (std::size_t i = 0; i < ring.size(); ++i) {
            const Vec2& a = ring[i];
            const Vec2 d = ring[(i + 1) % ring.size()] - a;
            const double len2 = d.squaredNorm();
            if (len2 < kGeomTol * kGeomTol) {
                continue;
            }
            const double t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
            const Vec2 q = a + t * d;
            if ((q - p).norm() < best_d) {
                best_d = (q - p).norm();
                best = q;
            }
        }
        return {best, best_d};
    };

    // Cell sequence from the vehicle's cell toward the cell nearest the
    // terminal reference (Dijkstra over touching cells, centroid distances),
    // walked at the speed bound. Unlike relaxation rounding this candidate
    // cannot be fooled by fractional selectors that average across obstacles.
    const auto path_candidate = [&, num_cells](const Eigen::VectorXd& z) {
        int start = 0, target = 0;
        double sd = std::numeric_limits<double>::infinity();
        double td = std::numeric_limits<double>::infinity();
        for (int c = 0; c < num_cells; ++c) {
            const double ds = project_cell(c, x0.position).second;
            const double dt_ref = project_cell(c, ref).second;
            if (ds < sd) {
                sd = ds;
                start = c;
            }
            if (dt_ref < td) {
                td = dt_ref;
                target = c;
            }
        }
        std::vector<double> dist(static_cast<std::size_t>(num_cells),
                                 std::numeric_limits<double>::infinity());
        std::vector<int> prev(static_cast<std::size_t>(num_cells), -1);
        std::vector<char> done(static_cast<std::size_t>(num_cells), 0);
        dist[static_cast<std::size_t>(start)] = 0.0;
        for (int round = 0; round < num_cells; ++round) {
            int u = -1;
            for (int c = 0; c < num_cells; ++c) {
                if (!done[static_cast<std::size_t>(c)] &&
                    (u < 0 || dist[static_cast<std::size_t>(c)] < dist[static_cast<std::size_t>(u)])) {
                    u = c;
                }
            }
            if (dist[static_cast<std::size_t>(u)] == std::numeric_limits<double>::infinity()) {
                break;
            }
            done[static_cast<std::size_t>(u)] = 1;
            for (int c = 0; c < num_cells; ++c) {
                if (done[static_cast<std::size_t>(c)] ||
                    !touching[static_cast<std::size_t>(u) * num_cells + c]) {
                    continue;
                }
                const double w = (centroids[static_cast<std::size_t>(u)] -
                                  centroids[static_cast<std::size_t>(c)])
                                     .norm();
                if (dist[static_cast<std::size_t>(u)] + w < dist[static_cast<std::size_t>(c)]) {
                    dist[static_cast<std::size_t>(c)] = dist[static_cast<std::size_t>(u)] + w;
                    prev[static_cast<std::size_t>(c)] = u;
                }
            }
        }
        std::vector<int> path;
        if (dist[static_cast<std::size_t>(target)] < std::numeric_limits<double>::infinity()) {
            for (int c = target; c >= 0; c = prev[static_cast<std::size_t>(c)]) {
                path.push_back(c);
            }
            std::reverse(path.begin(), path.end());
        } else {
            path.push_back(start);
        }

        // Waypoints: vehicle, shared-boundary midpoints, then the point of the
        // target cell nearest the reference.
        std::vector<Vec2> way{x0.position};
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            const auto& ra = rings[static_cast<std::size_t>(path[i])];
            const auto& rb = rings[static_cast<std::size_t>(path[i + 1])];
            Vec2 acc = Vec2::Zero();
            int hits = 0;
            for (const Vec2& va : ra) {
                for (const Vec2& vb : rb) {
                    if ((va - vb).norm() < 1e-7) {
                        acc += va;
                        ++hits;
                        break;
                    }
                }
            }
            way.push_back(hits > 0 ? Vec2(acc / hits)
                                   : Vec2(0.5 * (centroids[static_cast<std::size_t>(path[i])] +
                                                 centroids[static_cast<std::size_t>(path[i + 1])])));
        }
        way.push_back(project_cell(path.back(), ref).first);

        std::vector<double> cum{0.0};
        for (std::size_t i = 0; i + 1 < way.size(); ++i) {
            cum.push_back(cum.back() + (way[i + 1] - way[i]).norm());
        }
        Eigen::VectorXd cand = z;
        const double step_len = config.v_max * config.dt;
        for (int k = 1; k <= lay.N; ++k) {
            const double s = std::min(k * step_len, cum.back());
            std::size_t seg = path.size() - 1;
            for (std::size_t j = 0; j + 1 < cum.size(); ++j) {
                if (s <= cum[j + 1] + 1e-12) {
                    seg = std::min(j, path.size() - 1);
                    break;
                }
            }
            for (int c = 0; c < num_cells; ++c) {
                cand(lay.binary(k, c)) = c == path[seg] ? 1.0 : 0.0;
            }
        }
        return cand;
    };

    const auto viterbi_candidate = [lay, touching](const Eigen::VectorXd& z) {
        const int C = lay.cells;
        std::vector<double> score(static_cast<std::size_t>(lay.N + 1) * C,
                                  -std::numeric_limits<double>::infinity());
        std::vector<int> back(static_cast<std::size_t>(lay.N + 1) * C, -1);
        for (int c = 0; c < C; ++c) {
            score[static_cast<std::size_t>(1) * C + c] = z(lay.binary(1, c));
        }
        for (int k = 2; k <= lay.N; ++k) {
            for (int c = 0; c < C; ++c) {
                double best = -std::numeric_limits<double>::infinity();
                int arg = -1;
                for (int e = 0; e < C; ++e) {
                    if (touching[static_cast<std::size_t>(e) * C + c] &&
                        score[static_cast<std::size_t>(k - 1) * C + e] > best) {
                        best = score[static_cast<std::size_t>(k - 1) * C + e];
                        arg = e;
                    }
                }
                score[static_cast<std::size_t>(k) * C + c] = best + z(lay.binary(k, c));
                back[static_cast<std::size_t>(k) * C + c] = arg;
            }
        }
        int cell = 0;
        for (int c = 1; c < C; ++c) {
            if (score[static_cast<std::size_t>(lay.N) * C + c] >
                score[static_cast<std::size_t>(lay.N) * C + cell]) {
                cell = c;
            }
        }
        Eigen::VectorXd cand = z;
        for (int k = lay.N; k >= 1; --k) {
            for (int c = 0; c < C; ++c) {
                cand(lay.binary(k, c)) = c == cell ? 1.0 : 0.0;
            }
            if (k > 1) {
                cell = back[static_cast<std::size_t>(k) * C + cell];
            }
        }
        return cand;
    };

    options.incumbent_heuristic = [lay, path_candidate,
                                   viterbi_candidate](const Eigen::VectorXd& z) {
        std::vector<Eigen::VectorXd> cands{path_candidate(z), viterbi_candidate(z)};
        bool same = true;
        for (int k = 1; k <= lay.N && same; ++k) {
            for (int c = 0; c < lay.cells && same; ++c) {
                same = cands[0](lay.binary(k, c)) == cands[1](lay.binary(k, c));
            }
        }
        if (same) {
            cands.pop_back();
        }
        return cands;
    };

    const SolveOutcome out = solve(soft, config.j_max, options);
    if (out.status == MIQPStatus::BoundExceeded || out.status == MIQPStatus::InfeasibleCertified) {
        return ReplanRequested{out.j_minus, out.iterations};
    }
    // A capped search that already holds a feasible integral plan is still a
    // usable plan; only a capped search with no incumbent at all fails.
    if (out.status == MIQPStatus::IterationLimit && out.incumbent.size() == 0) {
        return IterationLimitReached{out.j_minus, out.iterations};
    }

    MotionPlan plan_out;
    plan_out.objective = out.j_plus;
    plan_out.j_minus = out.j_minus;
    plan_out.iterations = out.iterations;
    plan_out.inputs.resize(config.N);
    for (int k = 0; k < config.N; ++k) {
        plan_out.inputs[k] = Vec2(out.incumbent(lay.input(k, 0)), out.incumbent(lay.input(k, 1)));
    }
    // Re-roll states through the exact recursion; the final input is replaced
    // so the terminal velocity lands exactly on zero.
    plan_out.states.resize(config.N + 1);
    plan_out.states[0] = x0;
    const double dt = config.dt;
    for (int k = 0; k < config.N; ++k) {
        if (k == config.N - 1) {
            plan_out.inputs[k] = -plan_out.states[k].velocity / dt;
        }
        const FlatState& s = plan_out.states[k];
        const Vec2& u = plan_out.inputs[k];
        plan_out.states[k + 1].position = s.position + dt * s.velocity + 0.5 * dt * dt * u;
        plan_out.states[k + 1].velocity = s.velocity + dt * u;
    }
    plan_out.references = flat_to_unicycle(plan_out.states, plan_out.inputs);
    return plan_out;
}

}  // namespace manav
