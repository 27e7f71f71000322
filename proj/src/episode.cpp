#include "manav/episode.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace manav {

namespace {

const char* outcome_name(EpisodeOutcome o) {
    switch (o) {
        case EpisodeOutcome::GoalReached: return "GoalReached";
        case EpisodeOutcome::Stuck: return "Stuck";
        default: return "Timeout";
    }
}

EpisodeOutcome outcome_from(const std::string& s) {
    if (s == "GoalReached") {
        return EpisodeOutcome::GoalReached;
    }
    if (s == "Stuck") {
        return EpisodeOutcome::Stuck;
    }
    return EpisodeOutcome::Timeout;
}

nlohmann::json points_json(const std::vector<Vec2>& pts) {
    nlohmann::json a = nlohmann::json::array();
    for (const Vec2& p : pts) {
        a.push_back({p.x(), p.y()});
    }
    return a;
}

std::vector<Vec2> points_from(const nlohmann::json& a) {
    std::vector<Vec2> pts;
    for (const auto& p : a) {
        pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    return pts;
}

// JSON has no infinity literal; cap so bounds survive a round trip.
double finite_or_cap(double x) {
    if (std::isfinite(x)) {
        return x;
    }
    return x > 0.0 ? 1e308 : -1e308;
}

}  // namespace

std::pair<Vec2, StepReference> sample_plan(const MotionPlan& plan, double tau, double dt) {
    const int n = static_cast<int>(plan.inputs.size());
    if (n == 0 || plan.states.size() != plan.inputs.size() + 1) {
        throw std::invalid_argument("sample_plan: malformed plan");
    }
    if (tau >= n * dt) {
        return {plan.states.back().position,
                StepReference{0.0, plan.references.back().theta_r, 0.0}};
    }
    tau = std::max(tau, 0.0);
    const int k = std::min(static_cast<int>(tau / dt), n - 1);
    const double a = tau / dt - k;
    const Vec2 pos = (1.0 - a) * plan.states[k].position + a * plan.states[k + 1].position;
    StepReference ref;
    ref.v_r = (1.0 - a) * plan.references[k].v_r + a * plan.references[k + 1].v_r;
    ref.theta_r = wrap_angle(plan.references[k].theta_r +
                             a * wrap_angle(plan.references[k + 1].theta_r -
                                            plan.references[k].theta_r));
    ref.omega_r = (1.0 - a) * plan.references[k].omega_r + a * plan.references[k + 1].omega_r;
    return {pos, ref};
}

EpisodeLog run_episode(const Scenario& scenario, const EpisodeConfig& config) {
    EpisodeLog log;
    // Obstacles grow by the robot radius for routing and additionally by half
    // an MPC step of travel for the local constraints, covering the motion
    // between constrained knots.
    const double local_margin =
        scenario.robot_radius + 0.5 * config.mpc.v_max * config.mpc.dt;

    TriangulationMesh mesh;
    MedialAxisGraph graph;
    int goal_node = -1;
    std::optional<Route> route;
    try {
        std::vector<HPolytope> routing_obstacles;
        routing_obstacles.reserve(scenario.mapped.size());
        for (const HPolytope& o : scenario.mapped) {
            routing_obstacles.push_back(bloat(o, scenario.robot_radius));
        }
        mesh = triangulate(scenario.arena_box(), routing_obstacles,
                           config.routing_mesh_max_edge);
        graph = build_graph(mesh);
        const auto [start_node, g] = attach_endpoints(graph, mesh, scenario.start, scenario.goal);
        goal_node = g;
        route = shortest_route(graph, start_node, goal_node);
    } catch (const std::exception& e) {
        log.error = e.what();
        log.outcome = EpisodeOutcome::Stuck;
        return log;
    }
    for (const auto& [key, set] : graph.chains) {
        for (const auto& poly : set) {
            log.medial_chains.push_back(poly);
        }
    }
    if (!route) {
        log.outcome = EpisodeOutcome::Stuck;
        return log;
    }
    int route_version = 0;
    log.route_versions.push_back(route->waypoints);

    UnicycleState veh{scenario.start.x(), scenario.start.y(), scenario.start_heading, 0.0, 0.0};
    std::optional<MotionPlan> active;
    double plan_t0 = 0.0;
    ActuatorSetpoint setpoint;
    const int plan_every = std::max(1, static_cast<int>(std::lround(config.mpc.dt / config.plant_dt)));
    const int total_steps = static_cast<int>(std::ceil(config.time_limit / config.plant_dt));

    for (int i = 0; i <= total_steps; ++i) {
        const double t = i * config.plant_dt;
        log.telemetry.push_back({t, veh.x, veh.y, veh.theta, veh.v, veh.omega});

        const Vec2 pos(veh.x, veh.y);
        if ((pos - scenario.goal).norm() <= config.goal_tolerance &&
            std::abs(veh.v) < config.goal_speed) {
            log.outcome = EpisodeOutcome::GoalReached;
            log.duration = t;
            return log;
        }
        if (i == total_steps) {
            break;
        }

        if (i % plan_every == 0) {
            try {
                const FlatState x0{pos, Vec2(veh.v * std::cos(veh.theta),
                                             veh.v * std::sin(veh.theta))};
                const ConvexPartition part = local_map(scenario, pos, local_margin);
                PlanResult result = plan(x0, *route, part, config.mpc);
                if (auto* mp = std::get_if<MotionPlan>(&result)) {
                    log.plans.push_back({t, route_version, "plan", mp->objective, mp->j_minus,
                                         mp->iterations});
                    active = std::move(*mp);
                    plan_t0 = t;
                } else if (auto* rr = std::get_if<ReplanRequested>(&result)) {
                    log.plans.push_back({t, route_version, "replan", 0.0, rr->j_minus,
                                         rr->iterations});
                    const auto wall0 = std::chrono::steady_clock::now();
                    const auto [p_near, tri] = nearest_circumcenter(mesh, pos);
                    (void)tri;
                    // The globally nearest circumcenter can sit off-route near
                    // junctions or when the tracker cuts corners; the corridor
                    // being routed is then the route chain closest to the
                    // vehicle.
                    Vec2 target = p_near;
                    bool on_route = false;
                    double best_d = std::numeric_limits<double>::infinity();
                    Vec2 best_pt = p_near;
                    for (const RouteChain& rc : route->chains) {
                        for (const Vec2& p : rc.polyline) {
                            if ((p - p_near).norm() < 1e-9) {
                                on_route = true;
                            }
                            const double dv = (p - pos).norm();
                            if (dv < best_d) {
                                best_d = dv;
                                best_pt = p;
                            }
                        }
                    }
                    if (!on_route) {
                        target = best_pt;
                    }
                    const int removed = remove_current_corridor(graph, *route, target);
                    const int last_node = route->chains[static_cast<std::size_t>(removed)].from;
                    const int bt = add_backtrack_edge(graph, mesh, pos, last_node);
                    std::optional<Route> next = shortest_route(graph, bt, goal_node);
                    const double wall_ms =
                        std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - wall0)
                            .count();
                    if (!next) {
                        log.replans.push_back({t, rr->j_minus, rr->iterations, wall_ms, false});
                        log.outcome = EpisodeOutcome::Stuck;
                        log.duration = t;
                        return log;
                    }
                    route = std::move(next);
                    ++route_version;
                    log.route_versions.push_back(route->waypoints);
                    log.replans.push_back({t, rr->j_minus, rr->iterations, wall_ms, true});
                } else {
                    const auto& il = std::get<IterationLimitReached>(result);
                    log.plans.push_back({t, route_version, "iteration_limit", 0.0, il.j_minus,
                                         il.iterations});
                }
            } catch (const std::exception& e) {
                log.error = e.what();
                log.outcome = EpisodeOutcome::Stuck;
                log.duration = t;
                return log;
            }
        }

        if (i % config.control_divisor == 0) {
            if (active) {
                const auto [ref_point, ref] = sample_plan(*active, t - plan_t0, config.mpc.dt);
                setpoint = control(veh, ref_point, ref, config.gains);
            } else {
                setpoint = ActuatorSetpoint{};
            }
        }
        veh = step(veh, setpoint, config.plant_dt);
    }
    log.outcome = EpisodeOutcome::Timeout;
    log.duration = total_steps * config.plant_dt;
    return log;
}

void write_log(std::ostream& os, const EpisodeLog& log) {
    os << nlohmann::json{{"type", "meta"},
                         {"outcome", outcome_name(log.outcome)},
                         {"duration_s", log.duration},
                         {"error", log.error}}
              .dump()
       << '\n';
    for (const auto& chain : log.medial_chains) {
        os << nlohmann::json{{"type", "chain"}, {"points_m", points_json(chain)}}.dump() << '\n';
    }
    for (std::size_t v = 0; v < log.route_versions.size(); ++v) {
        os << nlohmann::json{{"type", "route"},
                             {"version", v},
                             {"waypoints_m", points_json(log.route_versions[v])}}
                  .dump()
           << '\n';
    }
    for (const PlanRecord& p : log.plans) {
        os << nlohmann::json{{"type", "plan"},
                             {"t_s", p.t},
                             {"route_version", p.route_version},
                             {"result", p.result},
                             {"objective", finite_or_cap(p.objective)},
                             {"j_minus", finite_or_cap(p.j_minus)},
                             {"iterations", p.iterations}}
                  .dump()
           << '\n';
    }
    for (const ReplanEvent& r : log.replans) {
        os << nlohmann::json{{"type", "replan"},
                             {"t_s", r.t},
                             {"j_minus", finite_or_cap(r.j_minus)},
                             {"iterations", r.iterations},
                             {"wall_ms", r.wall_ms},
                             {"rerouted", r.rerouted}}
                  .dump()
           << '\n';
    }
    for (const TelemetryRow& row : log.telemetry) {
        os << nlohmann::json{{"type", "telemetry"},
                             {"t_s", row.t},
                             {"x_m", row.x},
                             {"y_m", row.y},
                             {"theta_rad", row.theta},
                             {"v_mps", row.v},
                             {"omega_radps", row.omega}}
                  .dump()
           << '\n';
    }
}

EpisodeLog read_log(std::istream& is) {
    EpisodeLog log;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        const nlohmann::json j = nlohmann::json::parse(line);
        const std::string type = j.at("type").get<std::string>();
        if (type == "meta") {
            log.outcome = outcome_from(j.at("outcome").get<std::string>());
            log.duration = j.at("duration_s").get<double>();
            log.error = j.at("error").get<std::string>();
        } else if (type == "chain") {
            log.medial_chains.push_back(points_from(j.at("points_m")));
        } else if (type == "route") {
            log.route_versions.push_back(points_from(j.at("waypoints_m")));
        } else if (type == "plan") {
            log.plans.push_back({j.at("t_s").get<double>(), j.at("route_version").get<int>(),
                                 j.at("result").get<std::string>(),
                                 j.at("objective").get<double>(), j.at("j_minus").get<double>(),
                                 j.at("iterations").get<int>()});
        } else if (type == "replan") {
            log.replans.push_back({j.at("t_s").get<double>(), j.at("j_minus").get<double>(),
                                   j.at("iterations").get<int>(), j.at("wall_ms").get<double>(),
                                   j.at("rerouted").get<bool>()});
        } else if (type == "telemetry") {
            log.telemetry.push_back({j.at("t_s").get<double>(), j.at("x_m").get<double>(),
                                     j.at("y_m").get<double>(), j.at("theta_rad").get<double>(),
                                     j.at("v_mps").get<double>(),
                                     j.at("omega_radps").get<double>()});
        } else {
            throw std::invalid_argument("read_log: unknown record type " + type);
        }
    }
    return log;
}

}  // namespace manav
