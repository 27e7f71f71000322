#pragma once

#include "manav/medial_axis.hpp"
#include "manav/mpc.hpp"
#include "manav/scenario.hpp"
#include "manav/vehicle.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace manav {

enum class EpisodeOutcome { GoalReached, Stuck, Timeout };

struct TelemetryRow {
    double t = 0.0;  // seconds
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double v = 0.0;
    double omega = 0.0;
};

// One planner invocation; result is "plan", "replan" or "iteration_limit".
struct PlanRecord {
    double t = 0.0;
    int route_version = 0;
    std::string result;
    double objective = 0.0;
    double j_minus = 0.0;
    int iterations = 0;
};

struct ReplanEvent {
    double t = 0.0;
    double j_minus = 0.0;
    int iterations = 0;
    double wall_ms = 0.0;  // corridor deletion + re-search wall time
    bool rerouted = false;
};

struct EpisodeConfig {
    MPCConfig mpc;
    ControllerGains gains;
    double time_limit = 240.0;    // simulated seconds
    double goal_tolerance = 0.15;  // meters
    double goal_speed = 0.05;      // m/s
    double plant_dt = 0.01;        // plant integration step (100 Hz)
    int control_divisor = 2;       // plant steps per controller update (50 Hz)
    // Boundary subdivision for the routing mesh. Short boundary edges keep
    // circumcenters — hence route waypoints — near the free space they stem from.
    double routing_mesh_max_edge = 0.9;  // meters
};

struct EpisodeLog {
    EpisodeOutcome outcome = EpisodeOutcome::Timeout;
    double duration = 0.0;  // simulated seconds
    std::vector<TelemetryRow> telemetry;
    std::vector<PlanRecord> plans;
    std::vector<ReplanEvent> replans;
    std::vector<std::vector<Vec2>> route_versions;  // waypoints per version
    std::vector<std::vector<Vec2>> medial_chains;   // initial corridor polylines
    std::string error;  // first propagated module error, empty when clean
};

// Closed loop: global route over the mapped obstacles, one planner call per
// MPC period from the measured state, controller at 50 Hz tracking the active
// plan, plant at 100 Hz. A rejected terminal set triggers corridor deletion,
// a backtrack edge and a fresh route; the vehicle meanwhile continues (and
// finishes at the zero-velocity end of) the previous plan.
EpisodeLog run_episode(const Scenario& scenario, const EpisodeConfig& config = {});

// Interpolated tracking reference of a plan at `tau` seconds past its start:
// linear position and speed, angular interpolation for the heading. Past the
// horizon the terminal point is held with zero speed.
std::pair<Vec2, StepReference> sample_plan(const MotionPlan& plan, double tau, double dt);

// Line-delimited records, one JSON object per line.
void write_log(std::ostream& os, const EpisodeLog& log);
EpisodeLog read_log(std::istream& is);

}  // namespace manav
