#pragma once

#include "manav/geometry.hpp"
#include "manav/medial_axis.hpp"
#include "manav/miqp.hpp"
#include "manav/vehicle.hpp"

#include <numbers>
#include <variant>
#include <vector>

namespace manav {

// Receding-horizon planner on double-integrator flat dynamics. The decision
// vector stacks states (4 per step, 0..N), inputs (2 per step, 0..N−1) and
// one cell-selector binary per partition cell per step 1..N; soften() appends
// one slack variable per softened inequality row.
struct MPCConfig {
    int N = 15;
    double dt = 0.5;  // seconds
    Eigen::Matrix4d Q_k = Eigen::Vector4d(0.1, 0.1, 0.0, 0.0).asDiagonal();
    Eigen::Matrix2d R_k = Eigen::Vector2d(10.0, 10.0).asDiagonal();
    Eigen::Matrix4d Q_N = Eigen::Vector4d(10.0, 10.0, 0.0, 0.0).asDiagonal();
    double v_max = 0.5;      // m/s, |vx|+|vy| bound
    double v_min = 0.1;      // m/s, scales the acceleration bound
    double omega_max = std::numbers::pi;  // rad/s
    double slack_weight = 1e6;
    double j_max = 1000.0;   // objective bound that triggers a global re-plan
    double lookahead = 2.0;  // meters of route arc length ahead of the vehicle
    double terminal_radius = 1.25;  // circumradius of the terminal hexagon
    int iteration_limit = 150;
};

// State of the flat double integrator: position and velocity in the plane.
struct FlatState {
    Vec2 position = Vec2::Zero();
    Vec2 velocity = Vec2::Zero();
};

// Terminal set: position within `deviation` translated to `reference`,
// velocity pinned to zero by equality rows.
struct TerminalSpec {
    Vec2 reference = Vec2::Zero();
    Zonotope deviation;
};

struct MotionPlan {
    std::vector<FlatState> states;          // N+1 entries
    std::vector<Vec2> inputs;               // N acceleration pairs
    std::vector<StepReference> references;  // N+1 entries, one per state
    double objective = 0.0;
    double j_minus = 0.0;
    int iterations = 0;
};

// Terminal set unreachable within budget: delete the corridor and re-route.
struct ReplanRequested {
    double j_minus = 0.0;
    int iterations = 0;
};

// Solver ran out of iterations with the gap open; caller keeps the old plan.
struct IterationLimitReached {
    double j_minus = 0.0;
    int iterations = 0;
};

using PlanResult = std::variant<MotionPlan, ReplanRequested, IterationLimitReached>;

// Assembles the hard mixed-integer problem: initial-state and dynamics
// equalities, velocity/acceleration polytopes, big-M cell membership for
// steps 1..N with a sum-to-one row per step, terminal velocity equalities and
// terminal position halfspaces. Input bounds occupy the leading 4N inequality
// rows. The stage cost references (reference, 0 velocity) at every step.
MIQProblem build_problem(const FlatState& x0, const TerminalSpec& terminal,
                         const ConvexPartition& partition, const MPCConfig& config);

// Appends a nonnegative slack to every inequality row past the first
// `skip_leading_inequalities`, charged weight·s² in the objective. Equality
// rows are never softened.
MIQProblem soften(const MIQProblem& problem, double weight, int skip_leading_inequalities = 0);

// Point on the route polyline at arc length `distance` past the closest point
// to q_veh, saturated at the route end.
Vec2 lookahead_reference(const Route& route, const Vec2& q_veh, double distance);

// Differential-flatness map to (v_r, θ_r, ω_r) per step. Zero-speed steps get
// ω_r = 0 and hold the neighbouring θ_r (backward-filled at the front).
std::vector<StepReference> flat_to_unicycle(const std::vector<FlatState>& states,
                                            const std::vector<Vec2>& inputs);

// Full planning step: lookahead terminal spec, build + soften, branch and
// bound with j_max cutoff. States of a returned plan are re-rolled from x0
// and the optimal inputs so the dynamics recursion holds exactly; the last
// input is nudged so the terminal velocity is exactly zero.
PlanResult plan(const FlatState& x0, const Route& route, const ConvexPartition& partition,
                const MPCConfig& config);

}  // namespace manav
