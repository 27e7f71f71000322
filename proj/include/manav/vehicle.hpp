#pragma once

#include "manav/geometry.hpp"

#include <numbers>

namespace manav {

// Unicycle plant with first-order actuator lags on speed and turn rate.
struct UnicycleState {
    double x = 0.0;      // meters
    double y = 0.0;      // meters
    double theta = 0.0;  // rad, wrapped to (−π, π]
    double v = 0.0;      // m/s
    double omega = 0.0;  // rad/s
};

struct ActuatorSetpoint {
    double v_cmd = 0.0;      // m/s
    double omega_cmd = 0.0;  // rad/s
};

struct ControllerGains {
    double k_t = 1.5;      // 1/s, tangential position gain
    double k_n = 0.6;      // rad·s, normal position gain
    double k_theta = 1.9;  // 1/s, heading gain
};

// Unicycle reference for one trajectory step.
struct StepReference {
    double v_r = 0.0;      // m/s
    double theta_r = 0.0;  // rad
    double omega_r = 0.0;  // rad/s
};

inline constexpr double kTauV = 0.2;            // s, speed lag
inline constexpr double kTauOmega = 0.3;        // s, turn-rate lag
inline constexpr double kVFloor = 0.05;         // m/s, guards the arctan division
inline constexpr double kPlantVMax = 0.6;       // m/s, actuator limit
inline constexpr double kPlantOmegaMax = 2.0 * std::numbers::pi;  // rad/s

// Wraps an angle to (−π, π].
double wrap_angle(double a);

// One RK4 integration step of the lagged unicycle dynamics. dt must be in
// (0, 0.02] seconds so the fixed-step integration error stays below 1e-4.
UnicycleState step(const UnicycleState& state, const ActuatorSetpoint& setpoint, double dt,
                   double tau_v = kTauV, double tau_omega = kTauOmega);

// Path-following law: position error is decomposed along the reference
// heading; the speed command corrects the tangential part, the turn-rate
// command steers onto the path. Output is saturated to the plant limits.
ActuatorSetpoint control(const UnicycleState& state, const Vec2& ref_point,
                         const StepReference& ref, const ControllerGains& gains);

}  // namespace manav
