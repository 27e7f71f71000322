#include "manav/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace manav {

double wrap_angle(double a) {
    const double w = std::remainder(a, 2.0 * std::numbers::pi);
    return w <= -std::numbers::pi ? w + 2.0 * std::numbers::pi : w;
}

UnicycleState step(const UnicycleState& state, const ActuatorSetpoint& setpoint, double dt,
                   double tau_v, double tau_omega) {
    if (dt <= 0.0 || dt > 0.02) {
        throw std::invalid_argument("step: dt must be in (0, 0.02] seconds");
    }
    if (tau_v <= 0.0 || tau_omega <= 0.0) {
        throw std::invalid_argument("step: time constants must be positive");
    }
    using State5 = Eigen::Matrix<double, 5, 1>;
    const auto deriv = [&](const State5& s) {
        State5 d;
        d << s(3) * std::cos(s(2)), s(3) * std::sin(s(2)), s(4),
            (setpoint.v_cmd - s(3)) / tau_v, (setpoint.omega_cmd - s(4)) / tau_omega;
        return d;
    };
    State5 s0;
    s0 << state.x, state.y, state.theta, state.v, state.omega;
    const State5 k1 = deriv(s0);
    const State5 k2 = deriv(s0 + 0.5 * dt * k1);
    const State5 k3 = deriv(s0 + 0.5 * dt * k2);
    const State5 k4 = deriv(s0 + dt * k3);
    const State5 s1 = s0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return {s1(0), s1(1), wrap_angle(s1(2)), s1(3), s1(4)};
}

ActuatorSetpoint control(const UnicycleState& state, const Vec2& ref_point,
                         const StepReference& ref, const ControllerGains& gains) {
    const Vec2 e = ref_point - Vec2(state.x, state.y);
    const double e_t = e.x() * std::cos(ref.theta_r) + e.y() * std::sin(ref.theta_r);
    const double e_n = -e.x() * std::sin(ref.theta_r) + e.y() * std::cos(ref.theta_r);

    const double v_cmd = gains.k_t * e_t * std::cos(ref.theta_r - state.theta) + ref.v_r;
    const double theta_cmd =
        std::atan(gains.k_n * e_n / std::max(state.v, kVFloor)) + ref.theta_r;
    const double omega_cmd = gains.k_theta * wrap_angle(theta_cmd - state.theta) + ref.omega_r;

    return {std::clamp(v_cmd, 0.0, kPlantVMax),
            std::clamp(omega_cmd, -kPlantOmegaMax, kPlantOmegaMax)};
}

}  // namespace manav
