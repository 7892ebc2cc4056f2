#pragma once

#include <array>
#include <cmath>

#include "heliquad/actuators.hpp"
#include "heliquad/errors.hpp"
#include "heliquad/rotor.hpp"
#include "heliquad/vehicle.hpp"

// Coupled airframe + motor model. Rotor thrust and torque come from the
// tip-loss rotor model through its omega^2 coefficient table; each motor sees
// its rotor's aerodynamic torque as load.

namespace heliquad {

enum class FailureMode { stop, spin_down };

struct PlantParams {
    VehicleParams vehicle;
    MotorParams motor;
    double servo_rate_limit = 500.0;  // deg/s
    FailureMode failure_mode = FailureMode::stop;
    RotorCoefficientTable rotor;
};

struct PlantState {
    VehicleState body;
    std::array<MotorState, 4> motors{};
    std::array<ServoState, 4> servos{};
    /// Rotor disconnected from its driver but still turning (spin-down failure).
    std::array<bool, 4> unpowered{};
};

struct PlantInput {
    std::array<double, 4> voltage{};
};

namespace plant_detail {

struct Derivative {
    VehicleDerivative body;
    std::array<double, 4> omega_dot{};
};

struct Snapshot {
    VehicleState body;
    std::array<double, 4> omega{};
};

inline std::array<RotorOutput, 4> rotor_outputs(const PlantParams& p, const PlantState& s,
                                                const std::array<double, 4>& omega) {
    std::array<RotorOutput, 4> out{};
    for (int i = 0; i < 4; ++i) {
        if (s.motors[i].failed) continue;
        const auto perf = p.rotor.evaluate(s.servos[i].pitch_deg, omega[i]);
        out[i] = {perf.thrust, perf.torque};
    }
    return out;
}

inline Derivative derivative(const PlantParams& p, const PlantState& s, const PlantInput& u, const Snapshot& x) {
    Derivative d;
    const auto rotors = rotor_outputs(p, s, x.omega);
    for (int i = 0; i < 4; ++i) {
        if (s.motors[i].failed) continue;
        const double w = std::max(0.0, x.omega[i]);
        if (s.unpowered[i]) {
            // Open-circuit windings: only friction and aerodynamic drag remain.
            d.omega_dot[i] = (w > 0.0) ? -(p.motor.i0 / p.motor.kv() + rotors[i].torque) / p.motor.rotor_inertia : 0.0;
        } else {
            const double v = std::clamp(u.voltage[i], 0.0, p.motor.v_max);
            d.omega_dot[i] = motor_acceleration(p.motor, w, v, rotors[i].torque);
        }
    }
    BodyWrench wrench = aero_wrench(rotors, p.vehicle);
    if (p.vehicle.rotor_gyroscopics) {
        const auto mounts = p.vehicle.rotors();
        Vec3 h = Vec3::Zero();
        for (int i = 0; i < 4; ++i) {
            // Each rotor spins opposite to the reaction it puts on the body.
            h.z() -= mounts[i].yaw_sign * p.vehicle.rotor_inertia * x.omega[i];
            wrench.moment.z() += mounts[i].yaw_sign * p.vehicle.rotor_inertia * d.omega_dot[i];
        }
        wrench.moment -= x.body.body_rates.cross(h);
    }
    d.body = rigid_body_derivatives(x.body, wrench, p.vehicle);
    return d;
}

inline Snapshot advance(const Snapshot& x, const Derivative& d, double h) {
    Snapshot out;
    out.body = heliquad::advance(x.body, d.body, h);
    for (int i = 0; i < 4; ++i) out.omega[i] = x.omega[i] + h * d.omega_dot[i];
    return out;
}

}  // namespace plant_detail

/// Rotor forces at the current state, as the airframe feels them.
inline std::array<RotorOutput, 4> plant_rotor_outputs(const PlantParams& p, const PlantState& s) {
    std::array<double, 4> w{};
    for (int i = 0; i < 4; ++i) w[i] = s.motors[i].omega;
    return plant_detail::rotor_outputs(p, s, w);
}

/// One RK4 step of airframe and motor speeds together. Servo pitch and motor
/// voltage are held over the step.
inline PlantState plant_step(const PlantParams& p, const PlantState& s, const PlantInput& u, double dt) {
    using namespace plant_detail;
    Snapshot x0{s.body, {}};
    for (int i = 0; i < 4; ++i) x0.omega[i] = s.motors[i].omega;
    const auto k1 = derivative(p, s, u, x0);
    const auto k2 = derivative(p, s, u, plant_detail::advance(x0, k1, 0.5 * dt));
    const auto k3 = derivative(p, s, u, plant_detail::advance(x0, k2, 0.5 * dt));
    const auto k4 = derivative(p, s, u, plant_detail::advance(x0, k3, dt));
    Derivative sum;
    sum.body.position_dot = (k1.body.position_dot + 2.0 * k2.body.position_dot + 2.0 * k3.body.position_dot +
                             k4.body.position_dot) / 6.0;
    sum.body.velocity_dot = (k1.body.velocity_dot + 2.0 * k2.body.velocity_dot + 2.0 * k3.body.velocity_dot +
                             k4.body.velocity_dot) / 6.0;
    sum.body.attitude_dot = (k1.body.attitude_dot + 2.0 * k2.body.attitude_dot + 2.0 * k3.body.attitude_dot +
                             k4.body.attitude_dot) / 6.0;
    sum.body.rates_dot =
        (k1.body.rates_dot + 2.0 * k2.body.rates_dot + 2.0 * k3.body.rates_dot + k4.body.rates_dot) / 6.0;
    for (int i = 0; i < 4; ++i)
        sum.omega_dot[i] = (k1.omega_dot[i] + 2.0 * k2.omega_dot[i] + 2.0 * k3.omega_dot[i] + k4.omega_dot[i]) / 6.0;
    const auto x1 = plant_detail::advance(x0, sum, dt);

    PlantState next = s;
    next.body = x1.body;
    next.body.attitude.normalize();
    for (int i = 0; i < 4; ++i)
        if (!s.motors[i].failed) next.motors[i].omega = std::max(0.0, x1.omega[i]);
    if (!is_finite(next.body)) throw DivergenceError("vehicle state became non-finite");
    return next;
}

inline void fail_rotor(const PlantParams& p, PlantState& s, int rotor_id) {
    const int i = rotor_id - 1;
    if (p.failure_mode == FailureMode::stop)
        s.motors[i] = inject_failure(s.motors[i]);
    else
        s.unpowered[i] = true;
}

}  // namespace heliquad
