#pragma once

#include <algorithm>
#include <cmath>

#include "heliquad/errors.hpp"
#include "heliquad/units.hpp"

namespace heliquad {

/// Brushless DC motor constants. The speed constant is given in RPM per volt
/// and used internally in rad/s per volt.
struct MotorParams {
    double v_max = 12.0;
    double kv_rpm_per_volt = 900.0;
    double resistance = 0.09;
    double i0 = 0.5;
    double rotor_inertia = 2.0e-5;

    double kv() const { return rpm_to_rad_s(kv_rpm_per_volt); }

    void validate() const {
        if (!(v_max > 0 && kv_rpm_per_volt > 0 && resistance > 0 && i0 > 0 && rotor_inertia > 0))
            throw ValidationError("motor parameters must all be positive");
    }
};

struct MotorState {
    double omega = 0.0;  // rad/s
    bool failed = false;
};

/// Shaft acceleration: I w' = ((V - w/Kv)/R - I0)/Kv - tau.
inline double motor_acceleration(const MotorParams& p, double omega, double voltage, double load_torque) {
    const double kv = p.kv();
    const double current = (voltage - omega / kv) / p.resistance - p.i0;
    return (current / kv - load_torque) / p.rotor_inertia;
}

/// Speed where the shaft torque balances the load at a fixed voltage.
inline double motor_steady_speed(const MotorParams& p, double voltage, double load_torque) {
    const double kv = p.kv();
    return kv * (voltage - p.resistance * (p.i0 + load_torque * kv));
}

/// One RK4 step at constant voltage and load. Failed motors are returned
/// unchanged.
inline MotorState motor_step(const MotorState& state, const MotorParams& params, double voltage, double load_torque,
                             double dt) {
    if (state.failed) return state;
    const double v = std::clamp(voltage, 0.0, params.v_max);
    auto f = [&](double w) { return motor_acceleration(params, w, v, load_torque); };
    const double w = state.omega;
    const double k1 = f(w);
    const double k2 = f(w + 0.5 * dt * k1);
    const double k3 = f(w + 0.5 * dt * k2);
    const double k4 = f(w + dt * k3);
    MotorState next = state;
    next.omega = std::max(0.0, w + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    return next;
}

inline MotorState inject_failure(MotorState state) {
    state.failed = true;
    state.omega = 0.0;
    return state;
}

struct SpeedControllerGains {
    double kp = 0.002;  // V per rad/s
    double ki = 0.25;   // V per rad
};

struct SpeedControllerOutput {
    double voltage = 0.0;
    bool saturated = false;
};

/// PI speed loop standing in for the ESC. The integrator is frozen while the
/// output is saturated in the direction of the error.
class SpeedController {
public:
    SpeedController() = default;
    explicit SpeedController(SpeedControllerGains gains) : gains_(gains) {}

    SpeedControllerOutput step(double omega_desired, double omega, const MotorParams& params, double dt) {
        const double error = omega_desired - omega;
        const double unclamped = gains_.kp * error + gains_.ki * (integrator_ + error * dt);
        SpeedControllerOutput out;
        out.voltage = std::clamp(unclamped, 0.0, params.v_max);
        out.saturated = out.voltage != unclamped;
        const bool winding_up = (unclamped > params.v_max && error > 0.0) || (unclamped < 0.0 && error < 0.0);
        if (!winding_up) integrator_ += error * dt;
        return out;
    }

    double integrator() const { return integrator_; }
    void reset(double integrator = 0.0) { integrator_ = integrator; }
    const SpeedControllerGains& gains() const { return gains_; }

private:
    SpeedControllerGains gains_{};
    double integrator_ = 0.0;
};

struct ServoState {
    double pitch_deg = 0.0;
    double rate_limit = 500.0;  // deg/s
};

/// Rate-limited move toward the command; lands exactly on it when within one
/// step.
inline ServoState servo_step(ServoState state, double commanded_pitch_deg, double dt) {
    const double max_step = state.rate_limit * dt;
    const double delta = commanded_pitch_deg - state.pitch_deg;
    if (std::abs(delta) <= max_step)
        state.pitch_deg = commanded_pitch_deg;
    else
        state.pitch_deg += std::copysign(max_step, delta);
    return state;
}

}  // namespace heliquad
