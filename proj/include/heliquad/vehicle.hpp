#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "heliquad/errors.hpp"
#include "heliquad/units.hpp"

// Rigid-body model in a north-east-down inertial frame. The body frame has
// X forward, Y right, Z down; rotor thrust acts along -Z_B.

namespace heliquad {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

struct RotorMount {
    Vec3 position;      // body frame, m
    double yaw_sign;    // sign of the reaction torque each rotor puts on the body about Z_B
};

struct VehicleParams {
    double mass = 0.602;
    double arm_length = 0.1794;
    Vec3 inertia_diag{3.34e-3, 3.34e-3, 6.66e-3};
    /// Rotor angular-momentum coupling; off unless enabled.
    bool rotor_gyroscopics = false;
    double rotor_inertia = 2.0e-5;

    /// Rotor 1 front, 2 right, 3 rear, 4 left. Rotors 1 and 3 turn opposite
    /// to 2 and 4, giving a yaw moment of -tau1 + tau2 - tau3 + tau4.
    std::array<RotorMount, 4> rotors() const {
        const double l = arm_length;
        return {RotorMount{Vec3(l, 0, 0), -1.0}, RotorMount{Vec3(0, l, 0), 1.0}, RotorMount{Vec3(-l, 0, 0), -1.0},
                RotorMount{Vec3(0, -l, 0), 1.0}};
    }

    void validate() const {
        if (!(mass > 0.0)) throw ValidationError("vehicle mass must be positive");
        if (!(arm_length > 0.0)) throw ValidationError("arm length must be positive");
        if (!(inertia_diag.minCoeff() > 0.0)) throw ValidationError("inertia must be positive definite");
    }
};

struct VehicleState {
    Vec3 position = Vec3::Zero();   // m, inertial NED
    Vec3 velocity = Vec3::Zero();   // m/s, inertial
    Quat attitude = Quat::Identity();  // body -> inertial
    Vec3 body_rates = Vec3::Zero();    // rad/s
};

struct BodyWrench {
    Vec3 force = Vec3::Zero();   // body frame, N
    Vec3 moment = Vec3::Zero();  // body frame, N m
};

struct RotorOutput {
    double thrust = 0.0;  // N, positive along -Z_B
    double torque = 0.0;  // N m, aerodynamic drag torque magnitude
};

inline BodyWrench aero_wrench(const std::array<RotorOutput, 4>& rotors, const VehicleParams& params) {
    BodyWrench w;
    const auto mounts = params.rotors();
    for (std::size_t i = 0; i < 4; ++i) {
        const Vec3 f(0.0, 0.0, -rotors[i].thrust);
        w.force += f;
        w.moment += mounts[i].position.cross(f);
        w.moment.z() += mounts[i].yaw_sign * rotors[i].torque;
    }
    return w;
}

/// Time derivative of the rigid-body state. The quaternion derivative is
/// stored as (w, x, y, z) coefficients.
struct VehicleDerivative {
    Vec3 position_dot;
    Vec3 velocity_dot;
    Eigen::Vector4d attitude_dot;
    Vec3 rates_dot;
};

inline VehicleDerivative rigid_body_derivatives(const VehicleState& s, const BodyWrench& wrench,
                                                const VehicleParams& params) {
    VehicleDerivative d;
    d.position_dot = s.velocity;
    d.velocity_dot = Vec3(0.0, 0.0, k_gravity) + s.attitude * wrench.force / params.mass;
    const Quat omega_q(0.0, s.body_rates.x(), s.body_rates.y(), s.body_rates.z());
    const Quat qdot = s.attitude * omega_q;
    d.attitude_dot = 0.5 * Eigen::Vector4d(qdot.w(), qdot.x(), qdot.y(), qdot.z());
    const Vec3& J = params.inertia_diag;
    const Vec3 h = J.cwiseProduct(s.body_rates);
    d.rates_dot = (wrench.moment - s.body_rates.cross(h)).cwiseQuotient(J);
    return d;
}

inline VehicleState advance(const VehicleState& s, const VehicleDerivative& d, double h) {
    VehicleState out;
    out.position = s.position + h * d.position_dot;
    out.velocity = s.velocity + h * d.velocity_dot;
    out.attitude = Quat(s.attitude.w() + h * d.attitude_dot[0], s.attitude.x() + h * d.attitude_dot[1],
                        s.attitude.y() + h * d.attitude_dot[2], s.attitude.z() + h * d.attitude_dot[3]);
    out.body_rates = s.body_rates + h * d.rates_dot;
    return out;
}

inline bool is_finite(const VehicleState& s) {
    return s.position.allFinite() && s.velocity.allFinite() && s.attitude.coeffs().allFinite() &&
           s.body_rates.allFinite();
}

/// Classic RK4 with a wrench held constant over the step; the quaternion is
/// renormalised afterwards.
inline VehicleState integrate_step(const VehicleState& s, const BodyWrench& wrench, const VehicleParams& params,
                                   double dt) {
    const auto k1 = rigid_body_derivatives(s, wrench, params);
    const auto k2 = rigid_body_derivatives(advance(s, k1, 0.5 * dt), wrench, params);
    const auto k3 = rigid_body_derivatives(advance(s, k2, 0.5 * dt), wrench, params);
    const auto k4 = rigid_body_derivatives(advance(s, k3, dt), wrench, params);
    VehicleDerivative sum;
    sum.position_dot = (k1.position_dot + 2.0 * k2.position_dot + 2.0 * k3.position_dot + k4.position_dot) / 6.0;
    sum.velocity_dot = (k1.velocity_dot + 2.0 * k2.velocity_dot + 2.0 * k3.velocity_dot + k4.velocity_dot) / 6.0;
    sum.attitude_dot = (k1.attitude_dot + 2.0 * k2.attitude_dot + 2.0 * k3.attitude_dot + k4.attitude_dot) / 6.0;
    sum.rates_dot = (k1.rates_dot + 2.0 * k2.rates_dot + 2.0 * k3.rates_dot + k4.rates_dot) / 6.0;
    auto next = advance(s, sum, dt);
    next.attitude.normalize();
    if (!is_finite(next)) throw DivergenceError("vehicle state became non-finite");
    return next;
}

/// Roll, pitch, yaw (Z-Y-X) in radians.
inline Vec3 euler_angles(const Quat& q) {
    const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
    const double roll = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
    const double pitch = std::asin(std::clamp(2.0 * (w * y - z * x), -1.0, 1.0));
    const double yaw = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
    return {roll, pitch, yaw};
}

inline Quat from_euler(double roll, double pitch, double yaw) {
    return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                Eigen::AngleAxisd(roll, Vec3::UnitX()));
}

inline double rotational_energy(const VehicleState& s, const VehicleParams& p) {
    return 0.5 * s.body_rates.dot(p.inertia_diag.cwiseProduct(s.body_rates));
}

}  // namespace heliquad
