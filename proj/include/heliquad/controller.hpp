#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "heliquad/errors.hpp"
#include "heliquad/nn_alloc.hpp"
#include "heliquad/rotor.hpp"
#include "heliquad/units.hpp"
#include "heliquad/vehicle.hpp"

// Cascaded controller: position loop -> desired thrust vector, quaternion PD
// attitude loop -> body moments, then allocation onto the four rotors.
//
// The desired thrust vector T_d points along +Z_B of the desired attitude (the
// body axis the rotor thrust pushes against), so in hover it is (0, 0, m g).

namespace heliquad {

struct ControlGains {
    Vec3 pos_p{1.6, 1.6, 25.0};
    Vec3 pos_d{1.8, 1.8, 6.5};
    Vec3 att_p{0.9, 0.9, 0.2};
    Vec3 att_v{0.07, 0.07, 0.2};

    void validate() const {
        if (!(pos_p.minCoeff() > 0 && pos_d.minCoeff() > 0 && att_p.minCoeff() > 0 && att_v.minCoeff() > 0))
            throw ValidationError("controller gains must all be positive");
    }
};

struct ControlSetpoint {
    Vec3 position = Vec3::Zero();  // m, NED
    Vec3 velocity = Vec3::Zero();  // m/s
    double yaw_deg = 0.0;
};

/// m (p (r - r_d) + d (v - v_d) + g). The error is taken as state minus
/// reference because T_d points down (along Z_B) in this frame.
inline Vec3 position_control(const ControlSetpoint& sp, const VehicleState& s, const ControlGains& g, double mass) {
    const Vec3 e_r = s.position - sp.position;
    const Vec3 e_v = s.velocity - sp.velocity;
    return mass * (g.pos_p.cwiseProduct(e_r) + g.pos_d.cwiseProduct(e_v) + Vec3(0.0, 0.0, k_gravity));
}

/// Attitude whose Z_B is along T_d and whose Y_B is perpendicular to the yaw
/// heading, so X_B points along the heading as far as the tilt allows.
inline Quat desired_attitude(const Vec3& thrust_vector, double yaw_deg) {
    const Vec3 z = thrust_vector.normalized();
    const double psi = deg_to_rad(yaw_deg);
    const Vec3 heading(std::cos(psi), std::sin(psi), 0.0);
    Vec3 y = z.cross(heading);
    if (y.norm() < 1e-9) y = z.cross(Vec3::UnitX());  // thrust horizontal along the heading
    y.normalize();
    const Vec3 x = y.cross(z);
    Eigen::Matrix3d R;
    R.col(0) = x;
    R.col(1) = y;
    R.col(2) = z;
    return Quat(R).normalized();
}

/// Vector part of q^-1 * q_d with the scalar part made non-negative, i.e. the
/// body-frame rotation still to go, as sin(angle/2) * axis.
inline Vec3 quaternion_error(const Quat& attitude, const Quat& desired) {
    Quat qe = attitude.conjugate() * desired;
    if (qe.w() < 0.0) qe.coeffs() = -qe.coeffs();
    return qe.vec();
}

inline Vec3 attitude_error(const Vec3& thrust_vector, double yaw_deg, const Quat& attitude) {
    return quaternion_error(attitude.normalized(), desired_attitude(thrust_vector, yaw_deg));
}

/// Reduced attitude error: the shortest rotation carrying the current Z_B onto
/// the thrust direction. Heading is left free, so the z component is zero.
inline Vec3 tilt_error(const Vec3& thrust_vector, const Quat& attitude) {
    const Vec3 zd_body = attitude.normalized().conjugate() * thrust_vector.normalized();
    const Vec3 e3 = Vec3::UnitZ();
    const double c = e3.dot(zd_body);
    Vec3 axis = e3.cross(zd_body);
    if (c < -1.0 + 1e-12) return Vec3::UnitX();  // upside down: any horizontal axis, half-angle 90 deg
    const double w = 1.0 + c;
    const double n = std::sqrt(w * w + axis.squaredNorm());
    return axis / n;
}

inline Vec3 attitude_control(const Vec3& q_e, const Vec3& rates_d, const Vec3& rates, const ControlGains& g) {
    return g.att_p.cwiseProduct(q_e) + g.att_v.cwiseProduct(rates_d - rates);
}

struct RotorDemand {
    double thrust = 0.0;  // N
    double torque = 0.0;  // N m
    double pitch_deg = 0.0;
};

struct AllocationDemand {
    std::array<RotorDemand, 4> rotors{};
    double collective = 0.0;  // N
    Vec3 moments = Vec3::Zero();
    bool thrust_clamped = false;  // a thrust demand was cut at a physical limit
    bool torque_saturated = false;  // yaw authority exhausted
    bool lut_clamped = false;
};

/// Maps rotor thrusts (1..4) to [tau_x, tau_y, tau_z, T] with every rotor at
/// the same torque/thrust ratio.
inline Eigen::Matrix4d nominal_allocation_matrix(double lambda, double arm) {
    Eigen::Matrix4d A;
    A << 0.0, -arm, 0.0, arm,
         arm, 0.0, -arm, 0.0,
         -lambda, lambda, -lambda, lambda,
         1.0, 1.0, 1.0, 1.0;
    return A;
}

/// Closed-form inverse of the nominal matrix, before any clamping.
inline std::array<double, 4> nominal_thrusts(const Vec3& m, double collective, double lambda, double arm) {
    const double base = 0.25 * collective;
    const double yaw = m.z() / (4.0 * lambda);
    return {base + m.y() / (2.0 * arm) - yaw, base - m.x() / (2.0 * arm) + yaw, base - m.y() / (2.0 * arm) - yaw,
            base + m.x() / (2.0 * arm) + yaw};
}

inline AllocationDemand allocate_nominal(const Vec3& moments, double collective, double lambda, double arm,
                                         double pitch_deg = 4.0) {
    if (!(lambda > 0.0)) throw ValidationError("nominal allocation needs a positive torque/thrust ratio");
    AllocationDemand d;
    d.collective = collective;
    d.moments = moments;
    const auto t = nominal_thrusts(moments, collective, lambda, arm);
    for (int i = 0; i < 4; ++i) {
        double thrust = t[i];
        if (thrust < 0.0) {
            thrust = 0.0;
            d.thrust_clamped = true;
        }
        d.rotors[i] = {thrust, lambda * thrust, pitch_deg};
    }
    return d;
}

/// Largest collective that leaves the rotor opposite a failure able to cancel
/// the pair's torque at zero thrust.
inline double thrust_bound(double lambda_13, double tau2_max_zero_thrust, double margin = 0.85) {
    if (!(lambda_13 > 0.0)) throw ValidationError("thrust bound needs a positive torque/thrust ratio");
    return margin * tau2_max_zero_thrust / lambda_13;
}

/// Rotor roles once rotor `failed` (1-based) is lost.
struct FaultLayout {
    int failed;    // 0-based indices below
    int opposite;
    int pair_a;
    int pair_b;
};

inline FaultLayout fault_layout(int failed_id) {
    if (failed_id < 1 || failed_id > 4) throw ValidationError("failed rotor id must be 1..4");
    const int f = failed_id - 1;
    return {f, (f + 2) % 4, (f + 1) % 4, (f + 3) % 4};
}

/// Reduced allocation matrix: columns are (pair_a, opposite, pair_b) thrusts,
/// rows are (tau_x, tau_y, pair collective). The opposite rotor carries the
/// yaw torque at zero nominal thrust, so it is left out of the collective row.
inline Eigen::Matrix3d reduced_allocation_matrix(int failed_id, double arm) {
    const auto lay = fault_layout(failed_id);
    VehicleParams geom;
    geom.arm_length = arm;
    const auto mounts = geom.rotors();
    const std::array<int, 3> cols{lay.pair_a, lay.opposite, lay.pair_b};
    Eigen::Matrix3d A;
    for (int c = 0; c < 3; ++c) {
        const Vec3& p = mounts[cols[c]].position;
        A(0, c) = -p.y();
        A(1, c) = p.x();
        A(2, c) = cols[c] == lay.opposite ? 0.0 : 1.0;
    }
    return A;
}

struct FaultAllocationLimits {
    double tau_opposite_max = 0.0;  // at zero-thrust pitch and omega_max
    double tau_opposite_min = 1e-3;
};

/// Fault-mode allocation: pair pitches fixed, (tau_x, tau_y, T) through the
/// reduced matrix, opposite-rotor torque from the yaw balance, then its pitch
/// from the mu = T/tau table.
inline AllocationDemand allocate_fault(const Vec3& moments, double collective, int failed_id, double fixed_pitch_13,
                                       const LambdaLut& lut, double lambda_13, double arm,
                                       const FaultAllocationLimits& limits) {
    const auto lay = fault_layout(failed_id);
    const Eigen::Matrix3d A = reduced_allocation_matrix(failed_id, arm);
    const Eigen::Vector3d t = A.partialPivLu().solve(Eigen::Vector3d(moments.x(), moments.y(), collective));
    AllocationDemand d;
    d.collective = collective;
    d.moments = moments;
    double ta = t[0], to = t[1], tb = t[2];
    if (ta < 0.0) ta = 0.0, d.thrust_clamped = true;
    if (tb < 0.0) tb = 0.0, d.thrust_clamped = true;
    d.rotors[lay.pair_a] = {ta, lambda_13 * ta, fixed_pitch_13};
    d.rotors[lay.pair_b] = {tb, lambda_13 * tb, fixed_pitch_13};

    // Yaw balance: sum of yaw_sign * tau = tau_z.
    const double s_o = VehicleParams{}.rotors()[lay.opposite].yaw_sign;
    double tau_o = s_o * moments.z() + lambda_13 * (ta + tb);
    if (tau_o > limits.tau_opposite_max) {
        tau_o = limits.tau_opposite_max;
        d.torque_saturated = true;
    } else if (tau_o < limits.tau_opposite_min) {
        tau_o = limits.tau_opposite_min;
        d.torque_saturated = true;
    }
    const auto look = pitch_for_demand(lut, to, tau_o);
    d.lut_clamped = look.clamped;
    d.rotors[lay.opposite] = {to, tau_o, look.pitch_deg};
    d.rotors[lay.failed] = {};
    return d;
}

/// Controller-side rotor models. They come from the tip-loss-free rotor model,
/// the same one the allocation net is trained on.
struct ControllerModels {
    double nominal_pitch_deg = 4.0;
    double fault_pitch_deg = 10.0;
    double lambda_nominal = 0.0;
    double lambda_13 = 0.0;
    double tau_opposite_max = 0.0;
    double thrust_max = 0.0;
    LambdaLut lut;
    AllocNet net;
    double omega_max = k_omega_max;
};

inline ControllerModels build_controller_models(const BladeGeometry& geom, const AirfoilPolar& polar, AllocNet net,
                                                double nominal_pitch = 4.0, double fault_pitch = 10.0,
                                                double omega_max = k_omega_max) {
    ControllerModels m;
    m.nominal_pitch_deg = nominal_pitch;
    m.fault_pitch_deg = fault_pitch;
    m.omega_max = omega_max;
    m.lambda_nominal = torque_thrust_ratio(geom, polar, nominal_pitch, false);
    m.lambda_13 = torque_thrust_ratio(geom, polar, fault_pitch, false);
    m.lut = build_lambda_lut(geom, polar, -6.0, 14.0, 0.25, false);
    m.tau_opposite_max = rotor_performance(geom, polar, {m.lut.zero_thrust_pitch_deg, omega_max}, false).torque;
    m.thrust_max = thrust_bound(m.lambda_13, m.tau_opposite_max);
    m.net = std::move(net);
    return m;
}

struct ActuatorCommand {
    std::array<double, 4> pitch_deg{};
    std::array<double, 4> omega{};  // rad/s
};

enum class ControlMode { nominal, fault };

/// Everything the controller produced on its latest ticks; logged as-is.
struct ControllerStatus {
    ControlMode mode = ControlMode::nominal;
    int failed_id = 0;
    Vec3 thrust_vector = Vec3::Zero();
    double collective = 0.0;
    bool collective_clamped = false;
    Vec3 q_e = Vec3::Zero();
    AllocationDemand demand;
    ActuatorCommand command;
    bool net_input_clamped = false;
    bool omega_clamped = false;
};

struct LoopRates {
    double physics_dt = 1e-3;
    int outer_divider = 10;  // 100 Hz
    int inner_divider = 2;   // 500 Hz
};

/// Deterministic controller stepped once per physics step. Outer and inner
/// loops run on integer dividers of the physics clock and sample the latest
/// state (zero-order hold in between).
class Controller {
public:
    Controller(ControlGains gains, VehicleParams vehicle, ControllerModels models, LoopRates rates = {})
        : gains_(std::move(gains)), vehicle_(std::move(vehicle)), models_(std::move(models)), rates_(rates) {
        gains_.validate();
        if (rates_.outer_divider <= 0 || rates_.inner_divider <= 0)
            throw ValidationError("loop dividers must be positive");
    }

    /// `failed_id` is the detector output (0 = healthy). A change of detector
    /// output forces an immediate inner-loop update.
    const ControllerStatus& step(long step_index, const VehicleState& state, const ControlSetpoint& sp,
                                 int failed_id) {
        const bool fault_now = failed_id != 0 && status_.failed_id == 0;
        if (fault_now) {
            status_.failed_id = failed_id;
            status_.mode = ControlMode::fault;
        }
        if (step_index % rates_.outer_divider == 0 || !have_outer_) outer(state, sp);
        if (step_index % rates_.inner_divider == 0 || fault_now) inner(state, sp);
        return status_;
    }

    const ControllerStatus& status() const { return status_; }
    const ControllerModels& models() const { return models_; }
    const ControlGains& gains() const { return gains_; }

private:
    void outer(const VehicleState& state, const ControlSetpoint& sp) {
        const Vec3 t = position_control(sp, state, gains_, vehicle_.mass);
        if (t.norm() > 0.1 || !have_outer_) {
            status_.thrust_vector = t;
            have_outer_ = true;
        }
        double collective = status_.thrust_vector.norm();
        status_.collective_clamped = false;
        if (status_.mode == ControlMode::fault && collective > models_.thrust_max) {
            collective = models_.thrust_max;
            status_.collective_clamped = true;
        }
        status_.collective = collective;
    }

    void inner(const VehicleState& state, const ControlSetpoint& sp) {
        Vec3 moments;
        if (status_.mode == ControlMode::nominal) {
            status_.q_e = attitude_error(status_.thrust_vector, sp.yaw_deg, state.attitude);
            moments = attitude_control(status_.q_e, Vec3::Zero(), state.body_rates, gains_);
            status_.demand = allocate_nominal(moments, status_.collective, models_.lambda_nominal,
                                              vehicle_.arm_length, models_.nominal_pitch_deg);
        } else {
            // Heading is not held after a failure; only the yaw rate is damped.
            status_.q_e = tilt_error(status_.thrust_vector, state.attitude);
            moments = attitude_control(status_.q_e, Vec3::Zero(), state.body_rates, gains_);
            status_.demand = allocate_fault(moments, status_.collective, status_.failed_id, models_.fault_pitch_deg,
                                            models_.lut, models_.lambda_13, vehicle_.arm_length,
                                            {models_.tau_opposite_max});
        }
        status_.net_input_clamped = false;
        status_.omega_clamped = false;
        for (int i = 0; i < 4; ++i) {
            const auto& r = status_.demand.rotors[i];
            status_.command.pitch_deg[i] = r.pitch_deg;
            if (status_.mode == ControlMode::fault && i == status_.failed_id - 1) {
                status_.command.omega[i] = 0.0;
                continue;
            }
            const auto out = forward(models_.net, {r.thrust, r.torque, r.pitch_deg});
            status_.net_input_clamped |= out.clamped;
            double w = out.omega;
            if (w > models_.omega_max || w < 0.0) {
                w = std::clamp(w, 0.0, models_.omega_max);
                status_.omega_clamped = true;
            }
            status_.command.omega[i] = w;
        }
    }

    ControlGains gains_;
    VehicleParams vehicle_;
    ControllerModels models_;
    LoopRates rates_;
    ControllerStatus status_;
    bool have_outer_ = false;
};

}  // namespace heliquad
