#pragma once

#include <optional>

#include "heliquad/airfoil.hpp"
#include "heliquad/rotor.hpp"

namespace heliquad {

struct AirfoilSummary {
    std::string name;
    double alpha_zero_lift_deg = 0.0;
    double cd_zero_lift = 0.0;
    double zero_thrust_pitch_deg = 0.0;
    double torque_at_zero_thrust = 0.0;  // N m at the comparison speed
    std::optional<EquilibriumSolution> equilibrium;  // empty when the pair cannot lift the vehicle
};

struct AirfoilComparison {
    double omega = 0.0;  // rad/s
    AirfoilSummary symmetric;
    AirfoilSummary cambered;
    double torque_ratio = 0.0;  // cambered / symmetric at each zero-thrust pitch
    double drag_ratio = 0.0;    // cd at zero lift, cambered / symmetric
};

inline AirfoilSummary summarize_airfoil(const BladeGeometry& geom, const AirfoilPolar& polar, double omega,
                                        double mass, double fixed_pitch_13, bool use_tip_loss) {
    AirfoilSummary s;
    s.name = polar.name();
    s.alpha_zero_lift_deg = alpha_zero_lift(polar);
    s.cd_zero_lift = polar.drag_coeff(s.alpha_zero_lift_deg);
    s.zero_thrust_pitch_deg = zero_thrust_pitch(geom, polar, omega, use_tip_loss);
    s.torque_at_zero_thrust = rotor_performance(geom, polar, {s.zero_thrust_pitch_deg, omega}, use_tip_loss).torque;
    try {
        s.equilibrium = failure_equilibrium(mass, geom, polar, fixed_pitch_13, use_tip_loss);
    } catch (const InfeasibleError&) {
    }
    return s;
}

inline AirfoilComparison compare_airfoils(const BladeGeometry& geom, const AirfoilPolar& symmetric,
                                          const AirfoilPolar& cambered, double omega = k_reference_omega,
                                          double mass = 0.600, double fixed_pitch_13 = 10.0,
                                          bool use_tip_loss = true) {
    AirfoilComparison c;
    c.omega = omega;
    c.symmetric = summarize_airfoil(geom, symmetric, omega, mass, fixed_pitch_13, use_tip_loss);
    c.cambered = summarize_airfoil(geom, cambered, omega, mass, fixed_pitch_13, use_tip_loss);
    c.torque_ratio = c.cambered.torque_at_zero_thrust / c.symmetric.torque_at_zero_thrust;
    c.drag_ratio = c.cambered.cd_zero_lift / c.symmetric.cd_zero_lift;
    return c;
}

}  // namespace heliquad
