#include <cmath>

#include <gtest/gtest.h>

#include "heliquad/actuators.hpp"
#include "heliquad/rotor.hpp"

using namespace heliquad;

namespace {

const MotorParams motor{};

// Zero-load speed straight from the shaft balance, 0 = (V - w/Kv)/R - I0.
double no_load_speed(double v) { return motor.kv() * (v - motor.i0 * motor.resistance); }

// With constant voltage and load the motor ODE is linear, so the exact
// solution is an exponential approach to the steady speed.
double exact_speed(double w0, double v, double load, double t) {
    const double kv = motor.kv();
    const double tc = motor.rotor_inertia * motor.resistance * kv * kv;
    const double wss = motor_steady_speed(motor, v, load);
    return wss + (w0 - wss) * std::exp(-t / tc);
}

}  // namespace

TEST(Motor, RestStaysAtRest) {
    MotorState s;
    for (int i = 0; i < 100; ++i) s = motor_step(s, motor, 0.0, 0.0, 1e-3);
    EXPECT_EQ(s.omega, 0.0);
}

TEST(Motor, NoLoadSteadyState) {
    EXPECT_NEAR(motor_steady_speed(motor, 12.0, 0.0), no_load_speed(12.0), 1e-9);
    EXPECT_NEAR(rad_s_to_rpm(no_load_speed(12.0)), 10760.0, 5.0);
    MotorState s;
    for (int i = 0; i < 5000; ++i) s = motor_step(s, motor, 12.0, 0.0, 1e-3);
    EXPECT_NEAR(s.omega, no_load_speed(12.0), 1e-3 * no_load_speed(12.0));
}

TEST(Motor, LoadedSteadyStateMatchesFormula) {
    for (double v : {6.0, 9.0, 12.0}) {
        for (double load : {0.01, 0.05, 0.1}) {
            const double wss = motor_steady_speed(motor, v, load);
            if (wss <= 0.0) continue;
            EXPECT_NEAR(motor_acceleration(motor, wss, v, load), 0.0, 1e-6);
            MotorState s;
            for (int i = 0; i < 5000; ++i) s = motor_step(s, motor, v, load, 1e-3);
            EXPECT_NEAR(s.omega, wss, 1e-3 * wss) << v << ' ' << load;
        }
    }
}

TEST(Motor, FourthOrderOneStepError) {
    const double w0 = 300.0, v = 10.0, load = 0.05;
    auto err = [&](double dt) {
        return std::abs(motor_step({w0, false}, motor, v, load, dt).omega - exact_speed(w0, v, load, dt));
    };
    const double tc = motor.rotor_inertia * motor.resistance * motor.kv() * motor.kv();
    const double dt = 0.2 * tc;
    const double ratio = err(dt) / err(0.5 * dt);
    EXPECT_GT(ratio, 24.0);
    EXPECT_LT(ratio, 40.0);
}

TEST(Motor, PassiveWithoutVoltage) {
    MotorState s{900.0, false};
    for (double load : {0.0, 0.02}) {
        s.omega = 900.0;
        for (int i = 0; i < 3000; ++i) {
            const auto next = motor_step(s, motor, 0.0, load, 1e-3);
            EXPECT_LE(next.omega, s.omega);
            EXPECT_GE(next.omega, 0.0);
            s = next;
        }
    }
}

TEST(Motor, FailureInjection) {
    MotorState s{700.0, false};
    s = inject_failure(s);
    EXPECT_TRUE(s.failed);
    EXPECT_EQ(s.omega, 0.0);
    const auto again = inject_failure(s);
    EXPECT_TRUE(again.failed);
    EXPECT_EQ(again.omega, 0.0);
    const auto driven = motor_step(s, motor, 12.0, 0.0, 1e-3);
    EXPECT_EQ(driven.omega, 0.0);
}

TEST(Motor, ParameterValidation) {
    MotorParams p;
    p.resistance = 0.0;
    EXPECT_THROW(p.validate(), ValidationError);
    EXPECT_NO_THROW(MotorParams{}.validate());
}

namespace {

struct LoadedRotor {
    RotorCoefficientTable table{BladeGeometry{}, resolve_polar("cambered"), 3.0, 5.0, 0.5, true};
    double pitch = 4.0;

    // Closed-loop speed response; returns the time after `t_step` until the
    // speed stays within `band` of the target.
    double settle(double rpm_from, double rpm_to, double band, double t_end = 1.5) {
        MotorState m{rpm_to_rad_s(rpm_from), false};
        SpeedController esc;
        const double dt = 1e-3;
        for (int i = 0; i < 1000; ++i) {
            const double v = esc.step(rpm_to_rad_s(rpm_from), m.omega, motor, dt).voltage;
            m = motor_step(m, motor, v, table.evaluate(pitch, m.omega).torque, dt);
        }
        const double target = rpm_to_rad_s(rpm_to);
        double last_outside = 0.0;
        for (double t = 0.0; t < t_end; t += dt) {
            const double v = esc.step(target, m.omega, motor, dt).voltage;
            m = motor_step(m, motor, v, table.evaluate(pitch, m.omega).torque, dt);
            if (std::abs(m.omega - target) > band * target) last_outside = t + dt;
        }
        return last_outside;
    }
};

}  // namespace

TEST(SpeedLoop, HoldsSpeed) {
    LoadedRotor r;
    EXPECT_LT(r.settle(5000.0, 5000.0, 0.01, 0.5), 1e-9);
}

TEST(SpeedLoop, StepSettlesUnderHoverLoad) {
    LoadedRotor r;
    EXPECT_LT(r.settle(4000.0, 6000.0, 0.02), 0.3);
    EXPECT_LT(r.settle(6000.0, 4000.0, 0.02), 0.3);
}

TEST(SpeedLoop, SaturatesBeyondReach) {
    SpeedController esc;
    MotorState m;
    bool saturated = false;
    for (int i = 0; i < 2000; ++i) {
        const auto out = esc.step(rpm_to_rad_s(20000.0), m.omega, motor, 1e-3);
        EXPECT_LE(out.voltage, motor.v_max);
        EXPECT_GE(out.voltage, 0.0);
        saturated = out.saturated;
        m = motor_step(m, motor, out.voltage, 0.02, 1e-3);
    }
    EXPECT_TRUE(saturated);
}

TEST(SpeedLoop, IntegratorFrozenWhileSaturated) {
    SpeedController esc;
    for (int i = 0; i < 100; ++i) esc.step(rpm_to_rad_s(20000.0), 0.0, motor, 1e-3);
    const double held = esc.integrator();
    esc.step(rpm_to_rad_s(20000.0), 0.0, motor, 1e-3);
    EXPECT_EQ(esc.integrator(), held);
}

TEST(Servo, CommandEqualsCurrent) {
    const ServoState s{4.0};
    EXPECT_EQ(servo_step(s, 4.0, 1e-3).pitch_deg, 4.0);
}

TEST(Servo, RateLimitedMove) {
    EXPECT_DOUBLE_EQ(servo_step(ServoState{1.0}, 12.8, 0.02).pitch_deg, 11.0);
    EXPECT_DOUBLE_EQ(servo_step(ServoState{1.0}, -10.8, 0.02).pitch_deg, -9.0);
}

TEST(Servo, FourToTenInTwelveMilliseconds) {
    ServoState s{4.0};
    int steps = 0;
    while (s.pitch_deg != 10.0 && steps < 100) {
        const double before = s.pitch_deg;
        s = servo_step(s, 10.0, 1e-3);
        EXPECT_LE(std::abs(s.pitch_deg - before), 500.0 * 1e-3 + 1e-9);
        ++steps;
    }
    EXPECT_EQ(steps, 12);
}
