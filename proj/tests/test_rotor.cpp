#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "heliquad/rotor.hpp"

using namespace heliquad;

namespace {

const AirfoilPolar& symmetric() {
    static const AirfoilPolar p = resolve_polar("symmetric");
    return p;
}

const AirfoilPolar& cambered() {
    static const AirfoilPolar p = resolve_polar("cambered");
    return p;
}

const BladeGeometry geom{};

double thrust(double pitch, double rpm, bool tip = true, const BladeGeometry& g = geom) {
    return rotor_performance(g, cambered(), {pitch, rpm_to_rad_s(rpm)}, tip).thrust;
}

// Station balance written out from first principles for the oracle: blade
// element thrust of all blades minus the signed annulus momentum thrust.
double oracle_residual(double pitch_deg, double omega, double r, double vi) {
    const double wr = omega * r;
    const double phi = std::atan(vi / wr);
    const double alpha = pitch_deg - phi * 180.0 / std::numbers::pi;
    const double cl = cambered().lift_coeff(alpha);
    const double cd = cambered().drag_coeff(alpha);
    const double dT = 0.5 * 1.22 * (vi * vi + wr * wr) * geom.chord(r) * (cl * std::cos(phi) - cd * std::sin(phi));
    const double f = 0.5 * geom.num_blades * (1.0 - r / geom.radius) / ((r / geom.radius) * std::abs(std::sin(phi)));
    const double F = 2.0 / std::numbers::pi * std::acos(std::exp(-f));
    return geom.num_blades * dT - 4.0 * std::numbers::pi * 1.22 * F * vi * std::abs(vi) * r;
}

}  // namespace

TEST(Rotor, TipLossFactorBounds) {
    EXPECT_EQ(tip_loss_factor(2, 1.0, 0.1), 0.0);
    EXPECT_NEAR(tip_loss_factor(2, 0.1, 0.1), 1.0, 1e-12);
    for (double rb = 0.1; rb < 1.0; rb += 0.01)
        for (double th : {-0.3, -0.05, 0.01, 0.05, 0.3}) {
            const double F = tip_loss_factor(2, rb, th);
            EXPECT_GT(F, 0.0);
            EXPECT_LE(F, 1.0);
        }
}

TEST(Rotor, StationMatchesResidualScanOracle) {
    const double omega = rpm_to_rad_s(5000.0);
    const double r = 0.5 * (geom.root_cutout + geom.radius);
    const double wr = omega * r;
    const int n = 1000000;
    const double lo = -0.3 * wr, h = 0.6 * wr / n;
    std::vector<double> roots;
    double prev = oracle_residual(10.0, omega, r, lo);
    for (int i = 1; i <= n; ++i) {
        const double v = lo + h * i;
        const double cur = oracle_residual(10.0, omega, r, v);
        if ((prev > 0.0) != (cur > 0.0)) {
            double a = v - h, b = v;
            const double fa0 = prev;
            while (b - a > 1e-12) {
                const double m = 0.5 * (a + b);
                ((oracle_residual(10.0, omega, r, m) > 0.0) == (fa0 > 0.0) ? a : b) = m;
            }
            roots.push_back(0.5 * (a + b));
        }
        prev = cur;
    }
    ASSERT_EQ(roots.size(), 1u);
    const auto s = solve_station(geom, cambered(), {10.0, omega}, r);
    ASSERT_TRUE(s.converged);
    EXPECT_NEAR(s.vi, roots[0], 1e-8);
    EXPECT_GT(s.vi, 0.0);
}

TEST(Rotor, ZeroLiftPitchGivesNoInducedFlow) {
    const double a0 = alpha_zero_lift(cambered());
    for (double rpm : {3000.0, 6620.0}) {
        const auto s = solve_station(geom, cambered(), {a0, rpm_to_rad_s(rpm)}, 0.09);
        ASSERT_TRUE(s.converged);
        EXPECT_NEAR(s.vi, 0.0, 1e-3);
        EXPECT_NEAR(s.dT_dr, 0.0, 1e-4);
    }
}

TEST(Rotor, VanishingSpeedVanishingThrust) {
    double last = 1.0;
    for (double w : {10.0, 1.0, 0.1, 0.01}) {
        const auto s = solve_station(geom, symmetric(), {0.0, w}, 0.09);
        ASSERT_TRUE(s.converged);
        EXPECT_LE(std::abs(s.dT_dr), last);
        last = std::abs(s.dT_dr);
    }
    EXPECT_LT(last, 1e-12);
}

TEST(Rotor, StationArgumentsChecked) {
    EXPECT_THROW(solve_station(geom, cambered(), {10.0, 500.0}, geom.root_cutout * 0.5), RangeError);
    EXPECT_THROW(solve_station(geom, cambered(), {10.0, 500.0}, geom.radius * 1.01), RangeError);
    EXPECT_THROW(solve_station(geom, cambered(), {10.0, 0.0}, 0.09), RangeError);
    EXPECT_THROW(rotor_performance(geom, cambered(), {10.0, -1.0}), RangeError);
}

TEST(Rotor, ConvergedStationsHaveSmallResidual) {
    for (double pitch : {-6.0, -1.0, 4.0, 10.0, 14.0}) {
        for (bool tip : {true, false}) {
            const auto sol = solve_rotor(geom, cambered(), {pitch, rpm_to_rad_s(6000.0)}, tip);
            for (const auto& s : sol.stations) {
                EXPECT_TRUE(s.converged);
                if (std::abs(s.dT_dr) > 1e-6) { EXPECT_LT(s.residual, 1e-6); }
                EXPECT_GE(s.tip_loss, 0.0);
                EXPECT_LE(s.tip_loss, 1.0);
            }
        }
    }
}

TEST(Rotor, TipLossApproachesOneAtRoot) {
    const auto sol = solve_rotor(geom, cambered(), {10.0, rpm_to_rad_s(5000.0)});
    EXPECT_GT(sol.stations.front().tip_loss, 0.999);
    EXPECT_EQ(sol.stations.back().tip_loss, 0.0);
}

TEST(Rotor, NoTipLossMeansUnitFactor) {
    const auto off = solve_rotor(geom, cambered(), {8.0, rpm_to_rad_s(5000.0)}, false);
    for (const auto& s : off.stations) EXPECT_EQ(s.tip_loss, 1.0);
}

TEST(Rotor, TipLossReducesThrustByAFewPercent) {
    for (double pitch : {4.0, 10.0}) {
        const double on = thrust(pitch, 5000.0, true);
        const double off = thrust(pitch, 5000.0, false);
        const double delta = (off - on) / off;
        EXPECT_GE(delta, 0.03) << pitch;
        EXPECT_LE(delta, 0.12) << pitch;
    }
}

TEST(Rotor, GridConvergence) {
    auto with = [](int n) {
        BladeGeometry g = geom;
        g.num_stations = n;
        return thrust(10.0, 5000.0, true, g);
    };
    const int n = geom.num_stations;
    const double t1 = with(n), t2 = with(2 * n), t10 = with(10 * n);
    EXPECT_LT(std::abs(t2 - t1) / t10, 0.005);
    EXPECT_LT(std::abs(t1 - t10) / t10, 0.01);
}

TEST(Rotor, PartialResultNamesStation) {
    try {
        rotor_performance(geom, cambered(), {15.05, rpm_to_rad_s(5000.0)});
        FAIL() << "expected a partial result";
    } catch (const PartialResultError& e) {
        EXPECT_EQ(e.station(), static_cast<std::size_t>(geom.num_stations - 1));
    }
}

TEST(Rotor, ThrustIncreasesWithSpeed) {
    const double p0 = zero_thrust_pitch(geom, cambered(), k_reference_omega);
    for (double pitch = p0 + 1.0; pitch <= 14.0; pitch += 1.5) {
        double last = 0.0;
        for (double rpm = 1000.0; rpm <= 8000.0; rpm += 250.0) {
            const double t = thrust(pitch, rpm);
            EXPECT_GT(t, last) << pitch << ' ' << rpm;
            last = t;
        }
    }
}

TEST(Rotor, ZeroThrustPitchCostsTorque) {
    const double p0 = zero_thrust_pitch(geom, cambered(), k_reference_omega);
    for (double rpm = 500.0; rpm <= 8000.0; rpm += 500.0)
        EXPECT_GT(rotor_performance(geom, cambered(), {p0, rpm_to_rad_s(rpm)}).torque, 0.0);
}

TEST(Rotor, ZeroThrustPitch) {
    const double pc = zero_thrust_pitch(geom, cambered(), k_reference_omega);
    EXPECT_NEAR(pc, -1.8, 0.2);
    EXPECT_NEAR(pc, alpha_zero_lift(cambered()), 0.5);
    EXPECT_LT(std::abs(thrust(pc, 5000.0)), 1e-3);
    EXPECT_NEAR(zero_thrust_pitch(geom, symmetric(), k_reference_omega), 0.0, 0.05);
    double lo = 1e9, hi = -1e9;
    for (double rpm = 3000.0; rpm <= 8000.0; rpm += 500.0) {
        const double p = zero_thrust_pitch(geom, cambered(), rpm_to_rad_s(rpm));
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    EXPECT_LT(hi - lo, 0.2);
}

TEST(Rotor, TorqueRatioAtZeroThrust) {
    const double w = k_reference_omega;
    const double tc = rotor_performance(geom, cambered(), {zero_thrust_pitch(geom, cambered(), w), w}).torque;
    const double ts = rotor_performance(geom, symmetric(), {zero_thrust_pitch(geom, symmetric(), w), w}).torque;
    EXPECT_GE(tc / ts, 3.5);
    EXPECT_LE(tc / ts, 5.5);
}

TEST(Rotor, LambdaProperties) {
    const double l10 = torque_thrust_ratio(geom, cambered(), 10.0);
    const double l12 = torque_thrust_ratio(geom, cambered(), 12.0);
    EXPECT_LT(std::abs(l10 - l12) / l10, 0.10);
    const double l4000 = torque_thrust_ratio(geom, cambered(), 10.0, true, rpm_to_rad_s(4000.0));
    const double l7000 = torque_thrust_ratio(geom, cambered(), 10.0, true, rpm_to_rad_s(7000.0));
    EXPECT_LT(std::abs(l4000 - l7000) / l4000, 0.03);
    double lo = 1e9, hi = -1e9;
    for (double rpm = 3000.0; rpm <= 8000.0; rpm += 250.0) {
        const double l = torque_thrust_ratio(geom, cambered(), 10.0, true, rpm_to_rad_s(rpm));
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    }
    EXPECT_LT((hi - lo) / lo, 0.05);
}

TEST(Rotor, LambdaGuardNearZeroThrust) {
    const double p0 = zero_thrust_pitch(geom, cambered(), k_reference_omega);
    EXPECT_THROW(torque_thrust_ratio(geom, cambered(), p0), SingularityError);
    EXPECT_THROW(torque_thrust_ratio(geom, cambered(), p0 + 0.2), SingularityError);
    EXPECT_GT(std::abs(torque_thrust_ratio(geom, cambered(), p0 + 1.0)),
              std::abs(torque_thrust_ratio(geom, cambered(), p0 + 3.0)));
}

TEST(Rotor, LambdaLut) {
    const auto lut = build_lambda_lut(geom, cambered(), -6.0, 14.0);
    for (std::size_t i = 1; i < lut.mu.size(); ++i) EXPECT_GT(lut.mu[i], lut.mu[i - 1]);
    for (std::size_t i = 0; i < lut.mu.size(); ++i) {
        const auto look = pitch_for_mu(lut, lut.mu[i]);
        EXPECT_EQ(look.pitch_deg, lut.pitch_deg[i]);
        EXPECT_FALSE(look.clamped);
    }
    EXPECT_EQ(pitch_for_mu(lut, 0.0).pitch_deg, lut.zero_thrust_pitch_deg);
    EXPECT_NEAR(pitch_for_demand(lut, 0.0, 0.12).pitch_deg, -1.8, 0.2);
    EXPECT_EQ(pitch_for_lambda(lut, std::numeric_limits<double>::infinity()).pitch_deg, lut.zero_thrust_pitch_deg);
    // mu peaks at the best thrust-per-torque pitch; the table stops there.
    EXPECT_GT(lut.pitch_deg.back(), 8.0);
    EXPECT_LT(lut.pitch_deg.back(), 14.0);
    for (double phi = 1.0; phi <= lut.pitch_deg.back(); phi += 0.5) {
        const auto look = pitch_for_lambda(lut, torque_thrust_ratio(geom, cambered(), phi));
        EXPECT_NEAR(look.pitch_deg, phi, 0.2);
    }
    const auto above = pitch_for_mu(lut, lut.mu.back() * 2.0);
    EXPECT_TRUE(above.clamped);
    EXPECT_EQ(above.pitch_deg, lut.pitch_deg.back());
    const auto below = pitch_for_mu(lut, lut.mu.front() * 2.0);
    EXPECT_TRUE(below.clamped);
    EXPECT_EQ(below.pitch_deg, lut.pitch_deg.front());
}

TEST(Rotor, FailureEquilibriumCambered) {
    const auto eq = failure_equilibrium(0.600, geom, cambered(), 10.0);
    EXPECT_NEAR(eq.thrust13, 0.3 * k_gravity, 1e-6);
    EXPECT_NEAR(eq.tau13, 0.06, 0.2 * 0.06);
    EXPECT_NEAR(eq.pitch2_deg, -1.8, 1.0);
    EXPECT_NEAR(rad_s_to_rpm(eq.omega2), 6620.0, 0.15 * 6620.0);
    EXPECT_LT(std::abs(eq.thrust2), 0.1);
    EXPECT_NEAR(eq.tau2, 0.12, 0.2 * 0.12);
    EXPECT_NEAR(eq.tau2, 2.0 * eq.tau13, 1e-9);
    EXPECT_TRUE(eq.feasible);
}

TEST(Rotor, FailureEquilibriumHalfWeight) {
    const auto eq = failure_equilibrium(0.602, geom, cambered(), 10.0);
    EXPECT_NEAR(eq.thrust13, 0.5 * 0.602 * 9.81, 1e-6);
    EXPECT_NEAR(eq.thrust13, 2.953, 1e-3);
}

TEST(Rotor, FailureEquilibriumSymmetricInfeasible) {
    const auto eq = failure_equilibrium(0.600, geom, symmetric(), 10.0);
    EXPECT_FALSE(eq.feasible);
    EXPECT_GT(rad_s_to_rpm(eq.omega2), 10000.0);
}

TEST(Rotor, FailureEquilibriumTooHeavy) {
    EXPECT_THROW(failure_equilibrium(5.0, geom, cambered(), 10.0), InfeasibleError);
}

TEST(Rotor, PerformanceMap) {
    const auto eq = failure_equilibrium(0.600, geom, cambered(), 10.0);
    const double p0 = zero_thrust_pitch(geom, cambered(), k_reference_omega);
    const std::vector<double> pitches{p0, 10.0, 15.5};
    const std::vector<double> omegas{rpm_to_rad_s(3000.0), eq.omega13, rpm_to_rad_s(7000.0)};
    const auto cells = performance_map(geom, cambered(), pitches, omegas);
    ASSERT_EQ(cells.size(), 9u);
    for (int j = 0; j < 3; ++j) EXPECT_LT(std::abs(cells[j].thrust), 1e-2);
    EXPECT_NEAR(cells[4].thrust, 2.943, 1e-6);
    for (int j = 6; j < 9; ++j) EXPECT_FALSE(cells[j].converged);

    std::ostringstream csv;
    write_performance_map_csv(csv, cells);
    const auto text = csv.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "pitch_deg,omega_rpm,thrust_N,torque_Nm,converged");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 10);
}

TEST(Rotor, CoefficientTableMatchesSolver) {
    const RotorCoefficientTable table(geom, cambered(), -8.0, 14.0, 0.05, true);
    for (double pitch : {-8.0, -1.8, 4.0, 10.0, 14.0}) {
        for (double rpm : {2000.0, 5000.0, 7900.0}) {
            const auto full = rotor_performance(geom, cambered(), {pitch, rpm_to_rad_s(rpm)});
            const auto fast = table.evaluate(pitch, rpm_to_rad_s(rpm));
            EXPECT_NEAR(fast.thrust, full.thrust, 1e-9 * std::max(1.0, std::abs(full.thrust)));
            EXPECT_NEAR(fast.torque, full.torque, 1e-9 * std::max(1.0, full.torque));
        }
    }
    const auto between = table.evaluate(7.02, rpm_to_rad_s(5000.0));
    const auto exact = rotor_performance(geom, cambered(), {7.02, rpm_to_rad_s(5000.0)});
    EXPECT_NEAR(between.thrust, exact.thrust, 1e-3 * exact.thrust);
}

TEST(Rotor, Deterministic) {
    const auto a = rotor_performance(geom, cambered(), {9.3, 612.0});
    const auto b = rotor_performance(geom, cambered(), {9.3, 612.0});
    EXPECT_EQ(a.thrust, b.thrust);
    EXPECT_EQ(a.torque, b.torque);
}

TEST(Rotor, GeometryValidation) {
    EXPECT_THROW(BladeGeometry::constant_chord(0.1, 0.1, 0.03), ValidationError);
    EXPECT_THROW(BladeGeometry::constant_chord(0.1, 0.01, 0.03, 1), ValidationError);
    EXPECT_THROW(BladeGeometry::constant_chord(0.1, 0.01, 0.03, 2, 10), ValidationError);
    EXPECT_THROW(BladeGeometry::constant_chord(0.1, 0.01, -0.03), ValidationError);
    BladeGeometry g;
    g.chord_knots = {{0.0, 0.04}, {0.1, 0.02}};
    EXPECT_DOUBLE_EQ(g.chord(0.05), 0.03);
    EXPECT_DOUBLE_EQ(g.chord(0.2), 0.02);
}
