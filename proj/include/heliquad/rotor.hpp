#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heliquad/airfoil.hpp"
#include "heliquad/errors.hpp"
#include "heliquad/units.hpp"

// Hover blade element momentum theory for a constant-pitch, untwisted
// variable-pitch rotor. Each radial station balances the blade-element thrust
// against an annulus momentum balance with Prandtl tip loss; thrust and torque
// follow from trapezoidal integration over uniform stations.

namespace heliquad {

struct BladeGeometry {
    double radius = 0.1524;
    double root_cutout = 0.015;
    /// Piecewise-linear chord as (r [m], c [m]) knots, ascending in r. A single
    /// knot means constant chord.
    std::vector<std::pair<double, double>> chord_knots{{0.0, 0.03356}};
    int num_blades = 2;
    int num_stations = 100;

    static BladeGeometry constant_chord(double radius, double root_cutout, double chord, int blades = 2,
                                        int stations = 100) {
        BladeGeometry g;
        g.radius = radius;
        g.root_cutout = root_cutout;
        g.chord_knots = {{0.0, chord}};
        g.num_blades = blades;
        g.num_stations = stations;
        g.validate();
        return g;
    }

    double chord(double r) const {
        if (chord_knots.size() == 1 || r <= chord_knots.front().first) return chord_knots.front().second;
        if (r >= chord_knots.back().first) return chord_knots.back().second;
        auto hi = std::lower_bound(chord_knots.begin(), chord_knots.end(), r,
                                   [](const auto& k, double x) { return k.first < x; });
        auto lo = std::prev(hi);
        const double t = (r - lo->first) / (hi->first - lo->first);
        return lo->second + t * (hi->second - lo->second);
    }

    double station_radius(int k) const {
        if (k == num_stations - 1) return radius;
        return root_cutout + (radius - root_cutout) * static_cast<double>(k) / (num_stations - 1);
    }

    void validate() const {
        if (!(root_cutout >= 0.0 && root_cutout < radius))
            throw ValidationError("blade geometry requires 0 <= root_cutout < radius");
        if (num_blades < 2) throw ValidationError("blade geometry requires at least two blades");
        if (num_stations < 20) throw ValidationError("blade geometry requires at least 20 stations");
        if (chord_knots.empty()) throw ValidationError("blade geometry has no chord");
        for (std::size_t i = 0; i < chord_knots.size(); ++i) {
            if (!(chord_knots[i].second > 0.0)) throw ValidationError("chord must be positive");
            if (i > 0 && !(chord_knots[i].first > chord_knots[i - 1].first))
                throw ValidationError("chord knots must be strictly increasing in r");
        }
    }
};

struct RotorOperatingPoint {
    double pitch_deg = 0.0;
    double omega = 0.0;  // rad/s
};

struct StationSolution {
    double r = 0.0;
    double vi = 0.0;         // m/s, positive down through the disk
    double theta = 0.0;      // inflow angle, rad
    double alpha_deg = 0.0;
    double dT_dr = 0.0;      // per blade, N/m
    double dtau_dr = 0.0;    // per blade, N m/m
    double tip_loss = 1.0;
    double residual = 0.0;   // relative thrust mismatch between blade element and momentum
    bool converged = false;
};

struct RotorPerformance {
    static constexpr double k_lambda_guard = 0.05;  // N

    double thrust = 0.0;
    double torque = 0.0;

    std::optional<double> lambda() const {
        if (std::abs(thrust) > k_lambda_guard) return torque / thrust;
        return std::nullopt;
    }
};

/// Prandtl tip-loss factor with the inflow angle taken in magnitude so the
/// signed (reverse-thrust) extension stays in (0, 1].
inline double tip_loss_factor(int num_blades, double r_bar, double theta) {
    if (r_bar >= 1.0) return 0.0;
    const double s = std::abs(std::sin(theta));
    if (s == 0.0) return 1.0;
    const double f = 0.5 * num_blades * (1.0 - r_bar) / (r_bar * s);
    return 2.0 / std::numbers::pi * std::acos(std::exp(-f));
}

namespace detail {

struct StationEval {
    double residual;  // all-blade element thrust minus momentum thrust, N/m
    double dT_blade;
    double dtau_blade;
    double theta;
    double alpha_deg;
    double tip_loss;
};

inline StationEval eval_station(const BladeGeometry& geom, const AirfoilPolar& polar, double pitch_deg,
                                double omega, double r, double vi, bool use_tip_loss) {
    const double wr = omega * r;
    const double theta = std::atan2(vi, wr);
    const double alpha_raw = pitch_deg - rad_to_deg(theta);
    const double alpha = std::clamp(alpha_raw, polar.min_alpha(), polar.max_alpha());
    const double cl = polar.lift_coeff(alpha);
    const double cd = polar.drag_coeff(alpha);
    const double v2 = vi * vi + wr * wr;
    const double q = 0.5 * k_air_density * v2 * geom.chord(r);
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    const double dT = q * (cl * ct - cd * st);
    const double dtau = q * r * (cl * st + cd * ct);
    const double F = use_tip_loss ? tip_loss_factor(geom.num_blades, r / geom.radius, theta) : 1.0;
    const double momentum = 4.0 * std::numbers::pi * k_air_density * F * vi * std::abs(vi) * r;
    return {geom.num_blades * dT - momentum, dT, dtau, theta, alpha_raw, F};
}

}  // namespace detail

/// Solves the induced velocity at radius r by bisection on
/// vi in [-0.3 wr, +0.3 wr]. The tip node r == radius is accepted; there the
/// tip loss vanishes and the element carries no thrust.
inline StationSolution solve_station(const BladeGeometry& geom, const AirfoilPolar& polar,
                                     const RotorOperatingPoint& op, double r, bool use_tip_loss = true) {
    if (!(r >= geom.root_cutout && r <= geom.radius))
        throw RangeError("station radius " + std::to_string(r) + " m outside blade span");
    if (!(op.omega > 0.0)) throw RangeError("station solve requires omega > 0");

    const double wr = op.omega * r;
    double lo = -0.3 * wr;
    double hi = 0.3 * wr;
    auto f_lo = detail::eval_station(geom, polar, op.pitch_deg, op.omega, r, lo, use_tip_loss).residual;
    auto f_hi = detail::eval_station(geom, polar, op.pitch_deg, op.omega, r, hi, use_tip_loss).residual;

    StationSolution sol;
    sol.r = r;
    if ((f_lo > 0.0) == (f_hi > 0.0) && f_lo != 0.0 && f_hi != 0.0) {
        sol.converged = false;
        return sol;
    }
    double vi = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        vi = 0.5 * (lo + hi);
        if (vi == lo || vi == hi) break;
        const double f = detail::eval_station(geom, polar, op.pitch_deg, op.omega, r, vi, use_tip_loss).residual;
        if (f == 0.0) break;
        if ((f > 0.0) == (f_lo > 0.0)) {
            lo = vi;
            f_lo = f;
        } else {
            hi = vi;
        }
    }
    const auto e = detail::eval_station(geom, polar, op.pitch_deg, op.omega, r, vi, use_tip_loss);
    sol.vi = vi;
    sol.theta = e.theta;
    sol.alpha_deg = e.alpha_deg;
    sol.dT_dr = e.dT_blade;
    sol.dtau_dr = e.dtau_blade;
    sol.tip_loss = e.tip_loss;
    const double scale = std::max(std::abs(geom.num_blades * e.dT_blade), 1e-9);
    sol.residual = std::abs(e.residual) / scale;
    // Within an ulp of zero lift the element thrust is quantised by the
    // rounding of alpha; a residual at that resolution is a solved station.
    const double resolution = 64.0 * std::numeric_limits<double>::epsilon() * geom.num_blades * 0.5 *
                              k_air_density * wr * wr * geom.chord(r);
    const bool alpha_in_table = e.alpha_deg >= polar.min_alpha() && e.alpha_deg <= polar.max_alpha();
    sol.converged = (sol.residual < 1e-6 || std::abs(e.residual) <= resolution) && alpha_in_table;
    return sol;
}

struct RotorSolution {
    RotorPerformance performance;
    std::vector<StationSolution> stations;
};

/// Full radial solve. Throws PartialResultError naming the first station
/// that failed to converge.
inline RotorSolution solve_rotor(const BladeGeometry& geom, const AirfoilPolar& polar,
                                 const RotorOperatingPoint& op, bool use_tip_loss = true) {
    RotorSolution out;
    if (op.omega < 0.0) throw RangeError("omega must be non-negative");
    if (op.omega == 0.0) return out;
    const int n = geom.num_stations;
    out.stations.reserve(n);
    for (int k = 0; k < n; ++k) {
        auto s = solve_station(geom, polar, op, geom.station_radius(k), use_tip_loss);
        if (!s.converged)
            throw PartialResultError(static_cast<std::size_t>(k),
                                     "station " + std::to_string(k) + " did not converge at pitch " +
                                         std::to_string(op.pitch_deg) + " deg");
        out.stations.push_back(s);
    }
    const double h = (geom.radius - geom.root_cutout) / (n - 1);
    double thrust = 0.0;
    double torque = 0.0;
    for (int k = 0; k < n; ++k) {
        const double w = (k == 0 || k == n - 1) ? 0.5 * h : h;
        thrust += w * out.stations[k].dT_dr;
        torque += w * out.stations[k].dtau_dr;
    }
    out.performance.thrust = geom.num_blades * thrust;
    out.performance.torque = geom.num_blades * torque;
    return out;
}

inline RotorPerformance rotor_performance(const BladeGeometry& geom, const AirfoilPolar& polar,
                                          const RotorOperatingPoint& op, bool use_tip_loss = true) {
    return solve_rotor(geom, polar, op, use_tip_loss).performance;
}

namespace detail {

/// Bisection for an increasing scalar function on [lo, hi].
template <class F>
double bisect_increasing(F&& f, double target, double lo, double hi, double abs_tol, int max_iter = 200) {
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        mid = 0.5 * (lo + hi);
        const double v = f(mid) - target;
        if (std::abs(v) < abs_tol || mid == lo || mid == hi) break;
        (v < 0.0 ? lo : hi) = mid;
    }
    return mid;
}

}  // namespace detail

inline constexpr double k_reference_omega = rpm_to_rad_s(5000.0);
inline constexpr double k_omega_max = rpm_to_rad_s(8000.0);

/// Pitch giving zero net thrust at the given speed.
inline double zero_thrust_pitch(const BladeGeometry& geom, const AirfoilPolar& polar, double omega,
                                bool use_tip_loss = true) {
    const double a0 = alpha_zero_lift(polar);
    const double lo = std::max(a0 - 4.0, polar.min_alpha());
    const double hi = std::min(a0 + 4.0, polar.max_alpha());
    auto thrust = [&](double pitch) { return rotor_performance(geom, polar, {pitch, omega}, use_tip_loss).thrust; };
    if (!(thrust(lo) < 0.0 && thrust(hi) > 0.0))
        throw NotFoundError("no zero-thrust pitch bracket around " + std::to_string(a0) + " deg");
    return detail::bisect_increasing(thrust, 0.0, lo, hi, 1e-3);
}

/// Torque-to-thrust ratio at the reference speed.
inline double torque_thrust_ratio(const BladeGeometry& geom, const AirfoilPolar& polar, double pitch_deg,
                                  bool use_tip_loss = true, double omega = k_reference_omega) {
    const auto perf = rotor_performance(geom, polar, {pitch_deg, omega}, use_tip_loss);
    const auto lambda = perf.lambda();
    if (!lambda)
        throw SingularityError("thrust " + std::to_string(perf.thrust) + " N below guard at pitch " +
                               std::to_string(pitch_deg) + " deg");
    return *lambda;
}

/// Pitch as a function of mu = thrust / torque. mu is regular through zero
/// thrust, unlike its reciprocal.
struct LambdaLut {
    std::vector<double> pitch_deg;  // ascending
    std::vector<double> mu;         // strictly ascending
    double zero_thrust_pitch_deg = 0.0;
};

struct LutLookup {
    double pitch_deg = 0.0;
    bool clamped = false;
};

/// Builds the table over [pitch_lo, pitch_hi] with a +-0.5 deg guard band
/// around the zero-thrust pitch, which is inserted as an exact (pitch, 0) knot.
/// Only the branch where mu rises monotonically with pitch is kept.
inline LambdaLut build_lambda_lut(const BladeGeometry& geom, const AirfoilPolar& polar, double pitch_lo,
                                  double pitch_hi, double step = 0.25, bool use_tip_loss = true) {
    LambdaLut lut;
    lut.zero_thrust_pitch_deg = zero_thrust_pitch(geom, polar, k_reference_omega, use_tip_loss);
    const double p0 = lut.zero_thrust_pitch_deg;
    std::vector<std::pair<double, double>> knots{{p0, 0.0}};
    const int count = static_cast<int>(std::floor((pitch_hi - pitch_lo) / step + 1e-9)) + 1;
    for (int i = 0; i < count; ++i) {
        const double p = pitch_lo + step * i;
        if (std::abs(p - p0) < 0.5) continue;
        const auto perf = rotor_performance(geom, polar, {p, k_reference_omega}, use_tip_loss);
        knots.emplace_back(p, perf.thrust / perf.torque);
    }
    std::sort(knots.begin(), knots.end());
    const auto centre = std::find_if(knots.begin(), knots.end(), [&](const auto& k) { return k.first == p0; });
    auto first = centre;
    while (first != knots.begin() && std::prev(first)->second < first->second) --first;
    auto last = centre;
    while (std::next(last) != knots.end() && std::next(last)->second > last->second) ++last;
    for (auto it = first; it != std::next(last); ++it) {
        lut.pitch_deg.push_back(it->first);
        lut.mu.push_back(it->second);
    }
    return lut;
}

inline LutLookup pitch_for_mu(const LambdaLut& lut, double mu) {
    if (mu <= lut.mu.front()) return {lut.pitch_deg.front(), mu < lut.mu.front()};
    if (mu >= lut.mu.back()) return {lut.pitch_deg.back(), mu > lut.mu.back()};
    auto hi = std::lower_bound(lut.mu.begin(), lut.mu.end(), mu);
    const auto i = static_cast<std::size_t>(hi - lut.mu.begin());
    if (*hi == mu) return {lut.pitch_deg[i], false};
    const double t = (mu - lut.mu[i - 1]) / (lut.mu[i] - lut.mu[i - 1]);
    return {lut.pitch_deg[i - 1] + t * (lut.pitch_deg[i] - lut.pitch_deg[i - 1]), false};
}

/// lambda = +-inf (torque with zero thrust) maps to mu = 0.
inline LutLookup pitch_for_lambda(const LambdaLut& lut, double lambda) {
    return pitch_for_mu(lut, std::isinf(lambda) ? 0.0 : 1.0 / lambda);
}

/// Pitch realising a thrust/torque demand pair.
inline LutLookup pitch_for_demand(const LambdaLut& lut, double thrust, double torque) {
    if (!(torque > 0.0)) return pitch_for_mu(lut, thrust >= 0.0 ? lut.mu.back() : lut.mu.front());
    return pitch_for_mu(lut, thrust / torque);
}

struct EquilibriumSolution {
    double thrust13 = 0.0;     // N, each of the pair beside the failed rotor
    double omega13 = 0.0;      // rad/s
    double tau13 = 0.0;        // N m, each
    double pitch2_deg = 0.0;   // zero-thrust pitch of the rotor opposite the failure
    double omega2 = 0.0;       // rad/s, required
    double thrust2 = 0.0;
    double tau2 = 0.0;
    bool feasible = true;      // omega2 <= omega_max
};

/// Three-rotor hover with rotor 4 failed: rotors 1 and 3 at a fixed pitch each
/// carry half the weight; rotor 2 sits at zero-thrust pitch and spins fast
/// enough to cancel their torque. An omega2 beyond omega_max is reported with
/// feasible == false rather than thrown.
inline EquilibriumSolution failure_equilibrium(double mass, const BladeGeometry& geom, const AirfoilPolar& polar,
                                               double fixed_pitch_13, bool use_tip_loss = true,
                                               double omega_max = k_omega_max) {
    EquilibriumSolution eq;
    const double half_weight = 0.5 * mass * k_gravity;
    const double search_hi = 4.0 * omega_max;
    auto thrust13 = [&](double w) {
        return rotor_performance(geom, polar, {fixed_pitch_13, w}, use_tip_loss).thrust;
    };
    if (thrust13(omega_max) < half_weight)
        throw InfeasibleError(thrust13(omega_max),
                              "pair thrust at omega_max cannot carry half the weight (thrust-to-weight < 2)");
    eq.omega13 = detail::bisect_increasing(thrust13, half_weight, 0.0, search_hi, 1e-9);
    const auto p13 = rotor_performance(geom, polar, {fixed_pitch_13, eq.omega13}, use_tip_loss);
    eq.thrust13 = p13.thrust;
    eq.tau13 = p13.torque;

    eq.pitch2_deg = zero_thrust_pitch(geom, polar, eq.omega13, use_tip_loss);
    auto torque2 = [&](double w) {
        return rotor_performance(geom, polar, {eq.pitch2_deg, w}, use_tip_loss).torque;
    };
    const double target = 2.0 * eq.tau13;
    double hi = search_hi;
    while (torque2(hi) < target) hi *= 2.0;
    eq.omega2 = detail::bisect_increasing(torque2, target, 0.0, hi, 1e-12);
    const auto p2 = rotor_performance(geom, polar, {eq.pitch2_deg, eq.omega2}, use_tip_loss);
    eq.thrust2 = p2.thrust;
    eq.tau2 = p2.torque;
    eq.feasible = eq.omega2 <= omega_max;
    return eq;
}

struct MapCell {
    double pitch_deg;
    double omega;  // rad/s
    double thrust;
    double torque;
    bool converged;
};

/// Dense (pitch, omega) grid; failed cells are recorded with converged = false.
inline std::vector<MapCell> performance_map(const BladeGeometry& geom, const AirfoilPolar& polar,
                                            std::span<const double> pitch_grid_deg,
                                            std::span<const double> omega_grid, bool use_tip_loss = true) {
    std::vector<MapCell> cells;
    cells.reserve(pitch_grid_deg.size() * omega_grid.size());
    for (double p : pitch_grid_deg) {
        for (double w : omega_grid) {
            try {
                const auto perf = rotor_performance(geom, polar, {p, w}, use_tip_loss);
                cells.push_back({p, w, perf.thrust, perf.torque, true});
            } catch (const PartialResultError&) {
                cells.push_back({p, w, 0.0, 0.0, false});
            }
        }
    }
    return cells;
}

inline void write_performance_map_csv(std::ostream& out, std::span<const MapCell> cells) {
    out << "pitch_deg,omega_rpm,thrust_N,torque_Nm,converged\n";
    out.precision(10);
    for (const auto& c : cells) {
        out << c.pitch_deg << ',' << rad_s_to_rpm(c.omega) << ',' << c.thrust << ',' << c.torque << ','
            << (c.converged ? 1 : 0) << '\n';
    }
}

/// Thrust and torque per unit omega^2 tabulated against pitch. Without a
/// Reynolds dependence the hover solution scales exactly with omega^2, so this
/// reproduces the full solver at any speed at a fraction of the cost.
class RotorCoefficientTable {
public:
    RotorCoefficientTable() = default;

    RotorCoefficientTable(const BladeGeometry& geom, const AirfoilPolar& polar, double pitch_lo, double pitch_hi,
                          double step, bool use_tip_loss) {
        const double w = 1000.0;
        const int n = static_cast<int>(std::floor((pitch_hi - pitch_lo) / step + 1e-9)) + 1;
        pitch_lo_ = pitch_lo;
        step_ = step;
        for (int i = 0; i < n; ++i) {
            const auto perf = rotor_performance(geom, polar, {pitch_lo + step * i, w}, use_tip_loss);
            ct_.push_back(perf.thrust / (w * w));
            cq_.push_back(perf.torque / (w * w));
        }
    }

    double min_pitch() const { return pitch_lo_; }
    double max_pitch() const { return pitch_lo_ + step_ * static_cast<double>(ct_.size() - 1); }

    RotorPerformance evaluate(double pitch_deg, double omega) const {
        const double p = std::clamp(pitch_deg, min_pitch(), max_pitch());
        const double x = (p - pitch_lo_) / step_;
        auto i = static_cast<std::size_t>(std::floor(x));
        if (i >= ct_.size() - 1) i = ct_.size() - 2;
        const double t = x - static_cast<double>(i);
        const double w2 = omega * omega;
        return {w2 * (ct_[i] + t * (ct_[i + 1] - ct_[i])), w2 * (cq_[i] + t * (cq_[i + 1] - cq_[i]))};
    }

private:
    double pitch_lo_ = 0.0;
    double step_ = 1.0;
    std::vector<double> ct_;
    std::vector<double> cq_;
};

/// Finds the constant chord for which the failure equilibrium puts the rotor
/// opposite the failure at target_omega2. Used once to freeze the default
/// geometry.
inline double calibrate_chord(BladeGeometry geom, const AirfoilPolar& polar, double mass, double fixed_pitch_13,
                              double target_omega2, double chord_lo = 0.01, double chord_hi = 0.2) {
    // omega2 falls as chord grows, so bisect on -omega2.
    auto neg_omega2 = [&](double c) {
        geom.chord_knots = {{0.0, c}};
        return -failure_equilibrium(mass, geom, polar, fixed_pitch_13).omega2;
    };
    return detail::bisect_increasing(neg_omega2, -target_omega2, chord_lo, chord_hi, 1e-6, 60);
}

}  // namespace heliquad
