#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "heliquad/actuators.hpp"
#include "heliquad/airfoil.hpp"
#include "heliquad/controller.hpp"
#include "heliquad/errors.hpp"
#include "heliquad/nn_alloc.hpp"
#include "heliquad/plant.hpp"
#include "heliquad/rotor.hpp"

namespace heliquad {

struct ReferencePoint {
    double time = 0.0;
    Vec3 position = Vec3::Zero();
    double yaw_deg = 0.0;
};

struct FaultSpec {
    bool enabled = false;
    double time = 2.0;
    int rotor = 4;
    double detection_delay = 0.025;
};

struct ScenarioConfig {
    std::string name = "scenario";
    double duration = 20.0;
    double dt = 1e-3;
    double outer_hz = 100.0;
    double inner_hz = 500.0;
    int log_every = 10;
    std::uint64_t seed = 20210301;

    VehicleParams vehicle;
    BladeGeometry geometry;
    std::string polar = "cambered";
    bool plant_tip_loss = true;
    MotorParams motor;
    SpeedControllerGains speed_gains;
    double servo_rate_limit = 500.0;
    FailureMode failure_mode = FailureMode::stop;

    ControlGains gains;
    double nominal_pitch_deg = 4.0;
    double fault_pitch_deg = 10.0;

    Vec3 initial_position{0.0, 0.0, -10.0};
    Vec3 initial_velocity = Vec3::Zero();
    Vec3 initial_euler_deg = Vec3::Zero();
    double initial_rpm = 0.0;

    std::vector<ReferencePoint> references{{0.0, Vec3(0.0, 0.0, -10.0), 0.0}};
    FaultSpec fault;

    std::string net_path;  // empty: train from the tip-loss-free rotor model
    int net_hidden = 16;

    long total_steps() const { return std::lround(duration / dt); }
    int outer_divider() const { return static_cast<int>(std::lround(1.0 / (outer_hz * dt))); }
    int inner_divider() const { return static_cast<int>(std::lround(1.0 / (inner_hz * dt))); }
    long fault_step() const { return std::lround(fault.time / dt); }
    long detection_step() const { return fault_step() + std::lround(fault.detection_delay / dt); }

    void validate() const {
        if (!(dt > 0.0) || !(duration > 0.0)) throw ValidationError("duration and dt must be positive");
        for (double hz : {outer_hz, inner_hz}) {
            const double ratio = 1.0 / (hz * dt);
            if (!(hz > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0)
                throw ValidationError("dt must divide the controller periods");
        }
        if (log_every <= 0) throw ValidationError("log_every must be positive");
        if (references.empty()) throw ValidationError("reference schedule is empty");
        for (std::size_t i = 1; i < references.size(); ++i)
            if (references[i].time < references[i - 1].time)
                throw ValidationError("reference times must be non-decreasing");
        if (fault.enabled) {
            if (fault.rotor < 1 || fault.rotor > 4) throw ValidationError("fault rotor must be 1..4");
            if (fault.detection_delay < 0.0) throw ValidationError("detection delay must be non-negative");
            if (fault.time < 0.0) throw ValidationError("fault time must be non-negative");
        }
        vehicle.validate();
        geometry.validate();
        motor.validate();
        gains.validate();
    }

    ControlSetpoint setpoint_at(double t) const {
        const ReferencePoint* cur = &references.front();
        for (const auto& r : references)
            if (r.time <= t) cur = &r;
        return {cur->position, Vec3::Zero(), cur->yaw_deg};
    }
};

namespace config_detail {

inline std::vector<double> numbers(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::istringstream ss(text);
    for (std::string tok; ss >> tok;) {
        double v = 0.0;
        if (!detail::parse_double(tok, v)) throw ParseError("key '" + key + "': bad number '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

inline Vec3 vec3(const std::string& text, const std::string& key) {
    const auto v = numbers(text, key);
    if (v.size() != 3) throw ParseError("key '" + key + "' needs three numbers");
    return {v[0], v[1], v[2]};
}

inline bool boolean(const std::string& text, const std::string& key) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ParseError("key '" + key + "' must be a boolean");
}

class Reader {
public:
    explicit Reader(const boost::property_tree::ptree& tree) : tree_(tree) {}

    std::optional<std::string> text(const std::string& key) const {
        if (auto v = tree_.get_optional<std::string>(boost::property_tree::ptree::path_type(key, '.')))
            return *v;
        return std::nullopt;
    }

    void number(const std::string& key, double& out) const {
        if (auto t = text(key)) {
            const auto v = numbers(*t, key);
            if (v.size() != 1) throw ParseError("key '" + key + "' needs one number");
            out = v[0];
        }
    }
    void integer(const std::string& key, int& out) const {
        double v = out;
        number(key, v);
        if (v != std::floor(v)) throw ParseError("key '" + key + "' must be an integer");
        out = static_cast<int>(v);
    }
    void vector(const std::string& key, Vec3& out) const {
        if (auto t = text(key)) out = vec3(*t, key);
    }
    void flag(const std::string& key, bool& out) const {
        if (auto t = text(key)) out = boolean(*t, key);
    }
    void string(const std::string& key, std::string& out) const {
        if (auto t = text(key)) out = *t;
    }

private:
    const boost::property_tree::ptree& tree_;
};

}  // namespace config_detail

/// Sections and keys are documented in the README. Unknown sections and keys
/// are rejected so typos fail loudly.
inline ScenarioConfig parse_scenario(std::istream& in, const std::filesystem::path& base_dir = {}) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError(std::string("scenario config: ") + e.message() + " at line " + std::to_string(e.line()));
    }
    static const std::vector<std::pair<std::string, std::vector<std::string>>> known{
        {"scenario", {"name", "duration", "dt", "outer_hz", "inner_hz", "log_every", "seed"}},
        {"vehicle", {"mass", "arm_length", "inertia", "rotor_gyroscopics", "rotor_inertia"}},
        {"rotor", {"radius", "root_cutout", "chord", "num_blades", "num_stations", "polar", "tip_loss"}},
        {"motor",
         {"v_max", "kv_rpm_per_volt", "resistance", "i0", "rotor_inertia", "speed_kp", "speed_ki", "servo_rate",
          "failure_mode"}},
        {"control", {"pos_p", "pos_d", "att_p", "att_v", "nominal_pitch", "fault_pitch"}},
        {"initial", {"position", "velocity", "euler_deg", "rpm"}},
        {"reference", {"points"}},
        {"fault", {"enabled", "time", "rotor", "detection_delay"}},
        {"net", {"path", "hidden"}},
    };
    for (const auto& [section, keys] : tree) {
        auto it = std::find_if(known.begin(), known.end(), [&](const auto& k) { return k.first == section; });
        if (it == known.end()) throw ParseError("scenario config: unknown section [" + section + "]");
        for (const auto& [key, value] : keys) {
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                throw ParseError("scenario config: unknown key '" + key + "' in [" + section + "]");
        }
    }

    ScenarioConfig c;
    const config_detail::Reader r(tree);
    r.string("scenario.name", c.name);
    r.number("scenario.duration", c.duration);
    r.number("scenario.dt", c.dt);
    r.number("scenario.outer_hz", c.outer_hz);
    r.number("scenario.inner_hz", c.inner_hz);
    r.integer("scenario.log_every", c.log_every);
    if (auto s = r.text("scenario.seed")) {
        const auto v = config_detail::numbers(*s, "scenario.seed");
        if (v.size() != 1 || v[0] < 0 || v[0] != std::floor(v[0])) throw ParseError("seed must be an integer");
        c.seed = static_cast<std::uint64_t>(v[0]);
    }

    r.number("vehicle.mass", c.vehicle.mass);
    r.number("vehicle.arm_length", c.vehicle.arm_length);
    r.vector("vehicle.inertia", c.vehicle.inertia_diag);
    r.flag("vehicle.rotor_gyroscopics", c.vehicle.rotor_gyroscopics);
    r.number("vehicle.rotor_inertia", c.vehicle.rotor_inertia);

    r.number("rotor.radius", c.geometry.radius);
    r.number("rotor.root_cutout", c.geometry.root_cutout);
    if (auto s = r.text("rotor.chord")) {
        const auto v = config_detail::numbers(*s, "rotor.chord");
        if (v.size() == 1) {
            c.geometry.chord_knots = {{0.0, v[0]}};
        } else if (v.size() % 2 == 0 && !v.empty()) {
            c.geometry.chord_knots.clear();
            for (std::size_t i = 0; i < v.size(); i += 2) c.geometry.chord_knots.emplace_back(v[i], v[i + 1]);
        } else {
            throw ParseError("rotor.chord takes one value or (r c) pairs");
        }
    }
    r.integer("rotor.num_blades", c.geometry.num_blades);
    r.integer("rotor.num_stations", c.geometry.num_stations);
    r.string("rotor.polar", c.polar);
    r.flag("rotor.tip_loss", c.plant_tip_loss);

    r.number("motor.v_max", c.motor.v_max);
    r.number("motor.kv_rpm_per_volt", c.motor.kv_rpm_per_volt);
    r.number("motor.resistance", c.motor.resistance);
    r.number("motor.i0", c.motor.i0);
    r.number("motor.rotor_inertia", c.motor.rotor_inertia);
    r.number("motor.speed_kp", c.speed_gains.kp);
    r.number("motor.speed_ki", c.speed_gains.ki);
    r.number("motor.servo_rate", c.servo_rate_limit);
    if (auto s = r.text("motor.failure_mode")) {
        if (*s == "stop")
            c.failure_mode = FailureMode::stop;
        else if (*s == "spin_down")
            c.failure_mode = FailureMode::spin_down;
        else
            throw ParseError("motor.failure_mode must be 'stop' or 'spin_down'");
    }

    r.vector("control.pos_p", c.gains.pos_p);
    r.vector("control.pos_d", c.gains.pos_d);
    r.vector("control.att_p", c.gains.att_p);
    r.vector("control.att_v", c.gains.att_v);
    r.number("control.nominal_pitch", c.nominal_pitch_deg);
    r.number("control.fault_pitch", c.fault_pitch_deg);

    r.vector("initial.position", c.initial_position);
    r.vector("initial.velocity", c.initial_velocity);
    r.vector("initial.euler_deg", c.initial_euler_deg);
    r.number("initial.rpm", c.initial_rpm);

    // points = t x y z yaw_deg; t x y z yaw_deg; ...
    if (auto s = r.text("reference.points")) {
        c.references.clear();
        std::istringstream ss(*s);
        for (std::string row; std::getline(ss, row, ';');) {
            if (detail::trim(row).empty()) continue;
            const auto v = config_detail::numbers(row, "reference.points");
            if (v.size() != 5) throw ParseError("reference.points rows need 't x y z yaw_deg'");
            c.references.push_back({v[0], Vec3(v[1], v[2], v[3]), v[4]});
        }
    }

    r.flag("fault.enabled", c.fault.enabled);
    r.number("fault.time", c.fault.time);
    r.integer("fault.rotor", c.fault.rotor);
    r.number("fault.detection_delay", c.fault.detection_delay);

    r.string("net.path", c.net_path);
    if (!c.net_path.empty() && std::filesystem::path(c.net_path).is_relative() && !base_dir.empty())
        c.net_path = (base_dir / c.net_path).lexically_normal().string();
    r.integer("net.hidden", c.net_hidden);

    c.validate();
    return c;
}

inline ScenarioConfig load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open scenario config " + path.string());
    return parse_scenario(in, path.parent_path());
}

/// Oracle detector: reports the failed rotor exactly detection_delay after the
/// failure, healthy before.
class FaultDetector {
public:
    explicit FaultDetector(const ScenarioConfig& c)
        : enabled_(c.fault.enabled), rotor_(c.fault.rotor), detect_step_(c.detection_step()) {}

    int status(long step) const { return enabled_ && step >= detect_step_ ? rotor_ : 0; }

private:
    bool enabled_;
    int rotor_;
    long detect_step_;
};

// ---------------------------------------------------------------------------
// Telemetry

struct TelemetryRecord {
    double time = 0.0;
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    Quat attitude = Quat::Identity();
    Vec3 euler_deg = Vec3::Zero();
    Vec3 rates = Vec3::Zero();
    std::array<double, 4> omega_rpm{};
    std::array<double, 4> pitch_deg{};
    std::array<double, 4> omega_cmd_rpm{};
    std::array<double, 4> pitch_cmd_deg{};
    std::array<double, 4> thrust{};
    std::array<double, 4> thrust_d{};
    std::array<double, 4> torque_d{};
    std::array<double, 4> voltage{};
    double collective = 0.0;
    Vec3 moments = Vec3::Zero();
    Vec3 q_e = Vec3::Zero();
    Vec3 reference = Vec3::Zero();
    double yaw_ref_deg = 0.0;
    int mode = 0;  // 0 nominal, 1 fault
    int detected_rotor = 0;
    int failed_rotor = 0;  // ground truth
    int collective_clamped = 0;
    int thrust_clamped = 0;
    int torque_saturated = 0;
    int lut_clamped = 0;
    int net_clamped = 0;
    int omega_clamped = 0;
    int voltage_saturated = 0;
};

namespace telemetry_detail {

/// One accessor per CSV column, in file order.
struct Column {
    std::string name;
    std::function<double(const TelemetryRecord&)> get;
    std::function<void(TelemetryRecord&, double)> set;
};

inline const std::vector<Column>& columns() {
    static const std::vector<Column> cols = [] {
        std::vector<Column> c;
        auto scalar = [&](std::string name, double TelemetryRecord::*m) {
            c.push_back({std::move(name), [m](const TelemetryRecord& r) { return r.*m; },
                         [m](TelemetryRecord& r, double v) { r.*m = v; }});
        };
        auto integer = [&](std::string name, int TelemetryRecord::*m) {
            c.push_back({std::move(name), [m](const TelemetryRecord& r) { return static_cast<double>(r.*m); },
                         [m](TelemetryRecord& r, double v) { r.*m = static_cast<int>(v); }});
        };
        auto vec = [&](const std::array<const char*, 3>& names, Vec3 TelemetryRecord::*m) {
            for (int i = 0; i < 3; ++i)
                c.push_back({names[i], [m, i](const TelemetryRecord& r) { return (r.*m)[i]; },
                             [m, i](TelemetryRecord& r, double v) { (r.*m)[i] = v; }});
        };
        auto quad = [&](const std::string& stem, std::array<double, 4> TelemetryRecord::*m) {
            for (int i = 0; i < 4; ++i)
                c.push_back({stem + std::to_string(i + 1), [m, i](const TelemetryRecord& r) { return (r.*m)[i]; },
                             [m, i](TelemetryRecord& r, double v) { (r.*m)[i] = v; }});
        };
        scalar("time_s", &TelemetryRecord::time);
        vec({"x_m", "y_m", "z_m"}, &TelemetryRecord::position);
        vec({"vx_mps", "vy_mps", "vz_mps"}, &TelemetryRecord::velocity);
        c.push_back({"qw", [](const TelemetryRecord& r) { return r.attitude.w(); },
                     [](TelemetryRecord& r, double v) { r.attitude.w() = v; }});
        c.push_back({"qx", [](const TelemetryRecord& r) { return r.attitude.x(); },
                     [](TelemetryRecord& r, double v) { r.attitude.x() = v; }});
        c.push_back({"qy", [](const TelemetryRecord& r) { return r.attitude.y(); },
                     [](TelemetryRecord& r, double v) { r.attitude.y() = v; }});
        c.push_back({"qz", [](const TelemetryRecord& r) { return r.attitude.z(); },
                     [](TelemetryRecord& r, double v) { r.attitude.z() = v; }});
        vec({"roll_deg", "pitch_deg", "yaw_deg"}, &TelemetryRecord::euler_deg);
        vec({"p_radps", "q_radps", "r_radps"}, &TelemetryRecord::rates);
        quad("omega_rpm_", &TelemetryRecord::omega_rpm);
        quad("pitch_deg_", &TelemetryRecord::pitch_deg);
        quad("omega_cmd_rpm_", &TelemetryRecord::omega_cmd_rpm);
        quad("pitch_cmd_deg_", &TelemetryRecord::pitch_cmd_deg);
        quad("thrust_N_", &TelemetryRecord::thrust);
        quad("thrust_d_N_", &TelemetryRecord::thrust_d);
        quad("torque_d_Nm_", &TelemetryRecord::torque_d);
        quad("voltage_V_", &TelemetryRecord::voltage);
        scalar("collective_N", &TelemetryRecord::collective);
        vec({"moment_x_Nm", "moment_y_Nm", "moment_z_Nm"}, &TelemetryRecord::moments);
        vec({"qe_x", "qe_y", "qe_z"}, &TelemetryRecord::q_e);
        vec({"ref_x_m", "ref_y_m", "ref_z_m"}, &TelemetryRecord::reference);
        scalar("yaw_ref_deg", &TelemetryRecord::yaw_ref_deg);
        integer("mode", &TelemetryRecord::mode);
        integer("detected_rotor", &TelemetryRecord::detected_rotor);
        integer("failed_rotor", &TelemetryRecord::failed_rotor);
        integer("collective_clamped", &TelemetryRecord::collective_clamped);
        integer("thrust_clamped", &TelemetryRecord::thrust_clamped);
        integer("torque_saturated", &TelemetryRecord::torque_saturated);
        integer("lut_clamped", &TelemetryRecord::lut_clamped);
        integer("net_clamped", &TelemetryRecord::net_clamped);
        integer("omega_clamped", &TelemetryRecord::omega_clamped);
        integer("voltage_saturated", &TelemetryRecord::voltage_saturated);
        return c;
    }();
    return cols;
}

}  // namespace telemetry_detail

inline std::vector<std::string> telemetry_header() {
    std::vector<std::string> h;
    for (const auto& c : telemetry_detail::columns()) h.push_back(c.name);
    return h;
}

inline void write_telemetry_csv(std::ostream& out, const std::vector<TelemetryRecord>& records) {
    const auto& cols = telemetry_detail::columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i].name;
    out << '\n';
    char buf[32];
    for (const auto& r : records) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", cols[i].get(r));
            if (i) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

inline std::vector<TelemetryRecord> read_telemetry_csv(std::istream& in) {
    const auto& cols = telemetry_detail::columns();
    std::string line;
    if (!std::getline(in, line)) throw ParseError("telemetry file is empty");
    {
        std::istringstream ss(line);
        std::size_t i = 0;
        for (std::string name; std::getline(ss, name, ',');) {
            if (i >= cols.size() || cols[i].name != detail::trim(name))
                throw ParseError("telemetry header does not match the expected columns");
            ++i;
        }
        if (i != cols.size()) throw ParseError("telemetry header is missing columns");
    }
    std::vector<TelemetryRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        TelemetryRecord r;
        std::istringstream ss(line);
        std::size_t i = 0;
        for (std::string tok; std::getline(ss, tok, ',');) {
            double v = 0.0;
            if (i >= cols.size() || !detail::parse_double(detail::trim(tok), v))
                throw ParseError("telemetry line " + std::to_string(line_no) + " is malformed");
            cols[i++].set(r, v);
        }
        if (i != cols.size()) throw ParseError("telemetry line " + std::to_string(line_no) + " is short");
        records.push_back(r);
    }
    return records;
}

// ---------------------------------------------------------------------------
// Summary metrics

struct MetricsContext {
    bool fault = false;
    double fault_time = 0.0;
    double detection_time = 0.0;
    int failed_rotor = 0;
    double duration = 0.0;

    static MetricsContext from(const ScenarioConfig& c) {
        return {c.fault.enabled, c.fault_step() * c.dt, c.detection_step() * c.dt, c.fault.enabled ? c.fault.rotor : 0,
                c.total_steps() * c.dt};
    }
};

struct ScenarioMetrics {
    double altitude_loss_m = 0.0;
    double time_to_hover_s = std::numeric_limits<double>::quiet_NaN();
    double peak_roll_deg = 0.0;        // largest |roll| in the 3 s after the failure
    double peak_roll_blind_deg = 0.0;  // largest |roll| before detection
    double terminal_yaw_rate = 0.0;    // max |r| over the final second, rad/s
    double final_position_error_m = 0.0;  // max over the final second
    double final_x_error_m = 0.0;
    double max_omega_rpm = 0.0;      // after the failure (whole run without one)
    double max_omega_cmd_rpm = 0.0;
    double min_omega_rpm = 0.0;
    double opposite_pitch_mean_deg = std::numeric_limits<double>::quiet_NaN();  // final 5 s
    double opposite_pitch_min_deg = std::numeric_limits<double>::quiet_NaN();
    double opposite_pitch_max_deg = std::numeric_limits<double>::quiet_NaN();
    double collective_clamped_fraction = 0.0;
};

inline bool operator==(const ScenarioMetrics& a, const ScenarioMetrics& b) {
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return same(a.altitude_loss_m, b.altitude_loss_m) && same(a.time_to_hover_s, b.time_to_hover_s) &&
           same(a.peak_roll_deg, b.peak_roll_deg) && same(a.peak_roll_blind_deg, b.peak_roll_blind_deg) &&
           same(a.terminal_yaw_rate, b.terminal_yaw_rate) &&
           same(a.final_position_error_m, b.final_position_error_m) && same(a.final_x_error_m, b.final_x_error_m) &&
           same(a.max_omega_rpm, b.max_omega_rpm) && same(a.max_omega_cmd_rpm, b.max_omega_cmd_rpm) &&
           same(a.min_omega_rpm, b.min_omega_rpm) && same(a.opposite_pitch_mean_deg, b.opposite_pitch_mean_deg) &&
           same(a.opposite_pitch_min_deg, b.opposite_pitch_min_deg) &&
           same(a.opposite_pitch_max_deg, b.opposite_pitch_max_deg) &&
           same(a.collective_clamped_fraction, b.collective_clamped_fraction);
}

struct HoverCriteria {
    double position_tol = 0.1;  // m
    double rate_tol = 0.05;     // rad/s
    double hold_time = 1.0;     // s
};

/// Metrics are computed from the logged records only, so re-reading a
/// telemetry file reproduces them exactly.
inline ScenarioMetrics summarize(const std::vector<TelemetryRecord>& records, const MetricsContext& ctx,
                                 const HoverCriteria& hover = {}) {
    ScenarioMetrics m;
    if (records.empty()) return m;
    const double t0 = ctx.fault ? ctx.fault_time : records.front().time;
    const double t_end = records.back().time;
    const int opp = ctx.fault ? fault_layout(ctx.failed_rotor).opposite : -1;

    double z0 = std::numeric_limits<double>::quiet_NaN();
    double max_z = -std::numeric_limits<double>::infinity();
    double hover_start = std::numeric_limits<double>::quiet_NaN();
    bool in_hover = false;
    double pitch_sum = 0.0;
    int pitch_count = 0;
    int post_count = 0, clamp_count = 0;
    m.min_omega_rpm = std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
        if (r.time < t0 - 1e-12) continue;
        ++post_count;
        clamp_count += r.collective_clamped;
        if (std::isnan(z0)) z0 = r.position.z();
        max_z = std::max(max_z, r.position.z());
        const double roll = std::abs(r.euler_deg.x());
        if (r.time <= t0 + 3.0 + 1e-12) m.peak_roll_deg = std::max(m.peak_roll_deg, roll);
        if (ctx.fault && r.time <= ctx.detection_time + 1e-12)
            m.peak_roll_blind_deg = std::max(m.peak_roll_blind_deg, roll);
        for (int i = 0; i < 4; ++i) {
            m.max_omega_rpm = std::max(m.max_omega_rpm, r.omega_rpm[i]);
            m.max_omega_cmd_rpm = std::max(m.max_omega_cmd_rpm, r.omega_cmd_rpm[i]);
            m.min_omega_rpm = std::min(m.min_omega_rpm, r.omega_rpm[i]);
        }
        const bool ok = (r.position - r.reference).norm() < hover.position_tol && r.rates.norm() < hover.rate_tol;
        if (std::isnan(m.time_to_hover_s)) {
            if (ok && !in_hover) {
                in_hover = true;
                hover_start = r.time;
            } else if (!ok) {
                in_hover = false;
            }
            if (in_hover && r.time - hover_start >= hover.hold_time - 1e-12) m.time_to_hover_s = hover_start - t0;
        }
        if (r.time >= t_end - 1.0 - 1e-12) {
            m.terminal_yaw_rate = std::max(m.terminal_yaw_rate, std::abs(r.rates.z()));
            m.final_position_error_m = std::max(m.final_position_error_m, (r.position - r.reference).norm());
            m.final_x_error_m = std::max(m.final_x_error_m, std::abs(r.position.x() - r.reference.x()));
        }
        if (opp >= 0 && r.time >= t_end - 5.0 - 1e-12) {
            const double p = r.pitch_deg[opp];
            pitch_sum += p;
            ++pitch_count;
            m.opposite_pitch_min_deg = pitch_count == 1 ? p : std::min(m.opposite_pitch_min_deg, p);
            m.opposite_pitch_max_deg = pitch_count == 1 ? p : std::max(m.opposite_pitch_max_deg, p);
        }
    }
    if (!std::isnan(z0)) m.altitude_loss_m = std::max(0.0, max_z - z0);
    if (pitch_count) m.opposite_pitch_mean_deg = pitch_sum / pitch_count;
    if (post_count) m.collective_clamped_fraction = static_cast<double>(clamp_count) / post_count;
    if (!std::isfinite(m.min_omega_rpm)) m.min_omega_rpm = 0.0;
    return m;
}

inline void write_summary(std::ostream& out, const ScenarioMetrics& m) {
    auto kv = [&](const char* key, double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        out << key << '=' << buf << '\n';
    };
    kv("altitude_loss_m", m.altitude_loss_m);
    kv("time_to_hover_s", m.time_to_hover_s);
    kv("peak_roll_deg", m.peak_roll_deg);
    kv("peak_roll_blind_window_deg", m.peak_roll_blind_deg);
    kv("terminal_yaw_rate_radps", m.terminal_yaw_rate);
    kv("final_position_error_m", m.final_position_error_m);
    kv("final_x_error_m", m.final_x_error_m);
    kv("max_omega_rpm", m.max_omega_rpm);
    kv("max_omega_cmd_rpm", m.max_omega_cmd_rpm);
    kv("min_omega_rpm", m.min_omega_rpm);
    kv("opposite_pitch_mean_deg", m.opposite_pitch_mean_deg);
    kv("opposite_pitch_min_deg", m.opposite_pitch_min_deg);
    kv("opposite_pitch_max_deg", m.opposite_pitch_max_deg);
    kv("collective_clamped_fraction", m.collective_clamped_fraction);
}

// ---------------------------------------------------------------------------
// Simulation executive

struct ScenarioResult {
    std::vector<TelemetryRecord> records;
    ScenarioMetrics metrics;
    bool diverged = false;
    std::string diagnostic;
    double mode_switch_time = std::numeric_limits<double>::quiet_NaN();
    long steps = 0;
};

/// Controller-side allocation net for a scenario: loaded from the configured
/// path, otherwise trained from the tip-loss-free rotor model with the
/// scenario seed.
inline AllocNet scenario_net(const ScenarioConfig& c, const AirfoilPolar& polar) {
    if (!c.net_path.empty()) return load_net_file(c.net_path);
    const DatasetGrid grid;
    const auto pitches = grid.pitches();
    const auto omegas = grid.omegas();
    const auto data = generate_dataset(c.geometry, polar, pitches, omegas);
    TrainOptions opt;
    opt.seed = c.seed;
    return train(data.samples, c.net_hidden, opt).net;
}

inline ScenarioResult run_scenario(const ScenarioConfig& c, const AirfoilPolar& polar, const AllocNet& net) {
    c.validate();
    PlantParams plant;
    plant.vehicle = c.vehicle;
    plant.motor = c.motor;
    plant.servo_rate_limit = c.servo_rate_limit;
    plant.failure_mode = c.failure_mode;
    plant.rotor = RotorCoefficientTable(c.geometry, polar, -8.0, 14.0, 0.05, c.plant_tip_loss);

    auto models = build_controller_models(c.geometry, polar, net, c.nominal_pitch_deg, c.fault_pitch_deg);
    Controller controller(c.gains, c.vehicle, std::move(models),
                          LoopRates{c.dt, c.outer_divider(), c.inner_divider()});
    const FaultDetector detector(c);

    PlantState s;
    s.body.position = c.initial_position;
    s.body.velocity = c.initial_velocity;
    s.body.attitude = from_euler(deg_to_rad(c.initial_euler_deg.x()), deg_to_rad(c.initial_euler_deg.y()),
                                 deg_to_rad(c.initial_euler_deg.z()));
    for (int i = 0; i < 4; ++i) {
        s.motors[i].omega = rpm_to_rad_s(c.initial_rpm);
        s.servos[i] = {c.nominal_pitch_deg, c.servo_rate_limit};
    }
    std::array<SpeedController, 4> esc;
    esc.fill(SpeedController(c.speed_gains));

    // A run is declared diverged once tracking is lost beyond any recovery.
    constexpr double k_divergence_distance = 100.0;  // m from the reference
    constexpr double k_divergence_rate = 200.0;      // rad/s

    ScenarioResult result;
    const long n = c.total_steps();
    const long fault_step = c.fault.enabled ? c.fault_step() : -1;
    int failed_truth = 0;
    try {
        for (long k = 0; k <= n; ++k) {
            const double t = static_cast<double>(k) * c.dt;
            if (k == fault_step) {
                fail_rotor(plant, s, c.fault.rotor);
                failed_truth = c.fault.rotor;
            }
            const int detected = detector.status(k);
            const auto sp = c.setpoint_at(t);
            const auto& st = controller.step(k, s.body, sp, detected);
            if (st.mode == ControlMode::fault && std::isnan(result.mode_switch_time)) result.mode_switch_time = t;

            PlantInput u;
            bool vsat = false;
            for (int i = 0; i < 4; ++i) {
                const double cmd = std::clamp(st.command.pitch_deg[i], plant.rotor.min_pitch(), plant.rotor.max_pitch());
                s.servos[i] = servo_step(s.servos[i], cmd, c.dt);
                const auto v = esc[i].step(st.command.omega[i], s.motors[i].omega, c.motor, c.dt);
                u.voltage[i] = s.unpowered[i] ? 0.0 : v.voltage;
                vsat |= v.saturated && !s.motors[i].failed;
            }

            if (k % c.log_every == 0) {
                TelemetryRecord r;
                r.time = t;
                r.position = s.body.position;
                r.velocity = s.body.velocity;
                r.attitude = s.body.attitude;
                const Vec3 e = euler_angles(s.body.attitude);
                r.euler_deg = Vec3(rad_to_deg(e.x()), rad_to_deg(e.y()), rad_to_deg(e.z()));
                r.rates = s.body.body_rates;
                const auto forces = plant_rotor_outputs(plant, s);
                for (int i = 0; i < 4; ++i) {
                    r.omega_rpm[i] = rad_s_to_rpm(s.motors[i].omega);
                    r.pitch_deg[i] = s.servos[i].pitch_deg;
                    r.omega_cmd_rpm[i] = rad_s_to_rpm(st.command.omega[i]);
                    r.pitch_cmd_deg[i] = st.command.pitch_deg[i];
                    r.thrust[i] = forces[i].thrust;
                    r.thrust_d[i] = st.demand.rotors[i].thrust;
                    r.torque_d[i] = st.demand.rotors[i].torque;
                    r.voltage[i] = u.voltage[i];
                }
                r.collective = st.collective;
                r.moments = st.demand.moments;
                r.q_e = st.q_e;
                r.reference = sp.position;
                r.yaw_ref_deg = sp.yaw_deg;
                r.mode = st.mode == ControlMode::fault ? 1 : 0;
                r.detected_rotor = detected;
                r.failed_rotor = failed_truth;
                r.collective_clamped = st.collective_clamped;
                r.thrust_clamped = st.demand.thrust_clamped;
                r.torque_saturated = st.demand.torque_saturated;
                r.lut_clamped = st.demand.lut_clamped;
                r.net_clamped = st.net_input_clamped;
                r.omega_clamped = st.omega_clamped;
                r.voltage_saturated = vsat;
                result.records.push_back(r);
            }
            if (k == n) break;
            s = plant_step(plant, s, u, c.dt);
            if ((s.body.position - sp.position).norm() > k_divergence_distance ||
                s.body.body_rates.norm() > k_divergence_rate)
                throw DivergenceError("vehicle left the physical envelope");
            result.steps = k + 1;
        }
    } catch (const DivergenceError& e) {
        result.diverged = true;
        result.diagnostic = std::string(e.what()) + " at t=" + std::to_string(result.steps * c.dt) + " s";
    }
    result.metrics = summarize(result.records, MetricsContext::from(c));
    return result;
}

inline ScenarioResult run_scenario(const ScenarioConfig& c) {
    const auto polar = resolve_polar(c.polar);
    return run_scenario(c, polar, scenario_net(c, polar));
}

}  // namespace heliquad
