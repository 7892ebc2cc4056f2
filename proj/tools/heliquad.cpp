// Command-line front end: rotor maps, failure equilibrium, airfoil comparison,
// allocation-net training and closed-loop scenarios.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "heliquad/analysis.hpp"
#include "heliquad/nn_alloc.hpp"
#include "heliquad/rotor.hpp"
#include "heliquad/scenario.hpp"

namespace fs = std::filesystem;
using namespace heliquad;

namespace {

struct RotorOptions {
    std::string polar = "cambered";
    std::optional<int> stations;
    bool no_tip_loss = false;

    void attach(CLI::App* app) {
        app->add_option("--polar", polar, "bundled polar name (symmetric, cambered) or polar file path");
        app->add_option("--stations", stations, "radial stations per blade")->check(CLI::Range(20, 100000));
        app->add_flag("--no-tip-loss", no_tip_loss, "drop the Prandtl tip-loss factor");
    }

    BladeGeometry geometry() const {
        BladeGeometry g;
        if (stations) g.num_stations = *stations;
        g.validate();
        return g;
    }
};

void kv(const char* key, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    std::cout << key << '=' << buf << '\n';
}

fs::path output_file(const std::string& out_dir, const char* name) {
    if (out_dir.empty()) return name;
    fs::create_directories(out_dir);
    return fs::path(out_dir) / name;
}

int run_rotor_map(const RotorOptions& ro, const std::string& out_dir, double pmin, double pmax, double pstep,
                  double wmin, double wmax, double wstep) {
    const auto polar = resolve_polar(ro.polar);
    const auto geom = ro.geometry();
    std::vector<double> pitches, omegas;
    for (double p = pmin; p <= pmax + 1e-9; p += pstep) pitches.push_back(p);
    for (double w = wmin; w <= wmax + 1e-9; w += wstep) omegas.push_back(rpm_to_rad_s(w));
    const auto cells = performance_map(geom, polar, pitches, omegas, !ro.no_tip_loss);
    const auto path = output_file(out_dir, "rotor_map.csv");
    std::ofstream out(path);
    if (!out) throw NotFoundError("cannot write " + path.string());
    write_performance_map_csv(out, cells);
    std::size_t ok = 0;
    for (const auto& c : cells) ok += c.converged;
    std::cout << "map=" << path.string() << '\n';
    kv("cells", static_cast<double>(cells.size()));
    kv("converged", static_cast<double>(ok));
    return 0;
}

int run_equilibrium(const RotorOptions& ro, double mass, double pitch13) {
    const auto polar = resolve_polar(ro.polar);
    const auto eq = failure_equilibrium(mass, ro.geometry(), polar, pitch13, !ro.no_tip_loss);
    std::cout << "polar=" << polar.name() << '\n';
    kv("thrust13_N", eq.thrust13);
    kv("omega13_rpm", rad_s_to_rpm(eq.omega13));
    kv("tau13_Nm", eq.tau13);
    kv("pitch2_deg", eq.pitch2_deg);
    kv("omega2_rpm", rad_s_to_rpm(eq.omega2));
    kv("thrust2_N", eq.thrust2);
    kv("tau2_Nm", eq.tau2);
    std::cout << "feasible=" << (eq.feasible ? "true" : "false") << '\n';
    if (!eq.feasible) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "error=infeasible required_omega2_rpm=%.1f omega_max_rpm=%.1f",
                      rad_s_to_rpm(eq.omega2), rad_s_to_rpm(k_omega_max));
        std::cerr << buf << '\n';
        return 3;
    }
    return 0;
}

int run_compare(const RotorOptions& ro, double rpm, double mass, double pitch13) {
    const auto sym = resolve_polar("symmetric");
    const auto cam = resolve_polar("cambered");
    const auto c = compare_airfoils(ro.geometry(), sym, cam, rpm_to_rad_s(rpm), mass, pitch13, !ro.no_tip_loss);
    kv("omega_rpm", rpm);
    for (const auto* s : {&c.symmetric, &c.cambered}) {
        const std::string p = s->name + ".";
        kv((p + "alpha_zero_lift_deg").c_str(), s->alpha_zero_lift_deg);
        kv((p + "cd_zero_lift").c_str(), s->cd_zero_lift);
        kv((p + "zero_thrust_pitch_deg").c_str(), s->zero_thrust_pitch_deg);
        kv((p + "torque_at_zero_thrust_Nm").c_str(), s->torque_at_zero_thrust);
        if (s->equilibrium) {
            kv((p + "equilibrium_omega2_rpm").c_str(), rad_s_to_rpm(s->equilibrium->omega2));
            std::cout << p << "equilibrium_feasible=" << (s->equilibrium->feasible ? "true" : "false") << '\n';
        } else {
            std::cout << p << "equilibrium_feasible=false\n";
        }
    }
    kv("torque_ratio", c.torque_ratio);
    kv("drag_ratio", c.drag_ratio);
    return 0;
}

int run_train(const RotorOptions& ro, const std::string& out_dir, const std::string& net_out, std::uint64_t seed,
              std::optional<int> hidden, int epochs) {
    const auto polar = resolve_polar(ro.polar);
    const auto geom = ro.geometry();
    const DatasetGrid grid;
    const auto pitches = grid.pitches();
    const auto omegas = grid.omegas();
    const auto t0 = std::chrono::steady_clock::now();
    const auto data = generate_dataset(geom, polar, pitches, omegas);
    kv("samples", static_cast<double>(data.samples.size()));
    kv("skipped", static_cast<double>(data.skipped));

    TrainOptions opt;
    opt.seed = seed;
    opt.max_epochs = epochs;
    int nh = 0;
    if (hidden) {
        nh = *hidden;
    } else {
        const std::vector<int> candidates{4, 6, 8, 12, 16};
        const auto sel = select_hidden_count(data.samples, candidates, opt);
        for (const auto& c : sel.candidates) {
            const std::string key = "candidate_" + std::to_string(c.hidden_count) + "_validation_rmse_rpm";
            kv(key.c_str(), rad_s_to_rpm(c.validation_rmse));
        }
        nh = sel.hidden_count;
    }
    kv("hidden_count", nh);

    // Held-out quality on the same split the selection used, then the final
    // net is refit on every sample.
    const auto split = split_dataset(data.samples, seed);
    const auto holdout = train(split.train, nh, opt);
    const double rmse = rms_error(holdout.net, split.validation);
    kv("holdout_rmse_rpm", rad_s_to_rpm(rmse));
    kv("holdout_rmse_fraction_of_mean", rmse / mean_omega(split.validation));

    const auto fit = train(data.samples, nh, opt);
    kv("epochs", fit.report.epochs);
    kv("train_mse_normalized", fit.report.mse);
    std::cout << "stop_reason=" << fit.report.stop_reason << '\n';
    const fs::path path = net_out.empty() ? output_file(out_dir, "alloc_net.txt") : fs::path(net_out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    save_net_file(path, fit.net);
    std::cout << "net=" << path.string() << '\n';
    kv("seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
                 std::optional<std::string> polar_name, std::optional<std::string> net_path,
                 std::optional<int> stations, bool no_tip_loss) {
    auto cfg = load_scenario_file(config_path);
    if (seed) cfg.seed = *seed;
    if (polar_name) cfg.polar = *polar_name;
    if (net_path) cfg.net_path = *net_path;
    if (stations) cfg.geometry.num_stations = *stations;
    if (no_tip_loss) cfg.plant_tip_loss = false;
    cfg.validate();

    const auto t0 = std::chrono::steady_clock::now();
    const auto result = run_scenario(cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto csv = output_file(out_dir, (cfg.name + "_telemetry.csv").c_str());
    {
        std::ofstream out(csv);
        if (!out) throw NotFoundError("cannot write " + csv.string());
        write_telemetry_csv(out, result.records);
    }
    std::ostringstream summary;
    summary << "scenario=" << cfg.name << '\n';
    write_summary(summary, result.metrics);
    if (!std::isnan(result.mode_switch_time)) summary << "mode_switch_time_s=" << result.mode_switch_time << '\n';
    summary << "diverged=" << (result.diverged ? "true" : "false") << '\n';
    summary << "telemetry=" << csv.string() << '\n';
    {
        std::ofstream out(output_file(out_dir, (cfg.name + "_summary.txt").c_str()));
        out << summary.str();
    }
    std::cout << summary.str();
    kv("seconds", seconds);
    if (result.diverged) {
        std::cerr << "error=divergence message=\"" << result.diagnostic << "\"\n";
        return 4;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable-pitch quadrotor rotor analysis and fault-tolerant flight simulation"};
    app.require_subcommand(1);

    RotorOptions map_ro, eq_ro, cmp_ro, train_ro;
    std::string out_dir;

    auto* map = app.add_subcommand("rotor-map", "thrust/torque map over a pitch x RPM grid (CSV)");
    map_ro.attach(map);
    map->add_option("--out", out_dir, "output directory");
    double pmin = -6, pmax = 14, pstep = 0.5, wmin = 2000, wmax = 8000, wstep = 250;
    map->add_option("--pitch-min", pmin, "lowest pitch, deg")->capture_default_str();
    map->add_option("--pitch-max", pmax, "highest pitch, deg")->capture_default_str();
    map->add_option("--pitch-step", pstep, "pitch step, deg")->capture_default_str()->check(CLI::PositiveNumber);
    map->add_option("--rpm-min", wmin, "lowest speed, rpm")->capture_default_str()->check(CLI::PositiveNumber);
    map->add_option("--rpm-max", wmax, "highest speed, rpm")->capture_default_str();
    map->add_option("--rpm-step", wstep, "speed step, rpm")->capture_default_str()->check(CLI::PositiveNumber);

    auto* eq = app.add_subcommand("equilibrium", "three-rotor hover equilibrium with rotor 4 failed");
    eq_ro.attach(eq);
    double mass = 0.600, pitch13 = 10.0;
    eq->add_option("--mass", mass, "vehicle mass, kg")->check(CLI::PositiveNumber);
    eq->add_option("--pitch13", pitch13, "fixed pitch of the pair beside the failure, deg");

    auto* cmp = app.add_subcommand("compare-airfoils", "zero-thrust torque and equilibrium, symmetric vs cambered");
    cmp_ro.attach(cmp);
    double cmp_rpm = 5000;
    cmp->add_option("--rpm", cmp_rpm, "common rotor speed for the torque comparison")->check(CLI::PositiveNumber);
    cmp->add_option("--mass", mass, "vehicle mass for the equilibrium, kg")->check(CLI::PositiveNumber);
    cmp->add_option("--pitch13", pitch13, "fixed pitch of the pair beside the failure, deg");

    auto* tr = app.add_subcommand("train-alloc", "generate the tip-loss-free dataset and train the allocation net");
    train_ro.attach(tr);
    tr->add_option("--out", out_dir, "output directory for alloc_net.txt");
    std::string net_out;
    tr->add_option("--net", net_out, "explicit output path for the trained net");
    std::uint64_t seed = 20210301;
    tr->add_option("--seed", seed, "weight initialisation and split seed");
    std::optional<int> hidden;
    tr->add_option("--hidden", hidden, "skip selection and use this hidden-layer width")->check(CLI::PositiveNumber);
    int epochs = TrainOptions{}.max_epochs;
    tr->add_option("--epochs", epochs, "Levenberg-Marquardt epoch limit")->check(CLI::PositiveNumber);

    auto* sim = app.add_subcommand("simulate", "run a closed-loop scenario from a config file");
    std::string config;
    sim->add_option("--config", config, "scenario config (INI)")->required();
    sim->add_option("--out", out_dir, "output directory for telemetry and summary");
    std::optional<std::uint64_t> sim_seed;
    std::optional<std::string> sim_polar, sim_net;
    std::optional<int> sim_stations;
    bool sim_no_tip = false;
    sim->add_option("--seed", sim_seed, "override the scenario seed");
    sim->add_option("--polar", sim_polar, "override the airfoil polar");
    sim->add_option("--net", sim_net, "allocation net file");
    sim->add_option("--stations", sim_stations, "radial stations per blade in the plant")->check(CLI::Range(20, 100000));
    sim->add_flag("--no-tip-loss", sim_no_tip, "plant without tip loss");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error=usage message=\"" << e.what() << "\"\n";
        const CLI::App* failed = &app;
        for (auto* sub : app.get_subcommands()) failed = sub;
        std::cerr << failed->help();
        return 64;
    }

    try {
        if (*map) return run_rotor_map(map_ro, out_dir, pmin, pmax, pstep, wmin, wmax, wstep);
        if (*eq) return run_equilibrium(eq_ro, mass, pitch13);
        if (*cmp) return run_compare(cmp_ro, cmp_rpm, mass, pitch13);
        if (*tr) return run_train(train_ro, out_dir, net_out, seed, hidden, epochs);
        if (*sim)
            return run_simulate(config, out_dir, sim_seed, sim_polar, sim_net, sim_stations, sim_no_tip);
    } catch (const heliquad::Error& e) {
        std::cerr << "error=" << e.kind() << " message=\"" << e.what() << "\"\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error=internal message=\"" << e.what() << "\"\n";
        return 2;
    }
    return 0;
}
