#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heliquad/errors.hpp"
#include "heliquad/rotor.hpp"

// Single-hidden-layer tanh network mapping a rotor demand (thrust, torque,
// pitch) to the rotor speed that realises it:
//
//   omega_hat = sum_k w2_k * h_k,   h_k = tanh(sum_i w1_ki x_i + b_k)
//
// with inputs and output scaled affinely to [-1, 1] over the training ranges.

namespace heliquad {

struct AllocSample {
    double thrust = 0.0;  // N
    double torque = 0.0;  // N m
    double pitch = 0.0;   // deg
    double omega = 0.0;   // rad/s
};

/// Affine map of [lo, hi] onto [-1, 1].
struct AffineRange {
    double lo = -1.0;
    double hi = 1.0;

    double to_unit(double v) const { return 2.0 * (v - lo) / (hi - lo) - 1.0; }
    double from_unit(double u) const { return lo + 0.5 * (u + 1.0) * (hi - lo); }
};

struct AllocNet {
    static constexpr int k_format_version = 1;
    static constexpr double k_input_padding = 0.1;  // normalised units beyond [-1, 1]

    int hidden_count = 0;
    Eigen::MatrixXd input_weights;   // hidden_count x 3
    Eigen::VectorXd hidden_biases;   // hidden_count
    Eigen::VectorXd output_weights;  // hidden_count
    std::array<AffineRange, 3> input_range{};
    AffineRange output_range{};

    static AllocNet zeros(int hidden) {
        AllocNet n;
        n.hidden_count = hidden;
        n.input_weights = Eigen::MatrixXd::Zero(hidden, 3);
        n.hidden_biases = Eigen::VectorXd::Zero(hidden);
        n.output_weights = Eigen::VectorXd::Zero(hidden);
        return n;
    }

    int parameter_count() const { return 5 * hidden_count; }

    /// Packs (w1 row-major, b, w2) into one vector; the layout of the LM
    /// parameter vector.
    Eigen::VectorXd parameters() const {
        Eigen::VectorXd p(parameter_count());
        int j = 0;
        for (int k = 0; k < hidden_count; ++k)
            for (int i = 0; i < 3; ++i) p[j++] = input_weights(k, i);
        for (int k = 0; k < hidden_count; ++k) p[j++] = hidden_biases[k];
        for (int k = 0; k < hidden_count; ++k) p[j++] = output_weights[k];
        return p;
    }

    void set_parameters(const Eigen::VectorXd& p) {
        int j = 0;
        for (int k = 0; k < hidden_count; ++k)
            for (int i = 0; i < 3; ++i) input_weights(k, i) = p[j++];
        for (int k = 0; k < hidden_count; ++k) hidden_biases[k] = p[j++];
        for (int k = 0; k < hidden_count; ++k) output_weights[k] = p[j++];
    }

    bool finite() const {
        return input_weights.allFinite() && hidden_biases.allFinite() && output_weights.allFinite();
    }
};

struct AllocInput {
    double thrust = 0.0;
    double torque = 0.0;
    double pitch = 0.0;
};

struct AllocOutput {
    double omega = 0.0;
    bool clamped = false;
};

namespace nn_detail {

inline Eigen::Vector3d normalise(const AllocNet& net, const AllocInput& in) {
    return {net.input_range[0].to_unit(in.thrust), net.input_range[1].to_unit(in.torque),
            net.input_range[2].to_unit(in.pitch)};
}

/// Output in normalised units.
inline double evaluate_unit(const AllocNet& net, const Eigen::Vector3d& x) {
    double y = 0.0;
    for (int k = 0; k < net.hidden_count; ++k)
        y += net.output_weights[k] * std::tanh(net.input_weights.row(k).dot(x) + net.hidden_biases[k]);
    return y;
}

/// Gradient of the normalised output with respect to the packed parameters.
inline void gradient_unit(const AllocNet& net, const Eigen::Vector3d& x, Eigen::Ref<Eigen::VectorXd> g) {
    const int nh = net.hidden_count;
    for (int k = 0; k < nh; ++k) {
        const double h = std::tanh(net.input_weights.row(k).dot(x) + net.hidden_biases[k]);
        const double dh = net.output_weights[k] * (1.0 - h * h);
        for (int i = 0; i < 3; ++i) g[3 * k + i] = dh * x[i];
        g[3 * nh + k] = dh;
        g[4 * nh + k] = h;
    }
}

}  // namespace nn_detail

/// Inputs beyond the padded normalisation box are clamped onto it and
/// flagged.
inline AllocOutput forward(const AllocNet& net, const AllocInput& in) {
    Eigen::Vector3d x = nn_detail::normalise(net, in);
    const double bound = 1.0 + AllocNet::k_input_padding;
    AllocOutput out;
    for (int i = 0; i < 3; ++i) {
        if (std::abs(x[i]) > bound) {
            x[i] = std::copysign(bound, x[i]);
            out.clamped = true;
        }
    }
    out.omega = net.output_range.from_unit(nn_detail::evaluate_unit(net, x));
    return out;
}

/// Upper bound on the Lipschitz constant of the normalised map in the
/// infinity-to-absolute sense: sum_k |w2_k| * ||w1_k||_1.
inline double lipschitz_bound(const AllocNet& net) {
    double l = 0.0;
    for (int k = 0; k < net.hidden_count; ++k)
        l += std::abs(net.output_weights[k]) * net.input_weights.row(k).lpNorm<1>();
    return l;
}

struct DatasetReport {
    std::vector<AllocSample> samples;
    std::size_t skipped = 0;
};

/// Tip-loss-free samples over the (pitch, omega) grid. More than 5% skipped
/// cells is an error.
inline DatasetReport generate_dataset(const BladeGeometry& geom, const AirfoilPolar& polar,
                                      std::span<const double> pitch_grid_deg, std::span<const double> omega_grid) {
    DatasetReport rep;
    const auto cells = performance_map(geom, polar, pitch_grid_deg, omega_grid, /*use_tip_loss=*/false);
    for (const auto& c : cells) {
        if (!c.converged) {
            ++rep.skipped;
            continue;
        }
        rep.samples.push_back({c.thrust, c.torque, c.pitch_deg, c.omega});
    }
    if (rep.skipped * 20 > cells.size())
        throw DatasetError(std::to_string(rep.skipped) + " of " + std::to_string(cells.size()) +
                           " dataset cells failed to converge");
    return rep;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
}

/// Operating envelope the allocation net is trained over.
struct DatasetGrid {
    double pitch_min = -6.0;
    double pitch_max = 14.0;
    int pitch_count = 81;
    double rpm_min = 2000.0;
    double rpm_max = 8000.0;
    int rpm_count = 31;

    std::vector<double> pitches() const { return linspace(pitch_min, pitch_max, pitch_count); }
    std::vector<double> omegas() const {
        auto v = linspace(rpm_min, rpm_max, rpm_count);
        for (auto& w : v) w = rpm_to_rad_s(w);
        return v;
    }
};

struct TrainOptions {
    int max_epochs = 400;
    double target_mse = 1e-10;  // normalised output units
    double gradient_tol = 1e-10;
    double mu_initial = 1e-3;
    double mu_max = 1e10;
    std::uint64_t seed = 20210301;
};

struct TrainReport {
    int epochs = 0;
    double mse = 0.0;              // normalised units
    std::vector<double> accepted_losses;
    std::string stop_reason;
};

struct TrainResult {
    AllocNet net;
    TrainReport report;
};

/// Fits the normalisation ranges to the samples.
inline AllocNet initial_net(std::span<const AllocSample> data, int hidden, std::uint64_t seed) {
    AllocNet net = AllocNet::zeros(hidden);
    auto range_of = [&](auto member) {
        double lo = data[0].*member, hi = data[0].*member;
        for (const auto& s : data) {
            lo = std::min(lo, s.*member);
            hi = std::max(hi, s.*member);
        }
        if (hi == lo) hi = lo + 1.0;
        return AffineRange{lo, hi};
    };
    net.input_range = {range_of(&AllocSample::thrust), range_of(&AllocSample::torque), range_of(&AllocSample::pitch)};
    net.output_range = range_of(&AllocSample::omega);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    Eigen::VectorXd p(net.parameter_count());
    for (int j = 0; j < p.size(); ++j) p[j] = u(rng);
    net.set_parameters(p);
    return net;
}

namespace nn_detail {

struct Batch {
    Eigen::MatrixXd x;  // n x 3, normalised
    Eigen::VectorXd t;  // n, normalised targets
};

inline Batch make_batch(const AllocNet& net, std::span<const AllocSample> data) {
    Batch b{Eigen::MatrixXd(data.size(), 3), Eigen::VectorXd(data.size())};
    for (std::size_t r = 0; r < data.size(); ++r) {
        b.x.row(r) = normalise(net, {data[r].thrust, data[r].torque, data[r].pitch}).transpose();
        b.t[r] = net.output_range.to_unit(data[r].omega);
    }
    return b;
}

inline Eigen::VectorXd residuals(const AllocNet& net, const Batch& b) {
    Eigen::VectorXd e(b.t.size());
    for (Eigen::Index r = 0; r < e.size(); ++r) e[r] = evaluate_unit(net, b.x.row(r).transpose()) - b.t[r];
    return e;
}

inline Eigen::MatrixXd jacobian(const AllocNet& net, const Batch& b) {
    Eigen::MatrixXd J(b.t.size(), net.parameter_count());
    Eigen::VectorXd g(net.parameter_count());
    for (Eigen::Index r = 0; r < J.rows(); ++r) {
        gradient_unit(net, b.x.row(r).transpose(), g);
        J.row(r) = g.transpose();
    }
    return J;
}

}  // namespace nn_detail

/// Jacobian of the normalised outputs over the samples with respect to the
/// packed parameters (rows follow sample order).
inline Eigen::MatrixXd output_jacobian(const AllocNet& net, std::span<const AllocSample> data) {
    return nn_detail::jacobian(net, nn_detail::make_batch(net, data));
}

/// Levenberg-Marquardt on the mean squared error in normalised units, starting
/// from the given net.
inline TrainResult train_from(AllocNet net, std::span<const AllocSample> data, const TrainOptions& opt) {
    if (data.size() < static_cast<std::size_t>(20 * net.parameter_count()))
        throw DatasetError("dataset needs at least 20 samples per parameter");
    const auto batch = nn_detail::make_batch(net, data);
    const double n = static_cast<double>(data.size());
    TrainReport rep;
    Eigen::VectorXd p = net.parameters();
    Eigen::VectorXd e = nn_detail::residuals(net, batch);
    double loss = e.squaredNorm() / n;
    rep.accepted_losses.push_back(loss);
    double mu = opt.mu_initial;
    rep.stop_reason = "max_epochs";
    for (rep.epochs = 0; rep.epochs < opt.max_epochs; ++rep.epochs) {
        if (loss <= opt.target_mse) {
            rep.stop_reason = "target_mse";
            break;
        }
        const Eigen::MatrixXd J = nn_detail::jacobian(net, batch);
        const Eigen::VectorXd grad = J.transpose() * e;
        if (grad.norm() / n < opt.gradient_tol) {
            rep.stop_reason = "gradient";
            break;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        bool accepted = false;
        while (mu <= opt.mu_max) {
            Eigen::MatrixXd A = JtJ;
            A.diagonal().array() += mu;
            const Eigen::VectorXd step = A.ldlt().solve(-grad);
            AllocNet trial = net;
            trial.set_parameters(p + step);
            const Eigen::VectorXd e_trial = nn_detail::residuals(trial, batch);
            const double trial_loss = e_trial.squaredNorm() / n;
            if (std::isfinite(trial_loss) && trial_loss < loss) {
                net = std::move(trial);
                p = net.parameters();
                e = e_trial;
                loss = trial_loss;
                rep.accepted_losses.push_back(loss);
                mu *= 0.1;
                accepted = true;
                break;
            }
            mu *= 10.0;
        }
        if (!accepted) {
            rep.stop_reason = "mu_max";
            break;
        }
    }
    rep.mse = loss;
    return {std::move(net), std::move(rep)};
}

inline TrainResult train(std::span<const AllocSample> data, int hidden_count, const TrainOptions& opt = {}) {
    return train_from(initial_net(data, hidden_count, opt.seed), data, opt);
}

/// RMS speed error in rad/s.
inline double rms_error(const AllocNet& net, std::span<const AllocSample> data) {
    double s = 0.0;
    for (const auto& d : data) {
        const double e = forward(net, {d.thrust, d.torque, d.pitch}).omega - d.omega;
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(data.size()));
}

inline double mean_omega(std::span<const AllocSample> data) {
    double s = 0.0;
    for (const auto& d : data) s += d.omega;
    return s / static_cast<double>(data.size());
}

struct Split {
    std::vector<AllocSample> train;
    std::vector<AllocSample> validation;
};

/// Seeded shuffle, then the first 80% train and the rest validate.
inline Split split_dataset(std::span<const AllocSample> data, std::uint64_t seed, double train_fraction = 0.8) {
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(idx[i - 1], idx[pick(rng)]);
    }
    const auto n_train = static_cast<std::size_t>(std::round(train_fraction * data.size()));
    Split s;
    for (std::size_t i = 0; i < idx.size(); ++i) (i < n_train ? s.train : s.validation).push_back(data[idx[i]]);
    return s;
}

struct HiddenCountCandidate {
    int hidden_count;
    double validation_rmse;  // rad/s
    TrainReport report;
};

struct HiddenCountSelection {
    int hidden_count = 0;
    std::vector<HiddenCountCandidate> candidates;
};

/// Trains every candidate on an 80/20 split and keeps the smallest one whose
/// validation RMSE is within 5% of the best.
inline HiddenCountSelection select_hidden_count(std::span<const AllocSample> data, std::span<const int> candidates,
                                                const TrainOptions& opt = {}) {
    HiddenCountSelection sel;
    if (candidates.size() == 1) {
        sel.hidden_count = candidates.front();
        return sel;
    }
    const auto split = split_dataset(data, opt.seed);
    double best = std::numeric_limits<double>::infinity();
    for (int nh : candidates) {
        auto res = train(split.train, nh, opt);
        const double rmse = rms_error(res.net, split.validation);
        sel.candidates.push_back({nh, rmse, std::move(res.report)});
        best = std::min(best, rmse);
    }
    auto sorted = sel.candidates;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.hidden_count < b.hidden_count; });
    for (const auto& c : sorted) {
        if (c.validation_rmse <= 1.05 * best) {
            sel.hidden_count = c.hidden_count;
            break;
        }
    }
    return sel;
}

// Serialization: a versioned text header followed by one row per hidden unit
// holding w1 (three inputs), the bias and w2. Values are written with 17
// significant digits so a round trip is bit-exact.

inline void save_net(std::ostream& out, const AllocNet& net) {
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "heliquad-allocnet " << AllocNet::k_format_version << '\n';
    out << "hidden " << net.hidden_count << '\n';
    out << "input_lo " << num(net.input_range[0].lo) << ' ' << num(net.input_range[1].lo) << ' '
        << num(net.input_range[2].lo) << '\n';
    out << "input_hi " << num(net.input_range[0].hi) << ' ' << num(net.input_range[1].hi) << ' '
        << num(net.input_range[2].hi) << '\n';
    out << "output " << num(net.output_range.lo) << ' ' << num(net.output_range.hi) << '\n';
    out << "# w1_thrust w1_torque w1_pitch bias w2\n";
    for (int k = 0; k < net.hidden_count; ++k) {
        out << num(net.input_weights(k, 0)) << ' ' << num(net.input_weights(k, 1)) << ' '
            << num(net.input_weights(k, 2)) << ' ' << num(net.hidden_biases[k]) << ' ' << num(net.output_weights[k])
            << '\n';
    }
}

inline AllocNet load_net(std::istream& in) {
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        lines.push_back(line);
    }
    auto fields = [](const std::string& line) {
        std::vector<std::string> out;
        std::istringstream ss(line);
        for (std::string tok; ss >> tok;) out.push_back(tok);
        return out;
    };
    auto number = [](const std::string& tok) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || ptr != tok.data() + tok.size()) throw ParseError("bad number '" + tok + "' in net");
        return v;
    };
    auto expect = [&](std::size_t i, const std::string& key, std::size_t count) {
        if (i >= lines.size()) throw ParseError("net file truncated before '" + key + "'");
        auto f = fields(lines[i]);
        if (f.size() != count + 1 || f[0] != key) throw ParseError("net file: expected '" + key + "'");
        return f;
    };
    auto header = expect(0, "heliquad-allocnet", 1);
    if (header[1] != std::to_string(AllocNet::k_format_version))
        throw ParseError("unsupported net format version " + header[1]);
    const int nh = static_cast<int>(number(expect(1, "hidden", 1)[1]));
    if (nh <= 0) throw ParseError("net hidden count must be positive");
    AllocNet net = AllocNet::zeros(nh);
    auto lo = expect(2, "input_lo", 3);
    auto hi = expect(3, "input_hi", 3);
    for (int i = 0; i < 3; ++i) net.input_range[i] = {number(lo[i + 1]), number(hi[i + 1])};
    auto o = expect(4, "output", 2);
    net.output_range = {number(o[1]), number(o[2])};
    if (lines.size() != static_cast<std::size_t>(5 + nh)) throw ParseError("net file has wrong number of rows");
    for (int k = 0; k < nh; ++k) {
        auto f = fields(lines[5 + k]);
        if (f.size() != 5) throw ParseError("net row " + std::to_string(k) + " needs 5 values");
        for (int i = 0; i < 3; ++i) net.input_weights(k, i) = number(f[i]);
        net.hidden_biases[k] = number(f[3]);
        net.output_weights[k] = number(f[4]);
    }
    if (!net.finite()) throw ValidationError("net has non-finite weights");
    return net;
}

inline void save_net_file(const std::filesystem::path& path, const AllocNet& net) {
    std::ofstream out(path);
    if (!out) throw NotFoundError("cannot write net file " + path.string());
    save_net(out, net);
}

inline AllocNet load_net_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open net file " + path.string());
    return load_net(in);
}

}  // namespace heliquad
