#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "heliquad/nn_alloc.hpp"

using namespace heliquad;

namespace {

const AirfoilPolar& cambered() {
    static const AirfoilPolar p = resolve_polar("cambered");
    return p;
}

const DatasetReport& dataset() {
    static const DatasetReport d = [] {
        const DatasetGrid grid;
        const auto p = grid.pitches();
        const auto w = grid.omegas();
        return generate_dataset(BladeGeometry{}, cambered(), p, w);
    }();
    return d;
}

AllocNet random_net(std::mt19937_64& rng, int hidden) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    AllocNet net = AllocNet::zeros(hidden);
    Eigen::VectorXd p(net.parameter_count());
    for (int j = 0; j < p.size(); ++j) p[j] = u(rng);
    net.set_parameters(p);
    net.input_range = {AffineRange{-1.0, 3.0}, AffineRange{0.0, 0.2}, AffineRange{-6.0, 14.0}};
    net.output_range = {200.0, 840.0};
    return net;
}

// Mean squared error in normalised units, written out independently.
double loss(const AllocNet& net, std::span<const AllocSample> data) {
    double s = 0.0;
    for (const auto& d : data) {
        const double y = net.output_range.to_unit(forward(net, {d.thrust, d.torque, d.pitch}).omega);
        const double t = net.output_range.to_unit(d.omega);
        s += (y - t) * (y - t);
    }
    return s / static_cast<double>(data.size());
}

}  // namespace

TEST(Dataset, CoversGridWithoutSkips) {
    const auto& d = dataset();
    EXPECT_EQ(d.skipped, 0u);
    EXPECT_EQ(d.samples.size(), 81u * 31u);
    for (const auto& s : d.samples) {
        EXPECT_GE(s.omega, rpm_to_rad_s(2000.0) - 1e-9);
        EXPECT_LE(s.omega, rpm_to_rad_s(8000.0) + 1e-9);
    }
}

TEST(Dataset, ZeroThrustRowHasTorque) {
    const BladeGeometry g;
    const double p0 = zero_thrust_pitch(g, cambered(), k_reference_omega, false);
    const std::vector<double> pitches{p0};
    const std::vector<double> omegas{rpm_to_rad_s(3000.0), rpm_to_rad_s(6000.0)};
    const auto d = generate_dataset(g, cambered(), pitches, omegas);
    for (const auto& s : d.samples) {
        EXPECT_LT(std::abs(s.thrust), 1e-2);
        EXPECT_GT(s.torque, 0.0);
    }
}

TEST(Dataset, TipLossFreeThrustIsHigher) {
    const BladeGeometry g;
    for (const auto& s : dataset().samples) {
        if (s.pitch < 4.0 - 1e-9 || std::lround(rad_s_to_rpm(s.omega)) != 5000) continue;
        const double on = rotor_performance(g, cambered(), {s.pitch, s.omega}, true).thrust;
        const double delta = (s.thrust - on) / s.thrust;
        EXPECT_GE(delta, 0.03) << s.pitch;
        EXPECT_LE(delta, 0.12) << s.pitch;
    }
}

TEST(Dataset, TooManySkippedCells) {
    const std::vector<double> pitches{60.0, 10.0};
    const std::vector<double> omegas{500.0};
    EXPECT_THROW(generate_dataset(BladeGeometry{}, cambered(), pitches, omegas), DatasetError);
}

TEST(Forward, ZeroWeightsGiveRangeMidpoint) {
    AllocNet net = AllocNet::zeros(6);
    net.output_range = {100.0, 900.0};
    EXPECT_EQ(forward(net, {1.0, 0.05, 4.0}).omega, 500.0);
}

TEST(Forward, ClampsBeyondPaddedBox) {
    std::mt19937_64 rng(1);
    const auto net = random_net(rng, 5);
    const auto inside = forward(net, {3.0 + 0.1 * 4.0 / 2.0 - 1e-9, 0.1, 4.0});
    EXPECT_FALSE(inside.clamped);
    const auto far = forward(net, {100.0, 0.1, 4.0});
    const auto edge = forward(net, {3.0 + 0.1 * 4.0 / 2.0, 0.1, 4.0});
    EXPECT_TRUE(far.clamped);
    EXPECT_DOUBLE_EQ(far.omega, edge.omega);
}

TEST(Forward, LipschitzBoundHolds) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const auto net = random_net(rng, 8);
        const double L = lipschitz_bound(net);
        ASSERT_TRUE(std::isfinite(L));
        for (int j = 0; j < 50; ++j) {
            const Eigen::Vector3d a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
            const double df = std::abs(nn_detail::evaluate_unit(net, a) - nn_detail::evaluate_unit(net, b));
            EXPECT_LE(df, L * (a - b).lpNorm<Eigen::Infinity>() + 1e-12);
        }
    }
}

TEST(Training, JacobianMatchesFiniteDifferences) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const int hidden = 1 + i % 12;
        const auto net = random_net(rng, hidden);
        const Eigen::Vector3d x(u(rng), u(rng), u(rng));
        Eigen::VectorXd g(net.parameter_count());
        nn_detail::gradient_unit(net, x, g);
        Eigen::VectorXd fd(net.parameter_count());
        const Eigen::VectorXd p = net.parameters();
        const double h = 1e-6;
        for (int j = 0; j < p.size(); ++j) {
            AllocNet a = net, b = net;
            Eigen::VectorXd pa = p, pb = p;
            pa[j] += h;
            pb[j] -= h;
            a.set_parameters(pa);
            b.set_parameters(pb);
            fd[j] = (nn_detail::evaluate_unit(a, x) - nn_detail::evaluate_unit(b, x)) / (2.0 * h);
        }
        EXPECT_LT((g - fd).norm() / g.norm(), 1e-6) << i;
    }
}

TEST(Training, ParameterPackingRoundTrip) {
    std::mt19937_64 rng(4);
    const auto net = random_net(rng, 7);
    AllocNet copy = AllocNet::zeros(7);
    copy.set_parameters(net.parameters());
    EXPECT_EQ(copy.input_weights, net.input_weights);
    EXPECT_EQ(copy.hidden_biases, net.hidden_biases);
    EXPECT_EQ(copy.output_weights, net.output_weights);
    EXPECT_EQ(net.parameters()[1], net.input_weights(0, 1));
}

TEST(Training, LinearTargetWithOneUnit) {
    std::vector<AllocSample> data;
    for (double t : linspace(0.0, 2.0, 8))
        for (double q : linspace(0.0, 0.1, 8))
            for (double p : linspace(-4.0, 12.0, 8)) data.push_back({t, q, p, 300.0 + 40.0 * t + 900.0 * q + 5.0 * p});
    TrainOptions opt;
    opt.max_epochs = 2000;
    opt.target_mse = 1e-9;
    const auto res = train(data, 1, opt);
    EXPECT_LT(res.report.mse, 1e-8);
    EXPECT_NEAR(loss(res.net, data), res.report.mse, 1e-12);
}

TEST(Training, AcceptedLossesNonIncreasing) {
    TrainOptions opt;
    opt.max_epochs = 60;
    const auto res = train(dataset().samples, 6, opt);
    ASSERT_GT(res.report.accepted_losses.size(), 2u);
    for (std::size_t i = 1; i < res.report.accepted_losses.size(); ++i)
        EXPECT_LE(res.report.accepted_losses[i], res.report.accepted_losses[i - 1]);
    EXPECT_NEAR(loss(res.net, dataset().samples), res.report.mse, 1e-12);
}

TEST(Training, LevenbergMarquardtBeatsGradientDescent) {
    const auto& data = dataset().samples;
    TrainOptions opt;
    opt.max_epochs = 30;
    const auto lm = train(data, 4, opt);
    const double goal = lm.report.mse;

    // Plain full-batch gradient descent from the same start, best of several
    // fixed step sizes.
    const AllocNet start = initial_net(data, 4, opt.seed);
    const auto batch = nn_detail::make_batch(start, data);
    const double n = static_cast<double>(data.size());
    const int budget = 3000;
    int best_epochs = budget + 1;
    for (double eta : {0.01, 0.03, 0.1, 0.3, 1.0}) {
        AllocNet net = start;
        Eigen::VectorXd p = net.parameters();
        for (int epoch = 1; epoch <= budget; ++epoch) {
            const Eigen::VectorXd e = nn_detail::residuals(net, batch);
            const Eigen::VectorXd grad = 2.0 / n * (nn_detail::jacobian(net, batch).transpose() * e);
            p -= eta * grad;
            net.set_parameters(p);
            const double l = nn_detail::residuals(net, batch).squaredNorm() / n;
            if (!std::isfinite(l)) break;
            if (l <= goal) {
                best_epochs = std::min(best_epochs, epoch);
                break;
            }
        }
    }
    EXPECT_GT(best_epochs, lm.report.epochs);
}

TEST(Training, TooFewSamples) {
    const std::vector<AllocSample> tiny(dataset().samples.begin(), dataset().samples.begin() + 50);
    EXPECT_THROW(train(tiny, 4), DatasetError);
}

TEST(Training, HeldOutAccuracy) {
    const auto split = split_dataset(dataset().samples, 20210301);
    EXPECT_EQ(split.train.size() + split.validation.size(), dataset().samples.size());
    EXPECT_EQ(split.validation.size(), static_cast<std::size_t>(std::lround(0.2 * dataset().samples.size())));
    const auto res = train(split.train, 8);
    EXPECT_LT(rms_error(res.net, split.validation) / mean_omega(split.validation), 0.02);
}

TEST(Selection, SingleCandidateUnchanged) {
    const std::vector<int> one{7};
    EXPECT_EQ(select_hidden_count(dataset().samples, one).hidden_count, 7);
}

TEST(Selection, RuleAndDeterminism) {
    const std::vector<int> candidates{2, 4, 6};
    TrainOptions opt;
    opt.max_epochs = 80;
    const auto a = select_hidden_count(dataset().samples, candidates, opt);
    const auto b = select_hidden_count(dataset().samples, candidates, opt);
    EXPECT_EQ(a.hidden_count, b.hidden_count);
    ASSERT_EQ(a.candidates.size(), 3u);
    double best = 1e300;
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(a.candidates[i].validation_rmse, b.candidates[i].validation_rmse);
        best = std::min(best, a.candidates[i].validation_rmse);
    }
    int expected = 0;
    for (const auto& c : a.candidates)
        if (c.validation_rmse <= 1.05 * best) {
            expected = c.hidden_count;
            break;
        }
    EXPECT_EQ(a.hidden_count, expected);
}

TEST(Serialization, BitExactRoundTrip) {
    std::mt19937_64 rng(5);
    const auto net = random_net(rng, 9);
    std::stringstream ss;
    save_net(ss, net);
    const auto back = load_net(ss);
    EXPECT_EQ(back.hidden_count, 9);
    EXPECT_EQ(back.parameters(), net.parameters());
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(back.input_range[i].lo, net.input_range[i].lo);
        EXPECT_EQ(back.input_range[i].hi, net.input_range[i].hi);
    }
    EXPECT_EQ(back.output_range.lo, net.output_range.lo);
    EXPECT_EQ(back.output_range.hi, net.output_range.hi);
    std::stringstream again;
    save_net(again, back);
    std::stringstream first;
    save_net(first, net);
    EXPECT_EQ(again.str(), first.str());
}

TEST(Serialization, RejectsMalformed) {
    std::mt19937_64 rng(6);
    std::stringstream ss;
    save_net(ss, random_net(rng, 3));
    const std::string good = ss.str();

    auto load = [](const std::string& s) {
        std::istringstream in(s);
        return load_net(in);
    };
    std::string wrong_version = good;
    wrong_version.replace(wrong_version.find(" 1\n"), 3, " 2\n");
    EXPECT_THROW(load(wrong_version), ParseError);
    EXPECT_THROW(load(good.substr(0, good.rfind('\n', good.size() - 2) + 1)), ParseError);
    EXPECT_THROW(load("garbage\n"), ParseError);
    std::string bad_number = good;
    bad_number.replace(bad_number.find("hidden 3"), 8, "hidden x");
    EXPECT_THROW(load(bad_number), ParseError);
    EXPECT_THROW(load_net_file("/nonexistent/net.txt"), NotFoundError);
}

TEST(BundledNet, AccurateOnGridAndAtEquilibrium) {
    const auto net = load_net_file(std::string(HELIQUAD_DATA_DIR) + "/alloc_net.txt");
    EXPECT_TRUE(net.finite());
    const auto& data = dataset().samples;
    EXPECT_LT(rms_error(net, data) / mean_omega(data), 0.02);
    const double rpm = rad_s_to_rpm(forward(net, {0.0, 0.12, -1.8}).omega);
    EXPECT_NEAR(rpm, 6620.0, 0.15 * 6620.0);
}
