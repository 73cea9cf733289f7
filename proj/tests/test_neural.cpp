#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "narid/neural.hpp"

using narid::MinMaxMap;
using narid::MlpNarModel;

namespace {

MlpNarModel random_net(std::mt19937_64& rng, std::size_t delays, std::size_t hidden, double spread = 1.0) {
    std::uniform_real_distribution<double> u(-spread, spread);
    MlpNarModel m(delays, hidden);
    Eigen::VectorXd p(static_cast<Eigen::Index>(m.parameter_count()));
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = u(rng);
    m.set_parameters(p);
    return m;
}

narid::PairSet random_pairs(std::mt19937_64& rng, std::size_t rows, std::size_t delays) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    narid::PairSet s{Eigen::MatrixXd(rows, delays), Eigen::VectorXd(rows)};
    for (Eigen::Index i = 0; i < s.inputs.size(); ++i) s.inputs.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < s.targets.size(); ++i) s.targets(i) = u(rng);
    return s;
}

std::vector<double> ar1(std::uint64_t seed, std::size_t n, double phi) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> y(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) y[k] = phi * y[k - 1] + g(rng);
    return y;
}

}  // namespace

TEST(MinMax, RoundTripAndRange) {
    const std::vector<double> v{-3.0, 0.5, 7.0, 2.0};
    const auto s = MinMaxMap::fit(v);
    EXPECT_DOUBLE_EQ(s.normalize(-3.0), -1.0);
    EXPECT_DOUBLE_EQ(s.normalize(7.0), 1.0);
    for (double x : {-3.0, 0.5, 7.0, 2.0, 123.456, -1e-3}) EXPECT_NEAR(s.denormalize(s.normalize(x)), x, 1e-12 * std::max(1.0, std::abs(x)));
}

TEST(MinMax, ConstantSeriesShifts) {
    const auto s = MinMaxMap::fit(std::vector<double>(10, 4.0));
    EXPECT_TRUE(std::isfinite(s.normalize(4.0)));
    EXPECT_DOUBLE_EQ(s.denormalize(s.normalize(4.0)), 4.0);
    EXPECT_DOUBLE_EQ(s.denormalize(s.normalize(5.5)), 5.5);
}

TEST(Mlp, ParameterPackingRoundTrip) {
    std::mt19937_64 rng(1);
    const auto m = random_net(rng, 5, 4);
    EXPECT_EQ(m.parameter_count(), 5u * 4u + 2u * 4u + 1u);
    MlpNarModel copy(5, 4);
    copy.set_parameters(m.parameters());
    EXPECT_EQ(copy.w1, m.w1);
    EXPECT_EQ(copy.b2, m.b2);
    // W1 row-major comes first.
    EXPECT_EQ(m.parameters()(1), m.w1(0, 1));
    Eigen::VectorXd bad = m.parameters();
    bad(3) = std::nan("");
    EXPECT_THROW(copy.set_parameters(bad), std::invalid_argument);
    EXPECT_THROW(copy.set_parameters(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST(Mlp, ForwardMatchesExplicitSum) {
    std::mt19937_64 rng(2);
    const auto m = random_net(rng, 3, 2);
    const Eigen::Vector3d x(0.2, -0.7, 0.4);
    double expected = m.b2;
    for (int j = 0; j < 2; ++j) {
        double z = m.b1(j);
        for (int i = 0; i < 3; ++i) z += m.w1(j, i) * x(i);
        expected += m.w2(j) * std::tanh(z);
    }
    EXPECT_NEAR(m.forward(x), expected, 1e-15);
}

TEST(Mlp, JacobianMatchesCentralDifferences) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        auto m = random_net(rng, 5, 3);
        const auto data = random_pairs(rng, 40, 5);
        const Eigen::MatrixXd j = narid::error_jacobian(m, data);
        ASSERT_EQ(j.rows(), 40);
        ASSERT_EQ(j.cols(), static_cast<Eigen::Index>(m.parameter_count()));
        const Eigen::VectorXd p = m.parameters();
        for (Eigen::Index c = 0; c < p.size(); ++c) {
            Eigen::VectorXd hi = p, lo = p;
            hi(c) += 1e-6;
            lo(c) -= 1e-6;
            m.set_parameters(hi);
            const Eigen::VectorXd eh = narid::network_errors(m, data);
            m.set_parameters(lo);
            const Eigen::VectorXd el = narid::network_errors(m, data);
            const Eigen::VectorXd fd = (eh - el) / 2e-6;
            EXPECT_LE((fd - j.col(c)).norm(), 1e-5 * std::max(1.0, fd.norm())) << "parameter " << c;
        }
        m.set_parameters(p);
    }
}

TEST(Lm, StepLimits) {
    std::mt19937_64 rng(4);
    const auto m = random_net(rng, 5, 3);
    const auto data = random_pairs(rng, 60, 5);
    const Eigen::MatrixXd j = narid::error_jacobian(m, data);
    const Eigen::VectorXd e = narid::network_errors(m, data);

    const Eigen::VectorXd g = -(j.transpose() * e);
    const Eigen::VectorXd big = narid::lm_step(j, e, 1e8);
    EXPECT_GT(big.dot(g) / (big.norm() * g.norm()), 0.999);
    EXPECT_NEAR(big.norm(), g.norm() / 1e8, 1e-3 * g.norm() / 1e8);

    // Small damping tends to the Gauss-Newton least-squares step.
    const Eigen::VectorXd gn = j.householderQr().solve(-e);
    const Eigen::VectorXd small = narid::lm_step(j, e, 1e-12);
    EXPECT_LE((small - gn).norm(), 1e-6 * gn.norm());
}

TEST(Lm, TrainingErrorNeverIncreasesWithoutValidation) {
    const auto y = ar1(5, 300, 0.7);
    const auto scale = MinMaxMap::fit(y);
    const auto pairs = narid::make_pairs(y, 5, scale);
    narid::LmOptions opts;
    opts.max_epochs = 40;
    const auto r = narid::train_lm_on_pairs(pairs, narid::PairSet{}, scale, 4, 11, opts);
    ASSERT_FALSE(r.report.train_mse.empty());
    for (std::size_t i = 1; i < r.report.train_mse.size(); ++i) {
        EXPECT_LE(r.report.train_mse[i], r.report.train_mse[i - 1]);
    }
    EXPECT_TRUE(r.report.val_mse.empty());
}

TEST(Lm, DeterministicForFixedSeed) {
    const auto y = ar1(6, 400, 0.8);
    const narid::Signal train(std::vector<double>(y.begin(), y.begin() + 250));
    const narid::Signal val(std::vector<double>(y.begin() + 250, y.end()));
    narid::LmOptions opts;
    opts.max_epochs = 30;
    const auto a = narid::train_lm(train, val, 4, 42, opts);
    const auto b = narid::train_lm(train, val, 4, 42, opts);
    EXPECT_EQ(a.report, b.report);
    EXPECT_EQ(a.model.parameters(), b.model.parameters());
    const auto c = narid::train_lm(train, val, 4, 43, opts);
    EXPECT_NE(a.model.parameters(), c.model.parameters());
}

TEST(Lm, LearnsAutoregressionBetterThanMean) {
    const auto y = ar1(7, 1000, 0.9);
    const narid::Signal train(std::vector<double>(y.begin(), y.begin() + 600));
    const narid::Signal val(std::vector<double>(y.begin() + 600, y.begin() + 800));
    const std::vector<double> test(y.begin() + 800, y.end());
    narid::LmOptions opts;
    opts.max_epochs = 200;
    const auto r = narid::train_lm(train, val, 3, 1, opts);
    const auto p = narid::predict_nn(r.model, test, narid::NnMode::one_step);
    const double ybar = narid::mean(train.samples());
    const double nrmse = narid::rmse(p.values, std::span<const double>(test).subspan(p.first_instant), ybar);
    // An ideal one-step predictor of this process reaches about sqrt(1 - 0.81) ~ 0.44.
    EXPECT_LT(nrmse, 0.6);
    EXPECT_LE(r.report.best_epoch, r.report.train_mse.size());
}

TEST(Lm, RejectsShortSeries) {
    const narid::Signal tiny(std::vector<double>(12, 1.0));
    const narid::Signal ok(ar1(8, 100, 0.5));
    EXPECT_THROW((void)narid::train_lm(tiny, ok, 3, 0), std::invalid_argument);
    EXPECT_THROW((void)narid::train_lm(ok, ok, 0, 0), std::invalid_argument);
}

TEST(PredictNn, OneStepReproducesTeacher) {
    std::mt19937_64 rng(9);
    const auto teacher_base = random_net(rng, 5, 4, 0.5);
    MlpNarModel teacher = teacher_base;
    teacher.scale = MinMaxMap(-2.0, 2.0);
    std::normal_distribution<double> g(0.0, 0.3);
    std::vector<double> y(5, 0.0), clean(5, 0.0);
    Eigen::VectorXd x(5);
    for (std::size_t k = 5; k < 200; ++k) {
        for (std::size_t j = 0; j < 5; ++j) x(static_cast<Eigen::Index>(j)) = teacher.scale.normalize(y[k - 1 - j]);
        const double out = teacher.scale.denormalize(teacher.forward(x));
        clean.push_back(out);
        y.push_back(out + g(rng));
    }
    const auto p = narid::predict_nn(teacher, y, narid::NnMode::one_step);
    ASSERT_EQ(p.first_instant, 5u);
    for (std::size_t i = 0; i < p.values.size(); ++i) EXPECT_NEAR(p.values[i], clean[5 + i], 1e-12);

    const auto f = narid::predict_nn(teacher, std::vector<double>(y.begin(), y.begin() + 30), narid::NnMode::free_run);
    EXPECT_EQ(f.horizon, 0u);
    EXPECT_EQ(f.values.size(), 25u);
    EXPECT_THROW((void)narid::predict_nn(teacher, std::vector<double>(5, 0.0), narid::NnMode::one_step),
                 std::invalid_argument);
}

TEST(PredictNn, ZeroWeightsGiveConstantMidpoint) {
    MlpNarModel m(5, 3);
    m.set_parameters(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.parameter_count())));
    m.scale = MinMaxMap(2.0, 6.0);
    const auto p = narid::predict_nn(m, ar1(10, 40, 0.5), narid::NnMode::one_step);
    for (double v : p.values) EXPECT_DOUBLE_EQ(v, 4.0);
}

TEST(Sweep, SingleSizeAndTable) {
    const narid::Signal y(ar1(11, 500, 0.8));
    narid::LmOptions opts;
    opts.max_epochs = 30;
    const auto s = narid::sweep_hidden(y, 3, 3, 5, opts);
    ASSERT_EQ(s.table.size(), 1u);
    EXPECT_EQ(s.best.hidden, 3u);
    EXPECT_EQ(s.table[0].validation_mse, s.best_report.best_mse);

    const auto wide = narid::sweep_hidden(y, 2, 4, 5, opts);
    ASSERT_EQ(wide.table.size(), 3u);
    for (const auto& row : wide.table) EXPECT_GE(row.validation_mse, wide.best_report.best_mse);
}

TEST(Persistence, SaveLoadRoundTrip) {
    std::mt19937_64 rng(12);
    MlpNarModel m = random_net(rng, 5, 6);
    m.scale = MinMaxMap(-0.37, 1.91);
    const auto path = std::filesystem::temp_directory_path() / "narid_test_network.mlp";
    narid::save_mlp(m, path);
    const MlpNarModel back = narid::load_mlp(path);
    EXPECT_EQ(back.parameters(), m.parameters());
    EXPECT_EQ(back.scale.min(), m.scale.min());
    EXPECT_EQ(back.scale.max(), m.scale.max());
    const auto y = ar1(13, 60, 0.3);
    EXPECT_EQ(narid::predict_nn(back, y, narid::NnMode::one_step).values,
              narid::predict_nn(m, y, narid::NnMode::one_step).values);

    {
        std::ofstream out(path);
        out << "narid-mlp 99\n";
    }
    EXPECT_THROW((void)narid::load_mlp(path), std::runtime_error);
    std::filesystem::remove(path);
}
