#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "narid/pipeline.hpp"
#include "narid/report.hpp"
#include "narid/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

narid::SyntheticSeries preset_series(std::uint64_t seed, std::size_t n) {
    auto spec = narid::preset_spec();
    spec.seed = seed;
    spec.samples = n;
    return narid::generate_synthetic(spec);
}

narid::PipelineConfig quick_config() {
    narid::PipelineConfig cfg;
    cfg.neural = false;
    cfg.radius = 1e-3;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST(Synthetic, FollowsTheDefiningRecursion) {
    const auto spec = narid::preset_spec();
    const auto s = preset_series(3, 500);
    const auto& y = s.y;
    ASSERT_EQ(y.size(), 500u);
    for (std::size_t k = 4; k < y.size(); ++k) {
        const double model = 0.591 * y[k - 1] - 0.677 * y[k - 4] - 0.057 * y[k - 4] * y[k - 3] -
                             0.08 * y[k - 4] * y[k - 4] * y[k - 4] * y[k - 1];
        EXPECT_NEAR(y[k] - model, s.noise[k], 1e-12);
    }
    EXPECT_EQ(spec.terms.size(), 4u);
}

TEST(Synthetic, DeterministicAndSeedSensitive) {
    const auto a = preset_series(10, 300);
    const auto b = preset_series(10, 300);
    const auto c = preset_series(11, 300);
    EXPECT_TRUE(std::equal(a.y.begin(), a.y.end(), b.y.begin()));
    EXPECT_FALSE(std::equal(a.y.begin(), a.y.end(), c.y.begin()));
}

TEST(Synthetic, NoiselessSystemRestsAtZero) {
    auto spec = narid::preset_spec();
    spec.sigma = 0.0;
    spec.samples = 100;
    const auto s = narid::generate_synthetic(spec);
    for (double v : s.y) EXPECT_EQ(v, 0.0);
}

TEST(Synthetic, BoundedAcrossSeedsWithTwentyDecibelSnr) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto s = preset_series(seed, 2000);
        for (double v : s.y) ASSERT_LT(std::abs(v), 10.0) << seed;
        EXPECT_GT(s.snr_db, 17.0);
        EXPECT_LT(s.snr_db, 23.0);
    }
}

TEST(Synthetic, TruthFileRoundTrip) {
    auto spec = narid::preset_spec();
    spec.seed = 99;
    const auto s = narid::generate_synthetic(spec);
    const auto path = fs::temp_directory_path() / "narid_truth.json";
    narid::write_truth_json(path, spec, s);
    const auto back = narid::read_truth_json(path);
    EXPECT_EQ(back.terms, spec.terms);
    EXPECT_EQ(back.theta, spec.theta);
    EXPECT_EQ(back.sigma, spec.sigma);
    EXPECT_EQ(back.seed, spec.seed);
    fs::remove(path);
}

TEST(Pipeline, RecoversPresetStructure) {
    const auto s = preset_series(1, 2000);
    const auto r = narid::run_pipeline(s.y, quick_config());
    ASSERT_TRUE(r.model);
    ASSERT_TRUE(r.ranking);
    EXPECT_EQ(r.candidate_count, 70u);
    EXPECT_EQ(r.decimation->factor, 1u);
    std::set<std::string> top, truth;
    for (std::size_t i = 0; i < 4; ++i) top.insert(r.ranking->steps[i].term.to_string());
    for (const auto& t : narid::preset_spec().terms) truth.insert(t.to_string());
    EXPECT_EQ(top, truth);
    EXPECT_GE(r.model->selected_size, 4u);
    ASSERT_EQ(r.horizons.size(), 2u);
    EXPECT_EQ(r.horizons[0].horizon, 1u);
    EXPECT_EQ(r.horizons[1].horizon, 2u);
    EXPECT_LT(r.horizons[0].rmse, 0.5);
    EXPECT_NO_THROW(narid::check_containment(r));
    EXPECT_TRUE(r.failed_stage.empty());
}

TEST(Pipeline, StagesRunInDocumentedOrder) {
    const auto s = preset_series(2, 800);
    auto cfg = quick_config();
    cfg.neural = true;
    cfg.hidden_min = 2;
    cfg.hidden_max = 3;
    cfg.max_epochs = 10;
    const auto r = narid::run_pipeline(s.y, cfg);
    std::vector<std::string> names;
    for (const auto& st : r.stages) names.push_back(st.name);
    const std::vector<std::string> expected{"split", "autocovariance", "decimation", "candidates", "err_ranking",
                                            "aic", "prediction", "residuals", "rmse", "interval_data",
                                            "interval_least_squares", "interval_prediction", "neural",
                                            "interval_rmse"};
    EXPECT_EQ(names, expected);
    ASSERT_TRUE(r.neural);
    EXPECT_EQ(r.neural->table.size(), 2u);
}

TEST(Pipeline, ZeroRadiusCollapsesIntervals) {
    const auto s = preset_series(4, 1000);
    auto cfg = quick_config();
    cfg.radius = 0.0;
    const auto r = narid::run_pipeline(s.y, cfg);
    const auto& m = *r.model;
    for (std::size_t i = 0; i < m.theta.size(); ++i) {
        EXPECT_LE((*m.theta_interval)[i].width(), 1e-8 * std::max(1.0, std::abs(m.theta[i])));
    }
    for (const auto& h : r.horizons) {
        for (std::size_t i = 0; i < h.point.values.size(); ++i) {
            EXPECT_NEAR(h.interval.values[i].mid(), h.point.values[i], 1e-8);
        }
        EXPECT_NEAR(h.rmse_interval.mid(), h.rmse, 1e-8);
    }
}

TEST(Pipeline, TooShortSeriesFailsAtSplit) {
    const narid::Signal y(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    try {
        (void)narid::run_pipeline(y, quick_config());
        FAIL() << "expected PipelineError";
    } catch (const narid::PipelineError& e) {
        EXPECT_EQ(e.stage(), "split");
        EXPECT_NE(std::string(e.what()).find("too few samples"), std::string::npos);
    }
}

TEST(Pipeline, ConfigValidationNamesField) {
    auto cfg = quick_config();
    cfg.split = 1.5;
    try {
        cfg.validate();
        FAIL() << "expected invalid_argument";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("split"), std::string::npos);
    }
    cfg = quick_config();
    cfg.neural = true;
    cfg.hidden_min = 5;
    cfg.hidden_max = 4;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Pipeline, MissingInputFailsAtLoad) {
    auto cfg = quick_config();
    cfg.input = fs::temp_directory_path() / "narid_definitely_missing.csv";
    try {
        (void)narid::run_pipeline(cfg);
        FAIL() << "expected PipelineError";
    } catch (const narid::PipelineError& e) {
        EXPECT_EQ(e.stage(), "load");
    }
}

TEST(Artifacts, IdenticalInputsGiveIdenticalFiles) {
    const auto s = preset_series(5, 700);
    auto cfg = quick_config();
    cfg.neural = true;
    cfg.hidden_min = 2;
    cfg.hidden_max = 3;
    cfg.max_epochs = 15;
    const auto a = fresh_dir("narid_artifacts_a");
    const auto b = fresh_dir("narid_artifacts_b");
    cfg.output = a;
    (void)narid::run_pipeline(s.y, cfg);
    cfg.output = b;
    (void)narid::run_pipeline(s.y, cfg);

    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        const auto name = entry.path().filename();
        if (name == "timing.json") continue;
        ASSERT_TRUE(fs::exists(b / name)) << name;
        EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << name;
        ++compared;
    }
    EXPECT_GE(compared, 8u);
    EXPECT_FALSE(fs::exists(a / "FAILED"));

    const auto ja = nlohmann::json::parse(slurp(a / "report.json"));
    EXPECT_EQ(ja["schema_version"], narid::kReportSchemaVersion);
    EXPECT_EQ(ja["status"], "ok");
    EXPECT_EQ(ja["steps"].size(), 14u);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Artifacts, FailureLeavesMarkerAndPartialReport) {
    // Constant data pass the early steps and fail once residuals have no variance.
    const narid::Signal y(std::vector<double>(400, 1.0));
    auto cfg = quick_config();
    const auto dir = fresh_dir("narid_artifacts_fail");
    cfg.output = dir;
    std::string stage;
    try {
        (void)narid::run_pipeline(y, cfg);
    } catch (const narid::PipelineError& e) {
        stage = e.stage();
    }
    ASSERT_FALSE(stage.empty());
    EXPECT_TRUE(fs::exists(dir / "FAILED"));
    const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
    EXPECT_EQ(j["status"], "FAILED");
    EXPECT_EQ(j["failed_stage"], stage);

    // A later successful run into the same directory clears the marker.
    cfg.output = dir;
    (void)narid::run_pipeline(preset_series(6, 600).y, cfg);
    EXPECT_FALSE(fs::exists(dir / "FAILED"));
    fs::remove_all(dir);
}

TEST(Report, ContainmentViolationIsDetected) {
    const auto s = preset_series(7, 600);
    auto r = narid::run_pipeline(s.y, quick_config());
    (*r.model->theta_interval)[0] = narid::Interval(r.model->theta[0] + 1.0, r.model->theta[0] + 2.0);
    EXPECT_THROW(narid::check_containment(r), std::logic_error);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
    const auto dir = fresh_dir("narid_cli_test");
    fs::create_directories(dir);
    const std::string exe = NARID_CLI_PATH;
    const auto data = dir / "data";
    ASSERT_EQ(std::system((exe + " synth -n 600 --seed 2 -o " + data.string() + " > /dev/null").c_str()), 0);
    {
        std::ofstream cfg(dir / "run.ini");
        cfg << "[run]\ndegree=2\nmax-lag=3\nneural=false\nradius=0.001\n";
    }
    const auto out = dir / "out";
    const std::string cmd = exe + " run --config " + (dir / "run.ini").string() + " -i " +
                            (data / "signal.csv").string() + " -o " + out.string() + " --max-lag 2 > /dev/null";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    const auto j = nlohmann::json::parse(slurp(out / "report.json"));
    EXPECT_EQ(j["config"]["degree"], 2);
    EXPECT_EQ(j["config"]["max_lag"], 2);
    EXPECT_EQ(j["config"]["neural"], false);
    EXPECT_EQ(j["candidate_count"], 6);

    // A flat key=value file without a section header is read the same way.
    {
        std::ofstream cfg(dir / "flat.ini");
        cfg << "degree=2\nmax-lag=3\nneural=false\n";
    }
    const auto flat = dir / "flat";
    ASSERT_EQ(std::system((exe + " run --config " + (dir / "flat.ini").string() + " -i " + (data / "signal.csv").string() +
                           " -o " + flat.string() + " > /dev/null")
                              .c_str()),
              0);
    EXPECT_EQ(nlohmann::json::parse(slurp(flat / "report.json"))["candidate_count"], 10);

    const std::string bad = exe + " run -i " + (dir / "nothing.csv").string() + " > /dev/null 2>&1";
    EXPECT_NE(std::system(bad.c_str()), 0);
    fs::remove_all(dir);
}
