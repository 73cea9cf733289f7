#include "narid/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <utility>

#include "narid/report.hpp"
#include "narid/terms.hpp"

namespace narid {

namespace {

constexpr std::size_t kRecommendedSamples = 200;

template <typename F>
void run_stage(RunReport& r, int step, const std::string& name, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(name, e.what());
    }
    const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
    r.stages.push_back({step, name, elapsed.count()});
}

std::vector<std::size_t> horizons_for(const PipelineConfig& cfg) {
    std::vector<std::size_t> h{1};
    if (cfg.horizon != 1) h.push_back(cfg.horizon);
    return h;
}

void execute(RunReport& r, const Signal& y) {
    const PipelineConfig& cfg = r.config;
    r.samples = y.size();

    std::optional<Signal> id, val;
    run_stage(r, 1, "split", [&] {
        const std::size_t min_part = static_cast<std::size_t>(cfg.max_lag) + cfg.horizon + 10;
        auto parts = split(y, cfg.split, min_part);
        id.emplace(std::move(parts.first));
        val.emplace(std::move(parts.second));
    });

    DecimationSummary dec;
    run_stage(r, 2, "autocovariance", [&] {
        const std::size_t lags = std::min(cfg.autocov_lags, id->size() - 1);
        if (lags < cfg.autocov_lags) r.warnings.push_back("autocovariance lags clipped to " + std::to_string(lags));
        const DecimationAnalysis a = analyse_decimation(*id, lags);
        dec.linear = a.linear;
        dec.nonlinear = a.nonlinear;
        dec.linear_min = a.linear_min;
        dec.nonlinear_min = a.nonlinear_min;
        dec.tau_m = a.tau_m;
        dec.factor = a.factor;
        if (a.linear_min.fallback) r.warnings.push_back("linear autocovariance has no local minimum; using max lag");
        if (a.nonlinear_min.fallback) {
            r.warnings.push_back("nonlinear autocovariance has no local minimum; using max lag");
        }
    });

    run_stage(r, 3, "decimation", [&] {
        if (cfg.decimation != 0) {
            dec.factor = cfg.decimation;
            dec.overridden = true;
        }
        id.emplace(decimate(*id, dec.factor));
        val.emplace(decimate(*val, dec.factor));
        r.decimation = dec;
        r.identification_samples = id->size();
        r.validation_samples = val->size();
        if (id->size() < kRecommendedSamples) {
            r.warnings.push_back("only " + std::to_string(id->size()) + " identification samples after decimation");
        }
    });

    std::vector<Term> candidates;
    RegressorSet regs;
    run_stage(r, 4, "candidates", [&] {
        candidates = generate_candidates(cfg.degree, cfg.max_lag);
        r.candidate_count = candidates.size();
        regs = build_regressors(candidates, id->samples(), cfg.max_lag);
    });

    run_stage(r, 6, "err_ranking", [&] {
        r.ranking = err_rank(regs.psi, regs.target, candidates);
    });

    run_stage(r, 5, "aic", [&] {
        Model m = aic_select(*r.ranking, regs.psi, regs.target, cfg.max_lag, {cfg.aic_max_terms});
        r.warnings.insert(r.warnings.end(), m.warnings.begin(), m.warnings.end());
        r.model = std::move(m);
        r.ybar_id = mean(id->samples());
    });

    run_stage(r, 7, "prediction", [&] {
        for (std::size_t h : horizons_for(cfg)) {
            HorizonResult hr;
            hr.horizon = h;
            hr.point = predict_k_steps(*r.model, val->samples(), h);
            const auto s = val->samples().subspan(hr.point.first_instant);
            hr.measured.assign(s.begin(), s.end());
            r.horizons.push_back(std::move(hr));
        }
    });

    run_stage(r, 8, "residuals", [&] {
        const std::vector<double> res = model_residuals(*r.model, id->samples());
        r.residuals = residual_diagnostics(res, std::min(cfg.residual_lags, res.size() - 1));
        r.warnings.insert(r.warnings.end(), r.residuals->warnings.begin(), r.residuals->warnings.end());
    });

    run_stage(r, 9, "rmse", [&] {
        for (auto& hr : r.horizons) hr.rmse = rmse(hr.point.values, hr.measured, r.ybar_id);
    });

    IntervalVector id_int, val_int;
    run_stage(r, 10, "interval_data", [&] {
        id_int = to_interval_signal(id->samples(), cfg.radius);
        val_int = to_interval_signal(val->samples(), cfg.radius);
        r.ybar_id_interval = mean(std::span<const Interval>(id_int));
    });

    run_stage(r, 11, "interval_least_squares", [&] {
        const IntervalRegressorSet iregs = build_regressors(r.model->terms, id_int, cfg.max_lag);
        IntervalLsResult ls = interval_ls_solve(iregs.psi, iregs.target);
        r.interval_method = to_string(ls.method);
        if (ls.method == IntervalLsMethod::augmented) {
            r.warnings.push_back("interval normal equations could not be certified at this radius; "
                                 "enclosure verified on the augmented least-squares system");
        }
        r.model->theta_interval = std::move(ls.theta);
    });

    run_stage(r, 12, "interval_prediction", [&] {
        for (auto& hr : r.horizons) {
            hr.interval = predict_k_steps(*r.model, val_int, hr.horizon);
            hr.measured_interval.assign(val_int.begin() + static_cast<std::ptrdiff_t>(hr.interval.first_instant),
                                        val_int.end());
        }
    });

    if (cfg.neural) {
        run_stage(r, 13, "neural", [&] {
            LmOptions opts;
            opts.max_epochs = cfg.max_epochs;
            SweepResult sw = sweep_hidden(*id, cfg.hidden_min, cfg.hidden_max, cfg.seed, opts, cfg.delays);
            NeuralSummary ns;
            ns.hidden = sw.best.hidden;
            ns.validation_mse = sw.best_report.best_mse;
            ns.best_epoch = sw.best_report.best_epoch;
            ns.stop_reason = sw.best_report.stop_reason;
            ns.table = std::move(sw.table);
            ns.failures = std::move(sw.failures);
            ns.prediction = predict_nn(sw.best, val->samples(), NnMode::one_step);
            const auto measured = val->samples().subspan(ns.prediction.first_instant);
            ns.rmse_one_step = rmse(ns.prediction.values, measured, r.ybar_id);
            ns.model = std::move(sw.best);
            r.neural = std::move(ns);
        });
    }

    run_stage(r, 14, "interval_rmse", [&] {
        for (auto& hr : r.horizons) {
            hr.rmse_interval = rmse_interval(hr.interval.values, hr.measured_interval, r.ybar_id_interval);
        }
    });
}

}  // namespace

void PipelineConfig::validate() const {
    auto bad = [](const std::string& field, const std::string& why) {
        throw std::invalid_argument("config " + field + ": " + why);
    };
    if (!(split > 0.0 && split < 1.0)) bad("split", "must lie in (0, 1)");
    if (degree < 1) bad("degree", "must be >= 1");
    if (max_lag < 1) bad("max_lag", "must be >= 1");
    if (horizon < 1) bad("horizon", "must be >= 1");
    if (!(radius >= 0.0) || !std::isfinite(radius)) bad("radius", "must be finite and >= 0");
    if (autocov_lags < 2) bad("autocov_lags", "must be >= 2");
    if (residual_lags < 1) bad("residual_lags", "must be >= 1");
    if (aic_max_terms < 1) bad("aic_max_terms", "must be >= 1");
    if (neural) {
        if (delays < 1) bad("delays", "must be >= 1");
        if (hidden_min < 1 || hidden_max < hidden_min) bad("hidden", "range must be non-empty and start at 1 or more");
    }
}

RunReport run_pipeline(const Signal& y, const PipelineConfig& cfg) {
    RunReport r;
    r.config = cfg;
    try {
        try {
            cfg.validate();
        } catch (const std::exception& e) {
            throw PipelineError("config", e.what());
        }
        execute(r, y);
        try {
            check_containment(r);
        } catch (const std::exception& e) {
            throw PipelineError("report", e.what());
        }
    } catch (const PipelineError& e) {
        r.failed_stage = e.stage();
        r.error = e.what();
        if (!cfg.output.empty()) write_artifacts(r, cfg.output);
        throw;
    }
    if (!cfg.output.empty()) write_artifacts(r, cfg.output);
    return r;
}

RunReport run_pipeline(const PipelineConfig& cfg) {
    std::optional<Signal> y;
    try {
        y.emplace(read_signal_csv(cfg.input, cfg.decimal_separator));
    } catch (const std::exception& e) {
        RunReport r;
        r.config = cfg;
        r.failed_stage = "load";
        r.error = std::string("stage load: ") + e.what();
        if (!cfg.output.empty()) write_artifacts(r, cfg.output);
        throw PipelineError("load", e.what());
    }
    return run_pipeline(*y, cfg);
}

}  // namespace narid
