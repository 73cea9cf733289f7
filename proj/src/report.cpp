#include "narid/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <locale>
#include <sstream>

#include <json.hpp>

namespace narid {

namespace {

using json = nlohmann::ordered_json;

bool has_stage(const RunReport& r, const std::string& name) {
    return std::any_of(r.stages.begin(), r.stages.end(), [&](const StageRecord& s) { return s.name == name; });
}

json to_json(const Interval& x) { return json::array({x.lo(), x.hi()}); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json config_json(const PipelineConfig& c) {
    json j;
    j["input"] = c.input.string();
    j["decimal_separator"] = std::string(1, c.decimal_separator);
    j["split"] = c.split;
    j["degree"] = c.degree;
    j["max_lag"] = c.max_lag;
    j["autocov_lags"] = c.autocov_lags;
    j["decimation"] = c.decimation;
    j["residual_lags"] = c.residual_lags;
    j["horizon"] = c.horizon;
    j["aic_max_terms"] = c.aic_max_terms;
    j["radius"] = c.radius;
    j["neural"] = c.neural;
    j["delays"] = c.delays;
    j["hidden_min"] = c.hidden_min;
    j["hidden_max"] = c.hidden_max;
    j["max_epochs"] = c.max_epochs;
    j["seed"] = c.seed;
    return j;
}

json build(const RunReport& r) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["status"] = r.failed_stage.empty() ? "ok" : "FAILED";
    if (!r.failed_stage.empty()) {
        j["failed_stage"] = r.failed_stage;
        j["error"] = r.error;
    }
    j["config"] = config_json(r.config);
    j["interval_radius"] = r.config.radius;

    json steps = json::array();
    for (const auto& s : r.stages) steps.push_back({{"step", s.step}, {"name", s.name}});
    j["steps"] = steps;
    j["samples"] = {{"total", r.samples},
                    {"identification", r.identification_samples},
                    {"validation", r.validation_samples}};

    if (r.decimation) {
        const auto& d = *r.decimation;
        j["decimation"] = {{"tau_linear", d.linear_min.lag},
                           {"tau_linear_fallback", d.linear_min.fallback},
                           {"tau_nonlinear", d.nonlinear_min.lag},
                           {"tau_nonlinear_fallback", d.nonlinear_min.fallback},
                           {"tau_m", d.tau_m},
                           {"factor", d.factor},
                           {"overridden", d.overridden}};
    }
    if (r.ranking) {
        j["candidate_count"] = r.candidate_count;
        json table = json::array();
        double cum = 0.0;
        for (std::size_t i = 0; i < r.ranking->steps.size(); ++i) {
            const auto& s = r.ranking->steps[i];
            cum += s.err;
            table.push_back({{"rank", i + 1}, {"term", s.term.to_string()}, {"err", s.err}, {"cumulative", cum}});
        }
        j["err_table"] = table;
    }
    if (r.model) {
        const Model& m = *r.model;
        json trace = json::array();
        for (double a : m.aic_trace) trace.push_back(number_or_null(a));
        j["aic"] = {{"trace", trace}, {"selected_size", m.selected_size}};
        json terms = json::array();
        for (const auto& t : m.terms) terms.push_back(t.to_string());
        json model;
        model["terms"] = terms;
        model["theta"] = m.theta;
        if (m.theta_interval) {
            json ti = json::array();
            for (const auto& x : *m.theta_interval) ti.push_back(to_json(x));
            model["theta_interval"] = ti;
        } else {
            model["theta_interval"] = nullptr;
        }
        if (!r.interval_method.empty()) model["interval_method"] = r.interval_method;
        model["err"] = m.err;
        j["model"] = model;
        j["ybar_id"] = r.ybar_id;
    }
    if (has_stage(r, "interval_data")) j["ybar_id_interval"] = to_json(r.ybar_id_interval);

    json preds = json::array();
    for (const auto& h : r.horizons) {
        json p{{"horizon", h.horizon}, {"first_instant", h.point.first_instant}, {"count", h.point.values.size()}};
        if (has_stage(r, "rmse")) p["rmse"] = h.rmse;
        if (has_stage(r, "interval_rmse")) p["rmse_interval"] = to_json(h.rmse_interval);
        preds.push_back(p);
    }
    if (!preds.empty()) j["predictions"] = preds;

    if (r.residuals) {
        const auto& d = *r.residuals;
        j["residuals"] = {{"lags", d.r_ee.size() - 1},
                          {"bound", d.bound},
                          {"inside_fraction", {{"r_ee", d.inside_ee}, {"r_ee2", d.inside_ee2}, {"r_e2e2", d.inside_e2e2}}}};
    }
    if (r.neural) {
        const auto& n = *r.neural;
        j["neural"] = {{"hidden", n.hidden},
                       {"delays", n.model.delays},
                       {"validation_mse", n.validation_mse},
                       {"best_epoch", n.best_epoch},
                       {"stop_reason", n.stop_reason},
                       {"rmse_one_step", n.rmse_one_step},
                       {"failures", n.failures}};
    }
    j["warnings"] = r.warnings;
    return j;
}

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.imbue(std::locale::classic());
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_predictions(const std::filesystem::path& dir, const HorizonResult& h) {
    auto out = open_csv(dir / ("predictions_k" + std::to_string(h.horizon) + ".csv"));
    out << "instant,measured,point,lower,upper\n";
    const bool with_interval = h.interval.values.size() == h.point.values.size();
    for (std::size_t i = 0; i < h.point.values.size(); ++i) {
        out << h.point.first_instant + i << ',' << h.measured[i] << ',' << h.point.values[i] << ',';
        if (with_interval) out << h.interval.values[i].lo() << ',' << h.interval.values[i].hi();
        else out << ',';
        out << '\n';
    }
}

void write_err_aic(const std::filesystem::path& dir, const RunReport& r) {
    auto out = open_csv(dir / "err_aic.csv");
    out << "rank,term,err,cumulative_err,aic\n";
    double cum = 0.0;
    for (std::size_t i = 0; i < r.ranking->steps.size(); ++i) {
        const auto& s = r.ranking->steps[i];
        cum += s.err;
        out << i + 1 << ',' << s.term.to_string() << ',' << s.err << ',' << cum << ',';
        if (r.model && i < r.model->aic_trace.size() && std::isfinite(r.model->aic_trace[i])) {
            out << r.model->aic_trace[i];
        }
        out << '\n';
    }
}

bool inside(double p, const Interval& x, double slack) {
    const double pad = slack * std::max({std::abs(x.lo()), std::abs(x.hi()), std::abs(p)});
    return p >= x.lo() - pad && p <= x.hi() + pad;
}

std::string describe(const std::string& what, double p, const Interval& x) {
    std::ostringstream s;
    s << std::setprecision(17) << what << ": " << p << " not in " << x;
    return s.str();
}

}  // namespace

std::string report_json(const RunReport& r) { return build(r).dump(2) + "\n"; }

void check_containment(const RunReport& r, double relative_slack) {
    auto require = [&](double p, const Interval& x, const std::string& what) {
        if (!inside(p, x, relative_slack)) throw std::logic_error(describe(what, p, x));
    };
    if (r.model && r.model->theta_interval) {
        for (std::size_t i = 0; i < r.model->theta.size(); ++i) {
            require(r.model->theta[i], (*r.model->theta_interval)[i], "theta[" + std::to_string(i) + "]");
        }
    }
    if (has_stage(r, "interval_data")) require(r.ybar_id, r.ybar_id_interval, "identification mean");
    for (const auto& h : r.horizons) {
        if (h.interval.values.size() == h.point.values.size()) {
            for (std::size_t i = 0; i < h.point.values.size(); ++i) {
                require(h.point.values[i], h.interval.values[i],
                        "k=" + std::to_string(h.horizon) + " prediction at instant " +
                            std::to_string(h.point.first_instant + i));
            }
        }
        if (has_stage(r, "interval_rmse")) require(h.rmse, h.rmse_interval, "k=" + std::to_string(h.horizon) + " RMSE");
    }
}

void write_artifacts(const RunReport& r, const std::filesystem::path& dir) {
    const bool failed = !r.failed_stage.empty();
    if (!failed) check_containment(r);
    std::filesystem::create_directories(dir);

    write_text(dir / "report.json", report_json(r));

    json timing = json::array();
    for (const auto& s : r.stages) timing.push_back({{"step", s.step}, {"name", s.name}, {"millis", s.millis}});
    write_text(dir / "timing.json", timing.dump(2) + "\n");

    if (r.decimation) {
        auto out = open_csv(dir / "autocov.csv");
        out << "lag,linear,nonlinear\n";
        const auto& d = *r.decimation;
        for (std::size_t t = 0; t < d.linear.values.size(); ++t) {
            out << t << ',' << d.linear.values[t] << ',' << d.nonlinear.values[t] << '\n';
        }
    }
    if (r.ranking) write_err_aic(dir, r);
    for (const auto& h : r.horizons) write_predictions(dir, h);
    if (r.residuals) {
        auto out = open_csv(dir / "residuals.csv");
        out << "lag,r_ee,r_ee2,r_e2e2,bound\n";
        const auto& d = *r.residuals;
        for (std::size_t t = 0; t < d.r_ee.size(); ++t) {
            out << t << ',' << d.r_ee[t] << ',' << d.r_ee2[t] << ',' << d.r_e2e2[t] << ',' << d.bound << '\n';
        }
    }
    if (r.neural) {
        auto out = open_csv(dir / "neural_sweep.csv");
        out << "hidden,validation_mse,test_rmse,epochs,stop_reason\n";
        for (const auto& row : r.neural->table) {
            out << row.hidden << ',' << row.validation_mse << ',';
            if (std::isfinite(row.test_rmse)) out << row.test_rmse;
            out << ',' << row.epochs << ',' << row.stop_reason << '\n';
        }
        save_mlp(r.neural->model, dir / "network.mlp");
    }

    const auto marker = dir / "FAILED";
    if (failed) {
        write_text(marker, r.error + "\n");
    } else {
        std::filesystem::remove(marker);
    }
}

}  // namespace narid
