#include "narid/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include <json.hpp>

namespace narid {

namespace {

constexpr double kBound = 1e6;

double variance(std::span<const double> v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

}  // namespace

SyntheticSpec preset_spec() {
    SyntheticSpec s;
    s.terms = {parse_term("y(k-1)"), parse_term("y(k-4)"), parse_term("y(k-4)*y(k-3)"),
               parse_term("y(k-4)^3*y(k-1)")};
    s.theta = {0.591, -0.677, -0.057, -0.08};
    s.sigma = 0.119;
    return s;
}

SyntheticSeries generate_synthetic(const SyntheticSpec& spec) {
    if (spec.terms.size() != spec.theta.size()) throw std::invalid_argument("synthetic spec: terms and theta differ");
    if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) throw std::invalid_argument("synthetic spec: bad sigma");
    if (spec.samples == 0) throw std::invalid_argument("synthetic spec: no samples requested");

    std::size_t lag = 0;
    for (const auto& t : spec.terms) lag = std::max(lag, static_cast<std::size_t>(t.max_lag()));
    const std::size_t total = lag + spec.burn_in + spec.samples;

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> y(total, 0.0), e(total, 0.0);
    for (std::size_t k = lag; k < total; ++k) {
        e[k] = spec.sigma * normal(rng);
        double v = e[k];
        for (std::size_t j = 0; j < spec.terms.size(); ++j) v += spec.theta[j] * eval_term(spec.terms[j], y, k);
        if (!std::isfinite(v) || std::abs(v) > kBound) {
            throw DivergenceError("synthetic simulation diverged at step " + std::to_string(k - lag));
        }
        y[k] = v;
    }
    const auto first = static_cast<std::ptrdiff_t>(lag + spec.burn_in);
    std::vector<double> ys(y.begin() + first, y.end());
    std::vector<double> es(e.begin() + first, e.end());
    const double ve = variance(es);
    const double snr = ve > 0.0 ? 10.0 * std::log10(variance(ys) / ve) : std::numeric_limits<double>::infinity();
    return {Signal(std::move(ys)), std::move(es), snr};
}

void write_truth_json(const std::filesystem::path& path, const SyntheticSpec& spec, const SyntheticSeries& series) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (const auto& t : spec.terms) terms.push_back(t.to_string());
    j["terms"] = terms;
    j["theta"] = spec.theta;
    j["sigma"] = spec.sigma;
    j["samples"] = spec.samples;
    j["seed"] = spec.seed;
    j["burn_in"] = spec.burn_in;
    if (std::isfinite(series.snr_db)) {
        j["snr_db"] = series.snr_db;
    } else {
        j["snr_db"] = nullptr;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

SyntheticSpec read_truth_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        const auto j = nlohmann::json::parse(in);
        SyntheticSpec s;
        for (const auto& t : j.at("terms")) s.terms.push_back(parse_term(t.get<std::string>()));
        s.theta = j.at("theta").get<std::vector<double>>();
        s.sigma = j.at("sigma").get<double>();
        s.samples = j.at("samples").get<std::size_t>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.burn_in = j.at("burn_in").get<std::size_t>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed truth file " + path.string() + ": " + e.what());
    }
}

}  // namespace narid
