#include "narid/validation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "narid/signal.hpp"

namespace narid {

namespace {

constexpr double kDivergence = 1e12;

std::size_t history_needed(const Model& m) {
    std::size_t lag = static_cast<std::size_t>(std::max(m.max_lag, 0));
    for (const auto& t : m.terms) lag = std::max(lag, static_cast<std::size_t>(t.max_lag()));
    return lag;
}

void check_model(const Model& m) {
    if (m.terms.size() != m.theta.size()) throw std::invalid_argument("model terms and theta disagree in size");
    if (m.theta_interval && m.theta_interval->size() != m.terms.size()) {
        throw std::invalid_argument("model terms and interval theta disagree in size");
    }
}

void check_horizon(std::size_t k, std::size_t n, std::size_t ny) {
    if (k == 0) throw std::invalid_argument("prediction horizon must be at least 1");
    if (n < ny + k) {
        throw std::invalid_argument("insufficient history: " + std::to_string(n) + " samples for maximum lag " +
                                    std::to_string(ny) + " and horizon " + std::to_string(k));
    }
}

// Normalised sum of a(k) * b(k - tau) over the overlap.
std::vector<double> correlation(const std::vector<double>& a, const std::vector<double>& b, double norm,
                                std::size_t max_lag) {
    std::vector<double> r(max_lag + 1, 0.0);
    for (std::size_t tau = 0; tau <= max_lag; ++tau) {
        double s = 0.0;
        for (std::size_t k = tau; k < a.size(); ++k) s += a[k] * b[k - tau];
        r[tau] = s / norm;
    }
    return r;
}

double fraction_inside(const std::vector<double>& r, double bound) {
    if (r.size() < 2) return 1.0;
    std::size_t inside = 0;
    for (std::size_t tau = 1; tau < r.size(); ++tau) inside += std::abs(r[tau]) <= bound;
    return static_cast<double>(inside) / static_cast<double>(r.size() - 1);
}

}  // namespace

double model_step(const Model& m, std::span<const double> history, std::size_t k) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.terms.size(); ++j) s += m.theta[j] * eval_term(m.terms[j], history, k);
    return s;
}

Interval model_step(const Model& m, std::span<const Interval> theta, std::span<const Interval> history,
                    std::size_t k) {
    Interval s;
    for (std::size_t j = 0; j < m.terms.size(); ++j) s += theta[j] * eval_term(m.terms[j], history, k);
    return s;
}

Prediction predict_k_steps(const Model& m, std::span<const double> y, std::size_t k) {
    check_model(m);
    const std::size_t ny = history_needed(m);
    check_horizon(k, y.size(), ny);

    Prediction p{k, ny + k - 1, {}, false};
    p.values.reserve(y.size() - p.first_instant);
    std::vector<double> buf(ny + k);
    for (std::size_t t = p.first_instant; t < y.size(); ++t) {
        const std::size_t origin = t + 1 - k - ny;
        std::copy_n(y.begin() + static_cast<std::ptrdiff_t>(origin), ny, buf.begin());
        for (std::size_t s = 0; s < k; ++s) buf[ny + s] = model_step(m, buf, ny + s);
        p.values.push_back(buf[ny + k - 1]);
    }
    return p;
}

IntervalPrediction predict_k_steps(const Model& m, std::span<const Interval> y, std::size_t k) {
    check_model(m);
    const std::size_t ny = history_needed(m);
    check_horizon(k, y.size(), ny);

    const IntervalVector theta =
        m.theta_interval ? *m.theta_interval : IntervalVector(m.theta.begin(), m.theta.end());
    IntervalPrediction p{k, ny + k - 1, {}};
    p.values.reserve(y.size() - p.first_instant);
    IntervalVector buf(ny + k);
    for (std::size_t t = p.first_instant; t < y.size(); ++t) {
        const std::size_t origin = t + 1 - k - ny;
        std::copy_n(y.begin() + static_cast<std::ptrdiff_t>(origin), ny, buf.begin());
        for (std::size_t s = 0; s < k; ++s) buf[ny + s] = model_step(m, theta, buf, ny + s);
        p.values.push_back(buf[ny + k - 1]);
    }
    return p;
}

Prediction free_run(const Model& m, std::span<const double> seed, std::size_t steps) {
    check_model(m);
    const std::size_t ny = history_needed(m);
    if (steps == 0) throw std::invalid_argument("free_run: steps must be at least 1");
    if (seed.size() < ny) throw std::invalid_argument("free_run: seed shorter than the maximum lag");

    std::vector<double> buf(seed.begin(), seed.end());
    Prediction p{0, seed.size(), {}, false};
    p.values.reserve(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        buf.push_back(0.0);  // slot for the instant being evaluated
        const double v = model_step(m, buf, buf.size() - 1);
        if (!std::isfinite(v) || std::abs(v) > kDivergence) {
            p.diverged = true;
            break;
        }
        buf.back() = v;
        p.values.push_back(v);
    }
    return p;
}

double rmse(std::span<const double> predicted, std::span<const double> measured, double ybar_id) {
    if (predicted.size() != measured.size() || predicted.empty()) {
        throw std::invalid_argument("rmse: predictions and measurements must be non-empty and aligned");
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        const double e = measured[i] - predicted[i];
        const double d = measured[i] - ybar_id;
        num += e * e;
        den += d * d;
    }
    if (!(den > 0.0)) throw std::invalid_argument("rmse: zero denominator (validation data equal the mean)");
    return std::sqrt(num) / std::sqrt(den);
}

Interval rmse_interval(std::span<const Interval> predicted, std::span<const Interval> measured,
                       const Interval& ybar_id) {
    if (predicted.size() != measured.size() || predicted.empty()) {
        throw std::invalid_argument("rmse_interval: predictions and measurements must be non-empty and aligned");
    }
    Interval num, den;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        num += sqr(measured[i] - predicted[i]);
        den += sqr(measured[i] - ybar_id);
    }
    if (!(den.lo() > 0.0)) throw std::invalid_argument("rmse_interval: denominator interval contains zero");
    return sqrt(num) / sqrt(den);
}

ResidualDiagnostics residual_diagnostics(std::span<const double> residuals, std::size_t max_lag) {
    const std::size_t n = residuals.size();
    if (max_lag >= n) throw std::invalid_argument("residual_diagnostics: max lag must be below the residual count");

    ResidualDiagnostics d;
    if (n < 10 * max_lag) {
        d.warnings.push_back("residual series shorter than 10 * max lag; correlation estimates are noisy");
    }
    const double m = mean(residuals);
    std::vector<double> e(n), sq(n), e2(n);
    double scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        e[k] = residuals[k] - m;
        sq[k] = residuals[k] * residuals[k];
        scale = std::max(scale, std::abs(residuals[k]));
    }
    const double m2 = mean(sq);
    for (std::size_t k = 0; k < n; ++k) e2[k] = sq[k] - m2;

    double see = 0.0, se2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        see += e[k] * e[k];
        se2 += e2[k] * e2[k];
    }
    const double tiny = 1e-12 * scale;
    if (!(see > static_cast<double>(n) * tiny * tiny)) {
        throw std::invalid_argument("residual_diagnostics: residuals have zero variance");
    }

    d.r_ee = correlation(e, e, see, max_lag);
    d.r_ee[0] = 1.0;
    if (se2 > static_cast<double>(n) * tiny * tiny * tiny * tiny) {
        d.r_ee2 = correlation(e, e2, std::sqrt(see * se2), max_lag);
        d.r_e2e2 = correlation(e2, e2, se2, max_lag);
        d.r_e2e2[0] = 1.0;
    } else {
        d.warnings.push_back("squared residuals have zero variance; nonlinear correlations set to zero");
        d.r_ee2.assign(max_lag + 1, 0.0);
        d.r_e2e2.assign(max_lag + 1, 0.0);
        d.r_e2e2[0] = 1.0;
    }
    d.bound = 1.96 / std::sqrt(static_cast<double>(n));
    d.inside_ee = fraction_inside(d.r_ee, d.bound);
    d.inside_ee2 = fraction_inside(d.r_ee2, d.bound);
    d.inside_e2e2 = fraction_inside(d.r_e2e2, d.bound);
    return d;
}

std::vector<double> model_residuals(const Model& m, std::span<const double> y) {
    check_model(m);
    const std::size_t ny = history_needed(m);
    if (y.size() <= ny) throw std::invalid_argument("model_residuals: series shorter than the maximum lag");
    std::vector<double> r;
    r.reserve(y.size() - ny);
    for (std::size_t k = ny; k < y.size(); ++k) r.push_back(y[k] - model_step(m, y, k));
    return r;
}

}  // namespace narid
