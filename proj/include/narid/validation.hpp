#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "narid/estimation.hpp"
#include "narid/interval.hpp"

namespace narid {

/// Predictions aligned to sample indices first_instant, first_instant + 1, ...
struct Prediction {
    std::size_t horizon = 1;  ///< 0 marks a free-run simulation
    std::size_t first_instant = 0;
    std::vector<double> values;
    bool diverged = false;
};

struct IntervalPrediction {
    std::size_t horizon = 1;
    std::size_t first_instant = 0;
    IntervalVector values;
};

/// One model step: sum of theta_j * term_j evaluated at index k of `history`.
[[nodiscard]] double model_step(const Model& m, std::span<const double> history, std::size_t k);
[[nodiscard]] Interval model_step(const Model& m, std::span<const Interval> theta, std::span<const Interval> history,
                                  std::size_t k);

/**
 * @brief k-step-ahead prediction with a rolling origin.
 *
 * For every instant t the model starts from measured samples up to t - k and is
 * iterated k times on its own outputs. The first instant is max_lag + k - 1.
 * @throws std::invalid_argument if k == 0 or the series has fewer than max_lag + k samples.
 */
[[nodiscard]] Prediction predict_k_steps(const Model& m, std::span<const double> y, std::size_t k);

/// Interval version; uses m.theta_interval when present, the point theta otherwise.
[[nodiscard]] IntervalPrediction predict_k_steps(const Model& m, std::span<const Interval> y, std::size_t k);

/// Iterates the model on its own outputs after `seed` (at least max_lag values). Stops
/// with `diverged` set once a value is non-finite or exceeds 1e12 in magnitude.
[[nodiscard]] Prediction free_run(const Model& m, std::span<const double> seed, std::size_t steps);

/**
 * @brief Normalised RMSE: sqrt(sum (y - yhat)^2) / sqrt(sum (y - ybar_id)^2).
 *
 * `ybar_id` is the mean of the identification data. 1 corresponds to the mean predictor.
 * @throws std::invalid_argument on length mismatch, empty input or a zero denominator.
 */
[[nodiscard]] double rmse(std::span<const double> predicted, std::span<const double> measured, double ybar_id);

/// Same quotient in interval arithmetic.
/// @throws std::invalid_argument if the denominator interval reaches zero.
[[nodiscard]] Interval rmse_interval(std::span<const Interval> predicted, std::span<const Interval> measured,
                                     const Interval& ybar_id);

struct ResidualDiagnostics {
    std::vector<double> r_ee;    ///< autocorrelation of the residuals
    std::vector<double> r_ee2;   ///< residual vs lagged mean-removed squared residual
    std::vector<double> r_e2e2;  ///< autocorrelation of the mean-removed squared residual
    double bound = 0.0;          ///< 95% band, 1.96 / sqrt(N)
    double inside_ee = 0.0;      ///< fraction of lags 1..max_lag inside the band
    double inside_ee2 = 0.0;
    double inside_e2e2 = 0.0;
    std::vector<std::string> warnings;
};

/// @throws std::invalid_argument for zero-variance residuals or max_lag >= N.
[[nodiscard]] ResidualDiagnostics residual_diagnostics(std::span<const double> residuals, std::size_t max_lag);

/// One-step residuals y - Psi theta over the rows of the regressor matrix.
[[nodiscard]] std::vector<double> model_residuals(const Model& m, std::span<const double> y);

}  // namespace narid
