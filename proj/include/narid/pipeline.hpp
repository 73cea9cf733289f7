#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "narid/estimation.hpp"
#include "narid/neural.hpp"
#include "narid/signal.hpp"
#include "narid/validation.hpp"

namespace narid {

struct PipelineConfig {
    std::filesystem::path input;
    char decimal_separator = '.';
    double split = 0.5;
    int degree = 4;
    int max_lag = 4;
    std::size_t autocov_lags = 100;  ///< clipped to the identification length
    std::size_t decimation = 0;      ///< 0 picks the factor from the autocovariance minima
    std::size_t residual_lags = 25;
    std::size_t horizon = 2;
    std::size_t aic_max_terms = 30;
    double radius = 1e-6;  ///< interval half-width in signal units (instrument sensitivity)
    bool neural = true;
    std::size_t delays = 5;
    std::size_t hidden_min = 10;
    std::size_t hidden_max = 30;
    std::size_t max_epochs = 1000;
    std::uint64_t seed = 0;
    std::filesystem::path output;  ///< empty: no artifacts written

    /// @throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Raised by run_pipeline; `stage()` names the failing step.
class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string& message)
        : std::runtime_error("stage " + stage + ": " + message), stage_(std::move(stage)) {}
    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct StageRecord {
    int step = 0;  ///< step number in the identification procedure
    std::string name;
    double millis = 0.0;
};

struct DecimationSummary {
    AutocovarianceCurve linear, nonlinear;
    FirstMinimum linear_min, nonlinear_min;
    std::size_t tau_m = 0;
    std::size_t factor = 1;
    bool overridden = false;
};

struct HorizonResult {
    std::size_t horizon = 1;
    Prediction point;
    IntervalPrediction interval;
    std::vector<double> measured;     ///< validation samples aligned with the predictions
    IntervalVector measured_interval;
    double rmse = 0.0;
    Interval rmse_interval;
};

struct NeuralSummary {
    std::size_t hidden = 0;
    double validation_mse = 0.0;
    double rmse_one_step = 0.0;  ///< on the pipeline validation part
    std::size_t best_epoch = 0;
    std::string stop_reason;
    std::vector<SweepRow> table;
    std::vector<std::string> failures;
    MlpNarModel model;
    Prediction prediction;
};

struct RunReport {
    PipelineConfig config;
    std::size_t samples = 0;
    std::size_t identification_samples = 0;  ///< after decimation
    std::size_t validation_samples = 0;      ///< after decimation
    std::optional<DecimationSummary> decimation;
    std::size_t candidate_count = 0;
    std::optional<ErrRanking> ranking;
    std::optional<Model> model;
    double ybar_id = 0.0;
    Interval ybar_id_interval;
    std::string interval_method;  ///< "normal_equations" or "augmented"; empty before the interval estimate
    std::vector<HorizonResult> horizons;  ///< k = 1 first, then the configured horizon if different
    std::optional<ResidualDiagnostics> residuals;
    std::optional<NeuralSummary> neural;
    std::vector<StageRecord> stages;
    std::vector<std::string> warnings;
    std::string failed_stage;  ///< empty on success
    std::string error;
};

/// Runs every step on an in-memory series. Artifacts are written when cfg.output is set.
/// @throws PipelineError on the first failing step (after flushing partial artifacts).
[[nodiscard]] RunReport run_pipeline(const Signal& y, const PipelineConfig& cfg);

/// Loads cfg.input and runs the pipeline.
[[nodiscard]] RunReport run_pipeline(const PipelineConfig& cfg);

}  // namespace narid
