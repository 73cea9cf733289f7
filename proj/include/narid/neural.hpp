#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "narid/signal.hpp"
#include "narid/validation.hpp"

namespace narid {

/// Affine map of [min, max] onto [-1, 1]; a constant series maps by a plain shift.
class MinMaxMap {
public:
    MinMaxMap() = default;
    MinMaxMap(double min, double max);
    [[nodiscard]] static MinMaxMap fit(std::span<const double> values);

    [[nodiscard]] double normalize(double x) const noexcept { return (x - min_) * gain_ - offset_; }
    [[nodiscard]] double denormalize(double v) const noexcept { return (v + offset_) / gain_ + min_; }
    [[nodiscard]] double gain() const noexcept { return gain_; }
    [[nodiscard]] double min() const noexcept { return min_; }
    [[nodiscard]] double max() const noexcept { return max_; }

private:
    double min_ = -1.0, max_ = 1.0;
    double gain_ = 1.0, offset_ = 1.0;
};

/**
 * @brief NAR perceptron: y(k) = w2 . tanh(W1 x + b1) + b2 with x = [y(k-1), ..., y(k-delays)],
 *        all in normalised units.
 */
struct MlpNarModel {
    std::size_t delays = 5;
    std::size_t hidden = 1;
    Eigen::MatrixXd w1;  ///< hidden x delays
    Eigen::VectorXd b1;
    Eigen::VectorXd w2;
    double b2 = 0.0;
    MinMaxMap scale;

    MlpNarModel() = default;
    MlpNarModel(std::size_t delays, std::size_t hidden);

    [[nodiscard]] std::size_t parameter_count() const noexcept { return hidden * delays + 2 * hidden + 1; }
    /// Packed as W1 (row-major), b1, w2, b2.
    [[nodiscard]] Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::VectorXd& p);

    /// Network output for a normalised delay vector.
    [[nodiscard]] double forward(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Delay vectors (rows, normalised) and normalised targets.
struct PairSet {
    Eigen::MatrixXd inputs;
    Eigen::VectorXd targets;
};

/// Rows for k = delays..n-1 of a series, mapped through `scale`.
[[nodiscard]] PairSet make_pairs(std::span<const double> y, std::size_t delays, const MinMaxMap& scale);

/// e = targets - outputs.
[[nodiscard]] Eigen::VectorXd network_errors(const MlpNarModel& m, const PairSet& data);
/// Analytic de/dw, one row per pair, columns in parameter packing order.
[[nodiscard]] Eigen::MatrixXd error_jacobian(const MlpNarModel& m, const PairSet& data);
/// Solves (J^T J + lambda I) dw = -J^T e.
[[nodiscard]] Eigen::VectorXd lm_step(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& errors, double lambda);

struct LmOptions {
    std::size_t max_epochs = 1000;
    double lambda_init = 1e-3;
    double lambda_decrease = 0.1;
    double lambda_increase = 10.0;
    double lambda_max = 1e10;
    std::size_t max_fail = 6;  ///< consecutive validation-MSE increases before stopping
    double goal = 0.0;         ///< stop once the training MSE (data units) is at or below this
};

struct TrainReport {
    std::vector<double> train_mse;  ///< per epoch, data units
    std::vector<double> val_mse;    ///< per epoch, data units; empty without validation data
    std::vector<double> lambda;     ///< damping after each epoch
    std::string stop_reason;        ///< max_epochs, validation, lambda_max, goal or non_finite
    std::size_t best_epoch = 0;     ///< 0 = initial weights
    double best_mse = 0.0;          ///< validation MSE at best_epoch (training MSE without validation)

    friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

struct TrainResult {
    MlpNarModel model;
    TrainReport report;
};

/// Levenberg-Marquardt on ready-made pairs; `val` may be empty (no rows), in which case
/// the best epoch is chosen by training MSE and no early stopping happens.
[[nodiscard]] TrainResult train_lm_on_pairs(const PairSet& train, const PairSet& val, const MinMaxMap& scale,
                                            std::size_t hidden, std::uint64_t seed, const LmOptions& opts = {});

/// Fits the normalisation on `train`, builds delay pairs and trains.
/// @throws std::invalid_argument if a series has no more than delays + 10 samples or hidden == 0.
[[nodiscard]] TrainResult train_lm(const Signal& train, const Signal& validation, std::size_t hidden,
                                   std::uint64_t seed, const LmOptions& opts = {}, std::size_t delays = 5);

struct SweepRow {
    std::size_t hidden = 0;
    double validation_mse = 0.0;
    double test_rmse = 0.0;  ///< normalised RMSE of one-step predictions on the test part
    std::size_t epochs = 0;
    std::string stop_reason;
};

struct SweepResult {
    MlpNarModel best;
    TrainReport best_report;
    std::vector<SweepRow> table;
    std::vector<std::string> failures;
};

/// Trains every size in [hidden_min, hidden_max] on a 60/20/20 split and keeps the
/// smallest validation MSE. @throws std::runtime_error when every size fails.
[[nodiscard]] SweepResult sweep_hidden(const Signal& y, std::size_t hidden_min, std::size_t hidden_max,
                                       std::uint64_t seed, const LmOptions& opts = {}, std::size_t delays = 5);

enum class NnMode { one_step, free_run };

/// Predictions (data units) for instants delays..n-1.
/// @throws std::invalid_argument if y has no more than `delays` samples.
[[nodiscard]] Prediction predict_nn(const MlpNarModel& m, std::span<const double> y, NnMode mode);

void save_mlp(const MlpNarModel& m, const std::filesystem::path& path);
/// @throws std::runtime_error on a malformed file or unsupported version.
[[nodiscard]] MlpNarModel load_mlp(const std::filesystem::path& path);

}  // namespace narid
