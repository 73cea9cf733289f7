#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "narid/interval.hpp"

namespace narid {

/// Uniformly sampled scalar series. Holds at least one finite sample.
class Signal {
public:
    /// @throws std::invalid_argument on empty input or non-finite samples.
    explicit Signal(std::vector<double> samples);

    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return samples_[i]; }
    [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
    [[nodiscard]] auto begin() const noexcept { return samples_.begin(); }
    [[nodiscard]] auto end() const noexcept { return samples_.end(); }

private:
    std::vector<double> samples_;
};

/// Covariance estimate per lag, index = lag.
struct AutocovarianceCurve {
    std::vector<double> values;
    [[nodiscard]] std::size_t max_lag() const noexcept { return values.empty() ? 0 : values.size() - 1; }
};

/// values[tau] = 1/(N - tau) * sum_k (y(k) - m)(y(k - tau) - m), m the full-series mean.
/// @throws std::out_of_range if max_lag >= N.
[[nodiscard]] AutocovarianceCurve autocov_linear(const Signal& y, std::size_t max_lag);

/// Same estimator applied to the squared series y^2.
[[nodiscard]] AutocovarianceCurve autocov_nonlinear(const Signal& y, std::size_t max_lag);

struct FirstMinimum {
    std::size_t lag = 0;
    bool fallback = false;  ///< no interior minimum; lag is the last lag of the curve
};

/// Smallest lag >= 1 that is a (non-strict) local minimum of the curve.
/// @throws std::invalid_argument if the curve has fewer than 3 lags.
[[nodiscard]] FirstMinimum first_minimum(const AutocovarianceCurve& curve);

/// Decimation factor max(1, floor(tau_m / 10)).
[[nodiscard]] std::size_t choose_decimation(std::size_t tau_m);

struct DecimationAnalysis {
    AutocovarianceCurve linear;
    AutocovarianceCurve nonlinear;
    FirstMinimum linear_min;
    FirstMinimum nonlinear_min;
    std::size_t tau_m = 0;   ///< smaller of the two first minima
    std::size_t factor = 1;  ///< decimation factor derived from tau_m
};

[[nodiscard]] DecimationAnalysis analyse_decimation(const Signal& y, std::size_t max_lag);

/// Keeps samples 0, factor, 2*factor, ...
/// @throws std::invalid_argument if factor == 0.
[[nodiscard]] Signal decimate(const Signal& y, std::size_t factor);

/**
 * @brief Contiguous split: the first floor(N * frac_id) samples identify, the rest validate.
 * @throws std::invalid_argument if frac_id is outside (0, 1) or either part has fewer
 *         than `min_part` samples.
 */
[[nodiscard]] std::pair<Signal, Signal> split(const Signal& y, double frac_id, std::size_t min_part);

struct ThreeWaySplit {
    Signal train;
    Signal validation;
    Signal test;
};

/// Contiguous train/validation/test split; the test part takes the remainder.
[[nodiscard]] ThreeWaySplit split_three(const Signal& y, double train_frac, double validation_frac,
                                        std::size_t min_part);

[[nodiscard]] double mean(std::span<const double> v);

/// Mean over an interval series, enclosed.
[[nodiscard]] Interval mean(std::span<const Interval> v);

/// Midpoint-radius interval series, one interval per sample.
[[nodiscard]] IntervalVector to_interval_signal(std::span<const double> y, double radius);

/**
 * @brief Reads a single numeric column.
 *
 * A non-numeric first line is treated as a header. With `decimal_separator` = ','
 * values such as "12,5" are accepted. Blank lines are ignored.
 * @throws std::runtime_error naming the line on malformed content.
 */
[[nodiscard]] Signal parse_signal_csv(std::istream& in, char decimal_separator = '.');
[[nodiscard]] Signal read_signal_csv(const std::filesystem::path& path, char decimal_separator = '.');

/// Writes one value per line under a header, '.' decimals, round-trip precision.
void write_signal_csv(const std::filesystem::path& path, std::span<const double> y,
                      const std::string& header = "value");

}  // namespace narid
