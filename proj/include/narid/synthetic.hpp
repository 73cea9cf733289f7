#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "narid/signal.hpp"
#include "narid/terms.hpp"

namespace narid {

/// NAR recursion y(k) = sum theta_j term_j(k) + e(k), e ~ N(0, sigma^2).
struct SyntheticSpec {
    std::vector<Term> terms;
    std::vector<double> theta;
    double sigma = 0.0;
    std::size_t samples = 2000;
    std::uint64_t seed = 0;
    std::size_t burn_in = 500;  ///< discarded transient after zero initial conditions
};

/// Four-term system y(k-1), y(k-4), y(k-4)y(k-3), y(k-4)^3 y(k-1) with stable coefficients;
/// equation-noise SNR about 20 dB.
[[nodiscard]] SyntheticSpec preset_spec();

struct SyntheticSeries {
    Signal y;
    std::vector<double> noise;
    double snr_db = 0.0;  ///< 10 log10(var(y) / var(e)); +inf when sigma == 0
};

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// @throws DivergenceError if a sample leaves [-1e6, 1e6] or becomes non-finite.
/// @throws std::invalid_argument on inconsistent specs.
[[nodiscard]] SyntheticSeries generate_synthetic(const SyntheticSpec& spec);

void write_truth_json(const std::filesystem::path& path, const SyntheticSpec& spec, const SyntheticSeries& series);
[[nodiscard]] SyntheticSpec read_truth_json(const std::filesystem::path& path);

}  // namespace narid
