#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "narid/interval.hpp"
#include "narid/terms.hpp"

namespace narid {

struct ErrStep {
    std::size_t column = 0;  ///< column of the candidate regressor matrix
    Term term;
    double err = 0.0;  ///< fraction of target energy explained at this step
};

/// Forward-selection order with the error reduction ratio of each step.
struct ErrRanking {
    std::vector<ErrStep> steps;
    std::vector<std::string> warnings;

    [[nodiscard]] double cumulative() const;
    [[nodiscard]] std::vector<Term> leading_terms(std::size_t n) const;
};

struct ErrOptions {
    std::size_t max_steps = std::numeric_limits<std::size_t>::max();
    /// Columns whose (orthogonalised) norm falls below this fraction of the largest
    /// candidate norm are treated as zero.
    double rank_tolerance = 1e-12;
};

/**
 * @brief Greedy forward orthogonal least squares ranking by error reduction ratio.
 *
 * At every step each remaining candidate is orthogonalised against the chosen ones
 * (modified Gram-Schmidt) and the candidate w maximising
 * ERR = g^2 <w, w> / <y, y>, g = <w, y> / <w, w>, is appended.
 *
 * @throws std::invalid_argument if the target has zero energy or shapes disagree.
 */
[[nodiscard]] ErrRanking err_rank(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y,
                                  std::span<const Term> candidates, const ErrOptions& opts = {});

class RankDeficientError : public std::runtime_error {
public:
    RankDeficientError(const std::string& what, std::vector<std::size_t> columns)
        : std::runtime_error(what), columns_(std::move(columns)) {}
    [[nodiscard]] const std::vector<std::size_t>& columns() const noexcept { return columns_; }

private:
    std::vector<std::size_t> columns_;
};

/// Least-squares coefficients by column-pivoted Householder QR.
/// @throws RankDeficientError naming the dependent columns.
[[nodiscard]] Eigen::VectorXd ls_estimate(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y,
                                          double rank_tolerance = 1e-12);

/// N ln(rss / N) + 2 n, with the variance floored at the smallest normal double.
[[nodiscard]] double aic_value(double rss, std::size_t samples, std::size_t parameters);

struct Model {
    std::vector<Term> terms;
    std::vector<double> theta;
    std::optional<IntervalVector> theta_interval;
    std::vector<double> err;        ///< ERR of each selected term, in selection order
    std::vector<double> aic_trace;  ///< AIC for sizes 1..; NaN where the fit was skipped
    std::size_t selected_size = 0;
    int max_lag = 0;  ///< row alignment used for regressors and prediction
    std::vector<std::string> warnings;
};

struct AicOptions {
    std::size_t max_terms = 30;
};

/**
 * @brief Fits the first n ranked terms for n = 1..min(|ranking|, max_terms) and keeps
 *        the global AIC minimiser (ties go to the smaller model).
 * @throws std::invalid_argument on an empty ranking or when no size could be fitted.
 */
[[nodiscard]] Model aic_select(const ErrRanking& ranking, const Eigen::MatrixXd& psi, const Eigen::VectorXd& y,
                               int max_lag, const AicOptions& opts = {});

enum class IntervalLsMethod { normal_equations, augmented };

struct IntervalLsResult {
    IntervalVector theta;
    IntervalLsMethod method = IntervalLsMethod::normal_equations;
};

[[nodiscard]] const char* to_string(IntervalLsMethod m) noexcept;

/**
 * @brief Interval least squares: encloses the solution set of the interval normal
 *        equations (Psi^T Psi) theta = Psi^T y.
 *
 * Every point estimate obtained from member data of (psi, y) lies in the result.
 * When the normal matrix is too wide to be certified regular, the augmented system
 * [Psi I; 0 Psi^T] (theta, r) = (y, 0) is verified instead; it avoids squaring the
 * condition number and tolerates far wider data intervals.
 * @throws EnclosureError when neither route can be certified.
 */
[[nodiscard]] IntervalLsResult interval_ls_solve(const IntervalMatrix& psi, std::span<const Interval> y);

/// theta of interval_ls_solve.
[[nodiscard]] IntervalVector interval_ls_estimate(const IntervalMatrix& psi, std::span<const Interval> y);

/// Normal-equation route only.
[[nodiscard]] IntervalVector interval_ls_normal(const IntervalMatrix& psi, std::span<const Interval> y);

/// Augmented-system route only. @throws EnclosureError if Psi is not overdetermined or
/// verification fails.
[[nodiscard]] IntervalVector interval_ls_augmented(const IntervalMatrix& psi, std::span<const Interval> y,
                                                   const EnclosureOptions& opts = {});

}  // namespace narid
