#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "narid/interval.hpp"

namespace narid {

/// Monomial in lagged outputs, e.g. y(k-4)^3*y(k-1). Lags are kept sorted ascending.
class Term {
public:
    Term() = default;  ///< constant term
    /// @throws std::invalid_argument if a lag is < 1.
    explicit Term(std::vector<int> lags);

    [[nodiscard]] const std::vector<int>& lags() const noexcept { return lags_; }
    [[nodiscard]] std::size_t degree() const noexcept { return lags_.size(); }
    [[nodiscard]] int max_lag() const noexcept { return lags_.empty() ? 0 : lags_.back(); }
    [[nodiscard]] bool is_constant() const noexcept { return lags_.empty(); }

    /// Canonical text: factors by descending lag, powers as ^n, "const" for the constant.
    [[nodiscard]] std::string to_string() const;

    friend auto operator<=>(const Term&, const Term&) = default;
    friend bool operator==(const Term&, const Term&) = default;

private:
    std::vector<int> lags_;
};

/// Parses the canonical text form (factor order and spacing are free).
/// @throws std::invalid_argument on malformed text.
[[nodiscard]] Term parse_term(std::string_view text);

/// All monomials of degree 0..degree in y(k-1)..y(k-max_lag); C(max_lag + degree, degree)
/// terms, ordered by degree then lexicographically on sorted lags.
[[nodiscard]] std::vector<Term> generate_candidates(int degree, int max_lag);

/// Product of y[k - lag] over the term's lags (0-based sample index k).
/// @throws std::out_of_range if k < max_lag or k >= y.size().
[[nodiscard]] double eval_term(const Term& t, std::span<const double> y, std::size_t k);
[[nodiscard]] Interval eval_term(const Term& t, std::span<const Interval> y, std::size_t k);

struct RegressorSet {
    Eigen::MatrixXd psi;     ///< row i <-> sample index max_lag + i
    Eigen::VectorXd target;  ///< y at the same samples
};

struct IntervalRegressorSet {
    IntervalMatrix psi;
    IntervalVector target;
};

/// @throws std::invalid_argument if y has no more than `max_lag` samples or a term uses a larger lag.
[[nodiscard]] RegressorSet build_regressors(std::span<const Term> terms, std::span<const double> y, int max_lag);
[[nodiscard]] IntervalRegressorSet build_regressors(std::span<const Term> terms, std::span<const Interval> y,
                                                    int max_lag);

}  // namespace narid
