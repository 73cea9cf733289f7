#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace narid {

/**
 * @brief Closed, nonempty real interval [lo, hi] with outward-rounded arithmetic.
 *
 * Every operation returns an interval that contains all point results obtainable
 * from members of the operands. Bounds are computed in round-to-nearest and then
 * moved one ulp outward only when the rounded value is not exact, which keeps
 * degenerate (point) intervals tight.
 */
class Interval {
public:
    constexpr Interval() = default;

    /// Degenerate interval [value, value].
    Interval(double value);  // NOLINT(google-explicit-constructor)

    /// @throws std::invalid_argument if a bound is not finite or lo > hi.
    Interval(double lo, double hi);

    [[nodiscard]] double lo() const noexcept { return lo_; }
    [[nodiscard]] double hi() const noexcept { return hi_; }
    [[nodiscard]] double mid() const noexcept;
    [[nodiscard]] double rad() const noexcept;
    [[nodiscard]] double width() const noexcept { return hi_ - lo_; }
    [[nodiscard]] double mag() const noexcept;
    [[nodiscard]] bool is_point() const noexcept { return lo_ == hi_; }

    [[nodiscard]] bool contains(double x) const noexcept { return lo_ <= x && x <= hi_; }
    /// True if `other` is a subset of this interval.
    [[nodiscard]] bool contains(const Interval& other) const noexcept {
        return lo_ <= other.lo_ && other.hi_ <= hi_;
    }
    /// True if `other` lies strictly inside this interval.
    [[nodiscard]] bool interior_contains(const Interval& other) const noexcept {
        return lo_ < other.lo_ && other.hi_ < hi_;
    }

    friend bool operator==(const Interval&, const Interval&) = default;

private:
    double lo_ = 0.0;
    double hi_ = 0.0;
};

using IntervalVector = std::vector<Interval>;

/// Interval centred on `mid` with radius `rad`; rejects negative radius and non-finite input.
[[nodiscard]] Interval from_midrad(double mid, double rad);

[[nodiscard]] Interval add(const Interval& x, const Interval& y);
[[nodiscard]] Interval sub(const Interval& x, const Interval& y);
[[nodiscard]] Interval mul(const Interval& x, const Interval& y);
/// @throws std::domain_error if 0 is contained in y.
[[nodiscard]] Interval div(const Interval& x, const Interval& y);
/// x^n with dependency handling: even powers of an interval straddling 0 start at 0.
[[nodiscard]] Interval pow_int(const Interval& x, unsigned n);
[[nodiscard]] Interval sqr(const Interval& x);
/// @throws std::domain_error if x.hi() < 0; negative lower part is clipped at 0.
[[nodiscard]] Interval sqrt(const Interval& x);
[[nodiscard]] Interval neg(const Interval& x);
[[nodiscard]] Interval hull(const Interval& x, const Interval& y);

inline Interval operator+(const Interval& x, const Interval& y) { return add(x, y); }
inline Interval operator-(const Interval& x, const Interval& y) { return sub(x, y); }
inline Interval operator*(const Interval& x, const Interval& y) { return mul(x, y); }
inline Interval operator/(const Interval& x, const Interval& y) { return div(x, y); }
inline Interval operator-(const Interval& x) { return neg(x); }
inline Interval& operator+=(Interval& x, const Interval& y) { return x = add(x, y); }
inline Interval& operator*=(Interval& x, const Interval& y) { return x = mul(x, y); }

std::ostream& operator<<(std::ostream& os, const Interval& x);

/// Outward-rounded primitives on doubles, exposed for code that builds bounds by hand.
namespace rounding {
[[nodiscard]] double add_down(double a, double b);
[[nodiscard]] double add_up(double a, double b);
[[nodiscard]] double mul_down(double a, double b);
[[nodiscard]] double mul_up(double a, double b);
[[nodiscard]] double div_down(double a, double b);
[[nodiscard]] double div_up(double a, double b);
}  // namespace rounding

/// Dense row-major interval matrix.
class IntervalMatrix {
public:
    /// @throws std::invalid_argument on zero dimensions.
    IntervalMatrix(std::size_t rows, std::size_t cols, Interval fill = Interval{});

    [[nodiscard]] static IntervalMatrix from_point(const Eigen::MatrixXd& m);
    [[nodiscard]] static IntervalMatrix identity(std::size_t n);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

    Interval& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Interval& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    [[nodiscard]] Eigen::MatrixXd midpoint() const;
    [[nodiscard]] Eigen::MatrixXd radius() const;
    [[nodiscard]] bool contains(const Eigen::MatrixXd& m) const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Interval> data_;
};

[[nodiscard]] IntervalMatrix operator*(const IntervalMatrix& a, const IntervalMatrix& b);
[[nodiscard]] IntervalVector operator*(const IntervalMatrix& a, std::span<const Interval> x);
[[nodiscard]] IntervalMatrix transpose(const IntervalMatrix& a);

[[nodiscard]] IntervalVector to_intervals(std::span<const double> v);
[[nodiscard]] Eigen::VectorXd midpoint(std::span<const Interval> v);
[[nodiscard]] bool contains(std::span<const Interval> box, const Eigen::VectorXd& x);

/// Raised when a linear-system enclosure cannot be certified.
class EnclosureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EnclosureOptions {
    int max_iterations = 50;
};

/**
 * @brief Certified enclosure of the solution set of an interval linear system.
 *
 * Returns a box containing every x with M x = v for some M in `a` and v in `b`.
 * The system is preconditioned by the floating-point inverse R of mid(a); the
 * error of an approximate solution x~ is then enclosed by iterating
 * Y <- R(b - a x~) + (I - R a) Y with epsilon-inflation until the image lies in
 * the interior of Y, which certifies both the enclosure and the regularity of
 * every member matrix.
 *
 * @throws EnclosureError if mid(a) is singular or certification fails within
 *         `opts.max_iterations` refinements. No uncertified box is returned.
 */
[[nodiscard]] IntervalVector solve_enclosure(const IntervalMatrix& a, std::span<const Interval> b,
                                             const EnclosureOptions& opts = {});

}  // namespace narid
