#include "narid/interval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace narid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Below this magnitude the error terms of fma/TwoSum may underflow and stop
// being exact, so the bound is nudged unconditionally.
constexpr double kTiny = 0x1p-960;

void require_finite(double v, const char* op) {
    if (!std::isfinite(v)) {
        throw std::overflow_error(std::string("interval ") + op + ": result is not finite");
    }
}

double down(double v) { return std::nextafter(v, -kInf); }
double up(double v) { return std::nextafter(v, kInf); }

// Exact rounding error of a + b (Knuth TwoSum): a + b == s + err.
double two_sum_error(double a, double b, double s) {
    const double bp = s - a;
    const double ap = s - bp;
    return (a - ap) + (b - bp);
}

}  // namespace

namespace rounding {

double add_down(double a, double b) {
    const double s = a + b;
    require_finite(s, "add");
    const double err = two_sum_error(a, b, s);
    if (!std::isfinite(err)) return down(s);
    return err < 0.0 ? down(s) : s;
}

double add_up(double a, double b) {
    const double s = a + b;
    require_finite(s, "add");
    const double err = two_sum_error(a, b, s);
    if (!std::isfinite(err)) return up(s);
    return err > 0.0 ? up(s) : s;
}

double mul_down(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    const double p = a * b;
    require_finite(p, "mul");
    if (std::abs(p) < kTiny) return down(p);
    const double err = std::fma(a, b, -p);
    return err < 0.0 ? down(p) : p;
}

double mul_up(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    const double p = a * b;
    require_finite(p, "mul");
    if (std::abs(p) < kTiny) return up(p);
    const double err = std::fma(a, b, -p);
    return err > 0.0 ? up(p) : p;
}

// a / b = q + r / b with r = a - q*b computed exactly by fma.
double div_down(double a, double b) {
    if (a == 0.0) return 0.0;
    const double q = a / b;
    require_finite(q, "div");
    if (std::abs(q) < kTiny || std::abs(a) < kTiny) return down(q);
    const double r = std::fma(-q, b, a);
    const bool below = (r < 0.0 && b > 0.0) || (r > 0.0 && b < 0.0);
    return below ? down(q) : q;
}

double div_up(double a, double b) {
    if (a == 0.0) return 0.0;
    const double q = a / b;
    require_finite(q, "div");
    if (std::abs(q) < kTiny || std::abs(a) < kTiny) return up(q);
    const double r = std::fma(-q, b, a);
    const bool above = (r > 0.0 && b > 0.0) || (r < 0.0 && b < 0.0);
    return above ? up(q) : q;
}

}  // namespace rounding

namespace {

double sqrt_down(double x) {
    if (x <= 0.0) return 0.0;
    const double s = std::sqrt(x);
    if (x < kTiny) return down(s);
    return std::fma(s, s, -x) > 0.0 ? down(s) : s;
}

double sqrt_up(double x) {
    if (x <= 0.0) return 0.0;
    const double s = std::sqrt(x);
    if (x < kTiny) return up(s);
    return std::fma(s, s, -x) < 0.0 ? up(s) : s;
}

// a >= 0 throughout, so the directed products are monotone.
double pow_down(double a, unsigned n) {
    double r = 1.0;
    for (unsigned i = 0; i < n; ++i) r = rounding::mul_down(r, a);
    return r;
}

double pow_up(double a, unsigned n) {
    double r = 1.0;
    for (unsigned i = 0; i < n; ++i) r = rounding::mul_up(r, a);
    return r;
}

}  // namespace

Interval::Interval(double value) : lo_(value), hi_(value) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument("interval bound must be finite");
    }
}

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw std::invalid_argument("interval bounds must be finite");
    }
    if (lo > hi) {
        throw std::invalid_argument("interval lower bound exceeds upper bound");
    }
}

double Interval::mid() const noexcept {
    if (lo_ == hi_) return lo_;
    return 0.5 * lo_ + 0.5 * hi_;
}

double Interval::rad() const noexcept {
    const double m = mid();
    return std::max(up(m - lo_), up(hi_ - m));
}

double Interval::mag() const noexcept { return std::max(std::abs(lo_), std::abs(hi_)); }

Interval from_midrad(double mid, double rad) {
    if (!std::isfinite(mid) || !std::isfinite(rad)) {
        throw std::invalid_argument("from_midrad: non-finite input");
    }
    if (rad < 0.0) {
        throw std::invalid_argument("from_midrad: negative radius");
    }
    if (rad == 0.0) return Interval(mid);
    return {rounding::add_down(mid, -rad), rounding::add_up(mid, rad)};
}

Interval add(const Interval& x, const Interval& y) {
    return {rounding::add_down(x.lo(), y.lo()), rounding::add_up(x.hi(), y.hi())};
}

Interval sub(const Interval& x, const Interval& y) {
    return {rounding::add_down(x.lo(), -y.hi()), rounding::add_up(x.hi(), -y.lo())};
}

Interval neg(const Interval& x) { return {-x.hi(), -x.lo()}; }

Interval mul(const Interval& x, const Interval& y) {
    const double a = x.lo(), b = x.hi(), c = y.lo(), d = y.hi();
    const double lo = std::min({rounding::mul_down(a, c), rounding::mul_down(a, d),
                                rounding::mul_down(b, c), rounding::mul_down(b, d)});
    const double hi = std::max({rounding::mul_up(a, c), rounding::mul_up(a, d),
                                rounding::mul_up(b, c), rounding::mul_up(b, d)});
    return {lo, hi};
}

Interval div(const Interval& x, const Interval& y) {
    if (y.lo() <= 0.0 && y.hi() >= 0.0) {
        throw std::domain_error("interval division by an interval containing zero");
    }
    const double a = x.lo(), b = x.hi(), c = y.lo(), d = y.hi();
    const double lo = std::min({rounding::div_down(a, c), rounding::div_down(a, d),
                                rounding::div_down(b, c), rounding::div_down(b, d)});
    const double hi = std::max({rounding::div_up(a, c), rounding::div_up(a, d),
                                rounding::div_up(b, c), rounding::div_up(b, d)});
    return {lo, hi};
}

Interval pow_int(const Interval& x, unsigned n) {
    if (n == 0) return Interval(1.0);
    if (n == 1) return x;
    const bool even = (n % 2) == 0;
    const double lo = x.lo(), hi = x.hi();
    if (lo >= 0.0) return {pow_down(lo, n), pow_up(hi, n)};
    if (hi <= 0.0) {
        const double a = -hi, b = -lo;
        if (even) return {pow_down(a, n), pow_up(b, n)};
        return {-pow_up(b, n), -pow_down(a, n)};
    }
    if (even) return {0.0, pow_up(std::max(-lo, hi), n)};
    return {-pow_up(-lo, n), pow_up(hi, n)};
}

Interval sqr(const Interval& x) { return pow_int(x, 2); }

Interval sqrt(const Interval& x) {
    if (x.hi() < 0.0) {
        throw std::domain_error("interval sqrt of a negative interval");
    }
    return {sqrt_down(std::max(x.lo(), 0.0)), sqrt_up(x.hi())};
}

Interval hull(const Interval& x, const Interval& y) {
    return {std::min(x.lo(), y.lo()), std::max(x.hi(), y.hi())};
}

std::ostream& operator<<(std::ostream& os, const Interval& x) {
    return os << '[' << x.lo() << ", " << x.hi() << ']';
}

IntervalMatrix::IntervalMatrix(std::size_t rows, std::size_t cols, Interval fill)
    : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("interval matrix dimensions must be positive");
    }
    data_.assign(rows * cols, fill);
}

IntervalMatrix IntervalMatrix::from_point(const Eigen::MatrixXd& m) {
    IntervalMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (std::size_t r = 0; r < out.rows_; ++r) {
        for (std::size_t c = 0; c < out.cols_; ++c) {
            out(r, c) = Interval(m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        }
    }
    return out;
}

IntervalMatrix IntervalMatrix::identity(std::size_t n) {
    IntervalMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = Interval(1.0);
    return out;
}

Eigen::MatrixXd IntervalMatrix::midpoint() const {
    Eigen::MatrixXd m(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (*this)(r, c).mid();
        }
    }
    return m;
}

Eigen::MatrixXd IntervalMatrix::radius() const {
    Eigen::MatrixXd m(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (*this)(r, c).rad();
        }
    }
    return m;
}

bool IntervalMatrix::contains(const Eigen::MatrixXd& m) const {
    if (static_cast<std::size_t>(m.rows()) != rows_ || static_cast<std::size_t>(m.cols()) != cols_) {
        return false;
    }
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            if (!(*this)(r, c).contains(m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)))) {
                return false;
            }
        }
    }
    return true;
}

IntervalMatrix operator*(const IntervalMatrix& a, const IntervalMatrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("interval matrix product: dimension mismatch");
    }
    IntervalMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            Interval acc;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
            out(i, j) = acc;
        }
    }
    return out;
}

IntervalVector operator*(const IntervalMatrix& a, std::span<const Interval> x) {
    if (a.cols() != x.size()) {
        throw std::invalid_argument("interval matrix-vector product: dimension mismatch");
    }
    IntervalVector out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        Interval acc;
        for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * x[k];
        out[i] = acc;
    }
    return out;
}

IntervalMatrix transpose(const IntervalMatrix& a) {
    IntervalMatrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    }
    return out;
}

IntervalVector to_intervals(std::span<const double> v) {
    IntervalVector out;
    out.reserve(v.size());
    for (double x : v) out.emplace_back(x);
    return out;
}

Eigen::VectorXd midpoint(std::span<const Interval> v) {
    Eigen::VectorXd m(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i)) = v[i].mid();
    return m;
}

bool contains(std::span<const Interval> box, const Eigen::VectorXd& x) {
    if (box.size() != static_cast<std::size_t>(x.size())) return false;
    for (std::size_t i = 0; i < box.size(); ++i) {
        if (!box[i].contains(x(static_cast<Eigen::Index>(i)))) return false;
    }
    return true;
}

IntervalVector solve_enclosure(const IntervalMatrix& a, std::span<const Interval> b,
                               const EnclosureOptions& opts) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) {
        throw std::invalid_argument("solve_enclosure: system must be square and conformant");
    }

    const Eigen::MatrixXd am = a.midpoint();
    const Eigen::VectorXd bm = midpoint(b);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(am);
    const double rcond = lu.rcond();
    if (!(rcond > std::numeric_limits<double>::epsilon())) {
        throw EnclosureError("solve_enclosure: midpoint matrix is singular");
    }
    const Eigen::MatrixXd r = lu.inverse();
    Eigen::VectorXd xs = lu.solve(bm);
    for (int i = 0; i < 2; ++i) xs += lu.solve(bm - am * xs);
    if (!r.allFinite() || !xs.allFinite()) {
        throw EnclosureError("solve_enclosure: midpoint matrix is singular");
    }

    const IntervalMatrix ri = IntervalMatrix::from_point(r);
    const IntervalVector xsi = to_intervals(std::span<const double>(xs.data(), n));

    IntervalVector residual = a * std::span<const Interval>(xsi);
    for (std::size_t i = 0; i < n; ++i) residual[i] = b[i] - residual[i];
    const IntervalVector z = ri * std::span<const Interval>(residual);

    IntervalMatrix c = ri * a;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) c(i, j) = Interval(i == j ? 1.0 : 0.0) - c(i, j);
    }

    IntervalVector y = z;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        IntervalVector inflated(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double eps = 0.1 * y[i].width() + std::numeric_limits<double>::min();
            inflated[i] = Interval(rounding::add_down(y[i].lo(), -eps), rounding::add_up(y[i].hi(), eps));
        }
        IntervalVector next = c * std::span<const Interval>(inflated);
        bool certified = true;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = z[i] + next[i];
            certified = certified && inflated[i].interior_contains(next[i]);
        }
        if (certified) {
            IntervalVector out(n);
            for (std::size_t i = 0; i < n; ++i) out[i] = xsi[i] + next[i];
            return out;
        }
        y = std::move(next);
    }
    throw EnclosureError("solve_enclosure: could not certify an enclosure within the iteration limit");
}

}  // namespace narid
