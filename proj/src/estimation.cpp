#include "narid/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

namespace narid {

double ErrRanking::cumulative() const {
    return std::accumulate(steps.begin(), steps.end(), 0.0, [](double s, const ErrStep& e) { return s + e.err; });
}

std::vector<Term> ErrRanking::leading_terms(std::size_t n) const {
    std::vector<Term> out;
    for (std::size_t i = 0; i < std::min(n, steps.size()); ++i) out.push_back(steps[i].term);
    return out;
}

ErrRanking err_rank(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y, std::span<const Term> candidates,
                    const ErrOptions& opts) {
    if (psi.rows() != y.size() || static_cast<std::size_t>(psi.cols()) != candidates.size()) {
        throw std::invalid_argument("err_rank: regressor matrix, target and candidate list disagree in size");
    }
    const double yy = y.squaredNorm();
    if (!(yy > 0.0)) throw std::invalid_argument("err_rank: target has zero energy");

    ErrRanking out;
    Eigen::MatrixXd w = psi;
    const Eigen::VectorXd norms = psi.colwise().norm();
    const double floor = opts.rank_tolerance * (norms.size() > 0 ? norms.maxCoeff() : 0.0);

    std::vector<std::size_t> remaining;
    for (Eigen::Index j = 0; j < psi.cols(); ++j) {
        if (norms(j) > floor) {
            remaining.push_back(static_cast<std::size_t>(j));
        } else {
            out.warnings.push_back("candidate " + candidates[static_cast<std::size_t>(j)].to_string() +
                                   " has zero norm and was skipped");
        }
    }

    while (!remaining.empty() && out.steps.size() < opts.max_steps) {
        std::size_t best = remaining.size();
        double best_err = -1.0;
        for (std::size_t r = 0; r < remaining.size(); ++r) {
            const auto col = w.col(static_cast<Eigen::Index>(remaining[r]));
            const double ww = col.squaredNorm();
            const double wy = col.dot(y);
            const double err = wy * wy / (ww * yy);
            if (err > best_err) {
                best_err = err;
                best = r;
            }
        }
        const std::size_t chosen = remaining[best];
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
        out.steps.push_back({chosen, candidates[chosen], std::clamp(best_err, 0.0, 1.0)});

        const Eigen::VectorXd q = w.col(static_cast<Eigen::Index>(chosen)).normalized();
        std::vector<std::size_t> kept;
        kept.reserve(remaining.size());
        for (std::size_t j : remaining) {
            auto col = w.col(static_cast<Eigen::Index>(j));
            col -= q.dot(col) * q;
            if (col.norm() > opts.rank_tolerance * norms(static_cast<Eigen::Index>(j))) {
                kept.push_back(j);
            } else {
                out.warnings.push_back("candidate " + candidates[j].to_string() +
                                       " is linearly dependent on selected terms and was skipped");
            }
        }
        remaining = std::move(kept);
    }
    return out;
}

Eigen::VectorXd ls_estimate(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y, double rank_tolerance) {
    if (psi.rows() != y.size()) throw std::invalid_argument("ls_estimate: row count mismatch");
    if (psi.cols() == 0 || psi.rows() < psi.cols()) {
        throw RankDeficientError("ls_estimate: fewer rows than columns", {});
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(psi);
    qr.setThreshold(rank_tolerance);
    if (qr.rank() < psi.cols()) {
        std::vector<std::size_t> cols;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index i = qr.rank(); i < psi.cols(); ++i) cols.push_back(static_cast<std::size_t>(perm(i)));
        std::sort(cols.begin(), cols.end());
        std::string names;
        for (std::size_t c : cols) names += (names.empty() ? "" : ", ") + std::to_string(c);
        throw RankDeficientError("ls_estimate: rank deficient regressors, dependent columns: " + names,
                                 std::move(cols));
    }
    return qr.solve(y);
}

double aic_value(double rss, std::size_t samples, std::size_t parameters) {
    const double n = static_cast<double>(samples);
    const double var = std::max(rss / n, std::numeric_limits<double>::min());
    return n * std::log(var) + 2.0 * static_cast<double>(parameters);
}

Model aic_select(const ErrRanking& ranking, const Eigen::MatrixXd& psi, const Eigen::VectorXd& y, int max_lag,
                 const AicOptions& opts) {
    if (ranking.steps.empty()) throw std::invalid_argument("aic_select: empty ranking");
    const std::size_t limit = std::min(ranking.steps.size(), opts.max_terms);
    const auto samples = static_cast<std::size_t>(y.size());

    Model m;
    m.max_lag = max_lag;
    m.aic_trace.assign(limit, std::numeric_limits<double>::quiet_NaN());

    std::size_t best = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_theta;
    for (std::size_t n = 1; n <= limit; ++n) {
        Eigen::MatrixXd x(psi.rows(), static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j) {
            x.col(static_cast<Eigen::Index>(j)) = psi.col(static_cast<Eigen::Index>(ranking.steps[j].column));
        }
        try {
            Eigen::VectorXd theta = ls_estimate(x, y);
            const double rss = (y - x * theta).squaredNorm();
            const double aic = aic_value(rss, samples, n);
            m.aic_trace[n - 1] = aic;
            if (aic < best_aic) {
                best_aic = aic;
                best = n;
                best_theta = std::move(theta);
            }
        } catch (const RankDeficientError& e) {
            m.warnings.push_back("AIC size " + std::to_string(n) + " skipped: " + e.what());
        }
    }
    if (best == 0) throw std::invalid_argument("aic_select: no model size could be fitted");

    m.selected_size = best;
    for (std::size_t j = 0; j < best; ++j) {
        m.terms.push_back(ranking.steps[j].term);
        m.err.push_back(ranking.steps[j].err);
    }
    m.theta.assign(best_theta.data(), best_theta.data() + best_theta.size());
    m.warnings.insert(m.warnings.end(), ranking.warnings.begin(), ranking.warnings.end());
    return m;
}

IntervalVector interval_ls_normal(const IntervalMatrix& psi, std::span<const Interval> y) {
    if (psi.rows() != y.size()) throw std::invalid_argument("interval_ls_estimate: row count mismatch");
    const std::size_t n = psi.cols();
    IntervalMatrix normal(n, n);
    IntervalVector rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            Interval acc;
            for (std::size_t k = 0; k < psi.rows(); ++k) {
                acc += i == j ? sqr(psi(k, i)) : psi(k, i) * psi(k, j);
            }
            normal(i, j) = acc;
            normal(j, i) = acc;
        }
        Interval acc;
        for (std::size_t k = 0; k < psi.rows(); ++k) acc += psi(k, i) * y[k];
        rhs[i] = acc;
    }
    return solve_enclosure(normal, rhs);
}

namespace {

// Above this many rows the dense preconditioner of the augmented system gets too large.
constexpr std::size_t kAugmentedMaxRows = 3000;

Interval inflate(const Interval& x) {
    const double eps = 0.1 * x.width() + std::numeric_limits<double>::min();
    return Interval(rounding::add_down(x.lo(), -eps), rounding::add_up(x.hi(), eps));
}

// Upper bound of sum_k a(k) * b(k) for nonnegative a, b.
double dot_up(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s = rounding::add_up(s, rounding::mul_up(a[k], b[k]));
    return s;
}

// Enclosure of sum_k a(k) * b(k) for point vectors, starting from `init`.
Interval dot_enclose(const double* a, const double* b, std::size_t n, double init = 0.0) {
    double lo = init, hi = init;
    for (std::size_t k = 0; k < n; ++k) {
        lo = rounding::add_down(lo, rounding::mul_down(a[k], b[k]));
        hi = rounding::add_up(hi, rounding::mul_up(a[k], b[k]));
    }
    return Interval(lo, hi);
}

double mag_of_difference(double delta, const Interval& x) {
    return std::max(std::abs(rounding::add_up(delta, -x.lo())), std::abs(rounding::add_down(delta, -x.hi())));
}

}  // namespace

IntervalVector interval_ls_augmented(const IntervalMatrix& psi, std::span<const Interval> y,
                                     const EnclosureOptions& opts) {
    const std::size_t rows = psi.rows(), p = psi.cols();
    if (rows != y.size()) throw std::invalid_argument("interval_ls_estimate: row count mismatch");
    if (rows <= p) throw EnclosureError("interval_ls_augmented: system is not overdetermined");
    if (rows > kAugmentedMaxRows) {
        throw EnclosureError("interval_ls_augmented: more than " + std::to_string(kAugmentedMaxRows) + " rows");
    }
    const auto N = static_cast<Eigen::Index>(rows), P = static_cast<Eigen::Index>(p), n = N + P;

    // Unknowns x = (theta, r); equations Psi theta + r = y (N rows) and Psi^T r = 0 (P rows).
    const Eigen::MatrixXd pc = psi.midpoint();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(pc);
    const Eigen::MatrixXd rq = qr.matrixQR().topRows(P).triangularView<Eigen::Upper>();
    const double dmax = rq.diagonal().cwiseAbs().maxCoeff();
    if (!(rq.diagonal().cwiseAbs().minCoeff() > 1e-13 * dmax)) {
        throw EnclosureError("interval_ls_augmented: midpoint regressor matrix is rank deficient");
    }
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(N, P);
    const Eigen::MatrixXd rinv =
        rq.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(P, P));
    const Eigen::MatrixXd pplus = rinv * q.transpose();  // (Pc^T Pc)^-1 Pc^T
    const Eigen::MatrixXd g = rinv * rinv.transpose();   // (Pc^T Pc)^-1

    // Approximate inverse of the midpoint augmented matrix. Any R is admissible; its
    // quality only decides whether verification succeeds.
    // Stored transposed: row u of R is column u of rt.
    Eigen::MatrixXd rt(n, n);
    rt.topLeftCorner(N, P) = pplus.transpose();
    rt.bottomLeftCorner(P, P) = -g;
    rt.topRightCorner(N, N) = Eigen::MatrixXd::Identity(N, N) - q * q.transpose();
    rt.bottomRightCorner(P, N) = pplus;
    if (!rt.allFinite()) throw EnclosureError("interval_ls_augmented: preconditioner is not finite");
    const Eigen::MatrixXd r_abs_t = rt.cwiseAbs();

    // |I - R Ac| bounded entrywise. Columns of Ac: theta -> (Pc; 0), r_i -> (e_i; Pc(i, :)^T).
    Eigen::MatrixXd c_abs_t(n, n);
    const Eigen::MatrixXd pct = pc.transpose();
    for (Eigen::Index u = 0; u < n; ++u) {
        const double* ru = rt.col(u).data();
        for (Eigen::Index j = 0; j < P; ++j) {
            const Interval v = dot_enclose(ru, pc.col(j).data(), rows);
            c_abs_t(j, u) = mag_of_difference(u == j ? 1.0 : 0.0, v);
        }
        for (Eigen::Index i = 0; i < N; ++i) {
            const Interval v = dot_enclose(ru + N, pct.col(i).data(), p, ru[i]);
            c_abs_t(P + i, u) = mag_of_difference(u == P + i ? 1.0 : 0.0, v);
        }
    }

    // Entrywise magnitude of the data deviation from the midpoint matrix.
    Eigen::MatrixXd dev(N, P);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            dev(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (psi(i, j) - Interval(pc(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))).mag();
        }
    }
    const Eigen::MatrixXd dev_t = dev.transpose();

    // Approximate solution and the enclosed residual b - A x0 over all member data.
    const Eigen::VectorXd ym = midpoint(y);
    const Eigen::VectorXd theta0 = qr.solve(ym);
    const Eigen::VectorXd r0 = ym - pc * theta0;
    if (!theta0.allFinite()) throw EnclosureError("interval_ls_augmented: midpoint solve failed");
    IntervalVector res(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < rows; ++i) {
        Interval acc(r0(static_cast<Eigen::Index>(i)));
        for (std::size_t j = 0; j < p; ++j) acc += psi(i, j) * Interval(theta0(static_cast<Eigen::Index>(j)));
        res[i] = y[i] - acc;
    }
    for (std::size_t j = 0; j < p; ++j) {
        Interval acc;
        for (std::size_t i = 0; i < rows; ++i) acc += psi(i, j) * Interval(r0(static_cast<Eigen::Index>(i)));
        res[rows + j] = -acc;
    }
    IntervalVector z(static_cast<std::size_t>(n));
    for (Eigen::Index u = 0; u < n; ++u) {
        Interval acc;
        const double* ru = rt.col(u).data();
        for (Eigen::Index e = 0; e < n; ++e) acc += Interval(ru[e]) * res[static_cast<std::size_t>(e)];
        z[static_cast<std::size_t>(u)] = acc;
    }

    // Krawczyk iteration in magnitude form: z + (I - R A) X is contained in
    // z +- (|I - R Ac| |X| + |R| |A - Ac| |X|).
    IntervalVector x = z;
    std::vector<double> m(static_cast<std::size_t>(n)), q_dev(static_cast<std::size_t>(n));
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        for (std::size_t u = 0; u < x.size(); ++u) {
            x[u] = inflate(x[u]);
            m[u] = x[u].mag();
        }
        // |A - Ac| |X|: theta part drives the first N equations, r part the last P.
        for (Eigen::Index i = 0; i < N; ++i) q_dev[static_cast<std::size_t>(i)] = dot_up(dev_t.col(i).data(), m.data(), p);
        for (Eigen::Index j = 0; j < P; ++j) {
            q_dev[static_cast<std::size_t>(N + j)] = dot_up(dev.col(j).data(), m.data() + p, rows);
        }
        IntervalVector next(static_cast<std::size_t>(n));
        bool certified = true;
        for (Eigen::Index u = 0; u < n; ++u) {
            const double spread = rounding::add_up(dot_up(c_abs_t.col(u).data(), m.data(), static_cast<std::size_t>(n)),
                                                   dot_up(r_abs_t.col(u).data(), q_dev.data(), static_cast<std::size_t>(n)));
            const Interval& zu = z[static_cast<std::size_t>(u)];
            next[static_cast<std::size_t>(u)] =
                Interval(rounding::add_down(zu.lo(), -spread), rounding::add_up(zu.hi(), spread));
            certified = certified && x[static_cast<std::size_t>(u)].interior_contains(next[static_cast<std::size_t>(u)]);
        }
        if (certified) {
            IntervalVector out(p);
            for (std::size_t j = 0; j < p; ++j) out[j] = Interval(theta0(static_cast<Eigen::Index>(j))) + next[j];
            return out;
        }
        x = std::move(next);
    }
    throw EnclosureError("interval_ls_augmented: could not certify an enclosure within the iteration limit");
}

const char* to_string(IntervalLsMethod m) noexcept {
    return m == IntervalLsMethod::augmented ? "augmented" : "normal_equations";
}

IntervalLsResult interval_ls_solve(const IntervalMatrix& psi, std::span<const Interval> y) {
    try {
        return {interval_ls_normal(psi, y), IntervalLsMethod::normal_equations};
    } catch (const EnclosureError&) {
    }
    return {interval_ls_augmented(psi, y), IntervalLsMethod::augmented};
}

IntervalVector interval_ls_estimate(const IntervalMatrix& psi, std::span<const Interval> y) {
    return interval_ls_solve(psi, y).theta;
}

}  // namespace narid
