#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "narid/signal.hpp"
#include "narid/terms.hpp"

using narid::Interval;
using narid::Term;

namespace {

// Every lag vector in {0..ny}^l, zeros dropped and sorted: the set of distinct monomials.
std::set<std::vector<int>> brute_force_monomials(int degree, int max_lag) {
    std::set<std::vector<int>> out;
    std::vector<int> digits(static_cast<std::size_t>(degree), 0);
    while (true) {
        std::vector<int> lags;
        for (int d : digits) {
            if (d > 0) lags.push_back(d);
        }
        std::sort(lags.begin(), lags.end());
        out.insert(lags);
        std::size_t i = 0;
        while (i < digits.size() && ++digits[i] > max_lag) digits[i++] = 0;
        if (i == digits.size()) break;
    }
    return out;
}

long binomial(int n, int k) {
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

TEST(Term, CanonicalText) {
    EXPECT_EQ(Term().to_string(), "const");
    EXPECT_EQ(Term({1}).to_string(), "y(k-1)");
    EXPECT_EQ(Term({4, 1, 4, 4}).to_string(), "y(k-4)^3*y(k-1)");
    EXPECT_EQ(Term({3, 4}).to_string(), "y(k-4)*y(k-3)");
    EXPECT_THROW(Term({0}), std::invalid_argument);
}

TEST(Term, EqualMultisetsCompareEqual) {
    EXPECT_EQ(Term({4, 1, 4}), Term({1, 4, 4}));
    EXPECT_NE(Term({1, 4}), Term({1, 4, 4}));
    EXPECT_EQ(Term({2, 3}).degree(), 2u);
    EXPECT_EQ(Term({2, 3}).max_lag(), 3);
    EXPECT_TRUE(Term().is_constant());
}

TEST(Term, ParseRoundTrip) {
    for (const Term& t : narid::generate_candidates(4, 4)) EXPECT_EQ(narid::parse_term(t.to_string()), t);
    EXPECT_EQ(narid::parse_term("y(k-1) * y(k-4)^3"), Term({1, 4, 4, 4}));
    EXPECT_EQ(narid::parse_term("1"), Term());
    for (const char* bad : {"", "y(k-0)", "y(k-1)*", "x(k-1)", "y(k-1)^0", "y(k-2"}) {
        EXPECT_THROW((void)narid::parse_term(bad), std::invalid_argument) << bad;
    }
}

TEST(Candidates, SmallSetsEnumerated) {
    const auto c11 = narid::generate_candidates(1, 1);
    ASSERT_EQ(c11.size(), 2u);
    EXPECT_EQ(c11[0], Term());
    EXPECT_EQ(c11[1], Term({1}));

    const auto c22 = narid::generate_candidates(2, 2);
    const std::vector<Term> expected{Term(), Term({1}), Term({2}), Term({1, 1}), Term({1, 2}), Term({2, 2})};
    EXPECT_EQ(c22, expected);
}

TEST(Candidates, CountMatchesBruteForceEnumeration) {
    for (int l = 1; l <= 6; ++l) {
        for (int ny = 1; ny <= 6; ++ny) {
            const auto c = narid::generate_candidates(l, ny);
            const auto ref = brute_force_monomials(l, ny);
            ASSERT_EQ(c.size(), ref.size()) << l << "," << ny;
            EXPECT_EQ(static_cast<long>(c.size()), binomial(ny + l, l));
            std::set<std::vector<int>> seen;
            for (const auto& t : c) {
                EXPECT_LE(t.degree(), static_cast<std::size_t>(l));
                EXPECT_LE(t.max_lag(), ny);
                EXPECT_TRUE(seen.insert(t.lags()).second) << "duplicate " << t.to_string();
            }
            EXPECT_EQ(seen, ref);
        }
    }
    EXPECT_EQ(narid::generate_candidates(4, 4).size(), 70u);
    EXPECT_EQ(narid::generate_candidates(3, 5), narid::generate_candidates(3, 5));
}

TEST(EvalTerm, Products) {
    const std::vector<double> y{2.0, 3.0, 5.0, 7.0, 11.0};
    EXPECT_EQ(narid::eval_term(Term(), y, 4), 1.0);
    EXPECT_EQ(narid::eval_term(Term({1}), y, 1), 2.0);
    // y(k-4)^3 y(k-1) at k = 4: 2^3 * 7.
    EXPECT_EQ(narid::eval_term(Term({4, 4, 4, 1}), y, 4), 56.0);
    EXPECT_THROW((void)narid::eval_term(Term({4}), y, 3), std::out_of_range);
    EXPECT_THROW((void)narid::eval_term(Term({1}), y, 5), std::out_of_range);
}

TEST(EvalTerm, IntervalPowerIsDependencyAware) {
    const std::vector<Interval> y{Interval(-1.0, 2.0), Interval(1.0)};
    const Interval sq = narid::eval_term(Term({1, 1}), y, 1);
    EXPECT_EQ(sq.lo(), 0.0);
    EXPECT_EQ(sq.hi(), 4.0);
}

TEST(Regressors, DirectConstruction) {
    const std::vector<double> y{1, 2, 3, 4};
    const std::vector<Term> terms{Term(), Term({1})};
    const auto r = narid::build_regressors(terms, y, 1);
    Eigen::MatrixXd psi(3, 2);
    psi << 1, 1, 1, 2, 1, 3;
    EXPECT_EQ(r.psi, psi);
    EXPECT_EQ(r.target, Eigen::Vector3d(2, 3, 4));
    EXPECT_THROW((void)narid::build_regressors(terms, std::vector<double>{1.0}, 1), std::invalid_argument);
    EXPECT_THROW((void)narid::build_regressors(std::vector<Term>{Term({3})}, y, 2), std::invalid_argument);
}

TEST(Regressors, ZeroRadiusIsDegenerate) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> y(40);
    for (auto& v : y) v = g(rng);
    const auto terms = narid::generate_candidates(3, 3);
    const auto pt = narid::build_regressors(terms, y, 3);
    const auto iv = narid::build_regressors(terms, narid::to_interval_signal(y, 0.0), 3);
    for (std::size_t i = 0; i < iv.psi.rows(); ++i) {
        for (std::size_t j = 0; j < iv.psi.cols(); ++j) {
            // Inexact products are widened by an ulp, never more.
            const double p = pt.psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            EXPECT_TRUE(iv.psi(i, j).contains(p));
            EXPECT_LE(iv.psi(i, j).width(), 1e-15 * std::abs(p));
        }
    }
}

TEST(Regressors, IntervalContainsPointMatrix) {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 1.5);
    std::uniform_real_distribution<double> logr(-8.0, -1.0);
    const auto terms = narid::generate_candidates(4, 4);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> y(30);
        for (auto& v : y) v = g(rng);
        const double radius = std::pow(10.0, logr(rng));
        const auto pt = narid::build_regressors(terms, y, 4);
        const auto iv = narid::build_regressors(terms, narid::to_interval_signal(y, radius), 4);
        ASSERT_TRUE(iv.psi.contains(pt.psi)) << "trial " << trial;
        for (Eigen::Index i = 0; i < pt.target.size(); ++i) ASSERT_TRUE(iv.target[static_cast<std::size_t>(i)].contains(pt.target(i)));
    }
}
