#include "narid/terms.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>

namespace narid {

namespace {

void check_instant(const Term& t, std::size_t k, std::size_t n) {
    if (k >= n || k < static_cast<std::size_t>(t.max_lag())) {
        throw std::out_of_range("eval_term: instant " + std::to_string(k) + " out of range for term " +
                                t.to_string());
    }
}

void extend(std::vector<Term>& out, std::vector<int>& current, int start, int remaining, int max_lag) {
    if (remaining == 0) {
        out.emplace_back(current);
        return;
    }
    for (int lag = start; lag <= max_lag; ++lag) {
        current.push_back(lag);
        extend(out, current, lag, remaining - 1, max_lag);
        current.pop_back();
    }
}

void validate_regressor_input(std::span<const Term> terms, std::size_t n, int max_lag) {
    if (max_lag < 0 || n <= static_cast<std::size_t>(max_lag)) {
        throw std::invalid_argument("build_regressors: too few samples (" + std::to_string(n) +
                                    ") for maximum lag " + std::to_string(max_lag));
    }
    if (terms.empty()) throw std::invalid_argument("build_regressors: no terms");
    for (const auto& t : terms) {
        if (t.max_lag() > max_lag) {
            throw std::invalid_argument("build_regressors: term " + t.to_string() + " exceeds maximum lag");
        }
    }
}

}  // namespace

Term::Term(std::vector<int> lags) : lags_(std::move(lags)) {
    for (int lag : lags_) {
        if (lag < 1) throw std::invalid_argument("term lags must be positive");
    }
    std::sort(lags_.begin(), lags_.end());
}

std::string Term::to_string() const {
    if (lags_.empty()) return "const";
    std::string out;
    for (auto it = lags_.rbegin(); it != lags_.rend();) {
        const int lag = *it;
        const auto next = std::find_if(it, lags_.rend(), [lag](int l) { return l != lag; });
        const auto power = std::distance(it, next);
        if (!out.empty()) out += '*';
        out += "y(k-" + std::to_string(lag) + ")";
        if (power > 1) out += "^" + std::to_string(power);
        it = next;
    }
    return out;
}

Term parse_term(std::string_view text) {
    std::string s;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    }
    if (s == "const" || s == "1") return Term{};
    std::vector<int> lags;
    std::size_t pos = 0;
    auto fail = [&]() -> Term { throw std::invalid_argument("cannot parse term '" + std::string(text) + "'"); };
    auto read_int = [&](int& v) {
        const auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), v);
        if (ec != std::errc()) return false;
        pos = static_cast<std::size_t>(ptr - s.data());
        return true;
    };
    while (pos < s.size()) {
        if (s.compare(pos, 4, "y(k-") != 0) return fail();
        pos += 4;
        int lag = 0;
        if (!read_int(lag) || pos >= s.size() || s[pos] != ')' || lag < 1) return fail();
        ++pos;
        int power = 1;
        if (pos < s.size() && s[pos] == '^') {
            ++pos;
            if (!read_int(power) || power < 1) return fail();
        }
        lags.insert(lags.end(), static_cast<std::size_t>(power), lag);
        if (pos < s.size()) {
            if (s[pos] != '*') return fail();
            ++pos;
            if (pos == s.size()) return fail();
        }
    }
    if (lags.empty()) return fail();
    return Term(std::move(lags));
}

std::vector<Term> generate_candidates(int degree, int max_lag) {
    if (degree < 1 || max_lag < 1) {
        throw std::invalid_argument("generate_candidates: degree and max lag must be >= 1");
    }
    std::vector<Term> out;
    std::vector<int> current;
    for (int d = 0; d <= degree; ++d) extend(out, current, 1, d, max_lag);
    return out;
}

double eval_term(const Term& t, std::span<const double> y, std::size_t k) {
    check_instant(t, k, y.size());
    double p = 1.0;
    for (int lag : t.lags()) p *= y[k - static_cast<std::size_t>(lag)];
    return p;
}

Interval eval_term(const Term& t, std::span<const Interval> y, std::size_t k) {
    check_instant(t, k, y.size());
    Interval p(1.0);
    const auto& lags = t.lags();
    // Equal lags are grouped and raised with pow_int; distinct factors multiplied left to right.
    for (std::size_t i = 0; i < lags.size();) {
        std::size_t j = i;
        while (j < lags.size() && lags[j] == lags[i]) ++j;
        p = p * pow_int(y[k - static_cast<std::size_t>(lags[i])], static_cast<unsigned>(j - i));
        i = j;
    }
    return p;
}

RegressorSet build_regressors(std::span<const Term> terms, std::span<const double> y, int max_lag) {
    validate_regressor_input(terms, y.size(), max_lag);
    const std::size_t first = static_cast<std::size_t>(max_lag);
    const auto rows = static_cast<Eigen::Index>(y.size() - first);
    RegressorSet out{Eigen::MatrixXd(rows, static_cast<Eigen::Index>(terms.size())), Eigen::VectorXd(rows)};
    for (Eigen::Index i = 0; i < rows; ++i) {
        const std::size_t k = first + static_cast<std::size_t>(i);
        out.target(i) = y[k];
        for (std::size_t j = 0; j < terms.size(); ++j) {
            out.psi(i, static_cast<Eigen::Index>(j)) = eval_term(terms[j], y, k);
        }
    }
    return out;
}

IntervalRegressorSet build_regressors(std::span<const Term> terms, std::span<const Interval> y, int max_lag) {
    validate_regressor_input(terms, y.size(), max_lag);
    const std::size_t first = static_cast<std::size_t>(max_lag);
    const std::size_t rows = y.size() - first;
    IntervalRegressorSet out{IntervalMatrix(rows, terms.size()), IntervalVector(rows)};
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t k = first + i;
        out.target[i] = y[k];
        for (std::size_t j = 0; j < terms.size(); ++j) out.psi(i, j) = eval_term(terms[j], y, k);
    }
    return out;
}

}  // namespace narid
