#include "narid/signal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace narid {

namespace {

// Sums in sorted order with Neumaier compensation, so the result does not depend
// on the order in which terms were produced (a reversed series gives identical sums).
double ordered_sum(std::vector<double>& terms) {
    std::sort(terms.begin(), terms.end());
    double sum = 0.0, comp = 0.0;
    for (double t : terms) {
        const double s = sum + t;
        comp += std::abs(sum) >= std::abs(t) ? (sum - s) + t : (t - s) + sum;
        sum = s;
    }
    return sum + comp;
}

AutocovarianceCurve autocov(std::span<const double> y, std::size_t max_lag) {
    const std::size_t n = y.size();
    if (max_lag >= n) {
        throw std::out_of_range("autocovariance: max lag must be smaller than the series length");
    }
    std::vector<double> buf(y.begin(), y.end());
    const double m = ordered_sum(buf) / static_cast<double>(n);

    AutocovarianceCurve out;
    out.values.resize(max_lag + 1);
    for (std::size_t tau = 0; tau <= max_lag; ++tau) {
        buf.resize(n - tau);
        for (std::size_t k = tau; k < n; ++k) buf[k - tau] = (y[k] - m) * (y[k - tau] - m);
        out.values[tau] = ordered_sum(buf) / static_cast<double>(n - tau);
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_number(std::string text, char decimal_separator, double& out) {
    if (decimal_separator != '.') {
        if (text.find('.') != std::string::npos) return false;
        std::replace(text.begin(), text.end(), decimal_separator, '.');
    }
    if (!text.empty() && text.front() == '+') text.erase(0, 1);
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

Signal::Signal(std::vector<double> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) {
        throw std::invalid_argument("signal must contain at least one sample");
    }
    for (double v : samples_) {
        if (!std::isfinite(v)) throw std::invalid_argument("signal samples must be finite");
    }
}

AutocovarianceCurve autocov_linear(const Signal& y, std::size_t max_lag) {
    return autocov(y.samples(), max_lag);
}

AutocovarianceCurve autocov_nonlinear(const Signal& y, std::size_t max_lag) {
    std::vector<double> sq(y.size());
    std::transform(y.begin(), y.end(), sq.begin(), [](double v) { return v * v; });
    return autocov(sq, max_lag);
}

FirstMinimum first_minimum(const AutocovarianceCurve& curve) {
    const auto& v = curve.values;
    if (v.size() < 3) {
        throw std::invalid_argument("first_minimum: curve needs at least 3 lags");
    }
    for (std::size_t tau = 1; tau + 1 < v.size(); ++tau) {
        if (v[tau] <= v[tau - 1] && v[tau] <= v[tau + 1]) return {tau, false};
    }
    return {curve.max_lag(), true};
}

std::size_t choose_decimation(std::size_t tau_m) { return std::max<std::size_t>(1, tau_m / 10); }

DecimationAnalysis analyse_decimation(const Signal& y, std::size_t max_lag) {
    DecimationAnalysis a;
    a.linear = autocov_linear(y, max_lag);
    a.nonlinear = autocov_nonlinear(y, max_lag);
    a.linear_min = first_minimum(a.linear);
    a.nonlinear_min = first_minimum(a.nonlinear);
    a.tau_m = std::min(a.linear_min.lag, a.nonlinear_min.lag);
    a.factor = choose_decimation(a.tau_m);
    return a;
}

Signal decimate(const Signal& y, std::size_t factor) {
    if (factor == 0) throw std::invalid_argument("decimate: factor must be at least 1");
    std::vector<double> out;
    out.reserve(y.size() / factor + 1);
    for (std::size_t i = 0; i < y.size(); i += factor) out.push_back(y[i]);
    return Signal(std::move(out));
}

std::pair<Signal, Signal> split(const Signal& y, double frac_id, std::size_t min_part) {
    if (!(frac_id > 0.0 && frac_id < 1.0)) {
        throw std::invalid_argument("split: identification fraction must lie in (0, 1)");
    }
    const auto n_id = static_cast<std::size_t>(std::floor(static_cast<double>(y.size()) * frac_id));
    const std::size_t n_val = y.size() - n_id;
    if (n_id < std::max<std::size_t>(min_part, 1) || n_val < std::max<std::size_t>(min_part, 1)) {
        throw std::invalid_argument("too few samples: split leaves " + std::to_string(n_id) + " identification and " +
                                    std::to_string(n_val) + " validation samples, need at least " +
                                    std::to_string(min_part) + " each");
    }
    const auto s = y.samples();
    return {Signal({s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n_id)}),
            Signal({s.begin() + static_cast<std::ptrdiff_t>(n_id), s.end()})};
}

ThreeWaySplit split_three(const Signal& y, double train_frac, double validation_frac, std::size_t min_part) {
    if (!(train_frac > 0.0 && validation_frac > 0.0 && train_frac + validation_frac < 1.0)) {
        throw std::invalid_argument("split_three: fractions must be positive and sum below 1");
    }
    const double n = static_cast<double>(y.size());
    const auto n_train = static_cast<std::size_t>(std::floor(n * train_frac));
    const auto n_val = static_cast<std::size_t>(std::floor(n * validation_frac));
    const std::size_t n_test = y.size() - n_train - n_val;
    const std::size_t need = std::max<std::size_t>(min_part, 1);
    if (n_train < need || n_val < need || n_test < need) {
        throw std::invalid_argument("too few samples for a train/validation/test split");
    }
    const auto s = y.samples();
    const auto b = s.begin();
    const auto t1 = b + static_cast<std::ptrdiff_t>(n_train);
    const auto t2 = t1 + static_cast<std::ptrdiff_t>(n_val);
    return {Signal({b, t1}), Signal({t1, t2}), Signal({t2, s.end()})};
}

double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean of an empty sequence");
    std::vector<double> buf(v.begin(), v.end());
    return ordered_sum(buf) / static_cast<double>(v.size());
}

Interval mean(std::span<const Interval> v) {
    if (v.empty()) throw std::invalid_argument("mean of an empty sequence");
    Interval acc;
    for (const auto& x : v) acc += x;
    return acc / Interval(static_cast<double>(v.size()));
}

IntervalVector to_interval_signal(std::span<const double> y, double radius) {
    IntervalVector out;
    out.reserve(y.size());
    for (double v : y) out.push_back(from_midrad(v, radius));
    return out;
}

Signal parse_signal_csv(std::istream& in, char decimal_separator) {
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        double v = 0.0;
        if (parse_number(t, decimal_separator, v)) {
            values.push_back(v);
        } else if (!first_content) {
            throw std::runtime_error("signal csv: cannot parse line " + std::to_string(line_no) + ": '" + t + "'");
        }
        first_content = false;
    }
    if (values.empty()) throw std::runtime_error("signal csv: no numeric samples found");
    return Signal(std::move(values));
}

Signal read_signal_csv(const std::filesystem::path& path, char decimal_separator) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open signal file " + path.string());
    return parse_signal_csv(in, decimal_separator);
}

void write_signal_csv(const std::filesystem::path& path, std::span<const double> y, const std::string& header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << header << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (double v : y) out << v << '\n';
}

}  // namespace narid
