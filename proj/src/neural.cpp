#include "narid/neural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <stdexcept>

namespace narid {

namespace {

constexpr const char* kMagic = "narid-mlp";
constexpr int kFormatVersion = 1;
constexpr double kLambdaFloor = 1e-15;

double mse_data_units(const Eigen::VectorXd& e, const MinMaxMap& scale) {
    if (e.size() == 0) return 0.0;
    const double g = scale.gain();
    return e.squaredNorm() / static_cast<double>(e.size()) / (g * g);
}

void init_weights(MlpNarModel& m, std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(m.hidden)};
    std::mt19937_64 rng(seq);
    const double in_bound = 1.0 / std::sqrt(static_cast<double>(m.delays));
    const double out_bound = 1.0 / std::sqrt(static_cast<double>(m.hidden));
    std::uniform_real_distribution<double> in(-in_bound, in_bound), out(-out_bound, out_bound);
    for (Eigen::Index i = 0; i < m.w1.size(); ++i) m.w1.data()[i] = in(rng);
    for (Eigen::Index i = 0; i < m.b1.size(); ++i) m.b1(i) = in(rng);
    for (Eigen::Index i = 0; i < m.w2.size(); ++i) m.w2(i) = out(rng);
    m.b2 = out(rng);
}

}  // namespace

MinMaxMap::MinMaxMap(double min, double max) : min_(min), max_(max) {
    if (!std::isfinite(min) || !std::isfinite(max) || max < min) {
        throw std::invalid_argument("normalisation range must be finite with min <= max");
    }
    if (max > min) {
        gain_ = 2.0 / (max - min);
        offset_ = 1.0;
    } else {
        gain_ = 1.0;
        offset_ = 0.0;
    }
}

MinMaxMap MinMaxMap::fit(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("cannot fit a normalisation to no values");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return MinMaxMap(*lo, *hi);
}

MlpNarModel::MlpNarModel(std::size_t delays_, std::size_t hidden_)
    : delays(delays_),
      hidden(hidden_),
      w1(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(hidden_), static_cast<Eigen::Index>(delays_))),
      b1(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden_))),
      w2(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden_))) {
    if (delays_ == 0 || hidden_ == 0) throw std::invalid_argument("network needs at least one delay and one unit");
}

Eigen::VectorXd MlpNarModel::parameters() const {
    Eigen::VectorXd p(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index i = 0;
    for (Eigen::Index h = 0; h < w1.rows(); ++h) {
        for (Eigen::Index j = 0; j < w1.cols(); ++j) p(i++) = w1(h, j);
    }
    p.segment(i, b1.size()) = b1;
    i += b1.size();
    p.segment(i, w2.size()) = w2;
    i += w2.size();
    p(i) = b2;
    return p;
}

void MlpNarModel::set_parameters(const Eigen::VectorXd& p) {
    if (p.size() != static_cast<Eigen::Index>(parameter_count())) {
        throw std::invalid_argument("parameter vector has the wrong length");
    }
    if (!p.allFinite()) throw std::invalid_argument("network weights must be finite");
    Eigen::Index i = 0;
    for (Eigen::Index h = 0; h < w1.rows(); ++h) {
        for (Eigen::Index j = 0; j < w1.cols(); ++j) w1(h, j) = p(i++);
    }
    b1 = p.segment(i, b1.size());
    i += b1.size();
    w2 = p.segment(i, w2.size());
    i += w2.size();
    b2 = p(i);
}

double MlpNarModel::forward(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return w2.dot((w1 * x + b1).array().tanh().matrix()) + b2;
}

PairSet make_pairs(std::span<const double> y, std::size_t delays, const MinMaxMap& scale) {
    if (y.size() <= delays) throw std::invalid_argument("series too short for the number of delays");
    const auto rows = static_cast<Eigen::Index>(y.size() - delays);
    PairSet p{Eigen::MatrixXd(rows, static_cast<Eigen::Index>(delays)), Eigen::VectorXd(rows)};
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t k = delays + static_cast<std::size_t>(r);
        p.targets(r) = scale.normalize(y[k]);
        for (std::size_t j = 0; j < delays; ++j) p.inputs(r, static_cast<Eigen::Index>(j)) = scale.normalize(y[k - 1 - j]);
    }
    return p;
}

Eigen::VectorXd network_errors(const MlpNarModel& m, const PairSet& data) {
    const Eigen::MatrixXd act = ((data.inputs * m.w1.transpose()).rowwise() + m.b1.transpose()).array().tanh();
    return data.targets - ((act * m.w2).array() + m.b2).matrix();
}

Eigen::MatrixXd error_jacobian(const MlpNarModel& m, const PairSet& data) {
    const Eigen::Index n = data.inputs.rows();
    const auto h = static_cast<Eigen::Index>(m.hidden);
    const auto d = static_cast<Eigen::Index>(m.delays);
    const Eigen::MatrixXd act = ((data.inputs * m.w1.transpose()).rowwise() + m.b1.transpose()).array().tanh();
    // de/dw = -df/dw; df/dz_h = w2_h (1 - a_h^2).
    Eigen::ArrayXXd dz = act.array().square() - 1.0;
    dz.rowwise() *= m.w2.transpose().array();

    Eigen::MatrixXd j(n, static_cast<Eigen::Index>(m.parameter_count()));
    for (Eigen::Index u = 0; u < h; ++u) {
        for (Eigen::Index v = 0; v < d; ++v) j.col(u * d + v) = dz.col(u).matrix().cwiseProduct(data.inputs.col(v));
    }
    j.middleCols(h * d, h) = dz.matrix();
    j.middleCols(h * d + h, h) = -act;
    j.col(h * d + 2 * h).setConstant(-1.0);
    return j;
}

Eigen::VectorXd lm_step(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& errors, double lambda) {
    Eigen::MatrixXd a = jacobian.transpose() * jacobian;
    a.diagonal().array() += lambda;
    return a.ldlt().solve(-(jacobian.transpose() * errors));
}

TrainResult train_lm_on_pairs(const PairSet& train, const PairSet& val, const MinMaxMap& scale, std::size_t hidden,
                              std::uint64_t seed, const LmOptions& opts) {
    if (hidden == 0) throw std::invalid_argument("train_lm: hidden units must be at least 1");
    if (train.inputs.rows() == 0 || train.inputs.rows() != train.targets.size()) {
        throw std::invalid_argument("train_lm: empty or inconsistent training pairs");
    }
    const bool has_val = val.inputs.rows() > 0;

    TrainResult out{MlpNarModel(static_cast<std::size_t>(train.inputs.cols()), hidden), {}};
    MlpNarModel& m = out.model;
    m.scale = scale;
    init_weights(m, seed);
    TrainReport& rep = out.report;

    Eigen::VectorXd w = m.parameters();
    Eigen::VectorXd e = network_errors(m, train);
    double sse = e.squaredNorm();
    double lambda = opts.lambda_init;

    auto score = [&](const MlpNarModel& net, double train_sse) {
        return has_val ? mse_data_units(network_errors(net, val), scale)
                       : train_sse / static_cast<double>(train.targets.size()) / (scale.gain() * scale.gain());
    };
    Eigen::VectorXd best_w = w;
    rep.best_mse = score(m, sse);
    double prev_val = rep.best_mse;
    std::size_t fails = 0;

    if (!std::isfinite(sse)) {
        rep.stop_reason = "non_finite";
        return out;
    }
    rep.stop_reason = "max_epochs";
    for (std::size_t epoch = 1; epoch <= opts.max_epochs; ++epoch) {
        if (mse_data_units(e, scale) <= opts.goal) {
            rep.stop_reason = "goal";
            break;
        }
        const Eigen::MatrixXd jac = error_jacobian(m, train);
        bool accepted = false;
        bool non_finite = false;
        while (lambda <= opts.lambda_max) {
            const Eigen::VectorXd trial = w + lm_step(jac, e, lambda);
            if (!trial.allFinite()) {
                lambda *= opts.lambda_increase;
                continue;
            }
            m.set_parameters(trial);
            const Eigen::VectorXd e_trial = network_errors(m, train);
            const double sse_trial = e_trial.squaredNorm();
            if (!std::isfinite(sse_trial)) {
                non_finite = true;
            } else if (sse_trial < sse) {
                w = trial;
                e = e_trial;
                sse = sse_trial;
                lambda = std::max(lambda * opts.lambda_decrease, kLambdaFloor);
                accepted = true;
                break;
            }
            lambda *= opts.lambda_increase;
        }
        m.set_parameters(w);
        if (!accepted) {
            rep.stop_reason = non_finite ? "non_finite" : "lambda_max";
            break;
        }

        rep.train_mse.push_back(mse_data_units(e, scale));
        rep.lambda.push_back(lambda);
        const double current = score(m, sse);
        if (has_val) rep.val_mse.push_back(current);
        if (current < rep.best_mse) {
            rep.best_mse = current;
            rep.best_epoch = epoch;
            best_w = w;
        }
        if (has_val) {
            fails = current > prev_val ? fails + 1 : 0;
            prev_val = current;
            if (fails >= opts.max_fail) {
                rep.stop_reason = "validation";
                break;
            }
        }
    }
    m.set_parameters(best_w);
    return out;
}

TrainResult train_lm(const Signal& train, const Signal& validation, std::size_t hidden, std::uint64_t seed,
                     const LmOptions& opts, std::size_t delays) {
    if (train.size() <= delays + 10 || validation.size() <= delays + 10) {
        throw std::invalid_argument("train_lm: series must be longer than delays + 10 samples");
    }
    const MinMaxMap scale = MinMaxMap::fit(train.samples());
    return train_lm_on_pairs(make_pairs(train.samples(), delays, scale),
                             make_pairs(validation.samples(), delays, scale), scale, hidden, seed, opts);
}

SweepResult sweep_hidden(const Signal& y, std::size_t hidden_min, std::size_t hidden_max, std::uint64_t seed,
                         const LmOptions& opts, std::size_t delays) {
    if (hidden_min == 0 || hidden_max < hidden_min) throw std::invalid_argument("sweep_hidden: empty hidden range");
    const ThreeWaySplit parts = split_three(y, 0.6, 0.2, delays + 11);
    const double ybar = mean(parts.train.samples());

    SweepResult out;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t h = hidden_min; h <= hidden_max; ++h) {
        try {
            TrainResult r = train_lm(parts.train, parts.validation, h, seed, opts, delays);
            const Prediction p = predict_nn(r.model, parts.test.samples(), NnMode::one_step);
            const auto measured = parts.test.samples().subspan(p.first_instant);
            double test = std::numeric_limits<double>::quiet_NaN();
            try {
                test = rmse(p.values, measured, ybar);
            } catch (const std::invalid_argument&) {
            }
            out.table.push_back({h, r.report.best_mse, test, r.report.train_mse.size(), r.report.stop_reason});
            if (r.report.best_mse < best) {
                best = r.report.best_mse;
                out.best = std::move(r.model);
                out.best_report = std::move(r.report);
            }
        } catch (const std::exception& e) {
            out.failures.push_back("hidden " + std::to_string(h) + ": " + e.what());
        }
    }
    if (out.table.empty()) throw std::runtime_error("sweep_hidden: every training run failed");
    return out;
}

Prediction predict_nn(const MlpNarModel& m, std::span<const double> y, NnMode mode) {
    if (y.size() <= m.delays) throw std::invalid_argument("predict_nn: insufficient history");
    Prediction p{mode == NnMode::one_step ? 1u : 0u, m.delays, {}, false};
    std::vector<double> hist(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(m.delays));
    Eigen::VectorXd x(static_cast<Eigen::Index>(m.delays));
    for (std::size_t k = m.delays; k < y.size(); ++k) {
        for (std::size_t j = 0; j < m.delays; ++j) {
            const double v = mode == NnMode::one_step ? y[k - 1 - j] : hist[k - 1 - j];
            x(static_cast<Eigen::Index>(j)) = m.scale.normalize(v);
        }
        const double out = m.scale.denormalize(m.forward(x));
        hist.push_back(out);
        p.values.push_back(out);
    }
    return p;
}

void save_mlp(const MlpNarModel& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << kMagic << ' ' << kFormatVersion << '\n'
        << std::setprecision(std::numeric_limits<double>::max_digits10) << "delays " << m.delays << '\n'
        << "hidden " << m.hidden << '\n'
        << "range " << m.scale.min() << ' ' << m.scale.max() << '\n'
        << "weights " << m.parameter_count() << '\n';
    const Eigen::VectorXd p = m.parameters();
    for (Eigen::Index i = 0; i < p.size(); ++i) out << p(i) << '\n';
}

MlpNarModel load_mlp(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    auto fail = [&](const std::string& why) -> MlpNarModel {
        throw std::runtime_error("malformed network file " + path.string() + ": " + why);
    };
    std::string magic, key;
    int version = 0;
    if (!(in >> magic >> version) || magic != kMagic) return fail("missing header");
    if (version != kFormatVersion) return fail("unsupported version " + std::to_string(version));
    std::size_t delays = 0, hidden = 0, count = 0;
    double lo = 0.0, hi = 0.0;
    if (!(in >> key >> delays) || key != "delays") return fail("delays");
    if (!(in >> key >> hidden) || key != "hidden") return fail("hidden");
    if (!(in >> key >> lo >> hi) || key != "range") return fail("range");
    if (!(in >> key >> count) || key != "weights") return fail("weights");
    MlpNarModel m(delays, hidden);
    if (count != m.parameter_count()) return fail("weight count does not match the architecture");
    m.scale = MinMaxMap(lo, hi);
    Eigen::VectorXd p(static_cast<Eigen::Index>(count));
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!(in >> p(i))) return fail("truncated weights");
    }
    m.set_parameters(p);
    return m;
}

}  // namespace narid
