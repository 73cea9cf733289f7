// Command-line front end: `narid run` executes the identification pipeline,
// `narid synth` writes a synthetic NAR series with its ground truth.

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "narid/pipeline.hpp"
#include "narid/synthetic.hpp"

namespace {

// Keys outside any section belong to `run`, so a flat key=value file works as well as one with [run].
class RunConfig : public CLI::ConfigINI {
  public:
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        auto items = CLI::ConfigINI::from_config(input);
        for (auto& item : items) {
            if (item.parents.empty() && item.name != "config") item.parents = {"run"};
        }
        return items;
    }
};

void add_run_options(CLI::App& run, narid::PipelineConfig& cfg, std::string& separator) {
    run.add_option("-i,--input", cfg.input, "signal CSV (one sample per line, optional header)")->required();
    run.add_option("-o,--output", cfg.output, "directory for report and CSV artifacts");
    run.add_option("--decimal-separator", separator, "decimal separator of the input")->capture_default_str();
    run.add_option("--split", cfg.split, "identification fraction")->capture_default_str();
    run.add_option("--degree", cfg.degree, "polynomial degree l")->capture_default_str();
    run.add_option("--max-lag", cfg.max_lag, "maximum output lag ny")->capture_default_str();
    run.add_option("--autocov-lags", cfg.autocov_lags, "autocovariance lags examined")->capture_default_str();
    run.add_option("--decimation", cfg.decimation, "decimation factor; 0 chooses it automatically")
        ->capture_default_str();
    run.add_option("--residual-lags", cfg.residual_lags, "lags of the residual correlation tests")
        ->capture_default_str();
    run.add_option("-k,--horizon", cfg.horizon, "prediction horizon")->capture_default_str();
    run.add_option("--aic-max-terms", cfg.aic_max_terms, "largest model size tried by AIC")->capture_default_str();
    run.add_option("-r,--radius", cfg.radius, "interval radius in signal units")->capture_default_str();
    run.add_flag("--neural,!--no-neural", cfg.neural, "train the neural comparison model")->capture_default_str();
    run.add_option("--delays", cfg.delays, "network input delays")->capture_default_str();
    run.add_option("--hidden-min", cfg.hidden_min, "smallest hidden layer in the sweep")->capture_default_str();
    run.add_option("--hidden-max", cfg.hidden_max, "largest hidden layer in the sweep")->capture_default_str();
    run.add_option("--max-epochs", cfg.max_epochs, "Levenberg-Marquardt epoch limit")->capture_default_str();
    run.add_option("--seed", cfg.seed, "seed for all randomness")->capture_default_str();
}

void print_summary(const narid::RunReport& r) {
    std::cout << std::setprecision(10);
    const auto& d = *r.decimation;
    std::cout << "decimation: tau_m = " << d.tau_m << ", factor = " << d.factor << " ("
              << r.identification_samples << " identification / " << r.validation_samples
              << " validation samples)\n";
    const auto& m = *r.model;
    std::cout << "model (" << m.selected_size << " terms by AIC, radius " << r.config.radius << "):\n";
    for (std::size_t i = 0; i < m.terms.size(); ++i) {
        std::cout << "  " << std::setw(22) << std::left << m.terms[i].to_string() << std::right
                  << std::setw(18) << m.theta[i];
        if (m.theta_interval) std::cout << "  " << (*m.theta_interval)[i];
        std::cout << "  ERR " << m.err[i] << '\n';
    }
    for (const auto& h : r.horizons) {
        std::cout << "RMSE k=" << h.horizon << ": " << h.rmse << "  interval " << h.rmse_interval << '\n';
    }
    if (r.residuals) {
        std::cout << "residual lags inside band: " << r.residuals->inside_ee << " / " << r.residuals->inside_ee2
                  << " / " << r.residuals->inside_e2e2 << '\n';
    }
    if (r.neural) {
        std::cout << "neural: " << r.neural->hidden << " hidden units, one-step RMSE " << r.neural->rmse_one_step
                  << '\n';
    }
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
}

int run_synth(const std::filesystem::path& dir, std::size_t samples, std::uint64_t seed,
              const std::optional<double>& sigma) {
    narid::SyntheticSpec spec = narid::preset_spec();
    spec.samples = samples;
    spec.seed = seed;
    if (sigma) spec.sigma = *sigma;
    const narid::SyntheticSeries s = narid::generate_synthetic(spec);
    std::filesystem::create_directories(dir);
    narid::write_signal_csv(dir / "signal.csv", s.y.samples(), "y");
    narid::write_truth_json(dir / "truth.json", spec, s);
    std::cout << "wrote " << s.y.size() << " samples to " << (dir / "signal.csv").string() << " (SNR "
              << std::setprecision(4) << s.snr_db << " dB)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NAR polynomial identification with interval uncertainty"};
    app.require_subcommand(1);

    narid::PipelineConfig cfg;
    std::string separator = ".";
    // Config keys are long option names, flat or under [run]; flags take precedence.
    app.set_config("--config", "", "key=value file of long option names (flat or under [run])");
    app.config_formatter(std::make_shared<RunConfig>());
    CLI::App* run = app.add_subcommand("run", "identify a NAR model from a signal file");
    run->fallthrough();
    add_run_options(*run, cfg, separator);

    std::filesystem::path synth_dir;
    std::size_t synth_samples = 2000;
    std::uint64_t synth_seed = 0;
    std::optional<double> synth_sigma;
    CLI::App* synth = app.add_subcommand("synth", "generate the bundled synthetic four-term series");
    synth->add_option("-o,--output", synth_dir, "output directory")->required();
    synth->add_option("-n,--samples", synth_samples, "number of samples")->capture_default_str();
    synth->add_option("--seed", synth_seed, "noise seed")->capture_default_str();
    synth->add_option("--sigma", synth_sigma, "equation-noise standard deviation (default: preset)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) return run_synth(synth_dir, synth_samples, synth_seed, synth_sigma);
        if (separator.size() != 1) throw std::invalid_argument("--decimal-separator must be a single character");
        cfg.decimal_separator = separator.front();
        const narid::RunReport r = narid::run_pipeline(cfg);
        print_summary(r);
        if (!cfg.output.empty()) std::cout << "artifacts written to " << cfg.output.string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (*run && !cfg.output.empty()) std::cerr << "partial artifacts and FAILED marker in " << cfg.output.string() << '\n';
        return 1;
    }
}
