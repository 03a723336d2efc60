#include "probest/errors.hpp"
#include "probest/io.hpp"
#include "probest/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace probest;

namespace {

struct Options {
    std::string input;
    std::string out = "out";
    std::string bundle;
    std::string ic_mode = "sampled";
    std::vector<std::string> horizon;
    int replicates = 10000;
    int draws = 100000;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    double grid_step = 0.05;
    double rk_step = 0.005;
    int jobs = 1;
};

PipelineConfig to_config(const Options& opt) {
    PipelineConfig cfg;
    cfg.replicates = opt.replicates;
    cfg.quantile_draws = opt.draws;
    cfg.seed = opt.seed;
    cfg.alpha = opt.alpha;
    cfg.grid_step = opt.grid_step;
    cfg.rk_step = opt.rk_step;
    cfg.jobs = opt.jobs;
    if (opt.ic_mode == "sampled")
        cfg.ic_mode = IcMode::Sampled;
    else if (opt.ic_mode == "mean")
        cfg.ic_mode = IcMode::Mean;
    else
        throw std::invalid_argument("--ic-mode must be 'sampled' or 'mean'");
    cfg.validate();
    return cfg;
}

std::vector<std::pair<std::string, double>> parse_horizon(const std::vector<std::string>& spec,
                                                          const SurveyData& data) {
    std::vector<std::pair<std::string, double>> horizon;
    const auto& last = data.records.back();
    for (const auto& item : spec) {
        if (!item.empty() && item[0] == '+') {
            const int n = std::stoi(item.substr(1));
            if (n < 1) throw std::invalid_argument("--horizon: +N requires N >= 1");
            for (int i = 1; i <= n; ++i)
                horizon.emplace_back(add_half_years(last.date, i), last.t + 0.5 * i);
        } else {
            horizon.emplace_back(item, years_between(data.records.front().date, item));
        }
    }
    return horizon;
}

std::string slug(std::string s) {
    for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

void write_svgs(const SurveyData& data, const ResultBundle& bundle, const std::string& out_dir,
                const std::string& prefix) {
    for (std::size_t c = 0; c < data.categories.size(); ++c) {
        const auto path = out_dir + "/" + prefix + "_" + slug(data.categories[c]) + ".svg";
        render_band_svg(data.categories[c], bundle.band.grid, bundle.band.lower[c],
                        bundle.band.upper[c], data.records, bundle.data_q[c], static_cast<int>(c),
                        path);
    }
}

ResultBundle run_estimation(const SurveyData& data, const PipelineConfig& cfg) {
    ResultBundle bundle;
    bundle.config = cfg;
    bundle.categories = data.categories;
    bundle.data_q = data_quantiles(data.records, data.categories, cfg.quantile_draws, cfg.seed);
    const FitEnsemble ensemble = run_ensemble(data.records, cfg);
    bundle.total_attempted = ensemble.total_attempted;
    bundle.accepted_count = static_cast<long>(ensemble.accepted.size());
    bundle.selection = select_band(ensemble, bundle.data_q);
    bundle.selected_fits.assign(ensemble.accepted.begin(),
                                ensemble.accepted.begin() + bundle.selection.k);
    bundle.band = estimation_band(ensemble, bundle.selection, data.records, cfg.grid_step,
                                  cfg.rk_step);
    return bundle;
}

/// Ensemble restricted to the fits a bundle carries (its selected prefix).
FitEnsemble ensemble_from_bundle(const ResultBundle& bundle) {
    FitEnsemble ensemble;
    ensemble.accepted = bundle.selected_fits;
    ensemble.total_attempted = bundle.total_attempted;
    ensemble.master_seed = bundle.config.seed;
    return ensemble;
}

int cmd_estimate(const Options& opt) {
    const PipelineConfig cfg = to_config(opt);
    const SurveyData data = load_surveys(opt.input);
    fs::create_directories(opt.out);

    ResultBundle bundle = run_estimation(data, cfg);
    write_results(bundle, opt.out + "/bundle.json");
    write_svgs(data, bundle, opt.out, "band");

    std::cout << "k=" << bundle.selection.k << " m_k=" << bundle.selection.m_k
              << " accepted=" << bundle.accepted_count << "/" << bundle.total_attempted << "\n";
    return 0;
}

int cmd_predict(const Options& opt) {
    const SurveyData data = load_surveys(opt.input);
    if (opt.horizon.empty()) throw std::invalid_argument("empty horizon");
    const auto horizon = parse_horizon(opt.horizon, data);
    if (horizon.empty()) throw std::invalid_argument("empty horizon");
    fs::create_directories(opt.out);

    ResultBundle bundle;
    if (!opt.bundle.empty()) {
        bundle = load_results(opt.bundle);
    } else {
        bundle = run_estimation(data, to_config(opt));
    }

    const FitEnsemble ensemble = ensemble_from_bundle(bundle);
    BandSelection sel = bundle.selection;
    bundle.predictions = predict(ensemble, sel, data.records, horizon, bundle.config.rk_step);
    bundle.band = estimation_band(ensemble, sel, data.records, bundle.config.grid_step,
                                  bundle.config.rk_step, horizon.back().second);

    write_results(bundle, opt.out + "/bundle.json");
    {
        std::ofstream csv(opt.out + "/predictions.csv", std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write to " + opt.out + "/predictions.csv");
        write_prediction_csv(bundle.predictions, bundle.categories, csv);
    }
    write_svgs(data, bundle, opt.out, "prediction");

    std::cout << "k=" << bundle.selection.k << " m_k=" << bundle.selection.m_k << " predicted "
              << bundle.predictions.dates.size() << " dates\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Survey-calibrated compartmental model: probabilistic estimation and prediction"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--input", opt.input, "survey CSV or JSON file")->required();
        sub->add_option("--replicates", opt.replicates, "sample-and-fit replicates");
        sub->add_option("--draws", opt.draws, "multinomial draws per survey for data quantiles");
        sub->add_option("--seed", opt.seed, "master RNG seed");
        sub->add_option("--alpha", opt.alpha, "p-value rejection threshold");
        sub->add_option("--grid-step", opt.grid_step, "band evaluation grid step (years)");
        sub->add_option("--rk-step", opt.rk_step, "RK4 internal step (years)");
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--ic-mode", opt.ic_mode, "initial condition: sampled|mean");
        sub->add_option("--jobs", opt.jobs, "worker threads for the fit loop");
        sub->add_option("--horizon", opt.horizon, "future dates, or +N half-years");
    };

    auto* estimate = app.add_subcommand("estimate", "build the 95% model confidence band");
    add_common(estimate);
    auto* predict_cmd = app.add_subcommand("predict", "extend the band over a future horizon");
    add_common(predict_cmd);
    predict_cmd->add_option("--bundle", opt.bundle, "reuse a bundle.json from a previous estimate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (estimate->parsed()) return cmd_estimate(opt);
        return cmd_predict(opt);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InsufficientEnsembleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
