#pragma once

#include "probest/dynamics.hpp"
#include "probest/optimize.hpp"
#include "probest/stats.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace probest {

/// Initial condition for each fitted trajectory: the sampled percentages at
/// the first survey date, or the published survey means.
enum class IcMode { Sampled, Mean };

struct PipelineConfig {
    int replicates = 10000;
    int quantile_draws = 100000;
    std::uint64_t seed = 0;
    double alpha = 0.05; // fits with min-p-value below this are rejected
    double grid_step = 0.05;
    double rk_step = 0.005;
    IcMode ic_mode = IcMode::Sampled;
    int jobs = 1;
    SimplexConfig simplex{};

    void validate() const;
};

/// One accepted fit: gamma upper-triangle values, the goodness-of-fit p-value
/// of the pooled chi-square statistic, the initial condition, and the model
/// percentages at the survey dates (cached so the band scan never
/// re-integrates), category-major.
struct FitResult {
    std::vector<double> gamma;
    double p_value = 0.0;
    long replicate = -1;
    std::vector<double> initial;
    std::vector<double> at_surveys; // [category * n_surveys + survey]
};

struct FitEnsemble {
    std::vector<FitResult> accepted; // sorted by p_value descending, stable
    long total_attempted = 0;
    std::uint64_t master_seed = 0;
};

/// Chosen ensemble prefix: k fits, the minimum m_k of the per-pair band vs
/// data-quantile p-values, and those p-values in category order
/// (lower, upper per category).
struct BandSelection {
    long k = 0;
    double m_k = 0.0;
    std::vector<double> per_pair_pvalues;
};

/// Fine-grid 2.5/97.5 percentile envelope of the selected trajectories.
struct BandCurves {
    std::vector<double> grid;
    std::vector<std::vector<double>> lower; // [category][grid point]
    std::vector<std::vector<double>> upper;
};

struct PredictionTable {
    std::vector<std::string> dates;
    std::vector<double> times;
    std::vector<std::vector<double>> mean; // [category][date]
    std::vector<std::vector<double>> lower;
    std::vector<std::vector<double>> upper;
};

/// Step 1: per survey, draw `draws` multinomial samples and return the
/// per-category 2.5/97.5 percentile series of the sampled percentages.
std::vector<QuantileSeries> data_quantiles(const std::vector<SurveyRecord>& surveys,
                                           const std::vector<std::string>& categories,
                                           int draws, std::uint64_t master_seed);

/// Reproduces the resampled dataset (percentages, dataset[survey][category])
/// used by fit_one for the given replicate index and master seed.
std::vector<std::vector<double>> sample_replicate(const std::vector<SurveyRecord>& surveys,
                                                  std::uint64_t master_seed, long replicate);

/// Fits gamma to one dataset of percentages (dataset[survey][category]),
/// starting from gamma = 0. The optimizer minimizes the chi-square statistic
/// of the worst-fitting category (the minimum per-category goodness-of-fit
/// p-value); the reported p_value is the pooled-statistic test. The initial
/// condition is `initial` (percentages at t1).
FitResult fit_dataset(const std::vector<SurveyRecord>& surveys,
                      const std::vector<std::vector<double>>& dataset,
                      const std::vector<double>& initial,
                      const SimplexConfig& simplex, double rk_step);

/// One sample-and-fit replicate. Returns nullopt when the sampled dataset is
/// unfittable; such replicates still count toward total_attempted.
std::optional<FitResult> fit_one(const std::vector<SurveyRecord>& surveys, long replicate,
                                 std::uint64_t master_seed, const PipelineConfig& config);

/// Runs fit_one for every replicate (in parallel when config.jobs > 1),
/// keeps fits with p_value >= alpha and stable-sorts them descending.
/// Throws InsufficientEnsembleError if fewer than 2 fits survive.
FitEnsemble run_ensemble(const std::vector<SurveyRecord>& surveys, const PipelineConfig& config);

/// Steps 6-7: scans prefix sizes k = 2..ensemble size, compares the per-date
/// percentile band of the first k trajectories against the data quantile
/// vectors, and returns the k with the largest minimum p-value (smallest k
/// on ties). A degenerate band gives that k an m_k of 0.
BandSelection select_band(const FitEnsemble& ensemble, const std::vector<QuantileSeries>& q);

/// Integrates the selected fits on a fine grid from t1 to t_end (default the
/// last survey date) and returns the per-point percentile envelope.
BandCurves estimation_band(const FitEnsemble& ensemble, const BandSelection& selection,
                           const std::vector<SurveyRecord>& surveys, double grid_step,
                           double rk_step, double t_end = -1.0);

/// Extends the selected trajectories to the horizon dates and returns the
/// per-date ensemble mean and 2.5/97.5 percentiles.
PredictionTable predict(const FitEnsemble& ensemble, const BandSelection& selection,
                        const std::vector<SurveyRecord>& surveys,
                        const std::vector<std::pair<std::string, double>>& horizon,
                        double rk_step);

} // namespace probest
