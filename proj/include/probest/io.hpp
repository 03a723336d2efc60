#pragma once

#include "probest/pipeline.hpp"
#include "probest/stats.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace probest {

/// Loaded survey series: category labels from the header plus one record per
/// row, with theta renormalized to sum exactly to 1.
struct SurveyData {
    std::vector<std::string> categories;
    std::vector<SurveyRecord> records;
};

/// Reads survey data from CSV (header `date,sample_size,<cat1>,...,<catK>`,
/// percentages) or the JSON mirror; format is inferred from the extension
/// when `format` is "auto". Throws ParseError naming the row and field.
SurveyData load_surveys(const std::string& path, const std::string& format = "auto");
SurveyData load_surveys_csv(std::istream& in);
SurveyData load_surveys_json(std::istream& in);

/// Years since `from`, ISO-8601 dates. Dates on the same day of month map to
/// whole months / 12 (so a semiannual cadence gives exact 0.5-year steps);
/// otherwise the day difference over a 365.25-day year.
double years_between(const std::string& from, const std::string& to);

/// The date `half_years` semiannual steps after an ISO-8601 date.
std::string add_half_years(const std::string& date, int half_years);

/// Everything one estimate run produces; serialized to JSON such that
/// re-loading reproduces every number bit-exactly.
struct ResultBundle {
    PipelineConfig config; // jobs is not serialized: output is job-count independent
    std::vector<std::string> categories;
    long total_attempted = 0;
    long accepted_count = 0;
    std::vector<QuantileSeries> data_q;
    BandSelection selection;
    std::vector<FitResult> selected_fits; // the k fits defining the band
    BandCurves band;
    PredictionTable predictions;
};

/// format "json" writes the full bundle; "csv" writes the prediction table
/// with header `date,category,mean,ci_low,ci_high`.
void write_results(const ResultBundle& bundle, const std::string& path,
                   const std::string& format = "json");
ResultBundle load_results(const std::string& path);

void write_prediction_csv(const PredictionTable& table, const std::vector<std::string>& categories,
                          std::ostream& out);

/// One static SVG panel for one category: the data 95% CI error bars with
/// survey means at their midpoints, and the band envelope as two polylines.
/// Byte output is deterministic for fixed inputs.
void render_band_svg(const std::string& category, const std::vector<double>& band_grid,
                     const std::vector<double>& band_lower, const std::vector<double>& band_upper,
                     const std::vector<SurveyRecord>& surveys, const QuantileSeries& data_ci,
                     int category_index, const std::string& out_path);

} // namespace probest
