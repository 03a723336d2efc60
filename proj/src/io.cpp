#include "probest/io.hpp"
#include "probest/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace probest {

namespace {

struct Ymd {
    int y = 0, m = 0, d = 0;
};

Ymd parse_date(const std::string& s, const std::string& where) {
    Ymd out;
    char dash1 = 0, dash2 = 0;
    std::istringstream is(s);
    if (!(is >> out.y >> dash1 >> out.m >> dash2 >> out.d) || dash1 != '-' || dash2 != '-' ||
        out.m < 1 || out.m > 12 || out.d < 1 || out.d > 31)
        throw ParseError(where + ": field 'date': expected ISO-8601 date, got '" + s + "'");
    return out;
}

// days since 1970-01-01, proleptic Gregorian (Howard Hinnant's days_from_civil)
long days_from_civil(const Ymd& ymd) {
    int y = ymd.y;
    const int m = ymd.m, d = ymd.d;
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

std::string trim_cr(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

SurveyRecord make_record(const std::string& date, long n, const std::vector<double>& pct,
                         const std::string& first_date, const std::string& where) {
    if (n < 1) throw ParseError(where + ": field 'sample_size': must be a positive integer");
    double sum = 0.0;
    for (double p : pct) sum += p;
    if (std::abs(sum - 100.0) > 0.5)
        throw ParseError(where + ": percentages sum to " + std::to_string(sum) +
                         ", outside 100 +- 0.5");
    SurveyRecord rec;
    rec.date = date;
    rec.n = n;
    rec.t = years_between(first_date, date);
    rec.theta.reserve(pct.size());
    for (double p : pct) rec.theta.push_back(p / sum);
    return rec;
}

} // namespace

double years_between(const std::string& from, const std::string& to) {
    const Ymd a = parse_date(from, "years_between");
    const Ymd b = parse_date(to, "years_between");
    if (a.d == b.d) {
        const int months = (b.y - a.y) * 12 + (b.m - a.m);
        return months / 12.0;
    }
    return static_cast<double>(days_from_civil(b) - days_from_civil(a)) / 365.25;
}

std::string add_half_years(const std::string& date, int half_years) {
    Ymd d = parse_date(date, "add_half_years");
    int months = (d.m - 1) + 6 * half_years;
    d.y += months / 12;
    months %= 12;
    if (months < 0) {
        months += 12;
        d.y -= 1;
    }
    d.m = months + 1;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.y, d.m, d.d);
    return buf;
}

SurveyData load_surveys_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("row 1: empty input");
    auto header = split_csv(trim_cr(line));
    if (header.size() < 4 || header[0] != "date" || header[1] != "sample_size")
        throw ParseError("row 1: header must be 'date,sample_size,<cat1>,...,<catK>'");

    SurveyData data;
    data.categories.assign(header.begin() + 2, header.end());
    const int k = static_cast<int>(data.categories.size());

    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = trim_cr(line);
        if (line.empty()) continue;
        const std::string where = "row " + std::to_string(row);
        const auto fields = split_csv(line);
        if (static_cast<int>(fields.size()) != k + 2)
            throw ParseError(where + ": expected " + std::to_string(k + 2) + " fields, got " +
                             std::to_string(fields.size()));
        parse_date(fields[0], where);
        long n = 0;
        try {
            n = std::stol(fields[1]);
        } catch (const std::exception&) {
            throw ParseError(where + ": field 'sample_size': not an integer");
        }
        std::vector<double> pct;
        for (int c = 0; c < k; ++c) {
            try {
                pct.push_back(std::stod(fields[2 + c]));
            } catch (const std::exception&) {
                throw ParseError(where + ": field '" + data.categories[c] + "': not a number");
            }
        }
        const std::string& first = data.records.empty() ? fields[0] : data.records.front().date;
        auto rec = make_record(fields[0], n, pct, first, where);
        if (!data.records.empty() && !(rec.t > data.records.back().t))
            throw ParseError(where + ": field 'date': dates must be strictly increasing");
        data.records.push_back(std::move(rec));
    }
    if (data.records.empty()) throw ParseError("row 2: no survey rows");
    return data;
}

SurveyData load_surveys_json(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("json: ") + e.what());
    }
    SurveyData data;
    try {
        data.categories = j.at("categories").get<std::vector<std::string>>();
        int row = 0;
        for (const auto& s : j.at("surveys")) {
            ++row;
            const std::string where = "survey " + std::to_string(row);
            const auto date = s.at("date").get<std::string>();
            parse_date(date, where);
            const auto pct = s.at("percentages").get<std::vector<double>>();
            if (pct.size() != data.categories.size())
                throw ParseError(where + ": field 'percentages': wrong length");
            const std::string& first = data.records.empty() ? date : data.records.front().date;
            auto rec = make_record(date, s.at("sample_size").get<long>(), pct, first, where);
            if (!data.records.empty() && !(rec.t > data.records.back().t))
                throw ParseError(where + ": field 'date': dates must be strictly increasing");
            data.records.push_back(std::move(rec));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("json: ") + e.what());
    }
    if (data.records.empty()) throw ParseError("json: no survey rows");
    return data;
}

SurveyData load_surveys(const std::string& path, const std::string& format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open input file: " + path);
    std::string fmt = format;
    if (fmt == "auto")
        fmt = path.size() >= 5 && path.substr(path.size() - 5) == ".json" ? "json" : "csv";
    if (fmt == "csv") return load_surveys_csv(in);
    if (fmt == "json") return load_surveys_json(in);
    throw ParseError("unknown survey format: " + format);
}

namespace {

using nlohmann::json;

json quantiles_to_json(const std::vector<QuantileSeries>& qs) {
    json arr = json::array();
    for (const auto& q : qs)
        arr.push_back({{"category", q.category}, {"lower", q.lower}, {"upper", q.upper}});
    return arr;
}

std::vector<QuantileSeries> quantiles_from_json(const json& arr) {
    std::vector<QuantileSeries> qs;
    for (const auto& q : arr) {
        QuantileSeries s;
        s.category = q.at("category").get<std::string>();
        s.lower = q.at("lower").get<std::vector<double>>();
        s.upper = q.at("upper").get<std::vector<double>>();
        qs.push_back(std::move(s));
    }
    return qs;
}

} // namespace

void write_prediction_csv(const PredictionTable& table, const std::vector<std::string>& categories,
                          std::ostream& out) {
    out << "date,category,mean,ci_low,ci_high\n";
    char buf[128];
    for (std::size_t h = 0; h < table.dates.size(); ++h) {
        for (std::size_t c = 0; c < categories.size(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", table.mean[c][h],
                          table.lower[c][h], table.upper[c][h]);
            out << table.dates[h] << ',' << categories[c] << ',' << buf << '\n';
        }
    }
}

void write_results(const ResultBundle& bundle, const std::string& path, const std::string& format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write to " + path);

    if (format == "csv") {
        write_prediction_csv(bundle.predictions, bundle.categories, out);
        return;
    }
    if (format != "json") throw std::invalid_argument("write_results: unknown format " + format);

    json j;
    j["config"] = {
        {"replicates", bundle.config.replicates},
        {"quantile_draws", bundle.config.quantile_draws},
        {"seed", bundle.config.seed},
        {"alpha", bundle.config.alpha},
        {"grid_step", bundle.config.grid_step},
        {"rk_step", bundle.config.rk_step},
        {"ic_mode", bundle.config.ic_mode == IcMode::Sampled ? "sampled" : "mean"},
        {"simplex",
         {{"initial_step", bundle.config.simplex.initial_step},
          {"max_iters", bundle.config.simplex.max_iters},
          {"f_tol", bundle.config.simplex.f_tol},
          {"restarts", bundle.config.simplex.restarts}}},
    };
    j["categories"] = bundle.categories;
    j["total_attempted"] = bundle.total_attempted;
    j["accepted_count"] = bundle.accepted_count;
    j["data_quantiles"] = quantiles_to_json(bundle.data_q);
    j["selection"] = {{"k", bundle.selection.k},
                      {"m_k", bundle.selection.m_k},
                      {"per_pair_pvalues", bundle.selection.per_pair_pvalues}};
    json fits = json::array();
    for (const auto& f : bundle.selected_fits)
        fits.push_back({{"gamma", f.gamma},
                        {"p_value", f.p_value},
                        {"replicate", f.replicate},
                        {"initial", f.initial},
                        {"at_surveys", f.at_surveys}});
    j["selected_fits"] = std::move(fits);
    j["band"] = {{"grid", bundle.band.grid}, {"lower", bundle.band.lower}, {"upper", bundle.band.upper}};
    j["predictions"] = {{"dates", bundle.predictions.dates},
                        {"times", bundle.predictions.times},
                        {"mean", bundle.predictions.mean},
                        {"lower", bundle.predictions.lower},
                        {"upper", bundle.predictions.upper}};
    out << j.dump(2) << '\n';
}

ResultBundle load_results(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open bundle: " + path);
    json j;
    in >> j;

    ResultBundle b;
    const auto& c = j.at("config");
    b.config.replicates = c.at("replicates").get<int>();
    b.config.quantile_draws = c.at("quantile_draws").get<int>();
    b.config.seed = c.at("seed").get<std::uint64_t>();
    b.config.alpha = c.at("alpha").get<double>();
    b.config.grid_step = c.at("grid_step").get<double>();
    b.config.rk_step = c.at("rk_step").get<double>();
    b.config.ic_mode = c.at("ic_mode").get<std::string>() == "mean" ? IcMode::Mean : IcMode::Sampled;
    const auto& s = c.at("simplex");
    b.config.simplex.initial_step = s.at("initial_step").get<double>();
    b.config.simplex.max_iters = s.at("max_iters").get<int>();
    b.config.simplex.f_tol = s.at("f_tol").get<double>();
    b.config.simplex.restarts = s.at("restarts").get<int>();

    b.categories = j.at("categories").get<std::vector<std::string>>();
    b.total_attempted = j.at("total_attempted").get<long>();
    b.accepted_count = j.at("accepted_count").get<long>();
    b.data_q = quantiles_from_json(j.at("data_quantiles"));
    b.selection.k = j.at("selection").at("k").get<long>();
    b.selection.m_k = j.at("selection").at("m_k").get<double>();
    b.selection.per_pair_pvalues =
        j.at("selection").at("per_pair_pvalues").get<std::vector<double>>();
    for (const auto& f : j.at("selected_fits")) {
        FitResult fit;
        fit.gamma = f.at("gamma").get<std::vector<double>>();
        fit.p_value = f.at("p_value").get<double>();
        fit.replicate = f.at("replicate").get<long>();
        fit.initial = f.at("initial").get<std::vector<double>>();
        fit.at_surveys = f.at("at_surveys").get<std::vector<double>>();
        b.selected_fits.push_back(std::move(fit));
    }
    b.band.grid = j.at("band").at("grid").get<std::vector<double>>();
    b.band.lower = j.at("band").at("lower").get<std::vector<std::vector<double>>>();
    b.band.upper = j.at("band").at("upper").get<std::vector<std::vector<double>>>();
    b.predictions.dates = j.at("predictions").at("dates").get<std::vector<std::string>>();
    b.predictions.times = j.at("predictions").at("times").get<std::vector<double>>();
    b.predictions.mean = j.at("predictions").at("mean").get<std::vector<std::vector<double>>>();
    b.predictions.lower = j.at("predictions").at("lower").get<std::vector<std::vector<double>>>();
    b.predictions.upper = j.at("predictions").at("upper").get<std::vector<std::vector<double>>>();
    return b;
}

namespace {

double nice_ceiling(double v) {
    static constexpr double ladder[] = {1, 2, 4, 5, 8, 10, 15, 20, 25, 40, 50, 80, 100};
    for (double c : ladder)
        if (c >= v * 1.02) return c;
    return 100.0;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace

void render_band_svg(const std::string& category, const std::vector<double>& band_grid,
                     const std::vector<double>& band_lower, const std::vector<double>& band_upper,
                     const std::vector<SurveyRecord>& surveys, const QuantileSeries& data_ci,
                     int category_index, const std::string& out_path) {
    if (band_grid.size() != band_lower.size() || band_grid.size() != band_upper.size())
        throw std::invalid_argument("render_band_svg: band size mismatch");
    if (data_ci.lower.size() != surveys.size())
        throw std::invalid_argument("render_band_svg: quantile/survey size mismatch");

    const double w = 640, h = 400, ml = 48, mr = 16, mt = 36, mb = 36;
    const double t0 = band_grid.front();
    double t1 = band_grid.back();
    for (const auto& s : surveys) t1 = std::max(t1, s.t);

    double ymax = 0.0;
    for (double v : band_upper) ymax = std::max(ymax, v);
    for (double v : data_ci.upper) ymax = std::max(ymax, v);
    ymax = nice_ceiling(ymax);

    auto px = [&](double t) { return ml + (t - t0) / (t1 - t0) * (w - ml - mr); };
    auto py = [&](double v) { return h - mb - v / ymax * (h - mt - mb); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    svg << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fmt(w / 2) << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << category << "</text>\n";

    // frame and y labels
    svg << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(w - ml - mr)
        << "\" height=\"" << fmt(h - mt - mb)
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = ymax * i / 4.0;
        svg << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(py(v) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(v)
            << "</text>\n";
    }
    // x labels: whole years
    for (double t = std::ceil(t0); t <= t1 + 1e-9; t += 1.0)
        svg << "<text x=\"" << fmt(px(t)) << "\" y=\"" << fmt(h - mb + 16)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t)
            << "</text>\n";

    auto polyline = [&](const std::vector<double>& vals) {
        svg << "<polyline fill=\"none\" stroke=\"red\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < band_grid.size(); ++i) {
            if (i) svg << ' ';
            svg << fmt(px(band_grid[i])) << ',' << fmt(py(vals[i]));
        }
        svg << "\"/>\n";
    };
    polyline(band_lower);
    polyline(band_upper);

    for (std::size_t j = 0; j < surveys.size(); ++j) {
        const double x = px(surveys[j].t);
        const double ylo = py(data_ci.lower[j]);
        const double yhi = py(data_ci.upper[j]);
        svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(ylo) << "\" x2=\"" << fmt(x)
            << "\" y2=\"" << fmt(yhi) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        for (double y : {ylo, yhi})
            svg << "<line x1=\"" << fmt(x - 3) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(x + 3)
                << "\" y2=\"" << fmt(y) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        const double mean = 100.0 * surveys[j].theta[category_index];
        svg << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(py(mean))
            << "\" r=\"2.5\" fill=\"black\"/>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write to " + out_path);
    out << svg.str();
}

} // namespace probest
