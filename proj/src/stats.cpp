#include "probest/stats.hpp"
#include "probest/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace probest {

std::uint64_t RngStream::mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RngStream RngStream::derive(std::uint64_t master, std::uint64_t domain,
                            std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = mix(domain);
    h = mix(h ^ a);
    h = mix(h ^ b);
    return RngStream(master ^ h);
}

void SurveyRecord::validate() const {
    if (n < 1) throw std::invalid_argument("SurveyRecord: n must be >= 1");
    if (theta.size() < 2) throw std::invalid_argument("SurveyRecord: need at least 2 categories");
    double sum = 0.0;
    for (double th : theta) {
        if (!(th >= 0.0 && th <= 1.0))
            throw std::invalid_argument("SurveyRecord: theta entries must lie in [0,1]");
        sum += th;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("SurveyRecord: theta must sum to 1");
}

long sample_binomial(long n, double p, RngStream& rng) {
    if (n < 0) throw std::invalid_argument("sample_binomial: n must be >= 0");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_binomial: p must lie in [0,1]");
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;

    const double u = rng.next_double();
    const double q = 1.0 - p;
    long mode = static_cast<long>(std::floor((n + 1) * p));
    if (mode > n) mode = n;

    const double log_pm = std::lgamma(n + 1.0) - std::lgamma(mode + 1.0) -
                          std::lgamma(n - mode + 1.0) + mode * std::log(p) +
                          (n - mode) * std::log1p(-p);
    const double pm = std::exp(log_pm);
    const double cutoff = pm * 1e-18;

    // pmf over a window around the mode; mass outside is below double
    // resolution of u, so the truncated cdf inversion is still exact.
    std::vector<double> below; // pmf(mode-1), pmf(mode-2), ...
    double f = pm;
    for (long k = mode; k > 0; --k) {
        f *= (k * q) / ((n - k + 1) * p);
        if (f < cutoff) break;
        below.push_back(f);
    }
    std::vector<double> above; // pmf(mode+1), pmf(mode+2), ...
    f = pm;
    for (long k = mode; k < n; ++k) {
        f *= ((n - k) * p) / ((k + 1) * q);
        if (f < cutoff) break;
        above.push_back(f);
    }

    const long klo = mode - static_cast<long>(below.size());
    double c = 0.0;
    for (long k = klo; k < mode; ++k) {
        c += below[static_cast<std::size_t>(mode - 1 - k)];
        if (c >= u) return k;
    }
    c += pm;
    if (c >= u) return mode;
    for (std::size_t i = 0; i < above.size(); ++i) {
        c += above[i];
        if (c >= u) return mode + 1 + static_cast<long>(i);
    }
    return mode + static_cast<long>(above.size());
}

CategoricalDraw sample_multinomial(const SurveyRecord& record, RngStream& rng) {
    record.validate();
    const int k = record.k();
    CategoricalDraw draw;
    draw.counts.resize(k);
    draw.percentages.resize(k);

    long remaining = record.n;
    double rest = 1.0;
    for (int i = 0; i + 1 < k; ++i) {
        double pc = rest > 0.0 ? record.theta[i] / rest : 1.0;
        pc = std::clamp(pc, 0.0, 1.0);
        const long x = sample_binomial(remaining, pc, rng);
        draw.counts[i] = x;
        remaining -= x;
        rest -= record.theta[i];
    }
    draw.counts[k - 1] = remaining;
    for (int i = 0; i < k; ++i)
        draw.percentages[i] = 100.0 * static_cast<double>(draw.counts[i]) / record.n;
    return draw;
}

double empirical_quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("empirical_quantile: q must lie in [0,1]");
    const std::size_t m = sorted.size();
    const double h = (m - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= m) return sorted[m - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double empirical_quantile(std::vector<double> samples, double q) {
    std::sort(samples.begin(), samples.end());
    return empirical_quantile_sorted(samples, q);
}

double chi_square_statistic(std::span<const double> observed, std::span<const double> expected) {
    if (observed.size() != expected.size())
        throw std::invalid_argument("chi_square_statistic: length mismatch");
    if (observed.size() < 2)
        throw std::invalid_argument("chi_square_statistic: need at least 2 entries");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (!(expected[i] > 0.0))
            throw DegenerateExpectedError("chi_square_statistic: expected entry <= 0");
        const double d = observed[i] - expected[i];
        stat += d * d / expected[i];
    }
    return stat;
}

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-15;

double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < kMaxIter; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x), modified Lentz.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0)) throw std::invalid_argument("regularized_gamma_p: a must be > 0");
    if (x < 0.0) throw std::invalid_argument("regularized_gamma_p: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double chi_square_pvalue(double statistic, int dof) {
    if (statistic < 0.0) throw std::invalid_argument("chi_square_pvalue: statistic must be >= 0");
    if (dof < 1) throw std::invalid_argument("chi_square_pvalue: dof must be >= 1");
    const double a = 0.5 * dof;
    const double x = 0.5 * statistic;
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

} // namespace probest
