#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace probest {

/// Counter-based 64-bit generator. Each stream is a (key, counter) pair; the
/// output is a strong 64-bit mix of key + counter, so streams derived from
/// distinct (domain, a, b) triples are independent regardless of how callers
/// are scheduled.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : key_(mix(seed)) {}

    /// Stream for e.g. (survey j, replicate i) under a domain tag, derived
    /// from the master seed as seed XOR hash(domain, a, b).
    static RngStream derive(std::uint64_t master, std::uint64_t domain,
                            std::uint64_t a, std::uint64_t b);

    std::uint64_t next_u64() { return mix(key_ + ++counter_); }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t mix(std::uint64_t z);

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// One survey: calendar date, time in years since the first survey, sample
/// size and category proportions (a multinomial specification, sum(theta)=1).
struct SurveyRecord {
    std::string date;
    double t = 0.0;
    long n = 0;
    std::vector<double> theta;

    int k() const noexcept { return static_cast<int>(theta.size()); }
    void validate() const; // throws std::invalid_argument
};

/// One multinomial draw: category counts summing to n, plus percentages.
struct CategoricalDraw {
    std::vector<long> counts;
    std::vector<double> percentages;
};

/// Per-survey-date 2.5th/97.5th percentile vectors for one category.
struct QuantileSeries {
    std::string category;
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Binomial(n, p) by inversion of the cdf, scanned outward from the mode so
/// that large n and extreme p do not underflow.
long sample_binomial(long n, double p, RngStream& rng);

/// Multinomial(n, theta) via sequential conditional binomials.
CategoricalDraw sample_multinomial(const SurveyRecord& record, RngStream& rng);

/// Linear-interpolation quantile: with sorted samples s_0..s_{m-1} and
/// h = (m-1)q, returns s_floor(h) + frac(h) * (s_ceil(h) - s_floor(h)).
double empirical_quantile(std::vector<double> samples, double q);

/// Same, for input already sorted ascending.
double empirical_quantile_sorted(std::span<const double> sorted, double q);

/// Pearson statistic sum (obs - exp)^2 / exp. Throws DegenerateExpectedError
/// if any expected entry is <= 0.
double chi_square_statistic(std::span<const double> observed, std::span<const double> expected);

/// Upper tail 1 - P(dof/2, statistic/2) of the chi-square distribution,
/// with P the regularized lower incomplete gamma function.
double chi_square_pvalue(double statistic, int dof);

/// Regularized lower incomplete gamma P(a, x); series expansion for
/// x < a + 1, continued fraction otherwise. Absolute error below 1e-12.
double regularized_gamma_p(double a, double x);

} // namespace probest
