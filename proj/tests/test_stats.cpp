#include <doctest.h>

#include "oracles.hpp"
#include "probest/errors.hpp"
#include "probest/stats.hpp"

#include <cmath>
#include <numeric>

using namespace probest;

namespace {

SurveyRecord make_record(long n, std::vector<double> theta) {
    SurveyRecord r;
    r.n = n;
    r.theta = std::move(theta);
    return r;
}

} // namespace

TEST_CASE("multinomial sampling") {
    SUBCASE("degenerate distribution") {
        const auto rec = make_record(10, {1.0, 0.0, 0.0});
        RngStream rng(7);
        for (int i = 0; i < 50; ++i) {
            const auto d = sample_multinomial(rec, rng);
            CHECK(d.counts == std::vector<long>{10, 0, 0});
        }
    }
    SUBCASE("counts always sum to n") {
        RngStream meta(99);
        for (int trial = 0; trial < 100; ++trial) {
            const long n = 1 + static_cast<long>(meta.next_u64() % 3000);
            double a = meta.next_double(), b = meta.next_double() * (1.0 - a);
            const auto rec = make_record(n, {a, b, 1.0 - a - b});
            auto rng = RngStream::derive(5, 1, trial, 0);
            const auto d = sample_multinomial(rec, rng);
            CHECK(std::accumulate(d.counts.begin(), d.counts.end(), 0L) == n);
            double psum = 0.0;
            for (double p : d.percentages) psum += p;
            CHECK(std::abs(psum - 100.0) < 1e-9);
        }
    }
    SUBCASE("invalid record rejected") {
        RngStream rng(1);
        CHECK_THROWS_AS(sample_multinomial(make_record(0, {0.5, 0.5}), rng), std::invalid_argument);
        CHECK_THROWS_AS(sample_multinomial(make_record(10, {0.6, 0.6}), rng), std::invalid_argument);
    }
}

TEST_CASE("support percentage quantiles of the first survey" * doctest::timeout(60)) {
    // n=1800, theta=(.02,.93,.05): 2.5/97.5 percentiles of the support
    // percentage over 1e5 draws land near (1.39, 2.67)
    const auto rec = make_record(1800, {0.02, 0.93, 0.05});
    const int draws = 100000;
    std::vector<double> support(draws);
    for (int i = 0; i < draws; ++i) {
        auto rng = RngStream::derive(12345, 0x51, 0, i);
        support[i] = sample_multinomial(rec, rng).percentages[0];
    }
    CHECK(std::abs(empirical_quantile(support, 0.025) - 1.39) < 0.35);
    CHECK(std::abs(empirical_quantile(support, 0.975) - 2.67) < 0.35);
}

TEST_CASE("sampled category means obey the binomial LLN bound" * doctest::timeout(60)) {
    const auto rec = make_record(1200, {0.03, 0.92, 0.05});
    const int draws = 100000;
    std::vector<double> sums(3, 0.0);
    for (int i = 0; i < draws; ++i) {
        auto rng = RngStream::derive(777, 0x51, 0, i);
        const auto d = sample_multinomial(rec, rng);
        for (int c = 0; c < 3; ++c) sums[c] += static_cast<double>(d.counts[c]) / rec.n;
    }
    for (int c = 0; c < 3; ++c) {
        const double mean = sums[c] / draws;
        const double sigma = std::sqrt(rec.theta[c] * (1.0 - rec.theta[c]) / rec.n);
        CHECK(std::abs(mean - rec.theta[c]) < 3.0 * sigma / std::sqrt(static_cast<double>(draws)));
    }
}

TEST_CASE("empirical quantile") {
    CHECK(empirical_quantile({5.0}, 0.0) == 5.0);
    CHECK(empirical_quantile({5.0}, 0.6) == 5.0);

    std::vector<double> ladder(101);
    std::iota(ladder.begin(), ladder.end(), 0.0);
    CHECK(empirical_quantile(ladder, 0.025) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(empirical_quantile(ladder, 0.975) == doctest::Approx(97.5).epsilon(1e-12));

    CHECK_THROWS_AS(empirical_quantile({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(empirical_quantile({1.0}, 1.5), std::invalid_argument);

    SUBCASE("monotone in q and bounded by min/max") {
        RngStream rng(3);
        std::vector<double> samples(37);
        for (double& s : samples) s = rng.next_double() * 50.0;
        double prev = empirical_quantile(samples, 0.0);
        for (double q = 0.05; q <= 1.0 + 1e-12; q += 0.05) {
            const double cur = empirical_quantile(samples, std::min(q, 1.0));
            CHECK(cur >= prev);
            prev = cur;
        }
        const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
        CHECK(empirical_quantile(samples, 0.0) == *lo);
        CHECK(empirical_quantile(samples, 1.0) == *hi);
    }
}

TEST_CASE("chi-square statistic") {
    const std::vector<double> v{2.0, 93.0, 5.0};
    CHECK(chi_square_statistic(v, v) == 0.0);
    CHECK(chi_square_statistic(std::vector<double>{4.0, 6.0}, std::vector<double>{5.0, 5.0}) ==
          doctest::Approx(0.4).epsilon(1e-12));
    CHECK_THROWS_AS(chi_square_statistic(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(chi_square_statistic(std::vector<double>{1.0}, std::vector<double>{1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        chi_square_statistic(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 0.0}),
        DegenerateExpectedError);

    SUBCASE("invariant under identical permutation of both vectors") {
        const std::vector<double> obs{1.0, 4.0, 9.0, 16.0};
        const std::vector<double> exp{2.0, 3.0, 8.0, 15.0};
        const std::vector<double> obs_p{16.0, 1.0, 9.0, 4.0};
        const std::vector<double> exp_p{15.0, 2.0, 8.0, 3.0};
        CHECK(chi_square_statistic(obs, exp) ==
              doctest::Approx(chi_square_statistic(obs_p, exp_p)).epsilon(1e-15));
    }
}

TEST_CASE("chi-square p-value") {
    CHECK(chi_square_pvalue(0.0, 15) == 1.0);
    CHECK(chi_square_pvalue(2.0 * std::log(2.0), 2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(chi_square_pvalue(-1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(chi_square_pvalue(1.0, 0), std::invalid_argument);

    SUBCASE("strictly decreasing in the statistic, limits at 1 and 0") {
        double prev = chi_square_pvalue(0.0, 15);
        CHECK(prev == 1.0);
        for (double s = 0.5; s <= 80.0; s += 0.5) {
            const double p = chi_square_pvalue(s, 15);
            CHECK(p < prev);
            prev = p;
        }
        CHECK(chi_square_pvalue(1000.0, 15) < 1e-12);
    }

    SUBCASE("agrees with the quadrature oracle") {
        CHECK(std::abs(chi_square_pvalue(7.2609, 15) -
                       oracles::chi2_pvalue_quadrature(7.2609, 15)) < 1e-10);
        for (int dof : {1, 2, 5, 15, 31}) {
            for (double s : {0.25, 1.0, 3.5, 7.2609, 12.0, 20.0, 31.0, 45.0, 60.0}) {
                const double got = chi_square_pvalue(s, dof);
                const double want = oracles::chi2_pvalue_quadrature(s, dof);
                CHECK(std::abs(got - want) < 1e-10);
            }
        }
    }
}

TEST_CASE("regularized lower incomplete gamma basics") {
    CHECK(regularized_gamma_p(2.5, 0.0) == 0.0);
    CHECK(regularized_gamma_p(1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(regularized_gamma_p(3.0, 200.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(regularized_gamma_p(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("derived rng streams are reproducible and distinct") {
    auto a1 = RngStream::derive(42, 2, 3, 4);
    auto a2 = RngStream::derive(42, 2, 3, 4);
    auto b = RngStream::derive(42, 2, 3, 5);
    const auto x = a1.next_u64();
    CHECK(x == a2.next_u64());
    CHECK(x != b.next_u64());
}
