#include <doctest.h>

#include "probest/errors.hpp"
#include "probest/optimize.hpp"

#include <cmath>
#include <limits>

using namespace probest;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double quadratic(std::span<const double> x) {
    return -((x[0] - 1.0) * (x[0] - 1.0) + (x[1] + 2.0) * (x[1] + 2.0));
}

double neg_rosenbrock(std::span<const double> x) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return -(a * a + 100.0 * b * b);
}

} // namespace

TEST_CASE("config validation") {
    SimplexConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.expansion = 0.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SimplexConfig{};
    cfg.initial_step = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("quadratic maximum is recovered") {
    SimplexConfig cfg;
    cfg.initial_step = 0.5;
    cfg.max_iters = 2000;
    cfg.f_tol = 1e-14;
    const auto res = maximize(quadratic, std::vector<double>{0.0, 0.0}, cfg);
    CHECK(std::abs(res.argmax[0] - 1.0) < 1e-5);
    CHECK(std::abs(res.argmax[1] + 2.0) < 1e-5);
    CHECK(res.value > quadratic(std::vector<double>{0.0, 0.0}));
    CHECK(res.converged);
}

TEST_CASE("rosenbrock maximum is recovered") {
    SimplexConfig cfg;
    cfg.initial_step = 0.1;
    cfg.max_iters = 5000;
    cfg.f_tol = 1e-14;
    const auto res = maximize(neg_rosenbrock, std::vector<double>{-1.2, 1.0}, cfg);
    CHECK(std::abs(res.argmax[0] - 1.0) < 1e-3);
    CHECK(std::abs(res.argmax[1] - 1.0) < 1e-3);
}

TEST_CASE("result never falls below the start point value") {
    SimplexConfig cfg;
    cfg.max_iters = 10;
    const std::vector<double> start{0.3, -0.7};
    const auto res = maximize(quadratic, start, cfg);
    CHECK(res.value >= quadratic(start));
}

TEST_CASE("deterministic for fixed config and restart seed") {
    SimplexConfig cfg;
    cfg.restart_seed = 12345;
    const auto a = maximize(quadratic, std::vector<double>{5.0, 5.0}, cfg);
    const auto b = maximize(quadratic, std::vector<double>{5.0, 5.0}, cfg);
    CHECK(a.argmax == b.argmax);
    CHECK(a.value == b.value);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("argmax is insensitive to halving the initial step") {
    SimplexConfig cfg;
    cfg.max_iters = 2000;
    cfg.f_tol = 1e-14;
    const auto a = maximize(quadratic, std::vector<double>{0.0, 0.0}, cfg);
    cfg.initial_step *= 0.5;
    const auto b = maximize(quadratic, std::vector<double>{0.0, 0.0}, cfg);
    CHECK(std::abs(a.argmax[0] - b.argmax[0]) < 1e-4);
    CHECK(std::abs(a.argmax[1] - b.argmax[1]) < 1e-4);
}

TEST_CASE("infeasible regions mapped to -inf are avoided") {
    auto boxed = [](std::span<const double> x) {
        if (std::abs(x[0]) > 3.0 || std::abs(x[1]) > 3.0) return kNegInf;
        return quadratic(x);
    };
    SimplexConfig cfg;
    cfg.initial_step = 0.5;
    cfg.max_iters = 2000;
    cfg.f_tol = 1e-14;
    const auto res = maximize(boxed, std::vector<double>{0.0, 0.0}, cfg);
    CHECK(std::abs(res.argmax[0] - 1.0) < 1e-4);
    CHECK(std::abs(res.argmax[1] + 2.0) < 1e-4);
}

TEST_CASE("fully infeasible objective is unfittable") {
    auto never = [](std::span<const double>) { return kNegInf; };
    CHECK_THROWS_AS(maximize(never, std::vector<double>{0.0, 0.0}, SimplexConfig{}),
                    UnfittableError);
}
