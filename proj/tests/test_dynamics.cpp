#include <doctest.h>

#include "oracles.hpp"
#include "probest/dynamics.hpp"
#include "probest/errors.hpp"
#include "probest/stats.hpp"

#include <cmath>

using namespace probest;

namespace {

std::vector<double> grid_to(double t_end, double dt) {
    std::vector<double> g;
    for (double t = 0.0; t < t_end + 1e-9; t += dt) g.push_back(t);
    return g;
}

} // namespace

TEST_CASE("gamma params antisymmetry round-trip") {
    const std::vector<double> upper{0.5, -0.25, 1.5};
    const GammaParams p(3, upper);
    CHECK(p(0, 1) == 0.5);
    CHECK(p(0, 2) == -0.25);
    CHECK(p(1, 2) == 1.5);
    for (int i = 0; i < 3; ++i) {
        CHECK(p(i, i) == 0.0);
        for (int j = 0; j < 3; ++j) CHECK(p(j, i) == -p(i, j));
    }
    CHECK_THROWS_AS(GammaParams(3, std::vector<double>{1.0}), std::invalid_argument);
    CHECK_THROWS_AS(GammaParams(1), std::invalid_argument);
}

TEST_CASE("derivative matches direct substitution") {
    const CompartmentState s{{2.0, 93.0, 5.0}, 0.0};

    SUBCASE("all rates zero") {
        const auto d = derivative(s, GammaParams(3));
        for (double x : d) CHECK(x == 0.0);
    }
    SUBCASE("single coupling") {
        const auto d = derivative(s, GammaParams(3, std::vector<double>{1e-3, 0.0, 0.0}));
        CHECK(d[0] == doctest::Approx(-0.186).epsilon(1e-12));
        CHECK(d[1] == doctest::Approx(0.186).epsilon(1e-12));
        CHECK(d[2] == 0.0);
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(derivative(s, GammaParams(4)), std::invalid_argument);
    }
}

TEST_CASE("derivative rates sum to zero for random inputs") {
    RngStream rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> values(3), upper(3);
        double sum = 0.0;
        for (double& v : values) {
            v = rng.next_double();
            sum += v;
        }
        for (double& v : values) v *= 100.0 / sum;
        for (double& g : upper) g = (rng.next_double() - 0.5) * 0.02;
        const auto d = derivative({values, 0.0}, GammaParams(3, upper));
        CHECK(std::abs(d[0] + d[1] + d[2]) < 1e-12);
    }
}

TEST_CASE("integrate with zero field is constant") {
    const CompartmentState init{{2.0, 93.0, 5.0}, 0.0};
    const auto traj = integrate(init, GammaParams(3), grid_to(7.5, 0.5));
    REQUIRE(traj.states.size() == 16);
    for (const auto& s : traj.states) {
        CHECK(s.values[0] == 2.0);
        CHECK(s.values[1] == 93.0);
        CHECK(s.values[2] == 5.0);
    }
    for (std::size_t i = 0; i < traj.grid.size(); ++i) CHECK(traj.states[i].time == traj.grid[i]);
}

TEST_CASE("integrate input validation") {
    const CompartmentState init{{50.0, 50.0}, 0.0};
    const GammaParams p(2);
    CHECK_THROWS_AS(integrate(init, p, std::vector<double>{0.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(integrate(init, p, std::vector<double>{0.5, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(integrate(init, p, std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(integrate(init, p, std::vector<double>{0.0, 1.0}, -0.1), std::invalid_argument);
}

TEST_CASE("integrate matches the closed-form logistic reduction") {
    const double g = 0.005;
    const CompartmentState init{{30.0, 70.0, 0.0}, 0.0};
    const GammaParams p(3, std::vector<double>{g, 0.0, 0.0});
    const auto grid = grid_to(7.5, 0.5);
    const auto traj = integrate(init, p, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double exact = oracles::logistic_second_compartment(30.0, 70.0, g, grid[i]);
        CHECK(std::abs(traj.states[i].values[1] - exact) < 1e-6);
        CHECK(traj.states[i].values[2] == 0.0);
    }
}

TEST_CASE("step halving shows order-4 convergence") {
    const double g = 0.01;
    const CompartmentState init{{40.0, 60.0, 0.0}, 0.0};
    const GammaParams p(3, std::vector<double>{g, 0.0, 0.0});
    const std::vector<double> grid{0.0, 5.0};
    auto err = [&](double h) {
        const auto traj = integrate(init, p, grid, h);
        const double exact = oracles::logistic_second_compartment(40.0, 60.0, g, 5.0);
        return std::abs(traj.states[1].values[1] - exact);
    };
    const double e1 = err(0.5);
    const double e2 = err(0.25);
    REQUIRE(e1 > 1e-12); // coarse enough to be above roundoff
    CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("conservation holds along nontrivial trajectories") {
    const CompartmentState init{{2.0, 93.0, 5.0}, 0.0};
    const GammaParams p(3, std::vector<double>{2e-3, -1e-3, 5e-4});
    const auto traj = integrate(init, p, grid_to(7.5, 0.05));
    for (const auto& s : traj.states) {
        double sum = 0.0;
        for (double v : s.values) sum += v;
        CHECK(std::abs(sum - 100.0) < 1e-9);
    }
}

TEST_CASE("runaway parameters raise a divergence error with its time") {
    const CompartmentState init{{2.0, 93.0, 5.0}, 0.0};
    const GammaParams p(3, std::vector<double>{1e6, 0.0, 0.0});
    try {
        integrate(init, p, std::vector<double>{0.0, 1.0});
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.time() > 0.0);
        CHECK(e.time() <= 1.0);
    }
}
