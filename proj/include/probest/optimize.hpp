#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace probest {

/// Nelder-Mead coefficients and run limits. Standard values throughout.
struct SimplexConfig {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    double initial_step = 0.01; // per-coordinate edge of the start simplex
    int max_iters = 500;
    double f_tol = 1e-8; // convergence when the vertex value spread drops below
    int restarts = 3;
    std::uint64_t restart_seed = 0;

    void validate() const; // throws std::invalid_argument
};

struct OptimResult {
    std::vector<double> argmax;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Maximizes the objective by standard Nelder-Mead on its negation, then
/// reruns `restarts` times from random perturbations of the best point
/// (uniform within +-5*initial_step per coordinate) and keeps the overall
/// best. The objective may return -inf for infeasible points; throws
/// UnfittableError if the start and every initial vertex are -inf.
OptimResult maximize(const Objective& objective, std::span<const double> start,
                     const SimplexConfig& config);

} // namespace probest
