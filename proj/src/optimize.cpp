#include "probest/optimize.hpp"
#include "probest/errors.hpp"
#include "probest/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace probest {

void SimplexConfig::validate() const {
    if (!(reflection > 0.0 && expansion > 0.0 && contraction > 0.0 && shrink > 0.0))
        throw std::invalid_argument("SimplexConfig: coefficients must be positive");
    if (!(expansion > reflection))
        throw std::invalid_argument("SimplexConfig: expansion must exceed reflection");
    if (!(initial_step > 0.0))
        throw std::invalid_argument("SimplexConfig: initial_step must be positive");
    if (max_iters < 1) throw std::invalid_argument("SimplexConfig: max_iters must be >= 1");
    if (restarts < 0) throw std::invalid_argument("SimplexConfig: restarts must be >= 0");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct NmRun {
    std::vector<double> x;
    double g = kInf; // minimized value (negated objective)
    int iterations = 0;
    bool converged = false;
};

// Minimizes g over one simplex started at `start`.
NmRun nelder_mead(const std::function<double(std::span<const double>)>& g,
                  std::span<const double> start, const SimplexConfig& cfg) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> verts(n + 1, std::vector<double>(start.begin(), start.end()));
    for (std::size_t i = 0; i < n; ++i) verts[i + 1][i] += cfg.initial_step;
    std::vector<double> gv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) gv[i] = g(verts[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xx(n);
    NmRun run;

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return gv[a] < gv[b]; });
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];
        run.iterations = iter;
        if (std::isfinite(gv[worst]) && gv[worst] - gv[best] <= cfg.f_tol) {
            run.converged = true;
            break;
        }

        for (std::size_t j = 0; j < n; ++j) centroid[j] = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += verts[i][j];
        }
        for (std::size_t j = 0; j < n; ++j) centroid[j] /= static_cast<double>(n);

        for (std::size_t j = 0; j < n; ++j)
            xr[j] = centroid[j] + cfg.reflection * (centroid[j] - verts[worst][j]);
        const double gr = g(xr);

        if (gr < gv[best]) {
            for (std::size_t j = 0; j < n; ++j)
                xx[j] = centroid[j] + cfg.expansion * (xr[j] - centroid[j]);
            const double ge = g(xx);
            if (ge < gr) {
                verts[worst] = xx;
                gv[worst] = ge;
            } else {
                verts[worst] = xr;
                gv[worst] = gr;
            }
        } else if (gr < gv[second]) {
            verts[worst] = xr;
            gv[worst] = gr;
        } else {
            bool shrink = false;
            if (gr < gv[worst]) {
                for (std::size_t j = 0; j < n; ++j)
                    xx[j] = centroid[j] + cfg.contraction * (xr[j] - centroid[j]);
                const double gc = g(xx);
                if (gc <= gr) {
                    verts[worst] = xx;
                    gv[worst] = gc;
                } else {
                    shrink = true;
                }
            } else {
                for (std::size_t j = 0; j < n; ++j)
                    xx[j] = centroid[j] - cfg.contraction * (centroid[j] - verts[worst][j]);
                const double gc = g(xx);
                if (gc < gv[worst]) {
                    verts[worst] = xx;
                    gv[worst] = gc;
                } else {
                    shrink = true;
                }
            }
            if (shrink) {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < n; ++j)
                        verts[i][j] = verts[best][j] + cfg.shrink * (verts[i][j] - verts[best][j]);
                    gv[i] = g(verts[i]);
                }
            }
        }
    }

    const auto best_it = std::min_element(gv.begin(), gv.end());
    run.x = verts[static_cast<std::size_t>(best_it - gv.begin())];
    run.g = *best_it;
    return run;
}

} // namespace

OptimResult maximize(const Objective& objective, std::span<const double> start,
                     const SimplexConfig& config) {
    config.validate();
    if (start.empty()) throw std::invalid_argument("maximize: empty start point");

    auto g = [&objective](std::span<const double> x) {
        const double f = objective(x);
        if (std::isnan(f)) return kInf;
        return -f;
    };

    NmRun best = nelder_mead(g, start, config);
    if (!std::isfinite(best.g))
        throw UnfittableError("maximize: objective is -inf at the start simplex");

    int total_iters = best.iterations;
    for (int r = 1; r <= config.restarts; ++r) {
        auto rng = RngStream::derive(config.restart_seed, 0x4e4d5253ULL, static_cast<std::uint64_t>(r), 0);
        std::vector<double> x0 = best.x;
        for (double& xi : x0)
            xi += (2.0 * rng.next_double() - 1.0) * 5.0 * config.initial_step;
        NmRun run = nelder_mead(g, x0, config);
        total_iters += run.iterations;
        if (run.g < best.g) best = std::move(run);
    }

    OptimResult result;
    result.argmax = std::move(best.x);
    result.value = -best.g;
    result.iterations = total_iters;
    result.converged = best.converged;
    return result;
}

} // namespace probest
