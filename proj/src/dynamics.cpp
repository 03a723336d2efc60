#include "probest/dynamics.hpp"
#include "probest/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace probest {

GammaParams::GammaParams(int k) : k_(k), upper_(upper_size(k), 0.0) {
    if (k < 2) throw std::invalid_argument("GammaParams: k must be >= 2");
}

GammaParams::GammaParams(int k, std::span<const double> upper) : GammaParams(k) {
    if (static_cast<int>(upper.size()) != upper_size(k))
        throw std::invalid_argument("GammaParams: expected k*(k-1)/2 upper-triangle entries");
    upper_.assign(upper.begin(), upper.end());
}

double GammaParams::operator()(int i, int j) const {
    if (i < 0 || j < 0 || i >= k_ || j >= k_)
        throw std::invalid_argument("GammaParams: index out of range");
    if (i == j) return 0.0;
    if (i < j) return upper_[static_cast<std::size_t>(i) * k_ - i * (i + 1) / 2 + (j - i - 1)];
    return -(*this)(j, i);
}

namespace {

// d_i -= g_ij * A_i * A_j, d_j += g_ij * A_i * A_j over the upper triangle.
// Writing each pair as one product keeps the rates summing to zero exactly.
void flow_rates(std::span<const double> a, const GammaParams& p, std::span<double> d) {
    const int k = static_cast<int>(a.size());
    for (int i = 0; i < k; ++i) d[i] = 0.0;
    const double* g = p.upper().data();
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            const double w = *g++ * a[i] * a[j];
            d[i] -= w;
            d[j] += w;
        }
    }
}

} // namespace

std::vector<double> derivative(const CompartmentState& state, const GammaParams& params) {
    if (state.k() != params.k())
        throw std::invalid_argument("derivative: state and params dimension mismatch");
    std::vector<double> d(state.values.size());
    flow_rates(state.values, params, d);
    return d;
}

Trajectory integrate(const CompartmentState& initial, const GammaParams& params,
                     std::span<const double> grid, double step) {
    const int k = initial.k();
    if (k != params.k())
        throw std::invalid_argument("integrate: state and params dimension mismatch");
    if (grid.empty())
        throw std::invalid_argument("integrate: empty grid");
    if (std::abs(grid[0] - initial.time) > 1e-12)
        throw std::invalid_argument("integrate: grid[0] must equal initial.time");
    if (step <= 0.0)
        throw std::invalid_argument("integrate: step must be positive");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("integrate: grid must be strictly increasing");

    Trajectory traj;
    traj.grid.assign(grid.begin(), grid.end());
    traj.states.reserve(grid.size());

    std::vector<double> y = initial.values;
    std::vector<double> k1(k), k2(k), k3(k), k4(k), yt(k);

    auto check = [&](double t) {
        for (int i = 0; i < k; ++i) {
            if (!std::isfinite(y[i]) || y[i] < -1e-6) throw DivergenceError(t);
        }
    };

    auto rk4_step = [&](double t, double h) {
        flow_rates(y, params, k1);
        for (int i = 0; i < k; ++i) yt[i] = y[i] + 0.5 * h * k1[i];
        flow_rates(yt, params, k2);
        for (int i = 0; i < k; ++i) yt[i] = y[i] + 0.5 * h * k2[i];
        flow_rates(yt, params, k3);
        for (int i = 0; i < k; ++i) yt[i] = y[i] + h * k3[i];
        flow_rates(yt, params, k4);
        for (int i = 0; i < k; ++i)
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        check(t + h);
    };

    check(grid[0]);
    traj.states.push_back({y, grid[0]});
    for (std::size_t g = 1; g < grid.size(); ++g) {
        const double span = grid[g] - grid[g - 1];
        const auto nfull = static_cast<long>(std::floor(span / step + 1e-9));
        double t = grid[g - 1];
        for (long s = 0; s < nfull; ++s) {
            rk4_step(t, step);
            t += step;
        }
        const double rem = grid[g] - t;
        if (rem > 1e-12) rk4_step(t, rem);
        traj.states.push_back({y, grid[g]});
    }
    return traj;
}

} // namespace probest
