#pragma once

#include <span>
#include <vector>

namespace probest {

/// Population split into K compartments, in percent of the total, at one time
/// instant. Times are years since the first survey.
struct CompartmentState {
    std::vector<double> values;
    double time = 0.0;

    int k() const noexcept { return static_cast<int>(values.size()); }
};

/// Antisymmetric matrix of net transfer rates. Only the strict upper triangle
/// is stored; gamma(j,i) == -gamma(i,j) by construction and the diagonal is
/// zero. A positive gamma(i,j) moves population from compartment i to j.
class GammaParams {
public:
    explicit GammaParams(int k);
    GammaParams(int k, std::span<const double> upper);

    int k() const noexcept { return k_; }

    double operator()(int i, int j) const;

    std::span<const double> upper() const noexcept { return upper_; }

    static int upper_size(int k) noexcept { return k * (k - 1) / 2; }

private:
    int k_;
    std::vector<double> upper_; // row-major strict upper triangle
};

/// States sampled on a strictly increasing time grid.
struct Trajectory {
    std::vector<double> grid;
    std::vector<CompartmentState> states;
};

/// Net flow rates d_i = sum_{j != i} gamma(j,i) * A_j * A_i, in percent/year.
/// The rates sum to zero exactly up to rounding.
std::vector<double> derivative(const CompartmentState& state, const GammaParams& params);

/// Classical fixed-step RK4. The internal step is shortened on the last
/// sub-step before each grid point so that grid values are exact, not
/// interpolated. Throws DivergenceError if the state leaves the valid region.
Trajectory integrate(const CompartmentState& initial, const GammaParams& params,
                     std::span<const double> grid, double step = 0.005);

} // namespace probest
