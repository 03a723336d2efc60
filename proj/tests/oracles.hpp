#pragma once

// Independent numerical oracles used by the unit and acceptance suites. These
// deliberately avoid the library's incomplete-gamma and RK4 code paths.

#include <cmath>
#include <functional>

namespace oracles {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

// Upper tail of the chi-square distribution by quadrature of its density.
// The substitution x = u^2 removes the dof=1 endpoint singularity.
inline double chi2_pvalue_quadrature(double statistic, int dof) {
    if (statistic <= 0.0) return 1.0;
    const double a = 0.5 * dof;
    const double log_norm = -a * std::log(2.0) - std::lgamma(a);
    auto density_u = [&](double u) {
        if (u == 0.0) return dof == 1 ? 2.0 * std::exp(log_norm) : 0.0;
        return 2.0 * std::exp(log_norm + (dof - 1) * std::log(u) - 0.5 * u * u);
    };
    const double p_lower = integrate_adaptive(density_u, 0.0, std::sqrt(statistic), 1e-14);
    return 1.0 - p_lower;
}

// Two-compartment reduction: with the third compartment empty and only the
// first pair coupled at rate g, the second compartment follows a logistic
// curve with carrying capacity 100 and growth rate 100 g.
inline double logistic_second_compartment(double a1_0, double a2_0, double g, double t) {
    const double e = std::exp(100.0 * g * t);
    return 100.0 * a2_0 * e / (a1_0 + a2_0 * e);
}

} // namespace oracles
