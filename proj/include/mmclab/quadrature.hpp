#pragma once

// Adaptive quadrature over a finite interval.

#include <cmath>
#include <functional>

#include "mmclab/errors.hpp"

namespace mmclab {

namespace detail {

struct SimpsonState {
    long evals = 0;
    long max_evals = 0;
    double min_cell = 0.0;   // cells narrower than this are accepted as-is
    double acc_error = 0.0;  // accumulated per-cell error estimates
    bool budget_exceeded = false;
};

// Classic adaptive Simpson with Richardson error control. Cells that
// cannot be refined further (too narrow, too deep, or out of budget)
// are accepted with their current error estimate charged to acc_error.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth, SimpsonState& st) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    if (st.evals + 2 > st.max_evals) {
        st.budget_exceeded = true;
        return whole;
    }
    double flm = f(lm);
    double frm = f(rm);
    st.evals += 2;
    double h = b - a;
    double left = (h / 12.0) * (fa + 4.0 * flm + fm);
    double right = (h / 12.0) * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol || std::abs(h) <= st.min_cell || depth <= 0) {
        st.acc_error += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, st) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, st);
}

}  // namespace detail

// Integrates f over [a, b] with estimated absolute error <= tol.
// The interval is first split uniformly so narrow features cannot be
// missed by the top-level samples. Throws numerical_failure_error
// (carrying the best estimate) if the accuracy target cannot be met.
inline double integrate_1d(const std::function<double(double)>& f, double a, double b,
                           double tol = 1e-10) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(tol > 0))
        throw invalid_argument_error("integrate_1d: bad interval or tolerance");
    if (a == b) return 0.0;
    constexpr int kInitialCells = 16;
    detail::SimpsonState st;
    st.max_evals = 4'000'000;
    st.min_cell = std::abs(b - a) * 1e-12;
    double total = 0.0;
    double cell_tol = tol / kInitialCells;
    double h = (b - a) / kInitialCells;
    double left_x = a;
    double f_left = f(left_x);
    ++st.evals;
    for (int cell = 0; cell < kInitialCells; ++cell) {
        double right_x = (cell == kInitialCells - 1) ? b : a + (cell + 1) * h;
        double mid_x = 0.5 * (left_x + right_x);
        double f_mid = f(mid_x);
        double f_right = f(right_x);
        st.evals += 2;
        double whole = ((right_x - left_x) / 6.0) * (f_left + 4.0 * f_mid + f_right);
        total += detail::adaptive_simpson(f, left_x, right_x, f_left, f_mid, f_right, whole,
                                          cell_tol, /*depth=*/44, st);
        left_x = right_x;
        f_left = f_right;
    }
    if (st.budget_exceeded || st.acc_error > tol)
        throw numerical_failure_error("integrate_1d: accuracy target not met", total);
    return total;
}

}  // namespace mmclab
