#pragma once

// Decision procedures: which drifts and starting points admit a
// Markovian maximal coupling, the rigid affine form, one-dimensional
// classification, the scalar diffusion-coefficient reduction, and
// mirror-motion predicates.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "mmclab/drift.hpp"
#include "mmclab/quadrature.hpp"

namespace mmclab {

// Existence test for an affine drift b(x) = Ax + c started from (x0, y0):
// all Krylov vectors T^k (x0 - y0), k = 0..d-1, must lie in a single
// eigenspace of S. Returns the eigenvalue lambda0 on success.
// The candidate eigenvalue is identified by a Rayleigh quotient on the
// first vector and then verified on all of them; vectors that have
// collapsed to (numerical) zero are skipped.
inline std::optional<double> affine_mmc_exists(const AffineDrift& d, const Vec& x0,
                                               const Vec& y0, double tol = 1e-8) {
    Vec v = x0 - y0;
    double base = norm(v);
    if (base == 0.0) throw degenerate_input_error("affine_mmc_exists: x0 == y0");
    double lambda0 = dot(v, d.S * v) / dot(v, v);
    double t_norm = frobenius_norm(d.T);
    Vec vk = v;
    double scale = base;
    for (int k = 0; k < d.dim(); ++k) {
        if (k > 0) {
            vk = d.T * vk;
            scale *= std::max(t_norm, 1e-30);
        }
        double nk = norm(vk);
        if (nk <= 1e-12 * std::max(scale, base)) continue;  // collapsed direction
        Vec resid = d.S * vk - lambda0 * vk;
        if (norm(resid) > tol * nk) return std::nullopt;
    }
    return lambda0;
}

// Result of the rigid-form test: drift decomposes as
// b(x) = lambda0 x + T x + c with T skew-symmetric.
struct LpcForm {
    bool ok = false;
    double lambda0 = 0.0;
    Mat T;
    Vec c;
};

inline LpcForm lpc_form_check(const AffineDrift& d, double tol = 1e-8) {
    LpcForm r;
    r.lambda0 = trace(d.S) / d.dim();
    r.T = d.T;
    r.c = d.c;
    Mat dev = d.S - r.lambda0 * Mat::identity(d.dim());
    r.ok = frobenius_norm(dev) <= tol;
    return r;
}

enum class DriftClass1D { Affine, OddSymmetric, None };

inline const char* to_string(DriftClass1D c) {
    switch (c) {
        case DriftClass1D::Affine: return "affine";
        case DriftClass1D::OddSymmetric: return "odd-symmetric";
        default: return "none";
    }
}

// One-dimensional classification on a uniform grid symmetric about the
// midpoint m = (x0+y0)/2. Affine wins when a drift satisfies both tests.
inline DriftClass1D classify_1d(const std::function<double(double)>& b, double x0, double y0,
                                const std::vector<double>& grid, double tol = 1e-6) {
    if (x0 == y0) throw degenerate_input_error("classify_1d: x0 == y0");
    const int n = static_cast<int>(grid.size());
    if (n < 3) throw invalid_argument_error("classify_1d: degenerate grid (need >= 3 points)");
    double m = 0.5 * (x0 + y0);
    double span = grid.back() - grid.front();
    if (!(span > 0)) throw invalid_argument_error("classify_1d: degenerate grid (not increasing)");
    double h = grid[1] - grid[0];
    for (int i = 0; i + 1 < n; ++i)
        if (std::abs((grid[i + 1] - grid[i]) - h) > 1e-9 * std::abs(span))
            throw invalid_argument_error("classify_1d: degenerate grid (non-uniform spacing)");
    for (int i = 0; i < n; ++i)
        if (std::abs(0.5 * (grid[i] + grid[n - 1 - i]) - m) > 1e-9 * std::abs(span))
            throw invalid_argument_error("classify_1d: degenerate grid (not symmetric about midpoint)");

    std::vector<double> vals(n);
    for (int i = 0; i < n; ++i) vals[i] = b(grid[i]);

    double max_second_diff = 0.0;
    for (int i = 1; i + 1 < n; ++i)
        max_second_diff =
            std::max(max_second_diff, std::abs(vals[i + 1] - 2.0 * vals[i] + vals[i - 1]));
    if (max_second_diff <= tol) return DriftClass1D::Affine;

    double max_odd_defect = 0.0;
    for (int i = 0; i < n; ++i)
        max_odd_defect = std::max(max_odd_defect, std::abs(vals[i] + vals[n - 1 - i]));
    if (max_odd_defect <= tol) return DriftClass1D::OddSymmetric;

    return DriftClass1D::None;
}

// Unit-diffusion reduction of dX = b dt + sigma dB via the coordinate
// change F(x) = int_0^x du/sigma(u). Returns the transformed grid
// points u_i = F(x_i) and the effective drift evaluated there.
struct LampertiResult {
    std::vector<double> u;
    std::vector<double> drift;

    // effective drift at an arbitrary u by monotone linear interpolation
    double eval(double uq) const {
        if (uq <= u.front()) return drift.front();
        if (uq >= u.back()) return drift.back();
        auto it = std::upper_bound(u.begin(), u.end(), uq);
        size_t i = static_cast<size_t>(it - u.begin());
        double w = (uq - u[i - 1]) / (u[i] - u[i - 1]);
        return (1.0 - w) * drift[i - 1] + w * drift[i];
    }
};

inline LampertiResult lamperti_reduce(const std::function<double(double)>& b,
                                      const std::function<double(double)>& sigma,
                                      const std::vector<double>& grid) {
    const int n = static_cast<int>(grid.size());
    if (n < 2) throw invalid_argument_error("lamperti_reduce: grid needs >= 2 points");
    for (int i = 0; i + 1 < n; ++i)
        if (!(grid[i] < grid[i + 1]))
            throw invalid_argument_error("lamperti_reduce: grid must be strictly increasing");
    for (double x : grid)
        if (!(sigma(x) > 0.0))
            throw invalid_argument_error("lamperti_reduce: sigma must be positive on the grid");

    auto inv_sigma = [&sigma](double x) { return 1.0 / sigma(x); };
    LampertiResult r;
    r.u.resize(n);
    r.drift.resize(n);
    double f0 = grid[0] >= 0.0 ? integrate_1d(inv_sigma, 0.0, grid[0], 1e-10)
                               : -integrate_1d(inv_sigma, grid[0], 0.0, 1e-10);
    r.u[0] = f0;
    for (int i = 1; i < n; ++i)
        r.u[i] = r.u[i - 1] + integrate_1d(inv_sigma, grid[i - 1], grid[i], 1e-10);
    for (int i = 0; i < n; ++i) {
        double x = grid[i];
        double h = 1e-5 * (1.0 + std::abs(x));
        double sigma_prime = (sigma(x + h) - sigma(x - h)) / (2.0 * h);
        r.drift[i] = b(x) / sigma(x) - 0.5 * sigma_prime;
    }
    return r;
}

// Static-mirror predicate for the rigid affine drift lambda*x + T*x + c:
// the mirror stays put iff T kills x0 - y0 and the offset has no secular
// growth term.
inline bool mirror_static(double lambda, const Mat& T, const Vec& c, const Vec& x0,
                          const Vec& y0, double tol = 1e-8) {
    Vec diff = x0 - y0;
    double base = norm(diff);
    if (base == 0.0) throw degenerate_input_error("mirror_static: x0 == y0");
    if (norm(T * diff) > tol * base) return false;
    double secular = dot(diff, lambda * (x0 + y0) + 2.0 * c);
    return std::abs(secular) <= tol * base;
}

// Sample grid for the translating-mirror form test: the mirror normal is
// assumed aligned with the first coordinate axis.
struct TranslatingFormGrid {
    std::vector<double> axis1;       // samples along the mirror normal
    std::vector<Vec> cross_section;  // (d-1)-dimensional samples of the rest
};

// True iff on the sample grid the first drift component depends affinely
// on x1 alone and the remaining components do not depend on x1 at all.
inline bool mirror_translating_form(const GeneralDrift& b, const TranslatingFormGrid& grid,
                                    double tol = 1e-6) {
    const int d = b.dim;
    const int n1 = static_cast<int>(grid.axis1.size());
    const int nw = static_cast<int>(grid.cross_section.size());
    if (n1 < 3 || nw < 1)
        throw invalid_argument_error("mirror_translating_form: grid too small");

    auto point = [&](int i, int j) {
        Vec x(d);
        x[0] = grid.axis1[i];
        for (int k = 1; k < d; ++k) x[k] = grid.cross_section[j][k - 1];
        return x;
    };

    std::vector<std::vector<Vec>> vals(n1, std::vector<Vec>(nw));
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < nw; ++j) vals[i][j] = b.evaluate(0.0, point(i, j));

    // b1 must not vary across the cross-section
    for (int i = 0; i < n1; ++i) {
        double mean = 0;
        for (int j = 0; j < nw; ++j) mean += vals[i][j][0];
        mean /= nw;
        double var = 0;
        for (int j = 0; j < nw; ++j) var += (vals[i][j][0] - mean) * (vals[i][j][0] - mean);
        if (var / nw > tol) return false;
    }
    // b1 must be affine along the axis
    for (int j = 0; j < nw; ++j)
        for (int i = 1; i + 1 < n1; ++i) {
            double second =
                vals[i + 1][j][0] - 2.0 * vals[i][j][0] + vals[i - 1][j][0];
            if (std::abs(second) > tol) return false;
        }
    // remaining components must not vary along the axis
    for (int j = 0; j < nw; ++j)
        for (int k = 1; k < d; ++k) {
            double mean = 0;
            for (int i = 0; i < n1; ++i) mean += vals[i][j][k];
            mean /= n1;
            double var = 0;
            for (int i = 0; i < n1; ++i) var += (vals[i][j][k] - mean) * (vals[i][j][k] - mean);
            if (var / n1 > tol) return false;
        }
    return true;
}

}  // namespace mmclab
