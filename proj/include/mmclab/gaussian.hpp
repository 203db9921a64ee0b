#pragma once

// Exact marginal laws of linear SDEs, total-variation distances, and the
// Aldous-bound gap report that certifies (or refutes) maximality of a
// simulated coupling.

#include <cmath>
#include <functional>
#include <vector>

#include "mmclab/drift.hpp"
#include "mmclab/quadrature.hpp"

namespace mmclab {

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.7071067811865475244); }

struct GaussianLaw {
    Vec mean;
    Mat cov;

    bool valid(double sym_tol = 1e-12, double eig_floor = 1e-10) const {
        if (frobenius_norm(cov - transpose(cov)) > sym_tol) return false;
        return eigenvalues_at_least(symmetric_part(cov), eig_floor);
    }
};

// Tail curve P(tau > t) or an exact total-variation curve; stderr is
// empty for exact curves.
struct TailCurve {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> stderrs;
};

// Moments of dX = (A X + c) dt + dB started at x0:
//   m' = A m + c,   Sigma' = A Sigma + Sigma A^T + I,  Sigma(0) = 0.
// Fixed-step RK4 (step <= 1e-3) for reproducibility; Brownian closed
// form when A = 0.
inline GaussianLaw linear_sde_moments(const AffineDrift& d, const Vec& x0, double t,
                                      double max_step = 1e-3) {
    if (t < 0) throw invalid_argument_error("linear_sde_moments: t must be >= 0");
    const int n = d.dim();
    GaussianLaw law;
    if (frobenius_norm(d.A) == 0.0) {
        law.mean = x0 + t * d.c;
        law.cov = t * Mat::identity(n);
        return law;
    }
    Vec m = x0;
    Mat sigma(n);
    if (t > 0) {
        long steps = static_cast<long>(std::ceil(t / max_step - 1e-12));
        steps = std::max(steps, 1L);
        double h = t / static_cast<double>(steps);
        Mat eye = Mat::identity(n);
        auto mean_rhs = [&](const Vec& mm) { return d.A * mm + d.c; };
        auto cov_rhs = [&](const Mat& ss) { return d.A * ss + ss * transpose(d.A) + eye; };
        for (long k = 0; k < steps; ++k) {
            Vec k1 = mean_rhs(m);
            Vec k2 = mean_rhs(m + (0.5 * h) * k1);
            Vec k3 = mean_rhs(m + (0.5 * h) * k2);
            Vec k4 = mean_rhs(m + h * k3);
            Mat s1 = cov_rhs(sigma);
            Mat s2 = cov_rhs(sigma + (0.5 * h) * s1);
            Mat s3 = cov_rhs(sigma + (0.5 * h) * s2);
            Mat s4 = cov_rhs(sigma + h * s3);
            m = m + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            sigma = sigma + (h / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
            sigma = symmetric_part(sigma);  // keep exactly symmetric
        }
    }
    law.mean = m;
    law.cov = sigma;
    return law;
}

// Total variation between two Gaussians with a common covariance:
//   2 Phi(delta/2) - 1 with delta^2 = (m1-m2)^T cov^{-1} (m1-m2).
inline double tv_gaussians_equal_cov(const GaussianLaw& g1, const GaussianLaw& g2) {
    if (frobenius_norm(g1.cov - g2.cov) > 1e-8)
        throw invalid_argument_error("tv_gaussians_equal_cov: covariances differ");
    Vec diff = g1.mean - g2.mean;
    Vec solved = solve_spd(g1.cov, diff);  // throws numerical_failure if singular
    double delta_sq = dot(diff, solved);
    if (delta_sq < 0) delta_sq = 0;
    return 2.0 * std_normal_cdf(0.5 * std::sqrt(delta_sq)) - 1.0;
}

// Quadrature fallback/oracle in one dimension: TV = 0.5 * int |p1 - p2|.
inline double tv_numeric_1d(const std::function<double(double)>& density1,
                            const std::function<double(double)>& density2, double a, double b,
                            double tol = 1e-8) {
    double mass1 = integrate_1d(density1, a, b, tol);
    double mass2 = integrate_1d(density2, a, b, tol);
    if (std::abs(mass1 - 1.0) > 10.0 * tol || std::abs(mass2 - 1.0) > 10.0 * tol)
        throw invalid_argument_error("tv_numeric_1d: densities do not integrate to 1 on the support");
    auto absdiff = [&](double x) { return std::abs(density1(x) - density2(x)); };
    return 0.5 * integrate_1d(absdiff, a, b, tol);
}

// Exact total-variation lower-bound curve for an admissible linear SDE
// coupling. This is the curve an empirical coupling-time tail must match
// to be maximal.
inline TailCurve aldous_curve(const AffineDrift& d, const Vec& x0, const Vec& y0,
                              const std::vector<double>& times) {
    if (norm(x0 - y0) == 0.0) throw degenerate_input_error("aldous_curve: x0 == y0");
    TailCurve curve;
    curve.times = times;
    for (double t : times) {
        if (t <= 0.0) {
            curve.values.push_back(1.0);  // distinct Dirac masses
            continue;
        }
        GaussianLaw g1 = linear_sde_moments(d, x0, t);
        GaussianLaw g2 = linear_sde_moments(d, y0, t);
        curve.values.push_back(tv_gaussians_equal_cov(g1, g2));
    }
    return curve;
}

// Empirical tail P(tau > t) with binomial standard errors.
inline TailCurve empirical_tail(const std::vector<double>& taus,
                                const std::vector<double>& times) {
    if (taus.empty()) throw invalid_argument_error("empirical_tail: no coupling times");
    TailCurve curve;
    curve.times = times;
    const double n = static_cast<double>(taus.size());
    for (double t : times) {
        long beyond = 0;
        for (double tau : taus)
            if (tau > t) ++beyond;
        double p = static_cast<double>(beyond) / n;
        curve.values.push_back(p);
        curve.stderrs.push_back(std::sqrt(p * (1.0 - p) / n));
    }
    return curve;
}

struct GapEntry {
    double t = 0.0;
    double exact = 0.0;
    double empirical = 0.0;
    double stderr_ = 0.0;
    double gap = 0.0;  // empirical - exact
    double z = 0.0;    // gap in standard errors
};

struct GapReport {
    std::vector<GapEntry> entries;
    bool maximal = false;           // all |z| <= 4
    bool aldous_violation = false;  // some gap < -4 stderr: the tail dips
                                    // below the bound, which signals a bug
};

inline GapReport aldous_gap_report(const TailCurve& emp, const TailCurve& exact) {
    if (emp.times.size() != exact.times.size())
        throw invalid_argument_error("aldous_gap_report: time grids differ");
    for (size_t i = 0; i < emp.times.size(); ++i)
        if (emp.times[i] != exact.times[i])
            throw invalid_argument_error("aldous_gap_report: time grids differ");
    GapReport rep;
    rep.maximal = true;
    for (size_t i = 0; i < emp.times.size(); ++i) {
        GapEntry e;
        e.t = emp.times[i];
        e.exact = exact.values[i];
        e.empirical = emp.values[i];
        e.stderr_ = emp.stderrs.empty() ? 0.0 : emp.stderrs[i];
        e.gap = e.empirical - e.exact;
        if (e.stderr_ > 0.0)
            e.z = e.gap / e.stderr_;
        else
            e.z = e.gap == 0.0 ? 0.0 : std::copysign(1e300, e.gap);
        if (std::abs(e.z) > 4.0) rep.maximal = false;
        if (e.gap < -4.0 * e.stderr_) rep.aldous_violation = true;
        rep.entries.push_back(e);
    }
    return rep;
}

}  // namespace mmclab
