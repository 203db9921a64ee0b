#pragma once

// Drift vectorfields for unit-diffusion Euclidean processes.

#include <functional>
#include <utility>

#include "mmclab/linalg.hpp"

namespace mmclab {

// Affine drift b(x) = A x + c with cached symmetric/skew split of A.
// S is stored exactly symmetric; T is defined entrywise as A - S.
struct AffineDrift {
    Mat A;
    Vec c;
    Mat S;
    Mat T;

    AffineDrift() = default;
    AffineDrift(const Mat& a, const Vec& cc) : A(a), c(cc) {
        if (a.n != cc.n) throw invalid_argument_error("AffineDrift: A and c dimensions differ");
        S = Mat(a.n);
        T = Mat(a.n);
        for (int i = 0; i < a.n; ++i)
            for (int j = 0; j <= i; ++j) {
                double s = 0.5 * (A(i, j) + A(j, i));
                S(i, j) = s;
                S(j, i) = s;
            }
        T = A - S;
    }

    int dim() const { return A.n; }
    Vec eval(const Vec& x) const { return A * x + c; }
};

// General time-dependent drift with an optional analytic Jacobian.
// When no Jacobian is supplied, central finite differences with step
// 1e-5 * (1 + |x|) are used.
struct GeneralDrift {
    int dim = 0;
    std::function<Vec(double, const Vec&)> evaluate;
    std::function<Mat(double, const Vec&)> jacobian;

    GeneralDrift() = default;
    GeneralDrift(int d, std::function<Vec(double, const Vec&)> eval)
        : dim(d), evaluate(std::move(eval)) {
        auto f = evaluate;
        jacobian = [f, d](double t, const Vec& x) {
            Mat jac(d);
            double h = 1e-5 * (1.0 + norm(x));
            for (int j = 0; j < d; ++j) {
                Vec xp = x, xm = x;
                xp[j] += h;
                xm[j] -= h;
                Vec dp = f(t, xp);
                Vec dm = f(t, xm);
                for (int i = 0; i < d; ++i) jac(i, j) = (dp[i] - dm[i]) / (2.0 * h);
            }
            return jac;
        };
    }
    GeneralDrift(int d, std::function<Vec(double, const Vec&)> eval,
                 std::function<Mat(double, const Vec&)> jac)
        : dim(d), evaluate(std::move(eval)), jacobian(std::move(jac)) {}
};

inline GeneralDrift as_general(const AffineDrift& d) {
    Mat A = d.A;
    Vec c = d.c;
    return GeneralDrift(
        d.dim(), [A, c](double, const Vec& x) { return A * x + c; },
        [A](double, const Vec&) { return A; });
}

}  // namespace mmclab
