#pragma once

// Dense linear algebra for small fixed-capacity vectors and square matrices.
// Everything is stack-allocated; dimensions up to kMaxDim are supported.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <vector>

#include "mmclab/errors.hpp"

namespace mmclab {

inline constexpr int kMaxDim = 16;

struct Vec {
    int n = 0;
    std::array<double, kMaxDim> a{};

    Vec() = default;
    explicit Vec(int dim) : n(dim) {
        if (dim < 0 || dim > kMaxDim) throw invalid_argument_error("Vec: dimension out of range");
    }
    Vec(std::initializer_list<double> vals) : n(static_cast<int>(vals.size())) {
        if (n > kMaxDim) throw invalid_argument_error("Vec: dimension out of range");
        int i = 0;
        for (double v : vals) a[i++] = v;
    }
    explicit Vec(const std::vector<double>& vals) : n(static_cast<int>(vals.size())) {
        if (n > kMaxDim) throw invalid_argument_error("Vec: dimension out of range");
        for (int i = 0; i < n; ++i) a[i] = vals[i];
    }

    double& operator[](int i) { return a[i]; }
    double operator[](int i) const { return a[i]; }

    std::vector<double> to_std() const { return std::vector<double>(a.begin(), a.begin() + n); }

    bool finite() const {
        for (int i = 0; i < n; ++i)
            if (!std::isfinite(a[i])) return false;
        return true;
    }
};

inline Vec operator+(const Vec& u, const Vec& v) {
    Vec r(u.n);
    for (int i = 0; i < u.n; ++i) r[i] = u[i] + v[i];
    return r;
}
inline Vec operator-(const Vec& u, const Vec& v) {
    Vec r(u.n);
    for (int i = 0; i < u.n; ++i) r[i] = u[i] - v[i];
    return r;
}
inline Vec operator*(double s, const Vec& v) {
    Vec r(v.n);
    for (int i = 0; i < v.n; ++i) r[i] = s * v[i];
    return r;
}
inline Vec operator-(const Vec& v) { return -1.0 * v; }
inline Vec& operator+=(Vec& u, const Vec& v) {
    for (int i = 0; i < u.n; ++i) u[i] += v[i];
    return u;
}

inline double dot(const Vec& u, const Vec& v) {
    double s = 0;
    for (int i = 0; i < u.n; ++i) s += u[i] * v[i];
    return s;
}
inline double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

inline Vec normalized(const Vec& v) {
    double r = norm(v);
    if (r == 0.0) throw degenerate_input_error("normalized: zero vector");
    return (1.0 / r) * v;
}

inline Vec unit_vec(int dim, int axis) {
    Vec e(dim);
    e[axis] = 1.0;
    return e;
}

// Square matrix, row-major.
struct Mat {
    int n = 0;
    std::array<double, kMaxDim * kMaxDim> a{};

    Mat() = default;
    explicit Mat(int dim) : n(dim) {
        if (dim < 0 || dim > kMaxDim) throw invalid_argument_error("Mat: dimension out of range");
    }
    Mat(std::initializer_list<std::initializer_list<double>> rows)
        : n(static_cast<int>(rows.size())) {
        if (n > kMaxDim) throw invalid_argument_error("Mat: dimension out of range");
        int i = 0;
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != n)
                throw invalid_argument_error("Mat: rows must form a square matrix");
            int j = 0;
            for (double v : row) a[i * kMaxDim + j++] = v;
            ++i;
        }
    }

    double& operator()(int i, int j) { return a[i * kMaxDim + j]; }
    double operator()(int i, int j) const { return a[i * kMaxDim + j]; }

    static Mat identity(int dim) {
        Mat m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    bool finite() const {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (!std::isfinite((*this)(i, j))) return false;
        return true;
    }
};

inline Mat operator+(const Mat& A, const Mat& B) {
    Mat r(A.n);
    for (int i = 0; i < A.n; ++i)
        for (int j = 0; j < A.n; ++j) r(i, j) = A(i, j) + B(i, j);
    return r;
}
inline Mat operator-(const Mat& A, const Mat& B) {
    Mat r(A.n);
    for (int i = 0; i < A.n; ++i)
        for (int j = 0; j < A.n; ++j) r(i, j) = A(i, j) - B(i, j);
    return r;
}
inline Mat operator*(double s, const Mat& A) {
    Mat r(A.n);
    for (int i = 0; i < A.n; ++i)
        for (int j = 0; j < A.n; ++j) r(i, j) = s * A(i, j);
    return r;
}
inline Mat operator*(const Mat& A, const Mat& B) {
    Mat r(A.n);
    for (int i = 0; i < A.n; ++i)
        for (int k = 0; k < A.n; ++k) {
            double aik = A(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < A.n; ++j) r(i, j) += aik * B(k, j);
        }
    return r;
}
inline Vec operator*(const Mat& A, const Vec& v) {
    Vec r(A.n);
    for (int i = 0; i < A.n; ++i) {
        double s = 0;
        for (int j = 0; j < A.n; ++j) s += A(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

inline Mat transpose(const Mat& A) {
    Mat r(A.n);
    for (int i = 0; i < A.n; ++i)
        for (int j = 0; j < A.n; ++j) r(i, j) = A(j, i);
    return r;
}

inline Mat outer(const Vec& u, const Vec& v) {
    Mat r(u.n);
    for (int i = 0; i < u.n; ++i)
        for (int j = 0; j < u.n; ++j) r(i, j) = u[i] * v[j];
    return r;
}

inline double trace(const Mat& A) {
    double s = 0;
    for (int i = 0; i < A.n; ++i) s += A(i, i);
    return s;
}

inline double frobenius_norm(const Mat& A) {
    double s = 0;
    for (int i = 0; i < A.n; ++i)
        for (int j = 0; j < A.n; ++j) s += A(i, j) * A(i, j);
    return std::sqrt(s);
}

// Maximum absolute row sum.
inline double inf_norm(const Mat& A) {
    double best = 0;
    for (int i = 0; i < A.n; ++i) {
        double s = 0;
        for (int j = 0; j < A.n; ++j) s += std::abs(A(i, j));
        best = std::max(best, s);
    }
    return best;
}

inline Mat symmetric_part(const Mat& A) { return 0.5 * (A + transpose(A)); }
inline Mat skew_part(const Mat& A) { return 0.5 * (A - transpose(A)); }

// exp(M*t) by scaling-and-squaring with a Taylor-series core.
// The series is summed to machine precision after scaling the argument
// below 1/2 in infinity norm, so the result is accurate to ~1e-14
// relative for moderately sized inputs.
inline Mat mat_exp(const Mat& M, double t) {
    if (!M.finite() || !std::isfinite(t))
        throw invalid_argument_error("mat_exp: non-finite input");
    const int n = M.n;
    Mat A = t * M;
    double nrm = inf_norm(A);
    int squarings = 0;
    if (nrm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
        if (squarings > 64)
            throw invalid_argument_error("mat_exp: |t|*norm(M) too large");
        A = std::ldexp(1.0, -squarings) * A;
    }
    Mat result = Mat::identity(n);
    Mat term = Mat::identity(n);
    for (int k = 1; k <= 40; ++k) {
        term = (1.0 / k) * (term * A);
        result = result + term;
        if (frobenius_norm(term) < 1e-18 * std::max(1.0, frobenius_norm(result))) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

// Cholesky factor L (lower triangular, A = L*L^T) of a symmetric
// positive-definite matrix; empty if A is not positive definite.
inline std::optional<Mat> cholesky(const Mat& A) {
    const int n = A.n;
    Mat L(n);
    for (int j = 0; j < n; ++j) {
        double d = A(j, j);
        for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (d <= 0.0 || !std::isfinite(d)) return std::nullopt;
        L(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double s = A(i, j);
            for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / L(j, j);
        }
    }
    return L;
}

// Solves A x = b for symmetric positive-definite A via Cholesky.
inline Vec solve_spd(const Mat& A, const Vec& b) {
    auto L = cholesky(A);
    if (!L) throw numerical_failure_error("solve_spd: matrix not positive definite", 0.0);
    const int n = A.n;
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= (*L)(i, k) * y[k];
        y[i] = s / (*L)(i, i);
    }
    Vec x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= (*L)(k, i) * x[k];
        x[i] = s / (*L)(i, i);
    }
    return x;
}

// True when eigenvalues of symmetric A are all >= -shift,
// tested by attempting a Cholesky factorization of A + shift*I.
inline bool eigenvalues_at_least(const Mat& A, double shift) {
    Mat B = A;
    for (int i = 0; i < B.n; ++i) B(i, i) += shift;
    return cholesky(B).has_value();
}

}  // namespace mmclab
