#include <catch2/catch_amalgamated.hpp>

#include "mmclab/linalg.hpp"
#include "mmclab/rng.hpp"

using namespace mmclab;

namespace {

// Independent oracle: plain truncated power series for exp(Mt),
// no scaling or squaring.
Mat exp_series_oracle(const Mat& M, double t, int terms) {
    Mat A = t * M;
    Mat result = Mat::identity(M.n);
    Mat term = Mat::identity(M.n);
    for (int k = 1; k <= terms; ++k) {
        term = (1.0 / k) * (term * A);
        result = result + term;
    }
    return result;
}

Mat random_matrix(RngStream& rng, int n, double scale) {
    Mat m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = scale * (2.0 * rng.uniform01() - 1.0);
    return m;
}

double max_abs_diff(const Mat& A, const Mat& B) {
    double d = 0;
    for (int i = 0; i < A.n; ++i)
        for (int j = 0; j < A.n; ++j) d = std::max(d, std::abs(A(i, j) - B(i, j)));
    return d;
}

}  // namespace

TEST_CASE("mat_exp at t=0 is the identity") {
    RngStream rng(7, 0);
    for (int rep = 0; rep < 5; ++rep) {
        Mat m = random_matrix(rng, 3, 2.0);
        CHECK(max_abs_diff(mat_exp(m, 0.0), Mat::identity(3)) < 1e-15);
    }
}

TEST_CASE("mat_exp of a diagonal matrix exponentiates the diagonal") {
    Mat m{{1.3, 0.0}, {0.0, -0.7}};
    Mat e = mat_exp(m, 1.0);
    CHECK(e(0, 0) == Catch::Approx(std::exp(1.3)).epsilon(1e-12));
    CHECK(e(1, 1) == Catch::Approx(std::exp(-0.7)).epsilon(1e-12));
    CHECK(std::abs(e(0, 1)) < 1e-15);
    CHECK(std::abs(e(1, 0)) < 1e-15);
}

TEST_CASE("mat_exp of the planar rotation generator matches the series oracle") {
    Mat J{{0.0, -1.0}, {1.0, 0.0}};
    double t = 1.5707963267948966;  // quarter turn
    Mat expected = exp_series_oracle(J, t, 30);
    Mat got = mat_exp(J, t);
    CHECK(max_abs_diff(got, expected) < 1e-12);
    // quarter turn sends e1 to e2
    CHECK(got(0, 0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(got(1, 0) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(got(0, 1) == Catch::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("mat_exp group law") {
    RngStream rng(11, 0);
    for (int rep = 0; rep < 20; ++rep) {
        int n = 2 + static_cast<int>(rng.uniform01() * 3);
        Mat m = random_matrix(rng, n, 1.0);
        double nrm = inf_norm(m);
        if (nrm > 2.0) m = (2.0 / nrm) * m;
        double s = 2.0 * rng.uniform01();
        double t = 2.0 * rng.uniform01();
        Mat lhs = mat_exp(m, s + t);
        Mat rhs = mat_exp(m, s) * mat_exp(m, t);
        CHECK(max_abs_diff(lhs, rhs) < 1e-8);
    }
}

TEST_CASE("mat_exp of a skew-symmetric matrix is orthogonal") {
    RngStream rng(13, 0);
    for (int rep = 0; rep < 20; ++rep) {
        int n = 2 + static_cast<int>(rng.uniform01() * 3);
        Mat m = skew_part(random_matrix(rng, n, 2.0));
        double t = 4.0 * rng.uniform01() - 2.0;
        Mat q = mat_exp(m, t);
        CHECK(max_abs_diff(transpose(q) * q, Mat::identity(n)) < 1e-9);
    }
}

TEST_CASE("mat_exp rejects non-finite input") {
    Mat m{{std::numeric_limits<double>::quiet_NaN(), 0.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(mat_exp(m, 1.0), invalid_argument_error);
}

TEST_CASE("cholesky solve recovers known solutions") {
    Mat a{{4.0, 1.0, 0.2}, {1.0, 3.0, -0.5}, {0.2, -0.5, 2.0}};
    Vec x_true{0.3, -1.2, 2.5};
    Vec b = a * x_true;
    Vec x = solve_spd(a, b);
    for (int i = 0; i < 3; ++i) CHECK(x[i] == Catch::Approx(x_true[i]).epsilon(1e-12));
}

TEST_CASE("cholesky reports indefinite matrices") {
    Mat a{{1.0, 2.0}, {2.0, 1.0}};  // eigenvalues 3, -1
    CHECK(!cholesky(a).has_value());
    CHECK(eigenvalues_at_least(a, 1.5));
    CHECK(!eigenvalues_at_least(a, 0.5));
}

TEST_CASE("symmetric/skew split reassembles the matrix") {
    RngStream rng(17, 0);
    Mat m = random_matrix(rng, 4, 3.0);
    Mat s = symmetric_part(m);
    Mat t = skew_part(m);
    CHECK(max_abs_diff(s, transpose(s)) == 0.0);
    CHECK(max_abs_diff(t, -1.0 * transpose(t)) == 0.0);
    CHECK(max_abs_diff(s + t, m) < 1e-15);
}
