#include <catch2/catch_amalgamated.hpp>

#include <mutex>
#include <sstream>

#include "mmclab/gaussian.hpp"
#include "mmclab/model_spaces.hpp"

using namespace mmclab;

namespace {

Vec random_sphere_point(RngStream& rng) {
    Vec p{rng.normal(), rng.normal(), rng.normal()};
    return renormalize_point(ModelSpace::Sphere, p);
}

Vec random_hyperboloid_point(RngStream& rng, double r_scale = 2.0) {
    double r = r_scale * rng.uniform01();
    double phi = 2.0 * M_PI * rng.uniform01();
    return Vec{std::sinh(r) * std::cos(phi), std::sinh(r) * std::sin(phi), std::cosh(r)};
}

// Rodrigues rotation formula as an independent oracle
Vec rodrigues(const Vec& axis, double angle, const Vec& x) {
    Vec k = normalized(axis);
    Vec kx{k[1] * x[2] - k[2] * x[1], k[2] * x[0] - k[0] * x[2], k[0] * x[1] - k[1] * x[0]};
    return std::cos(angle) * x + std::sin(angle) * kx + (dot(k, x) * (1.0 - std::cos(angle))) * k;
}

}  // namespace

TEST_CASE("sphere reflection swaps the poles and fixes the mirror circle") {
    Vec x{1, 0, 0}, y{-1, 0, 0};
    ReflectionIsometry r = make_reflection(ModelSpace::Sphere, x, y);
    Vec top = r.apply(Vec{0, 0, 1});
    CHECK(norm(top - Vec{0, 0, 1}) < 1e-15);
    Vec swapped = r.apply(x);
    CHECK(norm(swapped - y) < 1e-15);
}

TEST_CASE("hyperboloid reflection fixes the apex and swaps the boosted pair") {
    Vec x{std::sinh(1.0), 0, std::cosh(1.0)};
    Vec y{-std::sinh(1.0), 0, std::cosh(1.0)};
    ReflectionIsometry r = make_reflection(ModelSpace::Hyperboloid, x, y);
    // oracle: explicit Lorentz arithmetic, n = (x-y)/sqrt(<x-y,x-y>_L) = e1
    CHECK(norm(r.normal - Vec{1, 0, 0}) < 1e-14);
    CHECK(norm(r.apply(Vec{0, 0, 1}) - Vec{0, 0, 1}) < 1e-14);
    CHECK(norm(r.apply(x) - y) < 1e-13);
    CHECK(norm(r.apply(y) - x) < 1e-13);
}

TEST_CASE("reflections are involutive isometries on both spaces") {
    RngStream rng(301, 0);
    for (int rep = 0; rep < 30; ++rep) {
        {
            Vec a = random_sphere_point(rng), b = random_sphere_point(rng);
            if (norm(a - b) < 0.05) continue;
            ReflectionIsometry r = make_reflection(ModelSpace::Sphere, a, b);
            Vec z = random_sphere_point(rng), w = random_sphere_point(rng);
            CHECK(norm(r.apply(r.apply(z)) - z) < 1e-10);
            CHECK(std::abs(geodesic_distance(ModelSpace::Sphere, r.apply(z), r.apply(w)) -
                           geodesic_distance(ModelSpace::Sphere, z, w)) < 1e-9);
        }
        {
            Vec a = random_hyperboloid_point(rng), b = random_hyperboloid_point(rng);
            if (geodesic_distance(ModelSpace::Hyperboloid, a, b) < 0.05) continue;
            ReflectionIsometry r = make_reflection(ModelSpace::Hyperboloid, a, b);
            Vec z = random_hyperboloid_point(rng), w = random_hyperboloid_point(rng);
            CHECK(norm(r.apply(r.apply(z)) - z) < 1e-10);
            CHECK(std::abs(geodesic_distance(ModelSpace::Hyperboloid, r.apply(z), r.apply(w)) -
                           geodesic_distance(ModelSpace::Hyperboloid, z, w)) < 1e-9);
        }
    }
}

TEST_CASE("killing_flow basics") {
    SECTION("zero time is the identity") {
        KillingField k = KillingField::rotation_z(ModelSpace::Sphere, 1.0);
        CHECK(frobenius_norm(killing_flow(k, 0.0) - Mat::identity(3)) < 1e-15);
    }
    SECTION("half-turn about z against the Rodrigues oracle") {
        KillingField k = KillingField::rotation_z(ModelSpace::Sphere, 1.0);
        Mat q = killing_flow(k, M_PI);
        Vec moved = q * Vec{1, 0, 0};
        Vec oracle = rodrigues(Vec{0, 0, 1}, M_PI, Vec{1, 0, 0});
        CHECK(norm(moved - oracle) < 1e-12);
        CHECK(norm(moved - Vec{-1, 0, 0}) < 1e-12);
    }
    SECTION("x-boost moves the apex along the expected hyperbola") {
        KillingField k = KillingField::boost_x(1.0);
        for (double t : {0.3, 1.0, 2.0}) {
            Vec moved = killing_flow(k, t) * Vec{0, 0, 1};
            CHECK(moved[0] == Catch::Approx(std::sinh(t)).margin(1e-12));
            CHECK(moved[1] == Catch::Approx(0.0).margin(1e-13));
            CHECK(moved[2] == Catch::Approx(std::cosh(t)).margin(1e-12));
            CHECK(lorentz_dot(moved, moved) == Catch::Approx(-1.0).margin(1e-11));
        }
    }
    SECTION("flow group law and isometry property") {
        RngStream rng(307, 0);
        KillingField rot = KillingField::rotation_z(ModelSpace::Sphere, 0.8);
        KillingField boost = KillingField::boost_x(0.6);
        for (int rep = 0; rep < 10; ++rep) {
            double s = 2.0 * rng.uniform01(), t = 2.0 * rng.uniform01();
            Mat lhs = killing_flow(rot, s + t);
            Mat rhs = killing_flow(rot, s) * killing_flow(rot, t);
            CHECK(frobenius_norm(lhs - rhs) < 1e-8);
            Mat q = killing_flow(rot, t);
            CHECK(frobenius_norm(transpose(q) * q - Mat::identity(3)) < 1e-9);
            Mat L = KillingField::lorentz_form();
            Mat b = killing_flow(boost, t);
            CHECK(frobenius_norm(transpose(b) * L * b - L) < 1e-9);
        }
    }
    SECTION("generators must respect the space's skewness condition") {
        Mat not_skew{{0, 1, 0}, {1, 0, 0}, {0, 0, 0}};
        CHECK_THROWS_AS(KillingField(ModelSpace::Sphere, not_skew), invalid_argument_error);
        Mat rotation{{0, -1, 0}, {1, 0, 0}, {0, 0, 0}};
        CHECK_NOTHROW(KillingField(ModelSpace::Hyperboloid, rotation));
        Mat bad_boost{{0, 0, 1}, {0, 0, 0}, {-1, 0, 0}};
        CHECK_THROWS_AS(KillingField(ModelSpace::Hyperboloid, bad_boost),
                        invalid_argument_error);
    }
}

TEST_CASE("exponential map basics") {
    CHECK(norm(exp_map(ModelSpace::Sphere, Vec{0, 0, 1}, Vec(3)) - Vec{0, 0, 1}) == 0.0);
    Vec quarter = exp_map(ModelSpace::Sphere, Vec{0, 0, 1}, Vec{M_PI / 2.0, 0, 0});
    CHECK(norm(quarter - Vec{1, 0, 0}) < 1e-13);
}

TEST_CASE("bm_step_manifold rejects non-tangent drift") {
    RngStream rng(311, 0);
    Vec x{0, 0, 1};
    CHECK_THROWS_AS(bm_step_manifold(ModelSpace::Sphere, x, Vec{0, 0, 1}, 0.01, rng),
                    invalid_argument_error);
    Vec h{0, 0, 1};
    CHECK_THROWS_AS(bm_step_manifold(ModelSpace::Hyperboloid, h, Vec{0, 0, 1}, 0.01, rng),
                    invalid_argument_error);
}

TEST_CASE("mean squared geodesic displacement of one step is 2*dt") {
    RngStream rng(313, 0);
    Vec x{0, 0, 1};
    Vec zero(3);
    const int n = 100000;
    const double dt = 0.01;
    double acc = 0;
    for (int i = 0; i < n; ++i) {
        Vec moved = bm_step_manifold(ModelSpace::Sphere, x, zero, dt, rng);
        double d = geodesic_distance(ModelSpace::Sphere, x, moved);
        acc += d * d;
    }
    double mean_sq = acc / n;
    CHECK(mean_sq > 0.0196);
    CHECK(mean_sq < 0.0204);
}

TEST_CASE("manifold constraints survive long runs") {
    RngStream rng(317, 0);
    Vec zero(3);
    Vec p{0, 0, 1};
    for (int s = 0; s < 10000; ++s) p = bm_step_manifold(ModelSpace::Sphere, p, zero, 1e-3, rng);
    CHECK(std::abs(norm(p) - 1.0) <= 1e-8);

    Vec q{0, 0, 1};
    for (int s = 0; s < 10000; ++s)
        q = bm_step_manifold(ModelSpace::Hyperboloid, q, zero, 1e-3, rng);
    CHECK(std::abs(lorentz_dot(q, q) + 1.0) <= 1e-8);
    CHECK(q[2] >= 1.0);
}

TEST_CASE("sphere heat kernel properties") {
    SECTION("normalizes to one") {
        for (double t : {0.2, 0.5, 2.0}) {
            auto f = [t](double th) { return sphere_heat_kernel(th, t) * std::sin(th); };
            double mass = 2.0 * M_PI * integrate_1d(f, 0.0, M_PI, 1e-11);
            CHECK(mass == Catch::Approx(1.0).margin(1e-8));
        }
    }
    SECTION("long times flatten to the uniform density") {
        for (double th : {0.0, 1.0, 2.0, M_PI}) {
            CHECK(sphere_heat_kernel(th, 50.0) ==
                  Catch::Approx(1.0 / (4.0 * M_PI)).margin(1e-10));
        }
    }
    SECTION("short times remain peaked and positive") {
        double near = sphere_heat_kernel(0.0, 0.5);
        double far = sphere_heat_kernel(M_PI, 0.5);
        CHECK(near > far);
        CHECK(far > 0.0);
    }
    SECTION("tiny times exhaust a small series budget") {
        CHECK_THROWS_AS(sphere_heat_kernel(1.0, 1e-4, 64), numerical_failure_error);
    }
}

TEST_CASE("sphere heat kernel matches a Monte Carlo occupation histogram") {
    const double t = 0.5, dt = 1e-3;
    const int n_paths = 100000;
    const long steps = std::lround(t / dt);
    const int n_bins = 16;
    std::vector<double> counts(n_bins, 0.0);
    Vec start{0, 0, 1};
    Vec zero(3);
    std::mutex mu;
    parallel_for(n_paths, 2, [&](long p) {
        RngStream rng(999, static_cast<uint64_t>(p));
        Vec z = start;
        for (long s = 0; s < steps; ++s) z = bm_step_manifold(ModelSpace::Sphere, z, zero, dt, rng);
        double c = std::min(1.0, std::max(-1.0, dot(z, start)));
        int bin = std::min(n_bins - 1, static_cast<int>((c + 1.0) / 2.0 * n_bins));
        std::lock_guard<std::mutex> lock(mu);
        counts[static_cast<size_t>(bin)] += 1.0;
    });
    for (int b = 0; b < n_bins; ++b) {
        double c_lo = -1.0 + 2.0 * b / n_bins;
        double c_hi = -1.0 + 2.0 * (b + 1) / n_bins;
        // expected mass: 2 pi * int p(arccos c) dc over the bin
        auto f = [t](double c) { return sphere_heat_kernel(std::acos(c), t); };
        double expected = 2.0 * M_PI * integrate_1d(f, c_lo, c_hi, 1e-10);
        double observed = counts[static_cast<size_t>(b)] / n_paths;
        double se = std::sqrt(std::max(expected * (1.0 - expected), 1e-12) / n_paths);
        CHECK(std::abs(observed - expected) < 4.0 * se + 1e-4);
    }
}

TEST_CASE("mckean kernel is a probability density") {
    for (double t : {0.25, 1.0}) {
        auto f = [t](double r) {
            return hyperbolic_heat_kernel_mckean(r, t) * 2.0 * M_PI * std::sinh(r);
        };
        double r_max = 10.0 * std::sqrt(t) + 2.0;
        double mass = integrate_1d(f, 0.0, r_max, 1e-9);
        CHECK(mass == Catch::Approx(1.0).margin(1e-5));
    }
}

TEST_CASE("calibrated hyperbolic kernel table tracks the analytic oracle") {
    HyperbolicKernelOptions opts;
    opts.n_paths = 200000;
    opts.dt = 2e-3;
    opts.seed = 20240401;
    opts.threads = 2;
    const double t = 0.4;
    auto table = hyperbolic_kernel_table(t, opts);
    double peak = hyperbolic_heat_kernel_mckean(0.1, t);
    for (double r : {0.2, 0.5, 1.0, 1.5}) {
        double got = (*table)(r);
        double want = hyperbolic_heat_kernel_mckean(r, t);
        CHECK(std::abs(got - want) < 0.04 * peak);
    }
    // TV computed from the table agrees with TV from the analytic kernel
    double D = 1.0;
    auto oracle_kernel = [t](double r) { return hyperbolic_heat_kernel_mckean(r, t); };
    double tv_oracle = detail::tv_polar(oracle_kernel, D, table->r_max(), false, 1e-5);
    Vec x0{std::sinh(0.5), 0, std::cosh(0.5)};
    Vec y0{-std::sinh(0.5), 0, std::cosh(0.5)};
    REQUIRE(geodesic_distance(ModelSpace::Hyperboloid, x0, y0) == Catch::Approx(1.0));
    double tv_table = tv_model_space(ModelSpace::Hyperboloid, x0, y0, t, opts);
    CHECK(tv_table == Catch::Approx(tv_oracle).margin(0.02));
}

TEST_CASE("tv_model_space endpoints") {
    Vec x0{std::sin(0.5), 0, std::cos(0.5)};
    Vec y0{-std::sin(0.5), 0, std::cos(0.5)};
    CHECK(tv_model_space(ModelSpace::Sphere, x0, x0, 0.5) == 0.0);
    CHECK(tv_model_space(ModelSpace::Sphere, x0, y0, 0.02) > 0.999);
    CHECK_THROWS_AS(tv_model_space(ModelSpace::Sphere, x0, y0, 0.0), invalid_argument_error);
}

TEST_CASE("driftless sphere coupling attains the total-variation bound") {
    Vec x0{std::sin(0.5), 0, std::cos(0.5)};
    Vec y0{-std::sin(0.5), 0, std::cos(0.5)};
    const long n = 5000;
    std::vector<double> taus =
        simulate_manifold_taus(ModelSpace::Sphere, x0, y0, 1e-3, 0.5, n, 31337, 2);
    TailCurve emp = empirical_tail(taus, {0.2, 0.5});
    for (size_t i = 0; i < emp.times.size(); ++i) {
        double tv = tv_model_space(ModelSpace::Sphere, x0, y0, emp.times[i]);
        CHECK(std::abs(emp.values[i] - tv) < 4.0 * emp.stderrs[i]);
    }
}

TEST_CASE("rotation drift: pushed mirror points stay equidistant, mirror normals evolve") {
    Vec x0{std::sin(0.5), 0, std::cos(0.5)};
    Vec y0{-std::sin(0.5), 0, std::cos(0.5)};
    KillingField k = KillingField::rotation_z(ModelSpace::Sphere, 1.0);
    ReflectionIsometry r0 = make_reflection(ModelSpace::Sphere, x0, y0);

    // sample points on the initial mirror great circle (plane orthogonal to n0)
    std::vector<Vec> mirror_points;
    auto [u, v] = tangent_basis(ModelSpace::Sphere, r0.normal);
    for (int j = 0; j < 20; ++j) {
        double psi = 2.0 * M_PI * j / 20.0;
        mirror_points.push_back(std::cos(psi) * u + std::sin(psi) * v);
    }

    RngStream rng(133, 5);
    ManifoldCoupledPath path = simulate_manifold_coupling(k, x0, y0, 1e-3, 0.5, rng);
    REQUIRE(!path.times.empty());
    for (size_t s = 0; s < path.times.size(); ++s) {
        if (path.times[s] >= path.tau) break;
        Mat flow = killing_flow(k, path.times[s]);
        for (const Vec& z0 : mirror_points) {
            Vec zt = flow * z0;
            double dx = geodesic_distance(ModelSpace::Sphere, path.xs[s], zt);
            double dy = geodesic_distance(ModelSpace::Sphere, path.ys[s], zt);
            CHECK(std::abs(dx - dy) < 1e-6);
        }
        CHECK(norm(path.mirror_normals[s] - flow * r0.normal) < 1e-12);
    }
}

TEST_CASE("driftless manifold coupling keeps a constant mirror") {
    Vec x0{std::sin(0.5), 0, std::cos(0.5)};
    Vec y0{-std::sin(0.5), 0, std::cos(0.5)};
    KillingField none(ModelSpace::Sphere, Mat(3));
    RngStream rng(134, 6);
    ManifoldCoupledPath path = simulate_manifold_coupling(none, x0, y0, 1e-3, 0.2, rng);
    for (const Vec& n : path.mirror_normals)
        CHECK(norm(n - path.mirror_normals.front()) < 1e-12);
}

TEST_CASE("killing_mirror_static orbit test") {
    SECTION("rotation about the mirror's own axis keeps it fixed") {
        // pair symmetric about the equator; its mirror is the equator,
        // which a z-rotation maps onto itself
        double a = 0.6;
        Vec x0{std::cos(a), 0, std::sin(a)};
        Vec y0{std::cos(a), 0, -std::sin(a)};
        KillingField k = KillingField::rotation_z(ModelSpace::Sphere, 1.0);
        CHECK(killing_mirror_static(k, x0, y0));
    }
    SECTION("rotation transverse to the mirror moves it") {
        Vec x0{std::sin(0.5), 0, std::cos(0.5)};
        Vec y0{-std::sin(0.5), 0, std::cos(0.5)};
        KillingField k = KillingField::rotation_z(ModelSpace::Sphere, 1.0);
        CHECK(!killing_mirror_static(k, x0, y0));
    }
    SECTION("boost along the mirror geodesic keeps it fixed on H^2") {
        // pair symmetric about the x-axis geodesic {y = 0}
        Vec x0{std::sinh(0.4), std::sinh(0.3), 0};
        x0[2] = std::sqrt(1.0 + x0[0] * x0[0] + x0[1] * x0[1]);
        Vec y0{x0[0], -x0[1], x0[2]};
        KillingField boost = KillingField::boost_x(0.7);
        CHECK(killing_mirror_static(boost, x0, y0));
        // a rotation about the apex does not preserve that geodesic
        KillingField rot = KillingField::rotation_z(ModelSpace::Hyperboloid, 1.0);
        CHECK(!killing_mirror_static(rot, x0, y0));
    }
    SECTION("mirror samples satisfy the equidistance property") {
        Vec x0{std::sin(0.5), 0, std::cos(0.5)};
        Vec y0{-std::sin(0.5), 0, std::cos(0.5)};
        for (const Vec& z : mirror_sample_points(ModelSpace::Sphere, x0, y0)) {
            CHECK(std::abs(geodesic_distance(ModelSpace::Sphere, x0, z) -
                           geodesic_distance(ModelSpace::Sphere, y0, z)) < 1e-12);
        }
        Vec hx{std::sinh(1.0), 0, std::cosh(1.0)};
        Vec hy{-std::sinh(1.0), 0, std::cosh(1.0)};
        for (const Vec& z : mirror_sample_points(ModelSpace::Hyperboloid, hx, hy)) {
            CHECK(std::abs(lorentz_dot(z, z) + 1.0) < 1e-12);
            CHECK(std::abs(geodesic_distance(ModelSpace::Hyperboloid, hx, z) -
                           geodesic_distance(ModelSpace::Hyperboloid, hy, z)) < 1e-10);
        }
    }
}

TEST_CASE("manifold path CSV has the documented schema") {
    Vec x0{std::sin(0.5), 0, std::cos(0.5)};
    Vec y0{-std::sin(0.5), 0, std::cos(0.5)};
    KillingField none(ModelSpace::Sphere, Mat(3));
    RngStream rng(135, 7);
    ManifoldCoupledPath path = simulate_manifold_coupling(none, x0, y0, 0.05, 0.2, rng);
    std::ostringstream os;
    write_manifold_path_csv(os, path);
    CHECK(os.str().rfind("t,x_1,x_2,x_3,y_1,y_2,y_3,n_1,n_2,n_3,l,coupled\n", 0) == 0);
}
