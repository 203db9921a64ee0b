#pragma once

// Brownian motion with Killing-field drift, reflection isometries, heat
// kernels, and coupling verification on the two curved model surfaces:
// the unit sphere S^2 (ambient R^3) and the hyperbolic plane H^2
// (upper hyperboloid in R^{2,1} with form diag(1,1,-1)).

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <utility>
#include <vector>

#include "mmclab/euclidean.hpp"
#include "mmclab/linalg.hpp"
#include "mmclab/parallel.hpp"
#include "mmclab/quadrature.hpp"
#include "mmclab/rng.hpp"

namespace mmclab {

enum class ModelSpace { Sphere, Hyperboloid };

inline double lorentz_dot(const Vec& u, const Vec& v) {
    return u[0] * v[0] + u[1] * v[1] - u[2] * v[2];
}

inline bool on_sphere(const Vec& p, double tol = 1e-9) {
    return p.n == 3 && std::abs(norm(p) - 1.0) <= tol;
}

inline bool on_hyperboloid(const Vec& p, double tol = 1e-9) {
    return p.n == 3 && std::abs(lorentz_dot(p, p) + 1.0) <= tol && p[2] >= 1.0 - tol;
}

inline Vec renormalize_point(ModelSpace space, const Vec& p) {
    if (space == ModelSpace::Sphere) return (1.0 / norm(p)) * p;
    double q = -lorentz_dot(p, p);
    if (!(q > 0)) throw numerical_failure_error("renormalize_point: left the hyperboloid", 0.0);
    return (1.0 / std::sqrt(q)) * p;
}

// Geodesic distance, computed through half-angle identities so nearby
// points lose no precision.
inline double geodesic_distance(ModelSpace space, const Vec& x, const Vec& y) {
    Vec diff = x - y;
    if (space == ModelSpace::Sphere) {
        double half_chord = 0.5 * norm(diff);
        return 2.0 * std::asin(std::min(1.0, half_chord));
    }
    double q = lorentz_dot(diff, diff);  // = 4 sinh^2(d/2), spacelike
    return 2.0 * std::asinh(0.5 * std::sqrt(std::max(0.0, q)));
}

// Infinitesimal generator of a one-parameter isometry group: a skew
// matrix on the sphere, a Lorentz-skew matrix (G^T L + L G = 0) on the
// hyperboloid.
struct KillingField {
    ModelSpace space = ModelSpace::Sphere;
    Mat generator;

    KillingField() : generator(3) {}
    KillingField(ModelSpace s, const Mat& g) : space(s), generator(g) {
        if (g.n != 3) throw invalid_argument_error("KillingField: generator must be 3x3");
        double scale = std::max(1.0, frobenius_norm(g));
        if (s == ModelSpace::Sphere) {
            if (frobenius_norm(g + transpose(g)) > 1e-12 * scale)
                throw invalid_argument_error("KillingField: generator must be skew-symmetric");
        } else {
            Mat L = lorentz_form();
            if (frobenius_norm(transpose(g) * L + L * g) > 1e-12 * scale)
                throw invalid_argument_error("KillingField: generator must be Lorentz-skew");
        }
    }

    static Mat lorentz_form() {
        Mat L = Mat::identity(3);
        L(2, 2) = -1.0;
        return L;
    }
    static KillingField rotation_z(ModelSpace s, double omega) {
        Mat g(3);
        g(0, 1) = -omega;
        g(1, 0) = omega;
        return KillingField(s, g);
    }
    static KillingField boost_x(double rate) {
        Mat g(3);
        g(0, 2) = rate;
        g(2, 0) = rate;
        return KillingField(ModelSpace::Hyperboloid, g);
    }

    // ambient evaluation; tangent to the surface by skewness
    Vec eval(const Vec& x) const { return generator * x; }
};

// Flow of the Killing field at time t, an ambient linear isometry.
inline Mat killing_flow(const KillingField& k, double t) { return mat_exp(k.generator, t); }

// Involutive isometry swapping two points and fixing their equidistant
// hypersurface. The normal is a Euclidean unit vector on the sphere and
// a unit spacelike vector on the hyperboloid.
struct ReflectionIsometry {
    ModelSpace space = ModelSpace::Sphere;
    Vec normal;

    Vec apply(const Vec& z) const {
        double s = space == ModelSpace::Sphere ? dot(normal, z) : lorentz_dot(z, normal);
        return z - (2.0 * s) * normal;
    }
};

inline ReflectionIsometry make_reflection(ModelSpace space, const Vec& x, const Vec& y) {
    Vec diff = x - y;
    ReflectionIsometry r;
    r.space = space;
    if (space == ModelSpace::Sphere) {
        double nrm = norm(diff);
        if (nrm <= 1e-14) throw degenerate_input_error("make_reflection: coincident points");
        r.normal = (1.0 / nrm) * diff;
    } else {
        double q = lorentz_dot(diff, diff);  // distinct hyperboloid points: spacelike
        if (!(q > 1e-28)) throw degenerate_input_error("make_reflection: coincident points");
        r.normal = (1.0 / std::sqrt(q)) * diff;
    }
    return r;
}

// Signed geodesic distance from z to the central hypersurface with unit
// normal n (|grad| = 1, so the bridge crossing test applies unchanged).
inline double mirror_functional(ModelSpace space, const Vec& n, const Vec& z) {
    if (space == ModelSpace::Sphere) {
        double s = dot(n, z);
        return std::asin(std::min(1.0, std::max(-1.0, s)));
    }
    return std::asinh(lorentz_dot(z, n));
}

// Orthonormal tangent basis at x (Lorentz-orthonormal on the hyperboloid).
inline std::pair<Vec, Vec> tangent_basis(ModelSpace space, const Vec& x) {
    if (space == ModelSpace::Sphere) {
        int axis = 0;
        for (int i = 1; i < 3; ++i)
            if (std::abs(x[i]) < std::abs(x[axis])) axis = i;
        Vec a = unit_vec(3, axis);
        Vec u = normalized(a - dot(a, x) * x);
        Vec v{x[1] * u[2] - x[2] * u[1], x[2] * u[0] - x[0] * u[2], x[0] * u[1] - x[1] * u[0]};
        return {u, v};
    }
    Vec e1 = unit_vec(3, 0);
    Vec u = e1 + lorentz_dot(e1, x) * x;  // project onto the tangent space
    u = (1.0 / std::sqrt(lorentz_dot(u, u))) * u;
    Vec e2 = unit_vec(3, 1);
    Vec v = e2 + lorentz_dot(e2, x) * x - lorentz_dot(e2, u) * u;
    v = (1.0 / std::sqrt(lorentz_dot(v, v))) * v;
    return {u, v};
}

// Exact exponential map: follow the geodesic from x with initial
// (tangent) velocity v for unit time.
inline Vec exp_map(ModelSpace space, const Vec& x, const Vec& v) {
    if (space == ModelSpace::Sphere) {
        double r = norm(v);
        if (r == 0.0) return x;
        return renormalize_point(space, std::cos(r) * x + (std::sin(r) / r) * v);
    }
    double q = lorentz_dot(v, v);
    if (q <= 0.0) return x;
    double r = std::sqrt(q);
    return renormalize_point(space, std::cosh(r) * x + (std::sinh(r) / r) * v);
}

// One intrinsic Euler step of Brownian motion with drift: a Gaussian
// tangent increment plus drift*dt, pushed along the geodesic.
inline Vec bm_step_manifold(ModelSpace space, const Vec& x, const Vec& drift_vec, double dt,
                            RngStream& rng) {
    if (!(dt > 0)) throw invalid_argument_error("bm_step_manifold: dt must be positive");
    double tangency = space == ModelSpace::Sphere ? dot(drift_vec, x)
                                                  : lorentz_dot(drift_vec, x);
    if (std::abs(tangency) > 1e-8 * std::max(1.0, norm(drift_vec)))
        throw invalid_argument_error("bm_step_manifold: drift is not tangent at x");
    auto [u, v] = tangent_basis(space, x);
    double s = std::sqrt(dt);
    double g1 = s * rng.normal();
    double g2 = s * rng.normal();
    Vec step = dt * drift_vec + g1 * u + g2 * v;
    return exp_map(space, x, step);
}

// Trajectory pair on a model space, ambient coordinates. The mirror at
// time t is the image of the initial one under the Killing flow; its
// evolved normal is stored per step.
struct ManifoldCoupledPath {
    std::vector<double> times;
    std::vector<Vec> xs;
    std::vector<Vec> ys;
    std::vector<Vec> mirror_normals;
    double tau = kInfiniteTime;
};

struct ManifoldSimulateOptions {
    bool record_path = true;
    bool bridge_correction = true;
};

// Coupling construction: a driftless Brownian pair (Z, R0(Z)) reflected
// in the fixed initial mirror until Z crosses it, pushed forward by the
// Killing flow: X_t = Ups_t(Z_t), Y_t = Ups_t(R0(Z_t)).
inline ManifoldCoupledPath simulate_manifold_coupling(const KillingField& k, const Vec& x0,
                                                      const Vec& y0, double dt, double horizon,
                                                      RngStream& rng,
                                                      const ManifoldSimulateOptions& opts = {}) {
    const ModelSpace space = k.space;
    if (!(dt > 0)) throw invalid_argument_error("simulate_manifold_coupling: dt must be positive");
    ReflectionIsometry r0 = make_reflection(space, x0, y0);
    const Vec n0 = r0.normal;
    const long steps = std::lround(horizon / dt);

    ManifoldCoupledPath path;
    Vec z = x0;
    double s_prev = mirror_functional(space, n0, z);
    bool coupled = false;

    auto record = [&](long step_idx, const Vec& zv) {
        if (!opts.record_path) return;
        double t = step_idx * dt;
        Mat flow = killing_flow(k, t);
        Vec x = renormalize_point(space, flow * zv);
        Vec y = coupled ? x : renormalize_point(space, flow * r0.apply(zv));
        path.times.push_back(t);
        path.xs.push_back(x);
        path.ys.push_back(y);
        path.mirror_normals.push_back(flow * n0);
    };
    record(0, z);

    Vec zero_drift(3);
    for (long kstep = 0; kstep < steps; ++kstep) {
        z = bm_step_manifold(space, z, zero_drift, dt, rng);
        if (!coupled) {
            double s_next = mirror_functional(space, n0, z);
            double hit = detail::detect_crossing(s_prev, s_next, kstep * dt, dt, 1.0,
                                                 opts.bridge_correction, rng);
            if (hit < kInfiniteTime) {
                path.tau = hit;
                coupled = true;
                if (!opts.record_path) return path;
            }
            s_prev = s_next;
        }
        record(kstep + 1, z);
    }
    return path;
}

// Coupling times only, many paths in parallel. The Killing drift leaves
// the coupling time invariant (the flow is an isometry), so tau depends
// only on the driftless pair.
inline std::vector<double> simulate_manifold_taus(ModelSpace space, const Vec& x0,
                                                  const Vec& y0, double dt, double horizon,
                                                  long n_paths, uint64_t seed, int threads,
                                                  uint64_t stream_offset = 0) {
    ReflectionIsometry r0 = make_reflection(space, x0, y0);
    const Vec n0 = r0.normal;
    const long steps = std::lround(horizon / dt);
    std::vector<double> taus(n_paths, kInfiniteTime);
    parallel_for(n_paths, threads, [&](long p) {
        RngStream rng(seed, stream_offset + static_cast<uint64_t>(p));
        Vec z = x0;
        Vec zero_drift(3);
        double s_prev = mirror_functional(space, n0, z);
        for (long kstep = 0; kstep < steps; ++kstep) {
            z = bm_step_manifold(space, z, zero_drift, dt, rng);
            double s_next = mirror_functional(space, n0, z);
            double hit =
                detail::detect_crossing(s_prev, s_next, kstep * dt, dt, 1.0, true, rng);
            if (hit < kInfiniteTime) {
                taus[static_cast<size_t>(p)] = hit;
                break;
            }
            s_prev = s_next;
        }
    });
    return taus;
}

// Sample points on the mirror hypersurface fixed by the reflection that
// swaps x0 and y0: a great circle on the sphere, a geodesic on the
// hyperboloid (parametrized over [-span, span]).
inline std::vector<Vec> mirror_sample_points(ModelSpace space, const Vec& x0, const Vec& y0,
                                             int n_samples = 20, double span = 2.0) {
    ReflectionIsometry r0 = make_reflection(space, x0, y0);
    const Vec& n0 = r0.normal;
    std::vector<Vec> samples;
    samples.reserve(n_samples);
    if (space == ModelSpace::Sphere) {
        auto [u, v] = tangent_basis(ModelSpace::Sphere, n0);
        for (int j = 0; j < n_samples; ++j) {
            double psi = 2.0 * M_PI * j / n_samples;
            samples.push_back(std::cos(psi) * u + std::sin(psi) * v);
        }
        return samples;
    }
    // base point of the mirror geodesic: project the apex off the normal
    Vec apex{0.0, 0.0, 1.0};
    Vec c = apex - lorentz_dot(apex, n0) * n0;
    Vec p0 = (1.0 / std::sqrt(-lorentz_dot(c, c))) * c;
    if (p0[2] < 0) p0 = -1.0 * p0;
    // unit spacelike direction orthogonal to both n0 and p0
    Vec w;
    for (int axis = 0; axis < 2; ++axis) {
        Vec e = unit_vec(3, axis);
        w = e - lorentz_dot(e, n0) * n0 + lorentz_dot(e, p0) * p0;
        double q = lorentz_dot(w, w);
        if (q > 1e-12) {
            w = (1.0 / std::sqrt(q)) * w;
            break;
        }
    }
    for (int j = 0; j < n_samples; ++j) {
        double s = -span + 2.0 * span * j / (n_samples - 1);
        samples.push_back(std::cosh(s) * p0 + std::sinh(s) * w);
    }
    return samples;
}

// Orbit test for a static mirror under a Killing drift: the mirror stays
// fixed (as a set) iff flow-pushed sample points remain on it, i.e. the
// signed distance of every pushed sample stays zero.
inline bool killing_mirror_static(const KillingField& k, const Vec& x0, const Vec& y0,
                                  const std::vector<double>& times = {0.5, 1.0, 2.0},
                                  int n_samples = 20, double tol = 1e-8) {
    ReflectionIsometry r0 = make_reflection(k.space, x0, y0);
    std::vector<Vec> samples = mirror_sample_points(k.space, x0, y0, n_samples);
    for (double t : times) {
        Mat flow = killing_flow(k, t);
        for (const Vec& z : samples) {
            Vec pushed = renormalize_point(k.space, flow * z);
            if (std::abs(mirror_functional(k.space, r0.normal, pushed)) > tol) return false;
        }
    }
    return true;
}

// Heat kernel on S^2 for the generator (1/2) Laplacian, as a spectral
// sum over Legendre polynomials:
//   p(t, theta) = sum_l (2l+1)/(4 pi) e^{-l(l+1) t/2} P_l(cos theta).
// Terms are added until the analytic tail bound drops below 1e-10;
// if that needs more than `terms` entries the time is too small for the
// series budget and a numerical failure is raised.
inline double sphere_heat_kernel(double theta, double t, int terms = 512) {
    if (!(t > 0)) throw invalid_argument_error("sphere_heat_kernel: t must be positive");
    if (theta < 0 || theta > M_PI + 1e-12)
        throw invalid_argument_error("sphere_heat_kernel: theta outside [0, pi]");
    const double x = std::cos(theta);
    const double inv4pi = 1.0 / (4.0 * M_PI);
    double p_prev = 1.0;  // P_0
    double p_curr = x;    // P_1
    double sum = inv4pi;  // l = 0 term
    for (int l = 1; l <= terms; ++l) {
        sum += (2.0 * l + 1.0) * inv4pi * std::exp(-0.5 * l * (l + 1.0) * t) * p_curr;
        double tail = std::exp(-0.5 * (l + 1.0) * (l + 2.0) * t) * (2.0 * l + 3.0) * inv4pi /
                      (1.0 - std::exp(-(l + 2.0) * t));
        if (tail < 1e-10) return sum;
        double p_next = ((2.0 * l + 1.0) * x * p_curr - l * p_prev) / (l + 1.0);
        p_prev = p_curr;
        p_curr = p_next;
    }
    throw numerical_failure_error(
        "sphere_heat_kernel: series budget too small for this time (increase terms)", sum);
}

// Heat kernel on H^2 via the McKean-type integral representation for the
// generator (1/2) Laplacian. Used as a validation oracle for the
// simulation-calibrated kernel table below.
inline double hyperbolic_heat_kernel_mckean(double r, double t) {
    if (!(t > 0)) throw invalid_argument_error("hyperbolic_heat_kernel_mckean: t must be positive");
    if (r < 0) throw invalid_argument_error("hyperbolic_heat_kernel_mckean: r must be >= 0");
    const double coeff = std::exp(-t / 8.0) / (2.0 * std::pow(M_PI, 1.5) * std::pow(t, 1.5));
    double s_max = r + 10.0 * std::sqrt(t) + 1.0;
    double u_max = std::sqrt(s_max - r);
    auto g = [r, t](double u) {
        double s = r + u * u;
        double denom_sq = std::cosh(s) - std::cosh(r);
        double weight;
        if (denom_sq <= 0 || u < 1e-10) {
            // limiting form of 2u/sqrt(cosh(r+u^2)-cosh(r)) as u -> 0
            weight = r > 1e-8 ? 2.0 / std::sqrt(std::sinh(r)) : 2.0 * std::sqrt(2.0);
        } else {
            weight = 2.0 * u / std::sqrt(denom_sq);
        }
        return weight * s * std::exp(-s * s / (2.0 * t));
    };
    return coeff * integrate_1d(g, 0.0, u_max, 1e-10);
}

// Radial heat-kernel table for H^2 calibrated by kernel density
// estimation from simulated driftless Brownian radii. The table, not a
// transcribed formula, is the authority used inside tv_model_space.
struct HyperbolicKernelOptions {
    long n_paths = 1'000'000;
    double dt = 1e-3;
    uint64_t seed = 777001;
    int threads = 0;  // 0: default_thread_count()

    bool operator<(const HyperbolicKernelOptions& o) const {
        return std::tie(n_paths, dt, seed) < std::tie(o.n_paths, o.dt, o.seed);
    }
};

class HyperbolicKernelTable {
public:
    HyperbolicKernelTable(double t, const HyperbolicKernelOptions& opts) : t_(t) {
        int threads = opts.threads > 0 ? opts.threads : default_thread_count();
        const long steps = std::lround(t / opts.dt);
        std::vector<double> radii(opts.n_paths);
        Vec base{0.0, 0.0, 1.0};
        parallel_for(opts.n_paths, threads, [&](long p) {
            RngStream rng(opts.seed, static_cast<uint64_t>(p));
            Vec z = base;
            Vec zero_drift(3);
            for (long s = 0; s < steps; ++s)
                z = bm_step_manifold(ModelSpace::Hyperboloid, z, zero_drift, opts.dt, rng);
            radii[static_cast<size_t>(p)] = geodesic_distance(ModelSpace::Hyperboloid, z, base);
        });

        // Silverman bandwidth, then a binned Gaussian KDE with reflection
        // at r = 0.
        double mean = 0;
        for (double r : radii) mean += r;
        mean /= static_cast<double>(radii.size());
        double var = 0;
        for (double r : radii) var += (r - mean) * (r - mean);
        var /= static_cast<double>(radii.size());
        double h = 1.06 * std::sqrt(var) * std::pow(static_cast<double>(radii.size()), -0.2);
        h = std::max(h, 1e-4);
        double r_data_max = 0;
        for (double r : radii) r_data_max = std::max(r_data_max, r);
        r_max_ = r_data_max + 6.0 * h;

        const int n_bins = 8192;
        double bin_w = r_max_ / n_bins;
        std::vector<double> counts(n_bins, 0.0);
        for (double r : radii) {
            int b = static_cast<int>(r / bin_w);
            if (b >= 0 && b < n_bins) counts[static_cast<size_t>(b)] += 1.0;
        }

        const int n_grid = 1024;
        dr_ = r_max_ / (n_grid - 1);
        p_.assign(n_grid, 0.0);
        double norm_const =
            1.0 / (static_cast<double>(radii.size()) * h * std::sqrt(2.0 * M_PI));
        int reach = static_cast<int>(std::ceil(6.0 * h / bin_w));
        floor_r_ = std::max(1e-4, 0.005 * std::sqrt(t));
        for (int j = 0; j < n_grid; ++j) {
            double r = j * dr_;
            double f = 0.0;
            int b_center = static_cast<int>(r / bin_w);
            int lo = std::max(0, b_center - reach);
            int hi = std::min(n_bins - 1, b_center + reach);
            for (int b = lo; b <= hi; ++b) {
                if (counts[static_cast<size_t>(b)] == 0.0) continue;
                double rb = (b + 0.5) * bin_w;
                double d1 = (r - rb) / h;
                double d2 = (r + rb) / h;  // reflected mass
                f += counts[static_cast<size_t>(b)] *
                     (std::exp(-0.5 * d1 * d1) + std::exp(-0.5 * d2 * d2));
            }
            f *= norm_const;
            double r_eff = std::max(r, floor_r_);
            p_[static_cast<size_t>(j)] = f / (2.0 * M_PI * std::sinh(r_eff));
        }
        // near the origin the area correction is unreliable: clamp to the
        // first trustworthy grid value
        int j_floor = static_cast<int>(floor_r_ / dr_) + 1;
        for (int j = 0; j < j_floor && j < n_grid; ++j)
            p_[static_cast<size_t>(j)] = p_[static_cast<size_t>(j_floor)];
    }

    double t() const { return t_; }
    double r_max() const { return r_max_; }

    double operator()(double r) const {
        if (r < 0 || r >= r_max_) return 0.0;
        double pos = r / dr_;
        size_t j = static_cast<size_t>(pos);
        if (j + 1 >= p_.size()) return p_.back();
        double w = pos - static_cast<double>(j);
        return (1.0 - w) * p_[j] + w * p_[j + 1];
    }

private:
    double t_ = 0.0;
    double r_max_ = 0.0;
    double dr_ = 0.0;
    double floor_r_ = 0.0;
    std::vector<double> p_;
};

// Process-wide cache: the table is expensive to build and read-only
// afterwards.
inline std::shared_ptr<const HyperbolicKernelTable> hyperbolic_kernel_table(
    double t, const HyperbolicKernelOptions& opts = {}) {
    static std::mutex mu;
    static std::map<std::pair<double, HyperbolicKernelOptions>,
                    std::shared_ptr<const HyperbolicKernelTable>>
        cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(t, opts);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto table = std::make_shared<const HyperbolicKernelTable>(t, opts);
    cache[key] = table;
    return table;
}

namespace detail {

// Total variation between two radial kernels on a model surface by
// quadrature in geodesic polar coordinates around the first point.
// `cos_like`/`sin_like` abstract over the two trigonometries.
inline double tv_polar(const std::function<double(double)>& kernel, double D, double theta_max,
                       bool spherical, double tol) {
    auto second_distance = [D, spherical](double th, double phi) {
        if (spherical) {
            double c = std::cos(D) * std::cos(th) + std::sin(D) * std::sin(th) * std::cos(phi);
            return std::acos(std::min(1.0, std::max(-1.0, c)));
        }
        double c = std::cosh(D) * std::cosh(th) - std::sinh(D) * std::sinh(th) * std::cos(phi);
        return std::acosh(std::max(1.0, c));
    };
    auto outer = [&](double th) {
        double p1 = kernel(th);
        auto inner = [&](double phi) { return std::abs(p1 - kernel(second_distance(th, phi))); };
        double ring = integrate_1d(inner, 0.0, 2.0 * M_PI, tol / 16.0);
        return (spherical ? std::sin(th) : std::sinh(th)) * ring;
    };
    return 0.5 * integrate_1d(outer, 0.0, theta_max, tol / 2.0);
}

}  // namespace detail

// Exact total-variation distance between time-t laws of Brownian motions
// started at x0 and y0 on the model space. With a Killing drift the
// distance is unchanged (the flow is an isometry), so the driftless
// kernel is the general answer.
inline double tv_model_space(ModelSpace space, const Vec& x0, const Vec& y0, double t,
                             const HyperbolicKernelOptions& calibration = {}) {
    if (!(t > 0)) throw invalid_argument_error("tv_model_space: t must be positive");
    double D = geodesic_distance(space, x0, y0);
    if (D == 0.0) return 0.0;
    if (space == ModelSpace::Sphere) {
        auto kernel = [t](double theta) {
            return sphere_heat_kernel(std::min(theta, M_PI), t);
        };
        return detail::tv_polar(kernel, D, M_PI, /*spherical=*/true, 1e-6);
    }
    auto table = hyperbolic_kernel_table(t, calibration);
    auto kernel = [table](double r) { return (*table)(r); };
    return detail::tv_polar(kernel, D, table->r_max(), /*spherical=*/false, 1e-4);
}

// CSV with the shared path schema, three ambient coordinates, l = 0
// (the evolved mirror stays central in both model spaces).
inline void write_manifold_path_csv(std::ostream& os, const ManifoldCoupledPath& path) {
    os << "t,x_1,x_2,x_3,y_1,y_2,y_3,n_1,n_2,n_3,l,coupled\n";
    for (size_t k = 0; k < path.times.size(); ++k) {
        os << format_double(path.times[k]);
        for (int i = 0; i < 3; ++i) os << ',' << format_double(path.xs[k][i]);
        for (int i = 0; i < 3; ++i) os << ',' << format_double(path.ys[k][i]);
        for (int i = 0; i < 3; ++i) os << ',' << format_double(path.mirror_normals[k][i]);
        os << ",0," << (path.times[k] >= path.tau ? 1 : 0) << '\n';
    }
}

}  // namespace mmclab
