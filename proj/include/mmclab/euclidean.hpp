#pragma once

// Mirror dynamics, reflection maps, the drift-constraint residual, and
// simulation of reflection-coupled diffusion pairs on R^d with identity
// diffusion matrix.

#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <vector>

#include "mmclab/classify.hpp"
#include "mmclab/drift.hpp"
#include "mmclab/io.hpp"
#include "mmclab/parallel.hpp"
#include "mmclab/quadrature.hpp"
#include "mmclab/rng.hpp"
#include "mmclab/sde.hpp"

namespace mmclab {

inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

// Time-varying hyperplane {z : n.z = l} together with its velocity.
struct MirrorState {
    Vec n;
    double l = 0.0;
    Vec n_dot;
    double l_dot = 0.0;

    int dim() const { return n.n; }

    // |n| = 1 and n orthogonal to its derivative.
    bool valid(double n_tol = 1e-12, double orth_tol = 1e-10) const {
        return std::abs(norm(n) - 1.0) <= n_tol && std::abs(dot(n, n_dot)) <= orth_tol;
    }
};

// Mirror bisecting the segment from x to y, derivatives zeroed.
inline MirrorState make_mirror(const Vec& x, const Vec& y) {
    Vec diff = x - y;
    double r = norm(diff);
    if (r <= 1e-14 * std::max(1.0, std::max(norm(x), norm(y))))
        throw degenerate_input_error("make_mirror: coincident points");
    MirrorState m;
    m.n = (1.0 / r) * diff;
    m.l = dot(m.n, 0.5 * (x + y));
    m.n_dot = Vec(x.n);
    m.l_dot = 0.0;
    return m;
}

// Reflection through the mirror hyperplane; an involution fixing {n.z = l}.
inline Vec reflect(const MirrorState& m, const Vec& x) {
    double s = dot(m.n, x) - m.l;
    return x - (2.0 * s) * m.n;
}

// Signed distance of x from the mirror.
inline double mirror_signed_distance(const MirrorState& m, const Vec& x) {
    return dot(m.n, x) - m.l;
}

// Mirror dynamics for an admissible affine drift started from (x0, y0):
//   n(t) = exp(T t) n(0),
//   l(t) = e^{lambda0 t} l(0) + e^{lambda0 t} * int_0^t e^{-lambda0 s} n(s).c ds,
// with derivatives n' = T n and l' = lambda0 l + n.c.
// Throws not_admissible if the drift/start pair admits no maximal coupling.
inline MirrorState mirror_evolve_affine(const AffineDrift& d, const Vec& x0, const Vec& y0,
                                        double t, double quad_tol = 1e-12) {
    auto lambda0 = affine_mmc_exists(d, x0, y0);
    if (!lambda0)
        throw not_admissible_error("mirror_evolve_affine: no maximal coupling for this drift/start pair");
    double lam = *lambda0;
    MirrorState m0 = make_mirror(x0, y0);
    MirrorState m;
    m.n = mat_exp(d.T, t) * m0.n;
    double integral = 0.0;
    if (norm(d.c) > 0.0 && t != 0.0) {
        const Mat& T = d.T;
        Vec n0 = m0.n;
        Vec c = d.c;
        auto g = [&](double s) { return std::exp(-lam * s) * dot(mat_exp(T, s) * n0, c); };
        integral = t > 0 ? integrate_1d(g, 0.0, t, quad_tol)
                         : -integrate_1d(g, t, 0.0, quad_tol);
    }
    m.l = std::exp(lam * t) * (m0.l + integral);
    m.n_dot = d.T * m.n;
    m.l_dot = lam * m.l + dot(m.n, d.c);
    return m;
}

// Symmetric/skew split of the drift gradient at a point, from the
// drift's Jacobian (finite differences unless an analytic one was
// supplied). For a mirror compatible with the drift these parts satisfy
// reflection identities that make the mirror normal an eigenvector of
// the symmetric part and tie the skew part to the normal's velocity.
struct GradientSplit {
    Mat symmetric;
    Mat skew;
};

inline GradientSplit gradient_split(const GeneralDrift& b, double t, const Vec& x) {
    Mat jac = b.jacobian(t, x);
    GradientSplit g;
    g.symmetric = symmetric_part(jac);
    g.skew = skew_part(jac);
    return g;
}

// Residual of the constraint a drift must satisfy for the reflection
// structure to preserve the law:
//   r = b(x) - [ 2(n' n^T - n n'^T) x + 2(l' n - l n') + (I - 2 n n^T) b(F(t,x)) ].
// Zero (to tolerance) exactly when the mirror is compatible with b at (t, x).
inline Vec drift_constraint_residual(const GeneralDrift& b, const MirrorState& m, double t,
                                     const Vec& x) {
    Vec rotation_term = 2.0 * (dot(m.n, x) * m.n_dot - dot(m.n_dot, x) * m.n);
    Vec translation_term = 2.0 * (m.l_dot * m.n - m.l * m.n_dot);
    Vec b_reflected = b.evaluate(t, reflect(m, x));
    Vec reflected_term = b_reflected - (2.0 * dot(m.n, b_reflected)) * m.n;
    return b.evaluate(t, x) - rotation_term - translation_term - reflected_term;
}

// Discretized trajectory pair with coupling time and mirror snapshots.
struct CoupledPath {
    std::vector<double> times;
    std::vector<Vec> xs;
    std::vector<Vec> ys;
    std::vector<MirrorState> mirror_snapshots;
    double tau = kInfiniteTime;
};

struct SimulateOptions {
    bool record_path = true;
    // Detect sub-step mirror crossings with a Brownian-bridge test in
    // addition to grid sign changes. Without it the coupling time is
    // biased high by O(sqrt(dt)), which is visible at Monte Carlo scale.
    bool bridge_correction = true;
    bool zero_noise = false;  // deterministic paths, for tests
};

namespace detail {

// Crossing handling shared by the Euclidean and manifold simulators.
// Returns the coupling time within [t0, t0+dt] given signed distances at
// both ends, or infinity when no crossing is detected.
inline double detect_crossing(double s_prev, double s_next, double t0, double dt,
                              double variance_rate, bool bridge, RngStream& rng) {
    if (s_prev == 0.0) return t0;
    if (s_next == 0.0) return t0 + dt;
    if ((s_prev > 0) != (s_next > 0)) {
        double frac = std::abs(s_prev) / (std::abs(s_prev) + std::abs(s_next));
        return t0 + frac * dt;
    }
    if (bridge) {
        double p_cross = std::exp(-2.0 * s_prev * s_next / (variance_rate * dt));
        if (rng.uniform01() < p_cross) return t0 + 0.5 * dt;
    }
    return kInfiniteTime;
}

}  // namespace detail

// Reflection-coupled pair: X follows the drift b by Euler-Maruyama,
// Y is the mirror image of X until the first mirror crossing, and the
// pair moves synchronously afterwards.
inline CoupledPath simulate_coupling(const GeneralDrift& b,
                                     const std::function<MirrorState(double)>& mirror_fn,
                                     const Vec& x0, const Vec& y0, double dt, double horizon,
                                     RngStream& rng, const SimulateOptions& opts = {}) {
    if (!(dt > 0)) throw invalid_argument_error("simulate_coupling: dt must be positive");
    if (!(horizon > 0)) throw invalid_argument_error("simulate_coupling: horizon must be positive");
    MirrorState m0 = mirror_fn(0.0);
    if (norm(y0 - reflect(m0, x0)) > 1e-9 * (1.0 + norm(x0)))
        throw invalid_argument_error("simulate_coupling: y0 must be the mirror image of x0");

    const int d = x0.n;
    const long steps = std::lround(horizon / dt);
    CoupledPath path;
    if (opts.record_path) {
        path.times.reserve(steps + 1);
        path.xs.reserve(steps + 1);
        path.ys.reserve(steps + 1);
        path.mirror_snapshots.reserve(steps + 1);
    }

    Vec x = x0;
    MirrorState m = m0;
    double s_prev = mirror_signed_distance(m, x);
    bool coupled = false;

    auto record = [&](double t, const Vec& xv, const MirrorState& mv) {
        if (!opts.record_path) return;
        path.times.push_back(t);
        path.xs.push_back(xv);
        path.ys.push_back(coupled ? xv : reflect(mv, xv));
        path.mirror_snapshots.push_back(mv);
    };
    record(0.0, x, m);

    for (long k = 0; k < steps; ++k) {
        double t = k * dt;
        Vec noise = opts.zero_noise ? Vec(d) : gaussian_noise(rng, d, dt);
        x = em_step(x, b.evaluate(t, x), dt, noise);
        if (!x.finite())
            throw numerical_failure_error("simulate_coupling: state became non-finite", t);
        double t_next = (k + 1) * dt;
        MirrorState m_next = mirror_fn(t_next);
        if (!coupled) {
            double s_next = mirror_signed_distance(m_next, x);
            double tau = detail::detect_crossing(s_prev, s_next, t, dt, 1.0,
                                                 opts.bridge_correction && !opts.zero_noise, rng);
            if (tau < kInfiniteTime) {
                path.tau = tau;
                coupled = true;
                if (!opts.record_path) return path;
            }
            s_prev = s_next;
        }
        m = m_next;
        record(t_next, x, m);
    }
    return path;
}

// Independent coupling of two one-dimensional copies (used as a negative
// control: it is a valid coupling but not maximal). The coupling time is
// the first meeting of X and Y, detected on the grid with a bridge test
// for the difference process (variance rate 2).
inline double simulate_independent_pair_1d(const GeneralDrift& b, double x0, double y0,
                                           double dt, double horizon, RngStream& rng_x,
                                           RngStream& rng_y) {
    if (!(dt > 0)) throw invalid_argument_error("simulate_independent_pair_1d: dt must be positive");
    const long steps = std::lround(horizon / dt);
    Vec x{x0}, y{y0};
    double s_prev = x0 - y0;
    for (long k = 0; k < steps; ++k) {
        double t = k * dt;
        x = em_step(x, b.evaluate(t, x), dt, gaussian_noise(rng_x, 1, dt));
        y = em_step(y, b.evaluate(t, y), dt, gaussian_noise(rng_y, 1, dt));
        double s_next = x[0] - y[0];
        double tau = detail::detect_crossing(s_prev, s_next, t, dt, 2.0, true, rng_x);
        if (tau < kInfiniteTime) return tau;
        s_prev = s_next;
    }
    return kInfiniteTime;
}

// Transformed drift seen in a frame rotated by Q(t) and shifted by
// l(t) e1:
//   b~(t,x) = Qdot Q^T (x + l e1) + Q b(t, Q^T (x + l e1)) - ldot e1.
inline GeneralDrift gauge_transform_drift(const GeneralDrift& b,
                                          std::function<Mat(double)> Q,
                                          std::function<double(double)> l,
                                          std::function<Mat(double)> Qdot,
                                          std::function<double(double)> ldot) {
    const int d = b.dim;
    auto eval = [b, Q, l, Qdot, ldot, d](double t, const Vec& x) {
        Mat q = Q(t);
        if (frobenius_norm(transpose(q) * q - Mat::identity(d)) > 1e-8)
            throw invalid_argument_error("gauge_transform_drift: Q(t) is not orthogonal");
        Vec shifted = x + l(t) * unit_vec(d, 0);
        Vec base = transpose(q) * shifted;
        Vec result = Qdot(t) * (transpose(q) * shifted) + q * b.evaluate(t, base);
        result = result - ldot(t) * unit_vec(d, 0);
        return result;
    };
    return GeneralDrift(d, eval);
}

inline GeneralDrift gauge_transform_drift(const AffineDrift& b, std::function<Mat(double)> Q,
                                          std::function<double(double)> l,
                                          std::function<Mat(double)> Qdot,
                                          std::function<double(double)> ldot) {
    return gauge_transform_drift(as_general(b), std::move(Q), std::move(l), std::move(Qdot),
                                 std::move(ldot));
}

// Precomputed mirror states on the uniform simulation grid, shared
// read-only by every path. The offset integral is accumulated interval
// by interval with the same quadrature used in mirror_evolve_affine.
class AffineMirrorTable {
public:
    AffineMirrorTable(const AffineDrift& d, const Vec& x0, const Vec& y0, double dt,
                      long steps) {
        auto lambda0 = affine_mmc_exists(d, x0, y0);
        if (!lambda0)
            throw not_admissible_error("AffineMirrorTable: no maximal coupling for this drift/start pair");
        dt_ = dt;
        double lam = *lambda0;
        MirrorState m0 = make_mirror(x0, y0);
        states_.reserve(steps + 1);
        const Mat& T = d.T;
        Vec n0 = m0.n;
        Vec c = d.c;
        bool has_c = norm(c) > 0.0;
        auto g = [&](double s) { return std::exp(-lam * s) * dot(mat_exp(T, s) * n0, c); };
        double integral = 0.0;
        for (long k = 0; k <= steps; ++k) {
            double t = k * dt;
            if (k > 0 && has_c) integral += integrate_1d(g, (k - 1) * dt, t, 1e-14);
            MirrorState m;
            m.n = mat_exp(T, t) * n0;
            m.l = std::exp(lam * t) * (m0.l + integral);
            m.n_dot = T * m.n;
            m.l_dot = lam * m.l + dot(m.n, c);
            states_.push_back(m);
        }
    }

    const MirrorState& at_step(long k) const { return states_[static_cast<size_t>(k)]; }
    double dt() const { return dt_; }
    long steps() const { return static_cast<long>(states_.size()) - 1; }

    // closure suitable for simulate_coupling; grid times only
    std::function<MirrorState(double)> as_function() const {
        const AffineMirrorTable* self = this;
        return [self](double t) {
            long k = std::lround(t / self->dt_);
            return self->at_step(std::min(std::max(k, 0L), self->steps()));
        };
    }

private:
    double dt_ = 0.0;
    std::vector<MirrorState> states_;
};

// Monte Carlo batch over many paths. Each path owns the stream
// (seed, stream_offset + path index), so results do not depend on the
// worker count. Snapshots of (X, Y) are taken at the requested grid
// times; a path stops early once it has coupled and no snapshots remain.
struct CouplingBatch {
    std::vector<double> taus;                 // one per path
    std::vector<double> snapshot_times;
    std::vector<double> snap_x;               // [path][time][dim] flattened
    std::vector<double> snap_y;
};

inline CouplingBatch simulate_coupling_batch(const GeneralDrift& b,
                                             const AffineMirrorTable& table, const Vec& x0,
                                             long n_paths, uint64_t seed, int threads,
                                             const std::vector<double>& snapshot_times = {},
                                             uint64_t stream_offset = 0,
                                             bool bridge_correction = true) {
    const int d = x0.n;
    const double dt = table.dt();
    const long steps = table.steps();
    std::vector<long> snap_steps;
    for (double t : snapshot_times) {
        long k = std::lround(t / dt);
        if (k < 0 || k > steps)
            throw invalid_argument_error("simulate_coupling_batch: snapshot time outside horizon");
        snap_steps.push_back(k);
    }
    CouplingBatch out;
    out.snapshot_times = snapshot_times;
    out.taus.assign(n_paths, kInfiniteTime);
    out.snap_x.assign(static_cast<size_t>(n_paths) * snap_steps.size() * d, 0.0);
    out.snap_y.assign(static_cast<size_t>(n_paths) * snap_steps.size() * d, 0.0);

    parallel_for(n_paths, threads, [&](long p) {
        RngStream rng(seed, stream_offset + static_cast<uint64_t>(p));
        Vec x = x0;
        double s_prev = mirror_signed_distance(table.at_step(0), x);
        bool coupled = false;
        double tau = kInfiniteTime;
        size_t snap_cursor = 0;
        auto take_snapshot = [&](long k) {
            while (snap_cursor < snap_steps.size() && snap_steps[snap_cursor] == k) {
                size_t base = (static_cast<size_t>(p) * snap_steps.size() + snap_cursor) *
                              static_cast<size_t>(d);
                const MirrorState& m = table.at_step(k);
                Vec y = coupled ? x : reflect(m, x);
                for (int i = 0; i < d; ++i) {
                    out.snap_x[base + i] = x[i];
                    out.snap_y[base + i] = y[i];
                }
                ++snap_cursor;
            }
        };
        take_snapshot(0);
        for (long k = 0; k < steps; ++k) {
            double t = k * dt;
            x = em_step(x, b.evaluate(t, x), dt, gaussian_noise(rng, d, dt));
            if (!coupled) {
                double s_next = mirror_signed_distance(table.at_step(k + 1), x);
                double hit = detail::detect_crossing(s_prev, s_next, t, dt, 1.0,
                                                     bridge_correction, rng);
                if (hit < kInfiniteTime) {
                    tau = hit;
                    coupled = true;
                }
                s_prev = s_next;
            }
            take_snapshot(k + 1);
            if (coupled && snap_cursor == snap_steps.size()) break;
        }
        out.taus[static_cast<size_t>(p)] = tau;
    });
    return out;
}

// Batch of independent (non-reflection) couplings in one dimension.
// Streams 2p and 2p+1 (plus offset) drive the two copies of path p.
inline std::vector<double> simulate_independent_batch_1d(const GeneralDrift& b, double x0,
                                                         double y0, double dt, double horizon,
                                                         long n_paths, uint64_t seed,
                                                         int threads,
                                                         uint64_t stream_offset = 0) {
    std::vector<double> taus(n_paths, kInfiniteTime);
    parallel_for(n_paths, threads, [&](long p) {
        RngStream rng_x(seed, stream_offset + 2 * static_cast<uint64_t>(p));
        RngStream rng_y(seed, stream_offset + 2 * static_cast<uint64_t>(p) + 1);
        taus[static_cast<size_t>(p)] =
            simulate_independent_pair_1d(b, x0, y0, dt, horizon, rng_x, rng_y);
    });
    return taus;
}

// CSV serialization: t, x_1..x_d, y_1..y_d, n_1..n_d, l, coupled(0/1).
inline void write_path_csv(std::ostream& os, const CoupledPath& path) {
    if (path.times.empty()) return;
    const int d = path.xs.front().n;
    os << "t";
    for (int i = 1; i <= d; ++i) os << ",x_" << i;
    for (int i = 1; i <= d; ++i) os << ",y_" << i;
    for (int i = 1; i <= d; ++i) os << ",n_" << i;
    os << ",l,coupled\n";
    for (size_t k = 0; k < path.times.size(); ++k) {
        os << format_double(path.times[k]);
        for (int i = 0; i < d; ++i) os << ',' << format_double(path.xs[k][i]);
        for (int i = 0; i < d; ++i) os << ',' << format_double(path.ys[k][i]);
        const MirrorState& m = path.mirror_snapshots[k];
        for (int i = 0; i < d; ++i) os << ',' << format_double(m.n[i]);
        os << ',' << format_double(m.l);
        os << ',' << (path.times[k] >= path.tau ? 1 : 0) << '\n';
    }
}

}  // namespace mmclab
