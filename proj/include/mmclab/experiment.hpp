#pragma once

// Experiment orchestration: dispatches a validated configuration to the
// module pipelines, writes CSV artifacts and a JSON result record, and
// reports the exit status (0 ok, 2 Aldous violation, 3 numerical failure).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mmclab/config.hpp"
#include "mmclab/euclidean.hpp"
#include "mmclab/gaussian.hpp"
#include "mmclab/model_spaces.hpp"

namespace mmclab {

struct ResultRecord {
    nlohmann::json doc;
    int exit_code = 0;
};

namespace detail {

inline std::function<double(double)> named_scalar_drift(const DriftSpec& spec) {
    if (spec.type == DriftSpec::Type::Named) {
        if (spec.name == "ou") return [](double x) { return -x; };
        if (spec.name == "sin") return [](double x) { return std::sin(x); };
        return [](double x) { return x * x; };  // quadratic
    }
    // custom-grid: piecewise-linear interpolation
    std::vector<double> xs = spec.xs, bs = spec.bs;
    return [xs, bs](double x) {
        if (x <= xs.front()) return bs.front();
        if (x >= xs.back()) return bs.back();
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        size_t i = static_cast<size_t>(it - xs.begin());
        double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return (1.0 - w) * bs[i - 1] + w * bs[i];
    };
}

inline AffineDrift affine_from_config(const ExperimentConfig& cfg) {
    if (cfg.drift.type == DriftSpec::Type::Affine) return AffineDrift(cfg.drift.A, cfg.drift.c);
    if (cfg.drift.type == DriftSpec::Type::Named && cfg.drift.name == "ou")
        return AffineDrift(Mat{{-1.0}}, Vec{0.0});
    throw invalid_argument_error("config: this experiment requires an affine drift (matrix A, or name=ou)");
}

inline GeneralDrift general_from_config(const ExperimentConfig& cfg) {
    if (cfg.drift.type == DriftSpec::Type::Affine) return as_general(affine_from_config(cfg));
    if (cfg.drift.type == DriftSpec::Type::Named && cfg.drift.name == "ou")
        return as_general(AffineDrift(Mat{{-1.0}}, Vec{0.0}));
    auto f = named_scalar_drift(cfg.drift);
    return GeneralDrift(1, [f](double, const Vec& x) { return Vec{f(x[0])}; });
}

inline std::vector<double> default_times(double horizon) {
    return {horizon / 16.0, horizon / 8.0, horizon / 4.0, horizon / 2.0, horizon};
}

inline nlohmann::json gaps_json(const GapReport& rep) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : rep.entries)
        arr.push_back({{"t", e.t},
                       {"tv_exact", e.exact},
                       {"p_emp", e.empirical},
                       {"stderr", e.stderr_},
                       {"gap", e.gap},
                       {"z", e.z}});
    return arr;
}

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw invalid_argument_error("cannot write " + path.string());
    os << contents;
}

inline void write_taus_csv(const std::filesystem::path& path, const std::vector<double>& taus) {
    std::ostringstream os;
    os << "path,tau,coupled\n";
    for (size_t i = 0; i < taus.size(); ++i) {
        os << i << ',';
        if (taus[i] < kInfiniteTime) os << format_double(taus[i]) << ",1\n";
        else os << ",0\n";  // never coupled inside the horizon
    }
    write_file(path, os.str());
}

inline void write_verify_csv(const std::filesystem::path& path, const GapReport& rep) {
    std::ostringstream os;
    os << "t,tv_exact,p_emp,stderr,gap,z\n";
    for (const auto& e : rep.entries) {
        os << format_double(e.t) << ',' << format_double(e.exact) << ','
           << format_double(e.empirical) << ',' << format_double(e.stderr_) << ','
           << format_double(e.gap) << ',' << format_double(e.z) << '\n';
    }
    write_file(path, os.str());
}

// Euclidean reflection-coupling ingredients shared by simulate/verify.
struct EuclideanSetup {
    GeneralDrift drift;
    std::shared_ptr<AffineMirrorTable> table;  // null for odd scalar drifts
    MirrorState static_mirror;                 // used when table is null
    std::function<MirrorState(double)> mirror_fn() const {
        if (table) return table->as_function();
        MirrorState m = static_mirror;
        return [m](double) { return m; };
    }
};

inline EuclideanSetup euclidean_setup(const ExperimentConfig& cfg) {
    EuclideanSetup setup;
    setup.drift = general_from_config(cfg);
    bool affine_like = cfg.drift.type == DriftSpec::Type::Affine ||
                       (cfg.drift.type == DriftSpec::Type::Named && cfg.drift.name == "ou");
    if (affine_like) {
        AffineDrift d = affine_from_config(cfg);
        long steps = std::lround(cfg.horizon / cfg.dt);
        setup.table =
            std::make_shared<AffineMirrorTable>(d, cfg.x0, cfg.y0, cfg.dt, steps);
        return setup;
    }
    // scalar drift with odd symmetry about the start midpoint: static mirror
    auto f = named_scalar_drift(cfg.drift);
    double m = 0.5 * (cfg.x0[0] + cfg.y0[0]);
    double span = std::max(1.0, std::abs(cfg.x0[0] - cfg.y0[0]));
    std::vector<double> grid;
    for (int i = -16; i <= 16; ++i) grid.push_back(m + span * i / 8.0);
    DriftClass1D cls = classify_1d(f, cfg.x0[0], cfg.y0[0], grid, cfg.tol_sampled);
    if (cls == DriftClass1D::None)
        throw not_admissible_error(
            "this scalar drift is neither affine nor odd about the start midpoint; no maximal coupling exists");
    setup.static_mirror.n = Vec{cfg.x0[0] > cfg.y0[0] ? 1.0 : -1.0};
    setup.static_mirror.l = setup.static_mirror.n[0] * m;
    setup.static_mirror.n_dot = Vec(1);
    setup.static_mirror.l_dot = 0.0;
    return setup;
}

}  // namespace detail

inline ResultRecord run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                   int threads) {
    namespace fs = std::filesystem;
    if (!cfg.kind) throw invalid_argument_error("config: kind is required");
    auto t_start = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    fs::path out(out_dir);

    ResultRecord rec;
    rec.doc["kind"] = to_string(*cfg.kind);
    rec.doc["space"] = to_string(cfg.space);
    rec.doc["seed"] = cfg.seed;
    rec.doc["config"] = cfg.echo;
    nlohmann::json artifacts = nlohmann::json::array();
    artifacts.push_back("result.json");

    const ModelSpace ms =
        cfg.space == SpaceKind::Sphere ? ModelSpace::Sphere : ModelSpace::Hyperboloid;

    switch (*cfg.kind) {
        case ExperimentKind::Simulate: {
            if (cfg.space == SpaceKind::Euclidean) {
                if (cfg.coupling == CouplingKind::Independent) {
                    auto taus = simulate_independent_batch_1d(
                        detail::general_from_config(cfg), cfg.x0[0], cfg.y0[0], cfg.dt,
                        cfg.horizon, cfg.n_paths, cfg.seed, threads);
                    detail::write_taus_csv(out / "taus.csv", taus);
                    artifacts.push_back("taus.csv");
                } else {
                    auto setup = detail::euclidean_setup(cfg);
                    // full record of path 0, then coupling times for the batch
                    RngStream rng0(cfg.seed, 0);
                    CoupledPath p0 = simulate_coupling(setup.drift, setup.mirror_fn(), cfg.x0,
                                                       cfg.y0, cfg.dt, cfg.horizon, rng0);
                    std::ostringstream os;
                    write_path_csv(os, p0);
                    detail::write_file(out / "path.csv", os.str());
                    artifacts.push_back("path.csv");
                    std::vector<double> taus;
                    if (setup.table) {
                        CouplingBatch batch = simulate_coupling_batch(
                            setup.drift, *setup.table, cfg.x0, cfg.n_paths, cfg.seed, threads);
                        taus = std::move(batch.taus);
                    } else {
                        taus.assign(cfg.n_paths, kInfiniteTime);
                        auto fn = setup.mirror_fn();
                        parallel_for(cfg.n_paths, threads, [&](long p) {
                            RngStream rng(cfg.seed, static_cast<uint64_t>(p));
                            SimulateOptions opts;
                            opts.record_path = false;
                            taus[static_cast<size_t>(p)] =
                                simulate_coupling(setup.drift, fn, cfg.x0, cfg.y0, cfg.dt,
                                                  cfg.horizon, rng, opts)
                                    .tau;
                        });
                    }
                    detail::write_taus_csv(out / "taus.csv", taus);
                    artifacts.push_back("taus.csv");
                }
            } else {
                KillingField k = cfg.killing ? *cfg.killing : KillingField(ms, Mat(3));
                RngStream rng0(cfg.seed, 0);
                ManifoldCoupledPath p0 =
                    simulate_manifold_coupling(k, cfg.x0, cfg.y0, cfg.dt, cfg.horizon, rng0);
                std::ostringstream os;
                write_manifold_path_csv(os, p0);
                detail::write_file(out / "path.csv", os.str());
                artifacts.push_back("path.csv");
                auto taus = simulate_manifold_taus(ms, cfg.x0, cfg.y0, cfg.dt, cfg.horizon,
                                                   cfg.n_paths, cfg.seed, threads);
                detail::write_taus_csv(out / "taus.csv", taus);
                artifacts.push_back("taus.csv");
            }
            break;
        }

        case ExperimentKind::Verify: {
            std::vector<double> times =
                cfg.times.empty() ? detail::default_times(cfg.horizon) : cfg.times;
            for (double t : times)
                if (t > cfg.horizon + 1e-12)
                    throw invalid_argument_error("config: times must lie within the horizon");
            std::vector<double> taus;
            TailCurve exact;
            if (cfg.space == SpaceKind::Euclidean) {
                AffineDrift d = detail::affine_from_config(cfg);
                exact = aldous_curve(d, cfg.x0, cfg.y0, times);
                auto lam0 = affine_mmc_exists(d, cfg.x0, cfg.y0);
                if (lam0) rec.doc["lambda0"] = *lam0;
                if (cfg.coupling == CouplingKind::Independent) {
                    taus = simulate_independent_batch_1d(as_general(d), cfg.x0[0], cfg.y0[0],
                                                         cfg.dt, cfg.horizon, cfg.n_paths,
                                                         cfg.seed, threads);
                } else {
                    auto setup = detail::euclidean_setup(cfg);
                    CouplingBatch batch = simulate_coupling_batch(
                        setup.drift, *setup.table, cfg.x0, cfg.n_paths, cfg.seed, threads);
                    taus = std::move(batch.taus);
                }
            } else {
                exact.times = times;
                for (double t : times)
                    exact.values.push_back(
                        tv_model_space(ms, cfg.x0, cfg.y0, t, cfg.calibration));
                taus = simulate_manifold_taus(ms, cfg.x0, cfg.y0, cfg.dt, cfg.horizon,
                                              cfg.n_paths, cfg.seed, threads);
            }
            TailCurve emp = empirical_tail(taus, times);
            GapReport rep = aldous_gap_report(emp, exact);
            detail::write_verify_csv(out / "verify.csv", rep);
            artifacts.push_back("verify.csv");
            rec.doc["criterion"] = "aldous-equality";
            rec.doc["verdict"] = rep.maximal ? "maximal" : "non-maximal";
            rec.doc["maximal"] = rep.maximal;
            rec.doc["aldous_violation"] = rep.aldous_violation;
            rec.doc["gaps"] = detail::gaps_json(rep);
            if (rep.aldous_violation) rec.exit_code = 2;
            break;
        }

        case ExperimentKind::Classify: {
            if (cfg.drift.type == DriftSpec::Type::Affine) {
                AffineDrift d = detail::affine_from_config(cfg);
                auto lam0 = affine_mmc_exists(d, cfg.x0, cfg.y0, cfg.tol_linalg);
                rec.doc["criterion"] = "eigenspace";
                rec.doc["verdict"] = lam0 ? "mmc-exists" : "no-MMC";
                if (lam0) rec.doc["lambda0"] = *lam0;
                LpcForm lpc = lpc_form_check(d, cfg.tol_linalg);
                nlohmann::json details;
                details["lpc_form"] = lpc.ok;
                if (lpc.ok) {
                    details["lpc_lambda0"] = lpc.lambda0;
                    details["mirror_static"] =
                        mirror_static(lpc.lambda0, lpc.T, lpc.c, cfg.x0, cfg.y0, cfg.tol_linalg);
                }
                rec.doc["details"] = details;
            } else {
                auto f = detail::named_scalar_drift(cfg.drift);
                std::vector<double> grid;
                double m = 0.5 * (cfg.x0[0] + cfg.y0[0]);
                if (cfg.drift.type == DriftSpec::Type::CustomGrid) {
                    grid = cfg.drift.xs;
                } else {
                    double h = cfg.classify_half_width / cfg.classify_half_points;
                    for (int i = -cfg.classify_half_points; i <= cfg.classify_half_points; ++i)
                        grid.push_back(m + i * h);
                }
                DriftClass1D cls = classify_1d(f, cfg.x0[0], cfg.y0[0], grid, cfg.tol_sampled);
                rec.doc["criterion"] = "one-dimensional-form";
                rec.doc["verdict"] = to_string(cls);
                rec.doc["details"] = {{"midpoint", m}, {"grid_points", grid.size()}};
            }
            break;
        }

        case ExperimentKind::Mirror: {
            AffineDrift d = detail::affine_from_config(cfg);
            std::vector<double> times = cfg.times.empty()
                                            ? std::vector<double>{0.0, 0.5, 1.0, 2.0}
                                            : cfg.times;
            auto lam0 = affine_mmc_exists(d, cfg.x0, cfg.y0, cfg.tol_linalg);
            if (!lam0)
                throw not_admissible_error("mirror: this drift/start pair admits no maximal coupling");
            rec.doc["lambda0"] = *lam0;
            std::ostringstream os;
            const int dim = cfg.dim();
            os << "t";
            for (int i = 1; i <= dim; ++i) os << ",n_" << i;
            os << ",l";
            for (int i = 1; i <= dim; ++i) os << ",n_dot_" << i;
            os << ",l_dot\n";
            MirrorState m0 = mirror_evolve_affine(d, cfg.x0, cfg.y0, 0.0);
            double max_motion = 0.0;
            for (double t : times) {
                MirrorState m = mirror_evolve_affine(d, cfg.x0, cfg.y0, t);
                max_motion = std::max(max_motion, std::abs(m.l - m0.l) + norm(m.n - m0.n));
                os << format_double(t);
                for (int i = 0; i < dim; ++i) os << ',' << format_double(m.n[i]);
                os << ',' << format_double(m.l);
                for (int i = 0; i < dim; ++i) os << ',' << format_double(m.n_dot[i]);
                os << ',' << format_double(m.l_dot) << '\n';
            }
            detail::write_file(out / "mirror.csv", os.str());
            artifacts.push_back("mirror.csv");
            bool is_static = max_motion <= 1e-8;
            rec.doc["criterion"] = "mirror-motion";
            rec.doc["verdict"] = is_static ? "static" : "moving";
            LpcForm lpc = lpc_form_check(d, cfg.tol_linalg);
            if (lpc.ok)
                rec.doc["details"] = {{"predicate_static",
                                       mirror_static(lpc.lambda0, lpc.T, lpc.c, cfg.x0, cfg.y0,
                                                     cfg.tol_linalg)}};
            break;
        }

        case ExperimentKind::Tv: {
            std::vector<double> times =
                cfg.times.empty() ? detail::default_times(cfg.horizon) : cfg.times;
            TailCurve curve;
            curve.times = times;
            if (cfg.space == SpaceKind::Euclidean) {
                AffineDrift d = detail::affine_from_config(cfg);
                curve = aldous_curve(d, cfg.x0, cfg.y0, times);
            } else {
                for (double t : times) {
                    if (!(t > 0))
                        throw invalid_argument_error("config: tv times must be positive");
                    curve.values.push_back(
                        tv_model_space(ms, cfg.x0, cfg.y0, t, cfg.calibration));
                }
            }
            std::ostringstream os;
            os << "t,tv\n";
            for (size_t i = 0; i < curve.times.size(); ++i)
                os << format_double(curve.times[i]) << ',' << format_double(curve.values[i])
                   << '\n';
            detail::write_file(out / "tv.csv", os.str());
            artifacts.push_back("tv.csv");
            nlohmann::json arr = nlohmann::json::array();
            for (size_t i = 0; i < curve.times.size(); ++i)
                arr.push_back({{"t", curve.times[i]}, {"tv", curve.values[i]}});
            rec.doc["curve"] = arr;
            break;
        }
    }

    auto t_end = std::chrono::steady_clock::now();
    rec.doc["wall_clock_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t_end - t_start).count();
    rec.doc["artifacts"] = artifacts;
    detail::write_file(out / "result.json", rec.doc.dump(2) + "\n");
    return rec;
}

}  // namespace mmclab
