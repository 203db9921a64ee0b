#pragma once

// Experiment configuration: JSON files with nested sections, validated
// field by field. The grammar is documented in the repository README.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmclab/drift.hpp"
#include "mmclab/model_spaces.hpp"

namespace mmclab {

enum class ExperimentKind { Simulate, Verify, Classify, Mirror, Tv };
enum class SpaceKind { Euclidean, Sphere, Hyperboloid };
enum class CouplingKind { Reflection, Independent };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Simulate: return "simulate";
        case ExperimentKind::Verify: return "verify";
        case ExperimentKind::Classify: return "classify";
        case ExperimentKind::Mirror: return "mirror";
        default: return "tv";
    }
}

inline const char* to_string(SpaceKind s) {
    switch (s) {
        case SpaceKind::Euclidean: return "euclidean";
        case SpaceKind::Sphere: return "sphere";
        default: return "hyperboloid";
    }
}

// Drift specification: an affine system, a named scalar drift from the
// whitelist, or a tabulated scalar drift.
struct DriftSpec {
    enum class Type { None, Affine, Named, CustomGrid };
    Type type = Type::None;
    Mat A;
    Vec c;
    std::string name;          // ou | sin | quadratic
    std::vector<double> xs;    // custom-grid support
    std::vector<double> bs;    // custom-grid values
};

struct ExperimentConfig {
    std::optional<ExperimentKind> kind;
    SpaceKind space = SpaceKind::Euclidean;
    CouplingKind coupling = CouplingKind::Reflection;
    DriftSpec drift;
    std::optional<KillingField> killing;
    Vec x0;
    Vec y0;
    double dt = 1e-3;
    double horizon = 4.0;
    long n_paths = 100000;
    std::vector<double> times;
    uint64_t seed = 42;
    double tol_linalg = 1e-8;
    double tol_sampled = 1e-6;
    HyperbolicKernelOptions calibration;
    double classify_half_width = 3.0;
    int classify_half_points = 12;

    nlohmann::json echo;  // normalized copy for result records

    int dim() const { return x0.n; }
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& msg) {
    throw invalid_argument_error("config: " + msg);
}

inline double require_number(const nlohmann::json& j, const std::string& field) {
    if (!j.contains(field) || !j[field].is_number())
        config_error(field + " must be a number");
    return j[field].get<double>();
}

inline Vec parse_vec(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) config_error(field + " must be a non-empty array");
    if (j.size() > static_cast<size_t>(kMaxDim))
        config_error(field + " exceeds the supported dimension");
    Vec v(static_cast<int>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) config_error(field + " entries must be numbers");
        v[static_cast<int>(i)] = j[i].get<double>();
    }
    return v;
}

inline Mat parse_square_matrix(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) config_error(field + " must be a non-empty array of rows");
    size_t n = j.size();
    if (n > static_cast<size_t>(kMaxDim)) config_error(field + " exceeds the supported dimension");
    Mat m(static_cast<int>(n));
    for (size_t i = 0; i < n; ++i) {
        if (!j[i].is_array() || j[i].size() != n)
            config_error(field + " must be square (row " + std::to_string(i) +
                         " has the wrong length)");
        for (size_t k = 0; k < n; ++k) {
            if (!j[i][k].is_number()) config_error(field + " entries must be numbers");
            m(static_cast<int>(i), static_cast<int>(k)) = j[i][k].get<double>();
        }
    }
    return m;
}

}  // namespace detail

inline ExperimentConfig parse_config_json(const nlohmann::json& j) {
    using detail::config_error;
    ExperimentConfig cfg;
    if (!j.is_object()) config_error("top level must be an object");

    if (j.contains("kind")) {
        std::string k = j["kind"].get<std::string>();
        if (k == "simulate") cfg.kind = ExperimentKind::Simulate;
        else if (k == "verify") cfg.kind = ExperimentKind::Verify;
        else if (k == "classify") cfg.kind = ExperimentKind::Classify;
        else if (k == "mirror") cfg.kind = ExperimentKind::Mirror;
        else if (k == "tv") cfg.kind = ExperimentKind::Tv;
        else config_error("kind must be one of simulate|verify|classify|mirror|tv");
    }
    if (j.contains("space")) {
        std::string s = j["space"].get<std::string>();
        if (s == "euclidean") cfg.space = SpaceKind::Euclidean;
        else if (s == "sphere") cfg.space = SpaceKind::Sphere;
        else if (s == "hyperboloid") cfg.space = SpaceKind::Hyperboloid;
        else config_error("space must be one of euclidean|sphere|hyperboloid");
    }
    if (j.contains("coupling")) {
        std::string c = j["coupling"].get<std::string>();
        if (c == "reflection") cfg.coupling = CouplingKind::Reflection;
        else if (c == "independent") cfg.coupling = CouplingKind::Independent;
        else config_error("coupling must be reflection|independent");
    }

    if (!j.contains("x0")) config_error("x0 is required");
    if (!j.contains("y0")) config_error("y0 is required");
    cfg.x0 = detail::parse_vec(j["x0"], "x0");
    cfg.y0 = detail::parse_vec(j["y0"], "y0");
    if (cfg.x0.n != cfg.y0.n) config_error("x0 and y0 must have the same dimension");
    if (norm(cfg.x0 - cfg.y0) == 0.0) config_error("x0 and y0 must differ");

    if (j.contains("drift")) {
        const auto& dj = j["drift"];
        if (!dj.is_object()) config_error("drift must be an object");
        if (dj.contains("A")) {
            cfg.drift.type = DriftSpec::Type::Affine;
            cfg.drift.A = detail::parse_square_matrix(dj["A"], "drift.A");
            cfg.drift.c = dj.contains("c") ? detail::parse_vec(dj["c"], "drift.c")
                                           : Vec(cfg.drift.A.n);
            if (cfg.drift.c.n != cfg.drift.A.n)
                config_error("drift.c dimension must match drift.A");
            if (cfg.drift.A.n != cfg.x0.n) config_error("drift.A dimension must match x0");
        } else if (dj.contains("name")) {
            std::string name = dj["name"].get<std::string>();
            if (name == "custom-grid") {
                cfg.drift.type = DriftSpec::Type::CustomGrid;
                cfg.drift.name = name;
                if (!dj.contains("x") || !dj.contains("b"))
                    config_error("drift custom-grid needs arrays x and b");
                for (const auto& v : dj["x"]) cfg.drift.xs.push_back(v.get<double>());
                for (const auto& v : dj["b"]) cfg.drift.bs.push_back(v.get<double>());
                if (cfg.drift.xs.size() != cfg.drift.bs.size() || cfg.drift.xs.size() < 3)
                    config_error("drift custom-grid arrays must have equal length >= 3");
            } else if (name == "ou" || name == "sin" || name == "quadratic") {
                cfg.drift.type = DriftSpec::Type::Named;
                cfg.drift.name = name;
                if (cfg.x0.n != 1) config_error("named drifts are one-dimensional (x0 must be scalar)");
            } else {
                config_error("drift.name must be ou|sin|quadratic|custom-grid");
            }
        } else {
            config_error("drift must contain either A (affine) or name");
        }
    } else if (cfg.space == SpaceKind::Euclidean) {
        // default: driftless Brownian motion
        cfg.drift.type = DriftSpec::Type::Affine;
        cfg.drift.A = Mat(cfg.x0.n);
        cfg.drift.c = Vec(cfg.x0.n);
    }

    if (j.contains("killing")) {
        const auto& kj = j["killing"];
        if (cfg.space == SpaceKind::Euclidean)
            config_error("killing requires space sphere|hyperboloid");
        ModelSpace ms =
            cfg.space == SpaceKind::Sphere ? ModelSpace::Sphere : ModelSpace::Hyperboloid;
        try {
            if (kj.contains("generator")) {
                Mat g = detail::parse_square_matrix(kj["generator"], "killing.generator");
                if (g.n != 3) config_error("killing.generator must be 3x3");
                cfg.killing = KillingField(ms, g);
            } else if (kj.contains("type")) {
                std::string type = kj["type"].get<std::string>();
                if (type == "rotation-z") {
                    cfg.killing =
                        KillingField::rotation_z(ms, detail::require_number(kj, "omega"));
                } else if (type == "boost-x") {
                    if (ms != ModelSpace::Hyperboloid)
                        config_error("killing boost-x requires space hyperboloid");
                    cfg.killing = KillingField::boost_x(detail::require_number(kj, "rate"));
                } else {
                    config_error("killing.type must be rotation-z|boost-x");
                }
            } else {
                config_error("killing must contain generator or type");
            }
        } catch (const invalid_argument_error& e) {
            config_error(std::string("killing.generator invalid: ") + e.what());
        }
    }

    if (j.contains("dt")) cfg.dt = detail::require_number(j, "dt");
    if (!(cfg.dt > 0)) config_error("dt must be positive");
    if (j.contains("horizon")) cfg.horizon = detail::require_number(j, "horizon");
    if (!(cfg.horizon > 0)) config_error("horizon must be positive");
    if (j.contains("n_paths")) {
        if (!j["n_paths"].is_number_integer()) config_error("n_paths must be an integer");
        cfg.n_paths = j["n_paths"].get<long>();
    }
    if (cfg.n_paths < 1) config_error("n_paths must be >= 1");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer()) config_error("seed must be an integer");
        cfg.seed = j["seed"].get<uint64_t>();
    }
    if (j.contains("times")) {
        for (const auto& v : j["times"]) {
            if (!v.is_number()) config_error("times entries must be numbers");
            cfg.times.push_back(v.get<double>());
        }
        for (size_t i = 1; i < cfg.times.size(); ++i)
            if (cfg.times[i] <= cfg.times[i - 1])
                config_error("times must be strictly increasing");
    }
    if (j.contains("tolerances")) {
        const auto& tj = j["tolerances"];
        if (tj.contains("linalg")) cfg.tol_linalg = detail::require_number(tj, "linalg");
        if (tj.contains("sampled")) cfg.tol_sampled = detail::require_number(tj, "sampled");
        if (!(cfg.tol_linalg > 0) || !(cfg.tol_sampled > 0))
            config_error("tolerances must be positive");
    }
    if (j.contains("calibration")) {
        const auto& cj = j["calibration"];
        if (cj.contains("n_paths")) cfg.calibration.n_paths = cj["n_paths"].get<long>();
        if (cj.contains("dt")) cfg.calibration.dt = detail::require_number(cj, "dt");
        if (cj.contains("seed")) cfg.calibration.seed = cj["seed"].get<uint64_t>();
        if (cfg.calibration.n_paths < 100 || !(cfg.calibration.dt > 0))
            config_error("calibration parameters out of range");
    }
    if (j.contains("classify_grid")) {
        const auto& gj = j["classify_grid"];
        if (gj.contains("half_width"))
            cfg.classify_half_width = detail::require_number(gj, "half_width");
        if (gj.contains("half_points")) cfg.classify_half_points = gj["half_points"].get<int>();
        if (!(cfg.classify_half_width > 0) || cfg.classify_half_points < 1)
            config_error("classify_grid parameters out of range");
    }

    // space-specific start-point validation
    if (cfg.space != SpaceKind::Euclidean) {
        if (cfg.x0.n != 3) config_error("x0 must be a 3-vector on a model space");
        ModelSpace ms =
            cfg.space == SpaceKind::Sphere ? ModelSpace::Sphere : ModelSpace::Hyperboloid;
        bool ok_x = ms == ModelSpace::Sphere ? on_sphere(cfg.x0, 1e-6)
                                             : on_hyperboloid(cfg.x0, 1e-6);
        bool ok_y = ms == ModelSpace::Sphere ? on_sphere(cfg.y0, 1e-6)
                                             : on_hyperboloid(cfg.y0, 1e-6);
        if (!ok_x) config_error("x0 does not lie on the configured space");
        if (!ok_y) config_error("y0 does not lie on the configured space");
        cfg.x0 = renormalize_point(ms, cfg.x0);
        cfg.y0 = renormalize_point(ms, cfg.y0);
    }
    if (cfg.coupling == CouplingKind::Independent) {
        if (cfg.space != SpaceKind::Euclidean || cfg.x0.n != 1)
            config_error("independent coupling is supported for one-dimensional euclidean runs");
    }

    cfg.echo = j;
    return cfg;
}

// Loads and validates a configuration file. Parse errors carry
// line/column positions; validation errors name the offending field.
inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_argument_error("config: cannot open file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        size_t byte = e.byte;
        size_t line = 1, col = 1;
        for (size_t i = 0; i < byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw invalid_argument_error("config: parse error at line " + std::to_string(line) +
                                     ", column " + std::to_string(col) + ": " + e.what());
    }
    try {
        return parse_config_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw invalid_argument_error(std::string("config: ") + e.what());
    }
}

}  // namespace mmclab
