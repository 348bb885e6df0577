#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "parisi/error.hpp"
#include "parisi/field.hpp"
#include "parisi/mixture.hpp"
#include "parisi/optimize.hpp"
#include "parisi/rsb.hpp"

namespace parisi {

inline constexpr const char* kSchemaVersion = "parisi-run/1";

/// Malformed or invalid configuration; the message names the offending line or field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimulateBlock {
    int N = 10;
    double t = 0.5;
    int n_disorder = 300;
    bool free_energy = true;
    bool constrained = true;
    bool overlap = true;
    std::vector<double> compare_t;  // overlap mean against u_t at these t values
};

struct VerifyBlock {
    int samples = 100;
};

/// Everything a command needs, with every default filled in.
struct RunConfig {
    Mixture mixture = Mixture::sk(1.5);
    FieldSpec field = FieldSpec::constant(0.4);
    GridConfig grid;
    OptimizerOptions optimizer;
    double tol = 1e-6;
    int k_max = 3;
    std::optional<RSBParams> measure;
    std::vector<double> t_grid{0.0, 0.25, 0.5, 0.75};
    double root_tol = 1e-8;
    double bound_t = 0.5;
    std::vector<double> u_grid;  // empty: u_points evenly spaced on [0, c]
    int u_points = 21;
    SimulateBlock simulate;
    VerifyBlock verify;
    std::uint64_t seed = 1;
    int threads = 1;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, const std::string& path, const std::set<std::string>& known) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ConfigError(path + "." + it.key() + ": unknown field");
}

inline double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

inline long long get_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return j.get<long long>();
}

inline bool get_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw ConfigError(path + ": expected true or false");
    return j.get<bool>();
}

inline std::vector<double> get_numbers(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

template <class T>
void read_number(const json& obj, const std::string& path, const char* key, T& dst) {
    if (!obj.contains(key)) return;
    if constexpr (std::is_integral_v<T>)
        dst = static_cast<T>(get_integer(obj[key], path + "." + key));
    else
        dst = static_cast<T>(get_number(obj[key], path + "." + key));
}

inline void read_bool(const json& obj, const std::string& path, const char* key, bool& dst) {
    if (obj.contains(key)) dst = get_bool(obj[key], path + "." + key);
}

}  // namespace detail

/// Parse JSON text; syntax errors report line and column.
inline nlohmann::json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error");
    }
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path);
}

/// "sk:beta=F[,h=F]" sets an SK mixture and, when given, a constant field.
inline void apply_preset(RunConfig& cfg, const std::string& preset) {
    const std::string head = "sk:";
    if (preset.rfind(head, 0) != 0) throw ConfigError("preset: expected sk:beta=F[,h=F], got '" + preset + "'");
    std::optional<double> beta, h;
    std::stringstream ss(preset.substr(head.size()));
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("preset: expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(val, &used);
            if (used != val.size()) throw std::invalid_argument(val);
        } catch (const std::exception&) {
            throw ConfigError("preset: '" + val + "' is not a number");
        }
        if (key == "beta")
            beta = v;
        else if (key == "h")
            h = v;
        else
            throw ConfigError("preset: unknown key '" + key + "'");
    }
    if (!beta) throw ConfigError("preset: beta is required");
    if (!(*beta > 0.0)) throw ConfigError("preset: beta must be positive");
    cfg.mixture = Mixture::sk(*beta);
    if (h) cfg.field = FieldSpec::constant(*h);
}

inline RSBParams parse_measure(const nlohmann::json& j, const std::string& path) {
    using namespace detail;
    reject_unknown(j, path, {"k", "m", "q"});
    if (!j.contains("m") || !j.contains("q")) throw ConfigError(path + ": needs m and q");
    RSBParams r;
    r.m = get_numbers(j["m"], path + ".m");
    r.q = get_numbers(j["q"], path + ".q");
    try {
        r.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (j.contains("k") && get_integer(j["k"], path + ".k") != r.k()) throw ConfigError(path + ".k: does not match m and q");
    return r;
}

/// Fill `cfg` from a parsed JSON document. Missing blocks keep their defaults,
/// except that a document must describe the model unless `model_optional`.
inline void apply_json(RunConfig& cfg, const nlohmann::json& doc, bool model_optional) {
    using namespace detail;
    reject_unknown(doc, "config",
                   {"schema", "model", "grid", "optimizer", "measure", "chaos", "bound", "simulate", "verify", "seed",
                    "threads"});
    if (doc.contains("model")) {
        const json& m = doc["model"];
        reject_unknown(m, "model", {"preset", "mixture", "field"});
        if (m.contains("preset")) {
            if (!m["preset"].is_string()) throw ConfigError("model.preset: expected a string");
            apply_preset(cfg, m["preset"].get<std::string>());
        }
        if (m.contains("mixture")) {
            const json& mix = m["mixture"];
            if (!mix.is_array() || mix.empty()) throw ConfigError("model.mixture: expected a non-empty array");
            std::vector<MixtureTerm> terms;
            for (std::size_t i = 0; i < mix.size(); ++i) {
                const std::string p = "model.mixture[" + std::to_string(i) + "]";
                reject_unknown(mix[i], p, {"power", "weight"});
                if (!mix[i].contains("power") || !mix[i].contains("weight")) throw ConfigError(p + ": needs power and weight");
                terms.push_back({static_cast<int>(get_integer(mix[i]["power"], p + ".power")),
                                 get_number(mix[i]["weight"], p + ".weight")});
            }
            const auto report = Mixture::validate(terms);
            if (!report.ok()) throw ConfigError("model.mixture: " + report.violations.front());
            cfg.mixture = Mixture(terms);
        } else if (!m.contains("preset")) {
            throw ConfigError("model: needs a mixture or a preset");
        }
        if (m.contains("field")) {
            const json& f = m["field"];
            reject_unknown(f, "model.field", {"kind", "h", "mean", "sd"});
            const std::string kind = f.contains("kind") && f["kind"].is_string() ? f["kind"].get<std::string>() : "constant";
            if (kind == "constant") {
                double h = 0.0;
                read_number(f, "model.field", "h", h);
                cfg.field = FieldSpec::constant(h);
            } else if (kind == "gaussian") {
                double mean = 0.0, sd = 1.0;
                read_number(f, "model.field", "mean", mean);
                read_number(f, "model.field", "sd", sd);
                if (!(sd >= 0.0)) throw ConfigError("model.field.sd: must be >= 0");
                cfg.field = FieldSpec::gaussian(mean, sd);
            } else {
                throw ConfigError("model.field.kind: expected constant or gaussian");
            }
        }
    } else if (!model_optional) {
        throw ConfigError("config: missing model block");
    }
    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        reject_unknown(g, "grid", {"half_width", "nodes", "quad_nodes", "max_step_sd"});
        read_number(g, "grid", "half_width", cfg.grid.half_width);
        read_number(g, "grid", "nodes", cfg.grid.nodes);
        read_number(g, "grid", "quad_nodes", cfg.grid.quad_nodes);
        read_number(g, "grid", "max_step_sd", cfg.grid.max_step_sd);
        if (cfg.grid.nodes < 7 || cfg.grid.nodes % 2 == 0) throw ConfigError("grid.nodes: must be odd and >= 7");
        if (cfg.grid.quad_nodes < 2 || cfg.grid.quad_nodes > 200) throw ConfigError("grid.quad_nodes: must lie in 2..200");
        if (!(cfg.grid.max_step_sd > 0.0)) throw ConfigError("grid.max_step_sd: must be positive");
    }
    if (doc.contains("optimizer")) {
        const json& o = doc["optimizer"];
        reject_unknown(o, "optimizer",
                       {"tol", "k_max", "max_evals", "step_tol", "stationarity_tol", "mass_tol", "restarts",
                        "restart_evals", "search_nodes", "search_quad_nodes"});
        auto& op = cfg.optimizer;
        read_number(o, "optimizer", "tol", cfg.tol);
        read_number(o, "optimizer", "k_max", cfg.k_max);
        read_number(o, "optimizer", "max_evals", op.max_evals);
        read_number(o, "optimizer", "step_tol", op.step_tol);
        read_number(o, "optimizer", "stationarity_tol", op.stationarity_tol);
        read_number(o, "optimizer", "mass_tol", op.mass_tol);
        read_number(o, "optimizer", "restarts", op.restarts);
        read_number(o, "optimizer", "restart_evals", op.restart_evals);
        read_number(o, "optimizer", "search_nodes", op.search_nodes);
        read_number(o, "optimizer", "search_quad_nodes", op.search_quad_nodes);
        if (!(cfg.tol > 0.0)) throw ConfigError("optimizer.tol: must be positive");
        if (cfg.k_max < 0) throw ConfigError("optimizer.k_max: must be >= 0");
        if (op.restarts < 0) throw ConfigError("optimizer.restarts: must be >= 0");
        if (op.max_evals < 1) throw ConfigError("optimizer.max_evals: must be >= 1");
    }
    if (doc.contains("measure")) {
        if (doc["measure"].is_string()) {
            // output of a previous solve run
            const std::string file = doc["measure"].get<std::string>();
            const json prev = read_json_file(file);
            if (!prev.is_object() || !prev.contains("m") || !prev.contains("q")) throw ConfigError(file + ": no m and q fields");
            cfg.measure = parse_measure(json{{"m", prev["m"]}, {"q", prev["q"]}}, file);
        } else {
            cfg.measure = parse_measure(doc["measure"], "measure");
        }
    }
    if (doc.contains("chaos")) {
        const json& c = doc["chaos"];
        reject_unknown(c, "chaos", {"t_grid", "tol"});
        if (c.contains("t_grid")) cfg.t_grid = get_numbers(c["t_grid"], "chaos.t_grid");
        read_number(c, "chaos", "tol", cfg.root_tol);
        for (double t : cfg.t_grid)
            if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("chaos.t_grid: values must lie in [0,1]");
        if (!(cfg.root_tol > 0.0)) throw ConfigError("chaos.tol: must be positive");
    }
    if (doc.contains("bound")) {
        const json& b = doc["bound"];
        reject_unknown(b, "bound", {"t", "u_grid", "u_points"});
        read_number(b, "bound", "t", cfg.bound_t);
        if (b.contains("u_grid")) cfg.u_grid = get_numbers(b["u_grid"], "bound.u_grid");
        read_number(b, "bound", "u_points", cfg.u_points);
        if (!(cfg.bound_t >= 0.0 && cfg.bound_t <= 1.0)) throw ConfigError("bound.t: must lie in [0,1]");
        if (cfg.u_points < 2) throw ConfigError("bound.u_points: must be >= 2");
    }
    if (doc.contains("simulate")) {
        const json& s = doc["simulate"];
        reject_unknown(s, "simulate", {"N", "t", "n_disorder", "free_energy", "constrained", "overlap", "compare_t"});
        auto& sb = cfg.simulate;
        read_number(s, "simulate", "N", sb.N);
        read_number(s, "simulate", "t", sb.t);
        read_number(s, "simulate", "n_disorder", sb.n_disorder);
        read_bool(s, "simulate", "free_energy", sb.free_energy);
        read_bool(s, "simulate", "constrained", sb.constrained);
        read_bool(s, "simulate", "overlap", sb.overlap);
        if (s.contains("compare_t")) sb.compare_t = get_numbers(s["compare_t"], "simulate.compare_t");
        if (sb.N < 1) throw ConfigError("simulate.N: must be >= 1");
        if (!(sb.t >= 0.0 && sb.t <= 1.0)) throw ConfigError("simulate.t: must lie in [0,1]");
        if (sb.n_disorder < 1) throw ConfigError("simulate.n_disorder: must be >= 1");
        for (double t : sb.compare_t)
            if (!(t >= 0.0 && t < 1.0)) throw ConfigError("simulate.compare_t: values must lie in [0,1)");
    }
    if (doc.contains("verify")) {
        reject_unknown(doc["verify"], "verify", {"samples"});
        read_number(doc["verify"], "verify", "samples", cfg.verify.samples);
        if (cfg.verify.samples < 1) throw ConfigError("verify.samples: must be >= 1");
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
            throw ConfigError("seed: expected a nonnegative integer");
        if (doc["seed"].is_number_integer() && doc["seed"].get<long long>() < 0) throw ConfigError("seed: must be >= 0");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    read_number(doc, "config", "threads", cfg.threads);
    if (cfg.threads < 1) throw ConfigError("threads: must be >= 1");
}

inline RunConfig load_config(const std::string& path) {
    RunConfig cfg;
    apply_json(cfg, read_json_file(path), false);
    return cfg;
}

}  // namespace parisi
