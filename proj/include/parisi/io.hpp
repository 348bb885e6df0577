#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "parisi/config.hpp"
#include "parisi/optimize.hpp"
#include "parisi/simulator.hpp"

namespace parisi {

using nlohmann::json;

/// Shortest decimal text that reads back to the same double; "nan" for non-finite values.
inline std::string format_number(double v) {
    if (!std::isfinite(v)) return "nan";
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline json to_json(const Mixture& mix) {
    json terms = json::array();
    for (const auto& t : mix.terms()) terms.push_back({{"power", t.power}, {"weight", t.weight}});
    return terms;
}

inline json to_json(const FieldSpec& f) {
    if (f.kind == FieldSpec::Kind::constant) return {{"kind", "constant"}, {"h", f.mean}};
    return {{"kind", "gaussian"}, {"mean", f.mean}, {"sd", f.sd}};
}

inline json to_json(const GridConfig& g) {
    return {{"half_width", g.half_width}, {"nodes", g.nodes}, {"quad_nodes", g.quad_nodes}, {"max_step_sd", g.max_step_sd}};
}

inline json to_json(const RSBParams& r) { return {{"k", r.k()}, {"m", r.m}, {"q", r.q}}; }

/// The configuration with every default written out; the grid half-width is
/// the resolved value.
inline json to_json(const RunConfig& c) {
    const auto& o = c.optimizer;
    json j = {
        {"schema", kSchemaVersion},
        {"model", {{"mixture", to_json(c.mixture)}, {"field", to_json(c.field)}}},
        {"grid", to_json(resolve_grid(c.grid, c.mixture, c.field))},
        {"optimizer",
         {{"tol", c.tol},
          {"k_max", c.k_max},
          {"max_evals", o.max_evals},
          {"step_tol", o.step_tol},
          {"stationarity_tol", o.stationarity_tol},
          {"mass_tol", o.mass_tol},
          {"restarts", o.restarts},
          {"restart_evals", o.restart_evals},
          {"search_nodes", o.search_nodes},
          {"search_quad_nodes", o.search_quad_nodes}}},
        {"chaos", {{"t_grid", c.t_grid}, {"tol", c.root_tol}}},
        {"bound", {{"t", c.bound_t}, {"u_grid", c.u_grid}, {"u_points", c.u_points}}},
        {"simulate",
         {{"N", c.simulate.N},
          {"t", c.simulate.t},
          {"n_disorder", c.simulate.n_disorder},
          {"free_energy", c.simulate.free_energy},
          {"constrained", c.simulate.constrained},
          {"overlap", c.simulate.overlap},
          {"compare_t", c.simulate.compare_t}}},
        {"verify", {{"samples", c.verify.samples}}},
        {"seed", c.seed},
        {"threads", c.threads},
    };
    if (c.measure) j["measure"] = to_json(*c.measure);
    return j;
}

inline json to_json(const ParisiMeasure& pm) {
    json atoms = json::array();
    for (const Atom& a : pm.rsb.atoms()) atoms.push_back({{"q", a.q}, {"mass", a.mass}});
    json hist = json::array();
    for (auto [k, v] : pm.k_history) hist.push_back({{"k", k}, {"value", v}});
    return {{"value", pm.value},
            {"c", pm.c},
            {"k", pm.rsb.k()},
            {"m", pm.rsb.m},
            {"q", pm.rsb.q},
            {"atoms", atoms},
            {"residuals", pm.residuals},
            {"k_history", hist},
            {"converged", pm.converged},
            {"improvement_tol", pm.improvement_tol},
            {"stationarity_tol", pm.stationarity_tol},
            {"mass_tol", pm.mass_tol},
            {"restarts", pm.restarts},
            {"global_minimum_certified", false},
            {"evals", pm.evals}};
}

inline json to_json(const SimResult& r) {
    json j = {{"estimate", r.estimate}, {"stderr", r.std_error}, {"n_disorder", r.n_disorder}};
    if (!r.table.empty()) {
        json t = json::array();
        for (const auto& b : r.table) t.push_back({{"r", b.r}, {"mass", b.mass}, {"stderr", b.std_error}});
        j["table"] = t;
    }
    if (std::isfinite(r.lattice_u)) {
        j["u"] = r.lattice_u;
        j["requested_u"] = r.requested_u;
        j["snapped"] = r.snapped;
    }
    return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

/// Results file: the payload plus the schema version and the resolved config.
inline void write_json(const std::filesystem::path& path, json payload, const json& config) {
    payload["schema"] = kSchemaVersion;
    payload["config"] = config;
    write_text(path, payload.dump(2) + "\n");
}

/// Comma-separated table with LF endings. Leading '#' lines carry the schema
/// version and the resolved config as one-line JSON.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    std::string render(const json& config) const {
        std::string s = std::string("# schema: ") + kSchemaVersion + "\n";
        s += "# config: " + config.dump() + "\n";
        s += join(header_);
        for (const auto& r : rows_) s += join(r);
        return s;
    }

    void write(const std::filesystem::path& path, const json& config) const { write_text(path, render(config)); }

private:
    static std::string join(const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += ',';
            s += cells[i];
        }
        return s + "\n";
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace parisi
