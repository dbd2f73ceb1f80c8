#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "diagbench/error.hpp"
#include "diagbench/version.hpp"

namespace diagbench {

// The six quality dimensions, each in [0,1]. Weights bind by name, never by
// position: reordering fields cannot silently reweight a metric.
struct MetricVector {
    double precision = 0.0;
    double recall = 0.0;
    double design = 0.0;
    double blank = 0.0;
    double readability = 0.0;
    double align = 0.0;
};

struct WeightProfile {
    std::string id = "default";
    double precision = 0.20;
    double recall = 0.20;
    double design = 0.20;
    double blank = 0.05;
    double readability = 0.25;
    double align = 0.10;

    double sum() const { return precision + recall + design + blank + readability + align; }

    void validate() const {
        const double ws[] = {precision, recall, design, blank, readability, align};
        for (const double w : ws)
            if (w < 0.0) raise(ErrorKind::weight_mismatch, "weights must be non-negative");
        if (std::abs(sum() - 1.0) > 1e-9)
            raise(ErrorKind::weight_mismatch, "weights must sum to 1");
    }
};

inline WeightProfile default_weights() { return {}; }

inline WeightProfile equal_weights() {
    const double w = 1.0 / 6.0;
    return {"equal", w, w, w, w, w, w};
}

// s = Σ w_k · m_k, clamped against accumulation noise at the interval ends.
inline double base_score(const MetricVector& m, const WeightProfile& w) {
    w.validate();
    const double ms[] = {m.precision, m.recall, m.design, m.blank, m.readability, m.align};
    for (const double v : ms)
        if (v < 0.0 || v > 1.0) raise(ErrorKind::out_of_range, "metric values must be in [0,1]");
    const double s = w.precision * m.precision + w.recall * m.recall + w.design * m.design +
                     w.blank * m.blank + w.readability * m.readability + w.align * m.align;
    return std::clamp(s, 0.0, 1.0);
}

// ---- step counting ----

enum class TraceStatus { ok, error };

struct TraceEntry {
    std::string tool;
    nlohmann::json args;
    TraceStatus status = TraceStatus::ok;
    std::string timestamp;
};

inline std::set<std::string> default_step_whitelist() {
    return {"insert_shape", "insert_line", "insert_text", "set_format",
            "move",         "align",       "connect",     "delete"};
}

// Ordered record of atomic drawing commands; n counts ok-status whitelisted
// tools. Screenshots, queries, and failed calls never count.
struct TraceLog {
    std::string task_id;
    std::vector<TraceEntry> entries;
    std::set<std::string> step_whitelist = default_step_whitelist();
};

inline std::size_t count_steps(const TraceLog& trace) {
    std::size_t n = 0;
    for (const auto& e : trace.entries) {
        if (e.tool.empty()) raise(ErrorKind::malformed_trace, "trace entry without a tool name");
        if (e.status == TraceStatus::ok && trace.step_whitelist.count(e.tool)) ++n;
    }
    return n;
}

inline TraceLog parse_trace_jsonl(const std::string& text, const std::string& task_id = "") {
    TraceLog log;
    log.task_id = task_id;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorKind::malformed_trace,
                  "line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("tool") || !j["tool"].is_string())
            raise(ErrorKind::malformed_trace,
                  "line " + std::to_string(line_no) + ": entry needs a string 'tool'");
        TraceEntry entry;
        entry.tool = j["tool"].get<std::string>();
        if (j.contains("args")) entry.args = j["args"];
        if (j.contains("status")) {
            const std::string s = j["status"].get<std::string>();
            if (s == "ok") entry.status = TraceStatus::ok;
            else if (s == "error") entry.status = TraceStatus::error;
            else
                raise(ErrorKind::malformed_trace,
                      "line " + std::to_string(line_no) + ": unknown status '" + s + "'");
        }
        if (j.contains("timestamp")) entry.timestamp = j["timestamp"].get<std::string>();
        log.entries.push_back(std::move(entry));
    }
    return log;
}

// ---- season parameters and DQS ----

// Frozen per-season constants: K is the mean step count, r = 1 - mean base
// score over the season block. Scoring refuses unfrozen params.
struct SeasonParams {
    double K = 0.0;
    double r = 0.0;
    std::string season_id;
    bool frozen = false;
};

inline SeasonParams make_season_params(double K, double r, std::string season_id = "adhoc") {
    if (!(K > 0.0)) raise(ErrorKind::nonpositive_k, "K must be positive");
    return {K, r, std::move(season_id), true};
}

// sat(n) = n / (n + K)
inline double saturation(double n, double K) {
    if (!(K > 0.0)) raise(ErrorKind::nonpositive_k, "K must be positive");
    if (n < 0.0) raise(ErrorKind::out_of_range, "step count must be >= 0");
    return n / (n + K);
}

// DQS(s,n) = s(1 - (1-s)·sat(n)) + r·s·(1 - sat(n))
inline double dqs(double s, double n, const SeasonParams& params) {
    if (!params.frozen) raise(ErrorKind::unfrozen_season, "season parameters must be frozen");
    if (s < 0.0 || s > 1.0) raise(ErrorKind::out_of_range, "base score must be in [0,1]");
    const double sat = saturation(n, params.K);
    return s * (1.0 - (1.0 - s) * sat) + params.r * s * (1.0 - sat);
}

// Net change Δ(s,n) = DQS - s = s/(n+K) · [rK - (1-s)n]; zero along the
// break-even curve n = rK/(1-s).
inline double dqs_delta(double s, double n, const SeasonParams& params) {
    return dqs(s, n, params) - s;
}

struct DeltaSurface {
    std::vector<double> s_grid;
    std::vector<double> n_grid;
    std::vector<std::vector<double>> delta; // delta[i][j] = Δ(s_grid[i], n_grid[j])
};

inline DeltaSurface dqs_delta_surface(double K, double r, std::vector<double> s_grid,
                                      std::vector<double> n_grid) {
    if (s_grid.empty() || n_grid.empty())
        raise(ErrorKind::out_of_range, "surface grids must be non-empty");
    const SeasonParams params = make_season_params(K, r, "surface");
    DeltaSurface surf;
    surf.s_grid = std::move(s_grid);
    surf.n_grid = std::move(n_grid);
    surf.delta.resize(surf.s_grid.size());
    for (std::size_t i = 0; i < surf.s_grid.size(); ++i) {
        surf.delta[i].resize(surf.n_grid.size());
        for (std::size_t j = 0; j < surf.n_grid.size(); ++j)
            surf.delta[i][j] = dqs_delta(surf.s_grid[i], surf.n_grid[j], params);
    }
    return surf;
}

// ---- records ----

enum class TaskMode { T2I, TI2I };

inline const char* to_string(TaskMode m) { return m == TaskMode::T2I ? "T2I" : "TI2I"; }

inline TaskMode task_mode_from(const std::string& s) {
    if (s == "T2I") return TaskMode::T2I;
    if (s == "TI2I") return TaskMode::TI2I;
    raise(ErrorKind::malformed_input, "mode must be T2I or TI2I, got '" + s + "'");
}

enum class MetricSource { deterministic, judge };

inline const char* to_string(MetricSource s) {
    return s == MetricSource::deterministic ? "deterministic" : "judge";
}

struct MetricProvenance {
    MetricSource design = MetricSource::deterministic;
    MetricSource blank = MetricSource::deterministic;
    int judge_runs_design = 0;
    int judge_runs_blank = 0;
};

struct ScoreRecord {
    std::string task_id;
    std::string system; // label of the generating system, for report grouping
    TaskMode mode = TaskMode::T2I;
    MetricVector metrics;
    double n = 0.0;
    double s = 0.0;
    double dqs_value = 0.0;
    std::string weights_id = "default";
    MetricProvenance provenance;
};

inline nlohmann::json to_json(const ScoreRecord& r) {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["tool_version"] = version;
    j["task_id"] = r.task_id;
    if (!r.system.empty()) j["system"] = r.system;
    j["mode"] = to_string(r.mode);
    j["metrics"] = {{"precision", r.metrics.precision}, {"recall", r.metrics.recall},
                    {"design", r.metrics.design},       {"blank", r.metrics.blank},
                    {"readability", r.metrics.readability}, {"align", r.metrics.align}};
    j["n"] = r.n;
    j["s"] = r.s;
    j["dqs"] = r.dqs_value;
    j["weights_id"] = r.weights_id;
    j["provenance"] = {{"design", to_string(r.provenance.design)},
                       {"blank", to_string(r.provenance.blank)},
                       {"judge_runs_design", r.provenance.judge_runs_design},
                       {"judge_runs_blank", r.provenance.judge_runs_blank}};
    return j;
}

inline ScoreRecord score_record_from_json(const nlohmann::json& j) {
    ScoreRecord r;
    r.task_id = j.value("task_id", "");
    r.system = j.value("system", "");
    r.mode = task_mode_from(j.value("mode", "T2I"));
    const auto& m = j.at("metrics");
    r.metrics = {m.at("precision").get<double>(), m.at("recall").get<double>(),
                 m.at("design").get<double>(),    m.at("blank").get<double>(),
                 m.at("readability").get<double>(), m.at("align").get<double>()};
    r.n = j.value("n", 0.0);
    r.s = j.value("s", 0.0);
    r.dqs_value = j.value("dqs", 0.0);
    r.weights_id = j.value("weights_id", "default");
    if (j.contains("provenance")) {
        const auto& p = j["provenance"];
        r.provenance.design = p.value("design", "deterministic") == std::string("judge")
                                  ? MetricSource::judge
                                  : MetricSource::deterministic;
        r.provenance.blank = p.value("blank", "deterministic") == std::string("judge")
                                 ? MetricSource::judge
                                 : MetricSource::deterministic;
        r.provenance.judge_runs_design = p.value("judge_runs_design", 0);
        r.provenance.judge_runs_blank = p.value("judge_runs_blank", 0);
    }
    return r;
}

// K = mean(n_i), r = 1 - mean(s_i) over the season block; result is frozen.
inline SeasonParams fit_season_params(const std::vector<ScoreRecord>& records,
                                      std::string season_id = "fitted") {
    if (records.empty()) raise(ErrorKind::empty_season, "cannot fit parameters to zero records");
    double sum_n = 0.0, sum_s = 0.0;
    for (const auto& r : records) {
        sum_n += r.n;
        sum_s += r.s;
    }
    const double K = sum_n / static_cast<double>(records.size());
    const double r = 1.0 - sum_s / static_cast<double>(records.size());
    return make_season_params(K, r, std::move(season_id));
}

} // namespace diagbench
