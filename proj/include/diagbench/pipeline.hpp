#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "diagbench/content_metrics.hpp"
#include "diagbench/judge.hpp"
#include "diagbench/layout_metrics.hpp"
#include "diagbench/perceptual.hpp"
#include "diagbench/registry.hpp"
#include "diagbench/scoring.hpp"
#include "diagbench/text.hpp"

namespace diagbench {

// Full task evaluation: parse -> metrics -> score -> record. Metric modes are
// explicit experimental conditions; a judge failure fails the record rather
// than silently falling back to the deterministic path.

struct ModeFlags {
    MetricSource perceptual = MetricSource::deterministic;
    MetricSource blank = MetricSource::deterministic;
};

struct EvalRequest {
    CorpusItem item;
    VectorDocument document;
    TraceLog trace;
    ModeFlags mode_flags;
    WeightProfile weights = default_weights();
    std::string system; // label for report grouping, optional
};

class Evaluator {
public:
    explicit Evaluator(std::shared_ptr<JudgeGateway> gateway = nullptr)
        : gateway_(std::move(gateway)) {}

    ScoreRecord evaluate(const EvalRequest& req, const SeasonParams& season) const {
        if (!season.frozen)
            raise(ErrorKind::unfrozen_season, "season parameters must be frozen before scoring");
        if (!req.document.source_id.empty() && req.document.source_id != req.item.id)
            raise(ErrorKind::task_mismatch, "document '" + req.document.source_id +
                                                "' does not belong to task '" + req.item.id + "'");
        if (!req.trace.task_id.empty() && req.trace.task_id != req.item.id)
            raise(ErrorKind::task_mismatch, "trace '" + req.trace.task_id +
                                                "' does not belong to task '" + req.item.id + "'");

        const bool wants_judge = req.mode_flags.perceptual == MetricSource::judge ||
                                 req.mode_flags.blank == MetricSource::judge;
        if (wants_judge && !gateway_)
            raise(ErrorKind::judge_unreachable, "judge mode requested without a gateway");

        ScoreRecord rec;
        rec.task_id = req.item.id;
        rec.system = req.system;
        rec.mode = req.item.mode;
        rec.weights_id = req.weights.id;
        rec.provenance.design = req.mode_flags.perceptual;
        rec.provenance.blank = req.mode_flags.blank;

        ContentSets sets;
        sets.generated = extract_text_set(req.document);
        for (const auto& p : req.item.required_text) {
            const std::string n = normalize_text(p);
            if (!n.empty()) sets.required.insert(n);
        }

        const RasterGrid grid = rasterize(req.document);

        rec.metrics.precision = precision(sets);
        rec.metrics.recall = recall(sets);

        if (req.mode_flags.perceptual == MetricSource::judge) {
            const JudgeVerdict v = gateway_->judge_design_errors(encode_png(grid));
            rec.metrics.design = design_score(v.mean_value);
            rec.provenance.judge_runs_design = static_cast<int>(v.parsed_values.size());
        } else {
            rec.metrics.design = design_score(detect_design_errors(req.document).count_e);
        }

        if (req.mode_flags.blank == MetricSource::judge) {
            const RasterGrid overlaid = burn_grid_overlay(grid, default_blank_cell);
            const JudgeVerdict v = gateway_->judge_blank_verdict(encode_png(overlaid));
            rec.metrics.blank = blank_score(std::clamp(v.mean_value, 0.0, 1.0));
            rec.provenance.judge_runs_blank = static_cast<int>(v.parsed_values.size());
        } else {
            rec.metrics.blank = blank_score(estimate_blank(grid).beta);
        }

        const ReadabilityReport readability = assess_readability(req.document, grid);
        rec.metrics.readability = readability_score(readability, sets.generated);

        rec.metrics.align = alignment_score(grid);

        rec.n = static_cast<double>(count_steps(req.trace));
        rec.s = base_score(rec.metrics, req.weights);
        rec.dqs_value = dqs(rec.s, rec.n, season);
        return rec;
    }

    struct BatchError {
        std::size_t index = 0;
        std::string task_id;
        std::string message;
    };

    struct BatchResult {
        std::vector<ScoreRecord> records; // order-preserving over successes
        std::vector<BatchError> errors;
    };

    BatchResult evaluate_batch(const std::vector<EvalRequest>& requests,
                               const SeasonParams& season) const {
        BatchResult out;
        for (std::size_t i = 0; i < requests.size(); ++i) {
            try {
                out.records.push_back(evaluate(requests[i], season));
            } catch (const Error& e) {
                out.errors.push_back({i, requests[i].item.id, e.what()});
            }
        }
        return out;
    }

private:
    std::shared_ptr<JudgeGateway> gateway_;
};

// ---- batch summary (the leaderboard-table shape) ----

struct SummaryRow {
    std::string system;
    std::size_t tasks = 0;
    MetricVector mean_metrics;
    double mean_steps = 0.0;
    double mean_s = 0.0;
    double mean_dqs = 0.0;
};

struct Summary {
    std::vector<SummaryRow> rows; // sorted by mean DQS, descending
};

inline Summary summarize(const std::vector<ScoreRecord>& records) {
    std::map<std::string, std::vector<const ScoreRecord*>> by_system;
    for (const auto& r : records) by_system[r.system.empty() ? "all" : r.system].push_back(&r);

    Summary summary;
    for (const auto& [system, recs] : by_system) {
        SummaryRow row;
        row.system = system;
        row.tasks = recs.size();
        for (const auto* r : recs) {
            row.mean_metrics.precision += r->metrics.precision;
            row.mean_metrics.recall += r->metrics.recall;
            row.mean_metrics.design += r->metrics.design;
            row.mean_metrics.blank += r->metrics.blank;
            row.mean_metrics.readability += r->metrics.readability;
            row.mean_metrics.align += r->metrics.align;
            row.mean_steps += r->n;
            row.mean_s += r->s;
            row.mean_dqs += r->dqs_value;
        }
        const double k = static_cast<double>(recs.size());
        row.mean_metrics.precision /= k;
        row.mean_metrics.recall /= k;
        row.mean_metrics.design /= k;
        row.mean_metrics.blank /= k;
        row.mean_metrics.readability /= k;
        row.mean_metrics.align /= k;
        row.mean_steps /= k;
        row.mean_s /= k;
        row.mean_dqs /= k;
        summary.rows.push_back(std::move(row));
    }
    std::stable_sort(summary.rows.begin(), summary.rows.end(),
                     [](const SummaryRow& a, const SummaryRow& b) {
                         if (a.mean_dqs != b.mean_dqs) return a.mean_dqs > b.mean_dqs;
                         return a.system < b.system;
                     });
    return summary;
}

// ---- writers ----

inline std::string records_to_jsonl(const std::vector<ScoreRecord>& records) {
    std::string out;
    for (const auto& r : records) out += to_json(r).dump() + "\n";
    return out;
}

inline std::vector<ScoreRecord> records_from_jsonl(const std::string& text) {
    std::vector<ScoreRecord> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(score_record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorKind::malformed_input, std::string("bad record line: ") + e.what());
        }
    }
    return out;
}

inline std::string format_fixed(double v, int digits) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

inline std::string summary_to_csv(const Summary& summary) {
    std::string out = "# diagbench " + std::string(version) +
                      " schema=" + std::to_string(schema_version) + "\n";
    out += "system,tasks,precision,recall,design,blank,readability,align,steps,score,dqs\n";
    for (const auto& r : summary.rows) {
        out += r.system + "," + std::to_string(r.tasks);
        for (const double v : {r.mean_metrics.precision, r.mean_metrics.recall,
                               r.mean_metrics.design, r.mean_metrics.blank,
                               r.mean_metrics.readability, r.mean_metrics.align})
            out += "," + format_fixed(v, 4);
        out += "," + format_fixed(r.mean_steps, 2);
        out += "," + format_fixed(r.mean_s, 4);
        out += "," + format_fixed(r.mean_dqs, 4);
        out += "\n";
    }
    return out;
}

inline nlohmann::json summary_to_json(const Summary& summary) {
    nlohmann::json j;
    j["tool_version"] = version;
    j["schema_version"] = schema_version;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : summary.rows) {
        j["rows"].push_back({{"system", r.system},
                             {"tasks", r.tasks},
                             {"precision", r.mean_metrics.precision},
                             {"recall", r.mean_metrics.recall},
                             {"design", r.mean_metrics.design},
                             {"blank", r.mean_metrics.blank},
                             {"readability", r.mean_metrics.readability},
                             {"align", r.mean_metrics.align},
                             {"steps", r.mean_steps},
                             {"score", r.mean_s},
                             {"dqs", r.mean_dqs}});
    }
    return j;
}

inline std::string mc_report_to_csv(const McReport& report, TaskMode mode) {
    std::string out = "# diagbench " + std::string(version) +
                      " schema=" + std::to_string(schema_version) +
                      " R=" + std::to_string(report.repeats) +
                      " seed=" + std::to_string(report.seed) + "\n";
    out += "mode,n,delta,sigma_mean,worst\n";
    for (const auto& row : report.rows) {
        out += std::string(to_string(mode)) + "," + std::to_string(row.n) + "," +
               format_fixed(row.delta, 4) + "," + format_fixed(row.sigma_mean, 4) + "," +
               format_fixed(row.worst, 4) + "\n";
    }
    return out;
}

inline std::string delta_surface_to_csv(const DeltaSurface& surf) {
    std::string out = "# diagbench " + std::string(version) +
                      " schema=" + std::to_string(schema_version) + "\n";
    out += "s,n,delta\n";
    for (std::size_t i = 0; i < surf.s_grid.size(); ++i)
        for (std::size_t j = 0; j < surf.n_grid.size(); ++j)
            out += format_fixed(surf.s_grid[i], 6) + "," + format_fixed(surf.n_grid[j], 6) + "," +
                   format_fixed(surf.delta[i][j], 12) + "\n";
    return out;
}

} // namespace diagbench
