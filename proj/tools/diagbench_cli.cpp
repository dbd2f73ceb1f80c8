// diagbench: evaluation engine and cohort manager for dense vector diagrams.
//
// Subcommands: ingest, score, sample, mc, report, dqs-surface.
// Exit codes are a stable contract: 0 ok, 1 input error, 2 external-service error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "diagbench/diagbench.hpp"
#include "diagbench/http_transport.hpp"

using namespace diagbench;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_input_error = 1;
constexpr int exit_service_error = 2;

struct CliConfig {
    std::string registry_path = "registry";
    std::string cache_dir = ".judge-cache";
    std::string judge_endpoint;
    std::string judge_model;
    std::string judge_api_key;
    std::string weights = "default";
    std::string log_level = "info";
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::io_failure, "cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::io_failure, "cannot write '" + path + "'");
    out << content;
}

// Precedence: flags > config file > environment > defaults.
void apply_env(CliConfig& cfg) {
    if (const char* v = std::getenv("JUDGE_ENDPOINT")) cfg.judge_endpoint = v;
    if (const char* v = std::getenv("JUDGE_API_KEY")) cfg.judge_api_key = v;
    if (const char* v = std::getenv("JUDGE_MODEL")) cfg.judge_model = v;
}

void apply_config_file(CliConfig& cfg, const std::string& path, bool explicit_path) {
    std::ifstream in(path);
    if (!in) {
        if (explicit_path) raise(ErrorKind::io_failure, "cannot read config '" + path + "'");
        return; // default path and no file: nothing to apply
    }
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                raise(ErrorKind::malformed_input,
                      path + ":" + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            const std::size_t b = s.find_first_not_of(" \t\r");
            const std::size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "registry_path") cfg.registry_path = value;
        else if (key == "cache_dir") cfg.cache_dir = value;
        else if (key == "judge_endpoint") cfg.judge_endpoint = value;
        else if (key == "judge_model") cfg.judge_model = value;
        else if (key == "judge_api_key") cfg.judge_api_key = value;
        else if (key == "weights") cfg.weights = value;
        else if (key == "log_level") cfg.log_level = value;
        else
            raise(ErrorKind::malformed_input,
                  path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
}

void print_effective_config(const CliConfig& cfg) {
    std::cout << "# diagbench " << version << " effective config\n"
              << "registry_path = " << cfg.registry_path << "\n"
              << "cache_dir = " << cfg.cache_dir << "\n"
              << "judge_endpoint = " << cfg.judge_endpoint << "\n"
              << "judge_model = " << cfg.judge_model << "\n"
              << "weights = " << cfg.weights << "\n"
              << "log_level = " << cfg.log_level << "\n";
}

CorpusItem load_item_file(const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(read_file(path));
    if (j.contains("document") && !j.contains("element_count")) {
        const VectorDocument doc = document_from_manifest_json(j["document"]);
        j["element_count"] = doc.element_count();
    }
    return corpus_item_from_json(j);
}

VectorDocument load_document(const std::string& path, const std::string& format) {
    const std::string bytes = read_file(path);
    if (format == "svg-subset") return parse_svg_subset(bytes);
    if (format == "manifest-json") return parse_manifest(bytes);
    // auto: pick by extension
    if (path.size() > 4 && path.compare(path.size() - 4, 4, ".svg") == 0)
        return parse_svg_subset(bytes);
    return parse_manifest(bytes);
}

std::vector<CorpusEntry> load_corpus(const CliConfig& cfg, const std::string& corpus_path,
                                     TaskMode mode) {
    std::vector<CorpusEntry> out;
    if (!corpus_path.empty()) {
        const std::string text = read_file(corpus_path);
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t end = text.find('\n', pos);
            if (end == std::string::npos) end = text.size();
            const std::string line = text.substr(pos, end - pos);
            pos = end + 1;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            const CorpusItem item = corpus_item_from_json(nlohmann::json::parse(line));
            if (item.mode == mode) out.push_back({item.id, item.element_count});
        }
    } else {
        const Registry reg = Registry::load(cfg.registry_path);
        out = reg.active_entries(mode);
    }
    if (out.empty()) raise(ErrorKind::corpus_too_small, "no corpus items for the requested mode");
    return out;
}

WeightProfile pick_weights(const std::string& name) {
    if (name == "default") return default_weights();
    if (name == "equal") return equal_weights();
    raise(ErrorKind::malformed_input, "weights must be 'default' or 'equal', got '" + name + "'");
}

int run_ingest(const CliConfig& cfg, const std::vector<std::string>& paths,
               const std::string& mode_override, bool strict) {
    Registry reg;
    const bool have_registry = std::filesystem::exists(
        std::filesystem::path(cfg.registry_path) / "CURRENT");
    if (have_registry) reg = Registry::load(cfg.registry_path);

    int rejected = 0;
    std::vector<CorpusItem> batch;
    for (const auto& path : paths) {
        try {
            CorpusItem item = load_item_file(path);
            if (!mode_override.empty() && to_string(item.mode) != mode_override)
                raise(ErrorKind::invalid_item,
                      "item '" + item.id + "' is " + to_string(item.mode) + ", expected " +
                          mode_override);
            batch.push_back(std::move(item));
        } catch (const Error& e) {
            ++rejected;
            std::cout << "rejected " << path << ": " << e.what() << "\n";
        }
    }
    try {
        reg.stage_items(batch);
    } catch (const Error& e) {
        std::cout << "rejected batch: " << e.what() << "\n";
        return exit_input_error;
    }
    for (const auto& item : batch) std::cout << "staged " << item.id << "\n";
    reg.save(cfg.registry_path);
    std::cout << "staging_pool " << reg.season().staging_pool.size() << " items\n";
    if (rejected > 0 && strict) return exit_input_error;
    return exit_ok;
}

void print_record(const ScoreRecord& rec) {
    std::cout << "precision " << format_fixed(rec.metrics.precision, 4) << "\n"
              << "recall " << format_fixed(rec.metrics.recall, 4) << "\n"
              << "design " << format_fixed(rec.metrics.design, 4) << "\n"
              << "blank " << format_fixed(rec.metrics.blank, 4) << "\n"
              << "readability " << format_fixed(rec.metrics.readability, 4) << "\n"
              << "align " << format_fixed(rec.metrics.align, 4) << "\n"
              << "steps " << format_fixed(rec.n, 2) << "\n"
              << "score " << format_fixed(rec.s, 4) << "\n"
              << "dqs " << format_fixed(rec.dqs_value, 4) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"evaluation engine and cohort manager for dense vector diagrams"};
    app.set_version_flag("--version", std::string("diagbench ") + version);

    CliConfig cfg;
    std::string config_path = "diagbench.conf";
    bool verbose = false;
    std::string flag_registry, flag_cache, flag_endpoint, flag_model, flag_api_key;
    app.add_option("--config", config_path, "key = value config file");
    app.add_flag("--verbose", verbose, "print the effective configuration");
    app.add_option("--registry", flag_registry, "registry directory");
    app.add_option("--cache-dir", flag_cache, "judge response cache directory");
    app.add_option("--judge-endpoint", flag_endpoint, "judge endpoint URL");
    app.add_option("--judge-model", flag_model, "judge model name");
    app.add_option("--judge-api-key", flag_api_key, "judge API key");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate items and add them to staging");
    std::vector<std::string> ingest_paths;
    std::string ingest_mode;
    bool ingest_strict = false;
    ingest->add_option("paths", ingest_paths, "item JSON files")->required();
    ingest->add_option("--mode", ingest_mode, "require T2I or TI2I");
    ingest->add_flag("--strict", ingest_strict, "nonzero exit on any rejection");

    // score
    auto* score = app.add_subcommand("score", "evaluate one document (or re-aggregate metrics)");
    std::string score_item, score_doc, score_trace, score_metrics, score_out;
    std::string score_mode = "deterministic", score_weights, score_format = "auto";
    double score_steps = 0.0, score_k = 30.0, score_r = 0.3;
    score->add_option("--item", score_item, "corpus item JSON");
    score->add_option("--doc", score_doc, "document (manifest JSON or SVG subset)");
    score->add_option("--format", score_format, "manifest-json|svg-subset|auto");
    score->add_option("--trace", score_trace, "trace JSONL (omitted: n=0 with a warning)");
    score->add_option("--metrics", score_metrics,
                      "pre-measured metrics JSON (re-aggregation, bypasses --doc)");
    score->add_option("--steps", score_steps, "step count for --metrics input");
    score->add_option("--mode", score_mode, "deterministic|judge");
    score->add_option("--weights", score_weights, "default|equal");
    score->add_option("--k", score_k, "season K (mean steps)");
    score->add_option("--r", score_r, "season r (1 - mean score)");
    score->add_option("--out", score_out, "write the ScoreRecord JSON here");

    // sample
    auto* sample = app.add_subcommand("sample", "draw one difficulty-balanced cohort");
    std::string sample_mode = "T2I", sample_corpus, sample_out;
    int sample_n = 15;
    std::uint64_t sample_seed = 0;
    sample->add_option("--mode", sample_mode, "T2I|TI2I");
    sample->add_option("--n", sample_n, "cohort size in [5,20]");
    sample->add_option("--seed", sample_seed, "draw seed")->required();
    sample->add_option("--corpus", sample_corpus, "corpus items JSONL (default: registry)");
    sample->add_option("--out", sample_out, "write the cohort JSON here");

    // mc
    auto* mc = app.add_subcommand("mc", "Monte-Carlo validation of the sampler");
    std::string mc_mode = "T2I", mc_corpus, mc_out, mc_nlist = "5,6,10,12,15,20";
    int mc_R = 100;
    std::uint64_t mc_seed = 0;
    mc->add_option("--mode", mc_mode, "T2I|TI2I");
    mc->add_option("--n-list", mc_nlist, "comma-separated cohort sizes");
    mc->add_option("--R", mc_R, "repeats per size");
    mc->add_option("--seed", mc_seed, "base seed")->required();
    mc->add_option("--corpus", mc_corpus, "corpus items JSONL (default: registry)");
    mc->add_option("--out", mc_out, "write the report CSV here");

    // report
    auto* report = app.add_subcommand("report", "summarize ScoreRecords, sorted by DQS");
    std::string report_in, report_out;
    report->add_option("records", report_in, "records JSONL")->required();
    report->add_option("--out", report_out, "write the summary CSV here");

    // dqs-surface
    auto* surface = app.add_subcommand("dqs-surface", "emit the DQS net-change grid");
    double surf_k = 30.0, surf_r = 0.3, surf_n_max = 120.0;
    int surf_s_steps = 50, surf_n_steps = 50;
    std::string surf_out;
    surface->add_option("--K", surf_k, "season K")->required();
    surface->add_option("--r", surf_r, "season r")->required();
    surface->add_option("--out", surf_out, "output CSV")->required();
    surface->add_option("--s-steps", surf_s_steps, "grid points along s");
    surface->add_option("--n-steps", surf_n_steps, "grid points along n");
    surface->add_option("--n-max", surf_n_max, "largest n on the grid");

    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_input_error;
    }

    try {
        apply_env(cfg);
        apply_config_file(cfg, config_path, app.count("--config") > 0);
        if (!flag_registry.empty()) cfg.registry_path = flag_registry;
        if (!flag_cache.empty()) cfg.cache_dir = flag_cache;
        if (!flag_endpoint.empty()) cfg.judge_endpoint = flag_endpoint;
        if (!flag_model.empty()) cfg.judge_model = flag_model;
        if (!flag_api_key.empty()) cfg.judge_api_key = flag_api_key;
        if (score->count("--weights")) cfg.weights = score_weights;
        if (verbose) print_effective_config(cfg);

        if (*ingest) return run_ingest(cfg, ingest_paths, ingest_mode, ingest_strict);

        if (*score) {
            const WeightProfile weights = pick_weights(cfg.weights);
            const SeasonParams season = make_season_params(score_k, score_r, "cli");
            ScoreRecord rec;
            if (!score_metrics.empty()) {
                const nlohmann::json j = nlohmann::json::parse(read_file(score_metrics));
                rec.metrics = {j.at("precision").get<double>(), j.at("recall").get<double>(),
                               j.at("design").get<double>(),    j.at("blank").get<double>(),
                               j.at("readability").get<double>(), j.at("align").get<double>()};
                rec.task_id = j.value("task_id", "reaggregated");
                rec.n = score_steps;
                rec.weights_id = weights.id;
                rec.s = base_score(rec.metrics, weights);
                rec.dqs_value = dqs(rec.s, rec.n, season);
            } else {
                if (score_item.empty() || score_doc.empty())
                    raise(ErrorKind::malformed_input,
                          "score needs --item and --doc (or --metrics)");
                EvalRequest req;
                req.item = load_item_file(score_item);
                req.document = load_document(score_doc, score_format);
                if (score_trace.empty()) {
                    std::cerr << "warning: no trace given, counting n = 0 steps\n";
                } else {
                    req.trace = parse_trace_jsonl(read_file(score_trace));
                }
                req.weights = weights;
                if (score_mode == "judge") {
                    req.mode_flags.perceptual = MetricSource::judge;
                    req.mode_flags.blank = MetricSource::judge;
                } else if (score_mode != "deterministic") {
                    raise(ErrorKind::malformed_input,
                          "--mode must be deterministic or judge");
                }
                std::shared_ptr<JudgeGateway> gateway;
                if (score_mode == "judge") {
                    JudgeConfig jc;
                    jc.endpoint = cfg.judge_endpoint;
                    jc.model_name = cfg.judge_model;
                    jc.api_key = cfg.judge_api_key;
                    jc.cache_dir = cfg.cache_dir;
                    gateway = std::make_shared<JudgeGateway>(jc,
                                                             std::make_shared<HttpTransport>());
                }
                rec = Evaluator(gateway).evaluate(req, season);
            }
            print_record(rec);
            if (!score_out.empty()) write_file(score_out, to_json(rec).dump(2) + "\n");
            return exit_ok;
        }

        if (*sample) {
            const TaskMode mode = task_mode_from(sample_mode);
            const auto corpus = load_corpus(cfg, sample_corpus, mode);
            const CohortResult cohort = sample_cohort(corpus, sample_n, mode, sample_seed);
            nlohmann::json j = to_json(cohort);
            j["schema_version"] = schema_version;
            j["tool_version"] = version;
            j["mode"] = to_string(mode);
            j["n"] = sample_n;
            const std::string text = j.dump(2) + "\n";
            if (!sample_out.empty()) write_file(sample_out, text);
            std::cout << text;
            return exit_ok;
        }

        if (*mc) {
            const TaskMode mode = task_mode_from(mc_mode);
            const auto corpus = load_corpus(cfg, mc_corpus, mode);
            std::vector<int> n_values;
            std::stringstream ss(mc_nlist);
            std::string tok;
            while (std::getline(ss, tok, ',')) n_values.push_back(std::stoi(tok));
            const McReport rep = monte_carlo_validate(corpus, n_values, mode, mc_R, mc_seed);
            const std::string csv = mc_report_to_csv(rep, mode);
            if (!mc_out.empty()) write_file(mc_out, csv);
            std::cout << csv;
            return exit_ok;
        }

        if (*report) {
            const auto records = records_from_jsonl(read_file(report_in));
            if (records.empty()) {
                std::cerr << "error: no records in '" << report_in << "'\n";
                return exit_input_error;
            }
            const Summary summary = summarize(records);
            const std::string csv = summary_to_csv(summary);
            if (!report_out.empty()) write_file(report_out, csv);
            std::cout << csv;
            return exit_ok;
        }

        if (*surface) {
            std::vector<double> s_grid, n_grid;
            for (int i = 1; i <= surf_s_steps; ++i)
                s_grid.push_back(static_cast<double>(i) / surf_s_steps);
            for (int j = 0; j < surf_n_steps; ++j)
                n_grid.push_back(surf_n_max * j / std::max(1, surf_n_steps - 1));
            const DeltaSurface surf = dqs_delta_surface(surf_k, surf_r, s_grid, n_grid);
            write_file(surf_out, delta_surface_to_csv(surf));
            std::cout << "wrote " << surf_out << " (" << s_grid.size() << "x" << n_grid.size()
                      << " grid)\n";
            return exit_ok;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (e.kind() == ErrorKind::judge_unreachable || e.kind() == ErrorKind::unparseable_verdict)
            return exit_service_error;
        return exit_input_error;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input_error;
    }
    return exit_ok;
}
