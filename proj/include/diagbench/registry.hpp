#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "diagbench/error.hpp"
#include "diagbench/sampler.hpp"
#include "diagbench/scoring.hpp"
#include "diagbench/version.hpp"

namespace diagbench {

// Persistent corpus + seasonal lifecycle. New items wait in a staging pool and
// only join the active pool when the season advances; monthly cohorts are
// pre-committed from a master seed and immutable once written.

struct CorpusItem {
    std::string id;
    TaskMode mode = TaskMode::T2I;
    int element_count = 1; // difficulty d_i
    std::string description;
    std::string reference_image; // required for TI2I, forbidden for T2I
    std::set<std::string> required_text; // P
    std::string license_url;
    std::string added_at; // ISO date, by the ingester

    void validate() const {
        if (id.empty()) raise(ErrorKind::invalid_item, "item without id");
        if (element_count < 1)
            raise(ErrorKind::invalid_item, "item '" + id + "' needs element_count >= 1");
        if (mode == TaskMode::TI2I && reference_image.empty())
            raise(ErrorKind::invalid_item, "TI2I item '" + id + "' needs a reference image");
        if (mode == TaskMode::T2I && !reference_image.empty())
            raise(ErrorKind::invalid_item, "T2I item '" + id + "' must not carry a reference image");
    }
};

inline nlohmann::json to_json(const CorpusItem& it) {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["id"] = it.id;
    j["mode"] = to_string(it.mode);
    j["element_count"] = it.element_count;
    j["description"] = it.description;
    if (!it.reference_image.empty()) j["reference_image"] = it.reference_image;
    j["required_text"] = it.required_text;
    j["license_url"] = it.license_url;
    if (!it.added_at.empty()) j["added_at"] = it.added_at;
    return j;
}

inline CorpusItem corpus_item_from_json(const nlohmann::json& j) {
    CorpusItem it;
    it.id = j.value("id", "");
    it.mode = task_mode_from(j.value("mode", "T2I"));
    it.element_count = j.value("element_count", 0);
    it.description = j.value("description", "");
    it.reference_image = j.value("reference_image", "");
    if (j.contains("required_text"))
        for (const auto& s : j["required_text"]) it.required_text.insert(s.get<std::string>());
    it.license_url = j.value("license_url", "");
    it.added_at = j.value("added_at", "");
    it.validate();
    return it;
}

struct MonthCohorts {
    CohortResult t2i;
    CohortResult ti2i;
};

struct Season {
    std::string season_id = "season-001";
    std::vector<std::string> active_pool;
    std::vector<std::string> staging_pool;
    std::map<std::string, MonthCohorts> committed_cohorts; // "M01".."M12"
    std::optional<SeasonParams> params;
    std::uint64_t master_seed = 0;
    int declared_months = 12;
};

inline nlohmann::json to_json(const CohortResult& c) {
    nlohmann::json j;
    j["item_ids"] = c.item_ids;
    j["mu_S"] = c.mu_S;
    j["sigma_S"] = c.sigma_S;
    j["J"] = c.J;
    j["converged"] = c.converged;
    j["seed_used"] = c.seed_used;
    return j;
}

inline CohortResult cohort_from_json(const nlohmann::json& j) {
    CohortResult c;
    for (const auto& s : j.at("item_ids")) c.item_ids.push_back(s.get<std::string>());
    c.mu_S = j.value("mu_S", 0.0);
    c.sigma_S = j.value("sigma_S", 0.0);
    c.J = j.value("J", 0.0);
    c.converged = j.value("converged", false);
    c.seed_used = j.value("seed_used", std::uint64_t{0});
    return c;
}

inline nlohmann::json to_json(const Season& s) {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["season_id"] = s.season_id;
    j["active_pool"] = s.active_pool;
    j["staging_pool"] = s.staging_pool;
    j["master_seed"] = s.master_seed;
    j["declared_months"] = s.declared_months;
    j["committed_cohorts"] = nlohmann::json::object();
    for (const auto& [month, cohorts] : s.committed_cohorts)
        j["committed_cohorts"][month] = {{"T2I", to_json(cohorts.t2i)},
                                         {"TI2I", to_json(cohorts.ti2i)}};
    if (s.params && s.params->frozen)
        j["params"] = {{"K", s.params->K}, {"r", s.params->r}, {"season_id", s.params->season_id}};
    return j;
}

inline Season season_from_json(const nlohmann::json& j) {
    Season s;
    s.season_id = j.value("season_id", "season-001");
    for (const auto& v : j.value("active_pool", nlohmann::json::array()))
        s.active_pool.push_back(v.get<std::string>());
    for (const auto& v : j.value("staging_pool", nlohmann::json::array()))
        s.staging_pool.push_back(v.get<std::string>());
    s.master_seed = j.value("master_seed", std::uint64_t{0});
    s.declared_months = j.value("declared_months", 12);
    if (j.contains("committed_cohorts"))
        for (const auto& [month, c] : j["committed_cohorts"].items())
            s.committed_cohorts[month] = {cohort_from_json(c.at("T2I")),
                                          cohort_from_json(c.at("TI2I"))};
    if (j.contains("params"))
        s.params = make_season_params(j["params"]["K"].get<double>(),
                                      j["params"]["r"].get<double>(),
                                      j["params"].value("season_id", s.season_id));
    return s;
}

// In-memory registry: the item ledger plus the current season. Disk layout is
// items.jsonl (append-only) + seasons/<id>.json + CURRENT, written via
// atomic rename so readers never observe partial state.
class Registry {
public:
    Registry() = default;

    const std::map<std::string, CorpusItem>& items() const { return items_; }
    const Season& season() const { return season_; }
    Season& season_mutable() { return season_; }

    void set_season(Season s) { season_ = std::move(s); }

    bool has_item(const std::string& id) const { return items_.count(id) > 0; }

    const CorpusItem& item(const std::string& id) const {
        const auto it = items_.find(id);
        if (it == items_.end()) raise(ErrorKind::invalid_item, "unknown item '" + id + "'");
        return it->second;
    }

    // Appends to the staging pool only; the active pool is untouched. Ids must
    // be new to the whole registry.
    void stage_items(const std::vector<CorpusItem>& batch) {
        for (const auto& it : batch) {
            it.validate();
            if (items_.count(it.id))
                raise(ErrorKind::duplicate_id, "item '" + it.id + "' already registered");
        }
        std::set<std::string> batch_ids;
        for (const auto& it : batch)
            if (!batch_ids.insert(it.id).second)
                raise(ErrorKind::duplicate_id, "item '" + it.id + "' repeated in batch");
        for (const auto& it : batch) {
            items_[it.id] = it;
            season_.staging_pool.push_back(it.id);
        }
    }

    std::vector<CorpusEntry> active_entries(TaskMode mode) const {
        std::vector<CorpusEntry> out;
        for (const auto& id : season_.active_pool) {
            const auto& it = item(id);
            if (it.mode == mode) out.push_back({it.id, it.element_count});
        }
        return out;
    }

    // Pre-draws every monthly cohort from month-derived seeds. Idempotent for a
    // fixed master seed; diverging re-commits are refused.
    void precommit_cohorts(int months = 12, int n_per_month = 30, int t2i_split = 15) {
        const int ti2i_split = n_per_month - t2i_split;
        const auto t2i_corpus = active_entries(TaskMode::T2I);
        const auto ti2i_corpus = active_entries(TaskMode::TI2I);
        if (static_cast<int>(t2i_corpus.size()) < t2i_split ||
            static_cast<int>(ti2i_corpus.size()) < ti2i_split)
            raise(ErrorKind::insufficient_corpus, "active pools cannot cover the monthly split");

        std::map<std::string, MonthCohorts> fresh;
        for (int m = 1; m <= months; ++m) {
            char key[8];
            std::snprintf(key, sizeof(key), "M%02d", m);
            MonthCohorts mc;
            mc.t2i = sample_cohort(t2i_corpus, t2i_split, TaskMode::T2I,
                                   derive_seed(season_.master_seed, static_cast<std::uint64_t>(m) * 2));
            mc.ti2i = sample_cohort(ti2i_corpus, ti2i_split, TaskMode::TI2I,
                                    derive_seed(season_.master_seed,
                                                static_cast<std::uint64_t>(m) * 2 + 1));
            fresh[key] = std::move(mc);
        }

        if (!season_.committed_cohorts.empty()) {
            auto cohorts_json = [](const std::map<std::string, MonthCohorts>& m) {
                nlohmann::json j = nlohmann::json::object();
                for (const auto& [month, c] : m)
                    j[month] = {{"T2I", to_json(c.t2i)}, {"TI2I", to_json(c.ti2i)}};
                return j.dump();
            };
            if (cohorts_json(fresh) != cohorts_json(season_.committed_cohorts))
                raise(ErrorKind::committed_cohorts_immutable,
                      "committed cohorts exist and differ from the requested draw");
            return; // identical re-run: nothing to do
        }
        season_.declared_months = months;
        season_.committed_cohorts = std::move(fresh);
    }

    // Merges staging into active, empties staging, derives the next master
    // seed. The only operation that moves items between pools.
    Season advance_season() {
        for (int m = 1; m <= season_.declared_months; ++m) {
            char key[8];
            std::snprintf(key, sizeof(key), "M%02d", m);
            if (!season_.committed_cohorts.count(key))
                raise(ErrorKind::season_incomplete,
                      std::string("season is missing committed cohorts for ") + key);
        }
        Season next;
        next.season_id = next_season_id(season_.season_id);
        next.active_pool = season_.active_pool;
        next.active_pool.insert(next.active_pool.end(), season_.staging_pool.begin(),
                                season_.staging_pool.end());
        next.master_seed = mix_seed(season_.master_seed);
        next.declared_months = season_.declared_months;
        archived_.push_back(season_);
        season_ = next;
        return season_;
    }

    const std::vector<Season>& archive() const { return archived_; }

    // ---- persistence ----

    void save(const std::filesystem::path& dir) const {
        namespace fs = std::filesystem;
        fs::create_directories(dir / "seasons");
        {
            std::string lines;
            for (const auto& [id, it] : items_) lines += to_json(it).dump() + "\n";
            atomic_write(dir / "items.jsonl", lines);
        }
        for (const auto& s : archived_)
            atomic_write(dir / "seasons" / (s.season_id + ".json"), to_json(s).dump(2) + "\n");
        atomic_write(dir / "seasons" / (season_.season_id + ".json"),
                     to_json(season_).dump(2) + "\n");
        atomic_write(dir / "CURRENT", season_.season_id + "\n");
    }

    static Registry load(const std::filesystem::path& dir) {
        namespace fs = std::filesystem;
        Registry reg;
        std::ifstream items_in(dir / "items.jsonl");
        if (!items_in) raise(ErrorKind::io_failure, "cannot read " + (dir / "items.jsonl").string());
        std::string line;
        while (std::getline(items_in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            const CorpusItem it = corpus_item_from_json(nlohmann::json::parse(line));
            reg.items_[it.id] = it;
        }
        std::ifstream cur(dir / "CURRENT");
        std::string season_id;
        if (!cur || !std::getline(cur, season_id))
            raise(ErrorKind::io_failure, "cannot read CURRENT season pointer");
        std::ifstream sin(dir / "seasons" / (season_id + ".json"));
        if (!sin) raise(ErrorKind::io_failure, "cannot read season '" + season_id + "'");
        nlohmann::json j;
        sin >> j;
        reg.season_ = season_from_json(j);
        for (const auto& entry : fs::directory_iterator(dir / "seasons")) {
            if (entry.path().extension() != ".json") continue;
            if (entry.path().stem() == season_id) continue;
            std::ifstream ain(entry.path());
            nlohmann::json aj;
            ain >> aj;
            reg.archived_.push_back(season_from_json(aj));
        }
        return reg;
    }

private:
    static std::string next_season_id(const std::string& id) {
        // season-007 -> season-008; anything else gets a .next suffix
        std::size_t pos = id.size();
        while (pos > 0 && std::isdigit(static_cast<unsigned char>(id[pos - 1]))) --pos;
        if (pos == id.size()) return id + ".next";
        const int num = std::stoi(id.substr(pos));
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%0*d", static_cast<int>(id.size() - pos), num + 1);
        return id.substr(0, pos) + buf;
    }

    static void atomic_write(const std::filesystem::path& path, const std::string& content) {
        namespace fs = std::filesystem;
        const fs::path tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) raise(ErrorKind::io_failure, "cannot write " + tmp.string());
            out << content;
        }
        fs::rename(tmp, path);
    }

    std::map<std::string, CorpusItem> items_;
    Season season_;
    std::vector<Season> archived_;
};

} // namespace diagbench
