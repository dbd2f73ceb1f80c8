#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "diagbench/registry.hpp"

using namespace diagbench;

namespace {

CorpusItem make_item(const std::string& id, TaskMode mode, int difficulty) {
    CorpusItem item;
    item.id = id;
    item.mode = mode;
    item.element_count = difficulty;
    item.description = "task " + id;
    if (mode == TaskMode::TI2I) item.reference_image = "refs/" + id + ".png";
    item.required_text = {"module " + id, "arrow"};
    item.license_url = "https://example.org/license";
    item.added_at = "2025-05-01";
    return item;
}

std::vector<CorpusItem> make_batch(const std::string& prefix, TaskMode mode, int count,
                                   std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(mode == TaskMode::T2I ? 22.4 : 33.2,
                                          mode == TaskMode::T2I ? 9.3 : 14.6);
    std::vector<CorpusItem> out;
    for (int i = 0; i < count; ++i) {
        const int d = std::max(1, static_cast<int>(std::lround(dist(rng))));
        out.push_back(make_item(prefix + std::to_string(i), mode, d));
    }
    return out;
}

// 360 active items (180 per mode) with a frozen master seed.
Registry make_registry() {
    Registry reg;
    auto t2i = make_batch("t2i-", TaskMode::T2I, 180, 1);
    auto ti2i = make_batch("ti2i-", TaskMode::TI2I, 180, 2);
    reg.stage_items(t2i);
    reg.stage_items(ti2i);
    // promote the seeding batch: a fresh registry starts with an active corpus
    Season s = reg.season();
    s.active_pool = s.staging_pool;
    s.staging_pool.clear();
    s.master_seed = 20250601;
    reg.set_season(s);
    return reg;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("diagbench-reg-" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("staging 120 items leaves the active pool untouched") {
    Registry reg = make_registry();
    CHECK(reg.season().active_pool.size() == 360);
    const auto before = reg.season().active_pool;

    auto fresh = make_batch("new-", TaskMode::T2I, 120, 3);
    reg.stage_items(fresh);
    CHECK(reg.season().active_pool == before);
    CHECK(reg.season().staging_pool.size() == 120);
}

TEST_CASE("staging an already-known id is rejected") {
    Registry reg = make_registry();
    try {
        reg.stage_items({make_item("t2i-0", TaskMode::T2I, 10)});
        FAIL("expected DuplicateId");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::duplicate_id);
    }
    // batch-internal duplicates are rejected too
    try {
        reg.stage_items({make_item("x", TaskMode::T2I, 5), make_item("x", TaskMode::T2I, 6)});
        FAIL("expected DuplicateId");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::duplicate_id);
    }
    CHECK(reg.season().staging_pool.empty()); // failed batches leave no residue
}

TEST_CASE("item invariants: reference images follow the mode") {
    CorpusItem bad_ti2i = make_item("b1", TaskMode::TI2I, 5);
    bad_ti2i.reference_image.clear();
    CHECK_THROWS_AS(bad_ti2i.validate(), Error);

    CorpusItem bad_t2i = make_item("b2", TaskMode::T2I, 5);
    bad_t2i.reference_image = "refs/oops.png";
    CHECK_THROWS_AS(bad_t2i.validate(), Error);

    CorpusItem zero = make_item("b3", TaskMode::T2I, 0);
    CHECK_THROWS_AS(zero.validate(), Error);
}

TEST_CASE("precommit draws 12 months of 15+15 cohorts, idempotently") {
    Registry reg = make_registry();
    reg.precommit_cohorts();
    CHECK(reg.season().committed_cohorts.size() == 12);
    for (const auto& [month, cohorts] : reg.season().committed_cohorts) {
        CHECK(cohorts.t2i.item_ids.size() == 15);
        CHECK(cohorts.ti2i.item_ids.size() == 15);
        // within-month uniqueness across both cohorts
        std::set<std::string> all(cohorts.t2i.item_ids.begin(), cohorts.t2i.item_ids.end());
        for (const auto& id : cohorts.ti2i.item_ids) CHECK(all.insert(id).second);
        CHECK(all.size() == 30);
    }

    const std::string bytes_before = to_json(reg.season()).dump();
    reg.precommit_cohorts(); // identical re-run is a no-op
    CHECK(to_json(reg.season()).dump() == bytes_before);

    // an equally-seeded fresh registry commits byte-identical cohorts
    Registry twin = make_registry();
    twin.precommit_cohorts();
    CHECK(to_json(twin.season()).dump() == bytes_before);
}

TEST_CASE("a different master seed is refused over existing cohorts") {
    Registry reg = make_registry();
    reg.precommit_cohorts();
    Season s = reg.season();
    s.master_seed ^= 0xDEAD;
    reg.set_season(s);
    try {
        reg.precommit_cohorts();
        FAIL("expected CommittedCohortsImmutable");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::committed_cohorts_immutable);
    }
}

TEST_CASE("advance_season merges staging into active and preserves the archive") {
    Registry reg = make_registry();
    reg.stage_items(make_batch("new-", TaskMode::T2I, 120, 4));

    try {
        reg.advance_season();
        FAIL("expected SeasonIncomplete");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::season_incomplete);
    }

    reg.precommit_cohorts();
    const std::string old_id = reg.season().season_id;
    const std::uint64_t old_seed = reg.season().master_seed;
    const auto old_committed = to_json(reg.season()).dump();

    const Season next = reg.advance_season();
    CHECK(next.active_pool.size() == 480);
    CHECK(next.staging_pool.empty());
    CHECK(next.committed_cohorts.empty());
    CHECK(next.season_id != old_id);
    CHECK(next.master_seed != old_seed);
    CHECK(next.master_seed == mix_seed(old_seed)); // deterministic derivation

    REQUIRE(reg.archive().size() == 1);
    CHECK(to_json(reg.archive()[0]).dump() == old_committed); // archive readable, unchanged
}

TEST_CASE("advancing with empty staging keeps the active pool identical") {
    Registry reg = make_registry();
    reg.precommit_cohorts();
    const auto before = reg.season().active_pool;
    const Season next = reg.advance_season();
    CHECK(next.active_pool == before);
}

TEST_CASE("the registry round-trips through its on-disk format") {
    TempDir dir;
    Registry reg = make_registry();
    reg.stage_items(make_batch("new-", TaskMode::TI2I, 10, 5));
    reg.precommit_cohorts();
    reg.save(dir.path);

    const Registry back = Registry::load(dir.path);
    CHECK(back.items().size() == reg.items().size());
    CHECK(to_json(back.season()).dump() == to_json(reg.season()).dump());
    CHECK(back.item("t2i-5").element_count == reg.item("t2i-5").element_count);
    CHECK(back.item("ti2i-3").reference_image == reg.item("ti2i-3").reference_image);

    // saving again after advance keeps the archived season on disk
    Registry reg2 = back;
    reg2.advance_season();
    reg2.save(dir.path);
    const Registry again = Registry::load(dir.path);
    CHECK(again.archive().size() == 1);
    CHECK(again.season().active_pool.size() == 370);
}

TEST_CASE("corpus items round-trip through json") {
    const CorpusItem item = make_item("rt-1", TaskMode::TI2I, 33);
    const CorpusItem back = corpus_item_from_json(to_json(item));
    CHECK(back.id == item.id);
    CHECK(back.mode == item.mode);
    CHECK(back.element_count == item.element_count);
    CHECK(back.required_text == item.required_text);
    CHECK(back.reference_image == item.reference_image);
    CHECK(to_json(back).dump() == to_json(item).dump());
}
