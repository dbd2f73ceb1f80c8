#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "diagbench/scoring.hpp"

#include "support/table1.hpp"

using namespace diagbench;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("the weighted base score reproduces the flagship leaderboard row") {
    const MetricVector gemini{0.92, 0.88, 0.53, 0.84, 0.89, 0.91};
    const double s = base_score(gemini, default_weights());
    CHECK(s == doctest::Approx(0.8215).epsilon(1e-12));
    CHECK(std::abs(s - 0.82) < 0.01);

    const double eq = base_score(gemini, equal_weights());
    CHECK(eq == doctest::Approx(4.97 / 6.0).epsilon(1e-9));
    CHECK(std::abs(eq - 0.83) < 0.01);
}

TEST_CASE("all-ones metrics score exactly 1 under any valid profile") {
    const MetricVector ones{1, 1, 1, 1, 1, 1};
    CHECK(base_score(ones, default_weights()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(base_score(ones, equal_weights()) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("invalid weights and out-of-range metrics are rejected") {
    WeightProfile bad = default_weights();
    bad.align = 0.2; // sum 1.1
    CHECK_THROWS_AS(base_score({}, bad), Error);

    WeightProfile negative = default_weights();
    negative.blank = -0.05;
    negative.align = 0.20;
    CHECK_THROWS_AS(base_score({}, negative), Error);

    MetricVector out{1.2, 0, 0, 0, 0, 0};
    CHECK_THROWS_AS(base_score(out, default_weights()), Error);
}

TEST_CASE("count_steps applies the whitelist and status filter") {
    TraceLog log;
    for (int i = 0; i < 5; ++i) log.entries.push_back({"insert_shape", {}, TraceStatus::ok, ""});
    log.entries.push_back({"screenshot", {}, TraceStatus::ok, ""});
    log.entries.push_back({"screenshot", {}, TraceStatus::ok, ""});
    log.entries.push_back({"insert_shape", {}, TraceStatus::error, ""});
    CHECK(count_steps(log) == 5);

    CHECK(count_steps(TraceLog{}) == 0);
}

TEST_CASE("the repo trace fixture matches its hand count") {
    const TraceLog log = parse_trace_jsonl(read_file(std::string(DIAGBENCH_TEST_DATA) +
                                                     "/trace_fixture.jsonl"));
    CHECK(log.entries.size() == 11);
    CHECK(count_steps(log) == 7);
}

TEST_CASE("malformed traces are rejected with MalformedTrace") {
    try {
        parse_trace_jsonl("{\"tool\": \"move\"}\nnot json\n");
        FAIL("expected MalformedTrace");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::malformed_trace);
    }
    try {
        parse_trace_jsonl("{\"args\": {}}\n");
        FAIL("expected MalformedTrace");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::malformed_trace);
    }
}

TEST_CASE("saturation fixed points and the leaderboard mean case") {
    CHECK(saturation(0, 10) == 0.0);
    CHECK(saturation(27.29, 27.29) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(saturation(29.83, 27.29) == doctest::Approx(0.5222).epsilon(1e-4));
    CHECK_THROWS_AS(saturation(5, 0), Error);
    CHECK_THROWS_AS(saturation(-1, 10), Error);
}

TEST_CASE("dqs reproduces the published flagship and baseline rows") {
    const auto& rows = fixtures::t2i_rows();
    const double K = fixtures::block_mean_steps(rows);
    const double r = 1.0 - fixtures::block_mean_score(rows);
    const SeasonParams params = make_season_params(K, r, "t2i-block");
    CHECK(K == doctest::Approx(27.285556).epsilon(1e-6));
    CHECK(r == doctest::Approx(0.262222).epsilon(1e-6));

    CHECK(dqs(0.82, 29.83, params) == doctest::Approx(0.845).epsilon(1e-3));
    CHECK(std::abs(dqs(0.82, 29.83, params) - 0.85) < 0.02);
    CHECK(dqs(0.67, 19.51, params) == doctest::Approx(0.680).epsilon(1e-3));
    CHECK(std::abs(dqs(0.67, 19.51, params) - 0.68) < 0.02);
}

TEST_CASE("dqs at n=0 rewards with the full difficulty bonus") {
    const SeasonParams params = make_season_params(30, 0.3);
    for (double s = 0.0; s <= 1.0; s += 0.13)
        CHECK(dqs(s, 0, params) == doctest::Approx(s * 1.3).epsilon(1e-12));
}

TEST_CASE("scoring refuses unfrozen season parameters") {
    SeasonParams params;
    params.K = 30;
    params.r = 0.3;
    params.frozen = false;
    CHECK_THROWS_AS(dqs(0.5, 10, params), Error);
    try {
        dqs(0.5, 10, params);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unfrozen_season);
    }
}

TEST_CASE("the delta surface equals dqs - s pointwise and hits the break-even") {
    const double K = 30, r = 0.3;
    const SeasonParams params = make_season_params(K, r);

    std::vector<double> s_grid, n_grid;
    for (int i = 1; i <= 50; ++i) s_grid.push_back(i / 50.0);
    for (int j = 0; j < 50; ++j) n_grid.push_back(j * 3.0);
    const DeltaSurface surf = dqs_delta_surface(K, r, s_grid, n_grid);
    for (std::size_t i = 0; i < s_grid.size(); ++i)
        for (std::size_t j = 0; j < n_grid.size(); ++j)
            CHECK(std::abs(surf.delta[i][j] - (dqs(s_grid[i], n_grid[j], params) - s_grid[i])) <=
                  1e-12);

    // Delta(s, 0) = s*r
    CHECK(dqs_delta(0.7, 0, params) == doctest::Approx(0.21).epsilon(1e-12));

    // break-even at n = rK/(1-s), exact zero of the closed form
    for (double s = 0.05; s < 1.0; s += 0.1) {
        const double n_star = r * K / (1.0 - s);
        CHECK(std::abs(dqs_delta(s, n_star, params)) <= 1e-9);
        CHECK(dqs_delta(s, n_star * 0.9, params) > 0.0);
        CHECK(dqs_delta(s, n_star * 1.1, params) < 0.0);
    }

    CHECK_THROWS_AS(dqs_delta_surface(K, r, {}, {1.0}), Error);
}

TEST_CASE("dqs is monotone: decreasing in n, increasing in s, and bounded") {
    const SeasonParams params = make_season_params(27.285555555555556, 0.2622222222222222);
    for (double s = 0.01; s <= 1.0; s += 0.09) {
        double prev = 1e9;
        for (double n = 0; n <= 300; n += 7) {
            const double v = dqs(s, n, params);
            CHECK(v < prev);
            CHECK(v >= 0.0);
            CHECK(v <= s * (1.0 + params.r) + 1e-12);
            prev = v;
        }
    }
    for (double n = 0; n <= 100; n += 10) {
        double prev = -1.0;
        for (double s = 0.0; s <= 1.0; s += 0.05) {
            const double v = dqs(s, n, params);
            CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("dqs approaches s^2 as n grows without bound") {
    const SeasonParams params = make_season_params(27.285555555555556, 0.2622222222222222);
    for (double s = 0.1; s <= 1.0; s += 0.1)
        CHECK(std::abs(dqs(s, 1e6 * params.K, params) - s * s) < 1e-4);
}

TEST_CASE("fit_season_params takes plain means and freezes") {
    std::vector<ScoreRecord> records(3);
    records[0].n = 10;
    records[0].s = 0.5;
    records[1].n = 20;
    records[1].s = 0.7;
    records[2].n = 30;
    records[2].s = 0.9;
    const SeasonParams params = fit_season_params(records);
    CHECK(params.K == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(params.r == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(params.frozen);

    std::vector<ScoreRecord> one(1);
    one[0].n = 12;
    one[0].s = 0.4;
    const SeasonParams single = fit_season_params(one);
    CHECK(single.K == 12.0);
    CHECK(single.r == doctest::Approx(0.6).epsilon(1e-12));

    CHECK_THROWS_AS(fit_season_params({}), Error);
}

TEST_CASE("fitting the leaderboard block matches the column-mean oracle") {
    std::vector<ScoreRecord> records;
    double sum_steps = 0.0, sum_score = 0.0;
    for (const auto& row : fixtures::t2i_rows()) {
        ScoreRecord rec;
        rec.n = row.steps;
        rec.s = row.score;
        records.push_back(rec);
        sum_steps += row.steps;
        sum_score += row.score;
    }
    const SeasonParams params = fit_season_params(records);
    CHECK(params.K == doctest::Approx(sum_steps / 9.0).epsilon(1e-12));
    CHECK(params.r == doctest::Approx(1.0 - sum_score / 9.0).epsilon(1e-12));
    CHECK(std::abs(params.K - 27.29) < 0.01);
    CHECK(std::abs(params.r - 0.262) < 0.001);
}

TEST_CASE("re-scoring with frozen parameters is bit-reproducible") {
    const SeasonParams params = make_season_params(27.285555555555556, 0.2622222222222222);
    const double a = dqs(0.79, 23.43, params);
    const double b = dqs(0.79, 23.43, params);
    CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
}

TEST_CASE("score records round-trip through json") {
    ScoreRecord rec;
    rec.task_id = "task-7";
    rec.system = "sys";
    rec.mode = TaskMode::TI2I;
    rec.metrics = {0.9, 0.8, 0.5, 0.7, 0.85, 0.95};
    rec.n = 23;
    rec.s = 0.8;
    rec.dqs_value = 0.81;
    rec.weights_id = "equal";
    rec.provenance.design = MetricSource::judge;
    rec.provenance.judge_runs_design = 3;
    const ScoreRecord back = score_record_from_json(to_json(rec));
    CHECK(back.task_id == rec.task_id);
    CHECK(back.mode == TaskMode::TI2I);
    CHECK(back.metrics.align == rec.metrics.align);
    CHECK(back.provenance.design == MetricSource::judge);
    CHECK(back.provenance.judge_runs_design == 3);
    CHECK(to_json(back).dump() == to_json(rec).dump());
}
