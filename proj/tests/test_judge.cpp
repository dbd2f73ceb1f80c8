#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "diagbench/judge.hpp"
#include "diagbench/raster.hpp"

using namespace diagbench;

namespace {

// Scripted in-memory endpoint; counts requests and records what was sent.
class MockTransport : public JudgeTransport {
public:
    std::vector<std::string> script; // content strings returned in order, cycled
    int requests = 0;
    bool fail = false;
    std::vector<nlohmann::json> seen_bodies;

    JudgeResponse post(const JudgeRequest& req) override {
        ++requests;
        seen_bodies.push_back(req.body);
        JudgeResponse resp;
        if (fail) {
            resp.error = "connection refused";
            return resp;
        }
        const std::string content =
            script.empty() ? "0" : script[static_cast<std::size_t>((requests - 1)) % script.size()];
        nlohmann::json j;
        j["choices"] = nlohmann::json::array(
            {nlohmann::json{{"message", {{"role", "assistant"}, {"content", content}}}}});
        resp.ok = true;
        resp.status = 200;
        resp.body = j.dump();
        return resp;
    }
};

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("diagbench-judge-" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

JudgeConfig make_config(const TempDir& dir, int runs) {
    JudgeConfig cfg;
    cfg.endpoint = "http://judge.test/v1/chat/completions";
    cfg.model_name = "mock-judge";
    cfg.runs = runs;
    cfg.cache_dir = (dir.path / "cache").string();
    return cfg;
}

std::string tiny_png() {
    RasterGrid g;
    g.width = 4;
    g.height = 4;
    g.pixels.assign(16, 0);
    return encode_png(g);
}

} // namespace

TEST_CASE("a response ending in a standalone integer parses to that count") {
    auto mock = std::make_shared<MockTransport>();
    mock->script = {"Module 1: overlaps Module 2.\nModule 3: text spills.\n\n3"};
    TempDir dir;
    JudgeGateway gw(make_config(dir, 1), mock);
    const JudgeVerdict v = gw.judge_design_errors(tiny_png());
    REQUIRE(v.parsed_values.size() == 1);
    CHECK(v.parsed_values[0] == 3.0);
    CHECK(v.mean_value == 3.0);
}

TEST_CASE("counts {2,3,4} average to 3.0") {
    auto mock = std::make_shared<MockTransport>();
    mock->script = {"analysis...\n2", "analysis...\n3", "analysis...\n4"};
    TempDir dir;
    JudgeGateway gw(make_config(dir, 3), mock);
    const JudgeVerdict v = gw.judge_design_errors(tiny_png());
    REQUIRE(v.parsed_values.size() == 3);
    CHECK(v.mean_value == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(mock->requests == 3);
}

TEST_CASE("the second identical call is served from cache with zero requests") {
    auto mock = std::make_shared<MockTransport>();
    mock->script = {"a\n1", "b\n2", "c\n3"};
    TempDir dir;
    JudgeGateway gw(make_config(dir, 3), mock);
    const JudgeVerdict first = gw.judge_design_errors(tiny_png());
    CHECK(mock->requests == 3);
    CHECK_FALSE(first.from_cache);
    const JudgeVerdict second = gw.judge_design_errors(tiny_png());
    CHECK(mock->requests == 3); // not a single extra request
    CHECK(second.from_cache);
    CHECK(second.mean_value == first.mean_value);
    CHECK(second.raw_responses == first.raw_responses);
}

TEST_CASE("with runs=1 scoring the same image twice issues exactly one request") {
    auto mock = std::make_shared<MockTransport>();
    mock->script = {"fine\n2"};
    TempDir dir;
    JudgeGateway gw(make_config(dir, 1), mock);
    (void)gw.judge_design_errors(tiny_png());
    (void)gw.judge_design_errors(tiny_png());
    CHECK(mock->requests == 1);
}

TEST_CASE("a warm cache survives gateway reconstruction") {
    auto mock = std::make_shared<MockTransport>();
    mock->script = {"x\n1"};
    TempDir dir;
    {
        JudgeGateway gw(make_config(dir, 1), mock);
        (void)gw.judge_design_errors(tiny_png());
    }
    CHECK(mock->requests == 1);
    JudgeGateway gw2(make_config(dir, 1), mock);
    const JudgeVerdict v = gw2.judge_design_errors(tiny_png());
    CHECK(mock->requests == 1); // fully offline
    CHECK(v.from_cache);
}

TEST_CASE("distinct images or models never share a cache entry") {
    auto mock = std::make_shared<MockTransport>();
    mock->script = {"y\n5"};
    TempDir dir;
    JudgeGateway gw(make_config(dir, 1), mock);
    (void)gw.judge_design_errors(tiny_png());
    RasterGrid other;
    other.width = 4;
    other.height = 4;
    other.pixels.assign(16, 9);
    (void)gw.judge_design_errors(encode_png(other));
    CHECK(mock->requests == 2);

    JudgeConfig cfg2 = make_config(dir, 1);
    cfg2.model_name = "another-judge";
    JudgeGateway gw2(cfg2, mock);
    (void)gw2.judge_design_errors(tiny_png());
    CHECK(mock->requests == 3);
}

TEST_CASE("the design instruction is sent byte-identical") {
    auto mock = std::make_shared<MockTransport>();
    mock->script = {"ok\n0"};
    TempDir dir;
    JudgeGateway gw(make_config(dir, 1), mock);
    (void)gw.judge_design_errors(tiny_png());
    REQUIRE(mock->seen_bodies.size() == 1);
    const auto& body = mock->seen_bodies[0];
    CHECK(body["model"] == "mock-judge");
    CHECK(body["temperature"] == 0.0);
    const std::string sent = body["messages"][0]["content"][0]["text"].get<std::string>();
    CHECK(sent == design_error_judge_instruction());
    CHECK(sent.size() == 909);
    const std::string image_url =
        body["messages"][0]["content"][1]["image_url"]["url"].get<std::string>();
    CHECK(image_url.rfind("data:image/png;base64,", 0) == 0);
}

TEST_CASE("unparseable runs are discarded; losing all runs is an error") {
    auto mock = std::make_shared<MockTransport>();
    mock->script = {"two errors I think", "looks like\n2", "conclusion: many"};
    TempDir dir;
    JudgeGateway gw(make_config(dir, 3), mock);
    const JudgeVerdict v = gw.judge_design_errors(tiny_png());
    REQUIRE(v.raw_responses.size() == 3);
    REQUIRE(v.parsed_values.size() == 1);
    CHECK(v.mean_value == 2.0);

    auto bad = std::make_shared<MockTransport>();
    bad->script = {"no number here"};
    TempDir dir2;
    JudgeGateway gw2(make_config(dir2, 1), bad);
    try {
        gw2.judge_design_errors(tiny_png());
        FAIL("expected UnparseableVerdict");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unparseable_verdict);
    }
}

TEST_CASE("an unreachable endpoint raises JudgeUnreachable") {
    auto mock = std::make_shared<MockTransport>();
    mock->fail = true;
    TempDir dir;
    JudgeGateway gw(make_config(dir, 1), mock);
    try {
        gw.judge_design_errors(tiny_png());
        FAIL("expected JudgeUnreachable");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::judge_unreachable);
    }
}

TEST_CASE("blank-ratio estimation averages parsed ratios") {
    auto mock = std::make_shared<MockTransport>();
    mock->script = {"reasoning...\n0.26", "reasoning...\n0.27", "reasoning...\n0.28"};
    TempDir dir;
    JudgeGateway gw(make_config(dir, 3), mock);
    const RasterGrid overlaid = burn_grid_overlay(
        [] {
            RasterGrid g;
            g.width = 256;
            g.height = 256;
            g.pixels.assign(256 * 256, 255);
            return g;
        }(),
        128);
    CHECK(gw.judge_blank_ratio(encode_png(overlaid)) == doctest::Approx(0.27).epsilon(1e-12));

    auto zero = std::make_shared<MockTransport>();
    zero->script = {"empty\n0.0"};
    TempDir dir2;
    JudgeGateway gw2(make_config(dir2, 1), zero);
    CHECK(gw2.judge_blank_ratio(encode_png(overlaid)) == 0.0);
}

TEST_CASE("cache entries carry the audit fields") {
    auto mock = std::make_shared<MockTransport>();
    mock->script = {"z\n1"};
    TempDir dir;
    const JudgeConfig cfg = make_config(dir, 1);
    JudgeGateway gw(cfg, mock);
    (void)gw.judge_design_errors(tiny_png());
    int entries = 0;
    for (const auto& f : std::filesystem::directory_iterator(cfg.cache_dir)) {
        ++entries;
        std::ifstream in(f.path());
        nlohmann::json j;
        in >> j;
        CHECK(j["model"] == "mock-judge");
        CHECK(j["responses"].size() == 1);
        CHECK(j.contains("image_sha256"));
        CHECK(j.contains("instruction_sha256"));
        CHECK(j.contains("timestamps"));
        CHECK(f.path().stem().string() == j["request_digest"].get<std::string>());
    }
    CHECK(entries == 1);
}

TEST_CASE("mean is invariant under run order") {
    auto a = std::make_shared<MockTransport>();
    a->script = {"r\n4", "r\n2", "r\n3"};
    auto b = std::make_shared<MockTransport>();
    b->script = {"r\n3", "r\n4", "r\n2"};
    TempDir d1, d2;
    JudgeGateway g1(make_config(d1, 3), a);
    JudgeGateway g2(make_config(d2, 3), b);
    CHECK(g1.judge_design_errors(tiny_png()).mean_value ==
          g2.judge_design_errors(tiny_png()).mean_value);
}

#include "diagbench/http_transport.hpp"

#include <thread>

TEST_CASE("the http transport round-trips against a local server") {
    httplib::Server server;
    std::string seen_auth;
    server.Post("/v1/chat/completions",
                [&](const httplib::Request& req, httplib::Response& res) {
                    seen_auth = req.get_header_value("Authorization");
                    const auto body = nlohmann::json::parse(req.body);
                    REQUIRE(body["model"] == "net-judge");
                    nlohmann::json out;
                    out["choices"] = nlohmann::json::array({nlohmann::json{
                        {"message",
                         {{"role", "assistant"}, {"content", "looks busy\n2"}}}}});
                    res.set_content(out.dump(), "application/json");
                });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    TempDir dir;
    JudgeConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    cfg.model_name = "net-judge";
    cfg.api_key = "sekrit";
    cfg.runs = 1;
    cfg.cache_dir = (dir.path / "cache").string();
    JudgeGateway gw(cfg, std::make_shared<HttpTransport>());
    const JudgeVerdict v = gw.judge_design_errors(tiny_png());
    CHECK(v.mean_value == 2.0);
    CHECK(seen_auth == "Bearer sekrit");

    server.stop();
    listener.join();
}
