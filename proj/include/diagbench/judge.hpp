#pragma once

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "diagbench/digest.hpp"
#include "diagbench/error.hpp"
#include "diagbench/raster.hpp"
#include "diagbench/version.hpp"

namespace diagbench {

// Uniform client for external vision-language judges. Design-error counting
// and blank-ratio estimation go through the same request shape; responses are
// cached on disk so a warm corpus scores fully offline and bit-reproducibly.

struct JudgeConfig {
    std::string endpoint;       // e.g. http://host:port/v1/chat/completions
    std::string model_name;
    std::string api_key;
    double temperature = 0.0;   // judges run greedy
    int runs = 3;               // repeat count; the mean verdict is used
    std::string cache_dir = ".judge-cache";
    double timeout_seconds = 60.0;

    void validate() const {
        if (runs < 1) raise(ErrorKind::out_of_range, "runs must be >= 1");
        if (temperature < 0.0) raise(ErrorKind::out_of_range, "temperature must be >= 0");
    }
};

struct JudgeVerdict {
    std::vector<std::string> raw_responses;
    std::vector<double> parsed_values;
    double mean_value = 0.0;
    bool from_cache = false;
};

// Instruction sent verbatim for design-error counting.
inline const std::string& design_error_judge_instruction() {
    static const std::string text =
        "You need to observe this picture carefully. This is a scientific research drawing. "
        "How many unreasonable aspects do you think there are in this image? Unreasonable "
        "aspects refer to: position conflicts or mismatches of modules; text content and "
        "module size conflicts resulting in text going out of range or unexpected line "
        "breaks; redundant or repetitive designs in the image. For each unreasonable aspect "
        "you find, you need to provide some analysis, in the format like: Module 1: The "
        "position conflicts with Module 2, causing overlap... When finding problems, you "
        "must be strict and try to find as many design errors as possible. But at the same "
        "time, each problem must be well - founded. At the end, you need to output only one "
        "number representing the number of errors. Make a line break from the previous "
        "content. Write only one integer on a separate line at the end to represent the "
        "total number of errors.";
    return text;
}

// Grid-overlaid blank estimation instruction (the grid is burned into the image).
inline const std::string& blank_ratio_judge_instruction() {
    static const std::string text =
        "This image shows a scientific research drawing with a regular grid overlaid on it. "
        "Consider only the region of the grid that contains the drawn content, ignoring the "
        "empty outer margins. Estimate the fraction of grid cells inside that content region "
        "that are blank, meaning they contain large, meaningless gaps rather than drawn "
        "elements or normal spacing within a module. Explain your reasoning briefly. Write "
        "only one number between 0 and 1 on a separate line at the end to represent the "
        "blank fraction.";
    return text;
}

struct JudgeRequest {
    std::string endpoint;
    std::string api_key;
    nlohmann::json body;
    double timeout_seconds = 60.0;
};

struct JudgeResponse {
    bool ok = false;
    int status = 0;
    std::string body;
    std::string error;
};

// Transport boundary: vendor quirks (auth headers, payload packing) live behind
// this interface; tests substitute an in-memory mock.
class JudgeTransport {
public:
    virtual ~JudgeTransport() = default;
    virtual JudgeResponse post(const JudgeRequest& req) = 0;
};

namespace judge_detail {

// Extracts the final standalone numeric line ("Write only one integer on a
// separate line"). Returns nullopt when the trailing line is not a number.
inline std::optional<double> parse_final_number(const std::string& response) {
    std::size_t end = response.size();
    while (end > 0) {
        std::size_t begin = response.find_last_of('\n', end - 1);
        begin = (begin == std::string::npos) ? 0 : begin + 1;
        std::string line = response.substr(begin, end - begin);
        // trim
        std::size_t a = 0, b = line.size();
        while (a < b && std::isspace(static_cast<unsigned char>(line[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(line[b - 1]))) --b;
        line = line.substr(a, b - a);
        if (!line.empty()) {
            char* endp = nullptr;
            const double v = std::strtod(line.c_str(), &endp);
            if (endp != line.c_str() && *endp == '\0' && v >= 0.0) return v;
            return std::nullopt;
        }
        if (begin == 0) break;
        end = begin - 1;
    }
    return std::nullopt;
}

inline std::string extract_content(const std::string& http_body) {
    try {
        const auto j = nlohmann::json::parse(http_body);
        if (j.contains("choices") && !j["choices"].empty()) {
            const auto& msg = j["choices"][0]["message"]["content"];
            if (msg.is_string()) return msg.get<std::string>();
        }
    } catch (const nlohmann::json::exception&) {
        // fall through: treat the raw body as the content
    }
    return http_body;
}

inline std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace judge_detail

class JudgeGateway {
public:
    JudgeGateway(JudgeConfig cfg, std::shared_ptr<JudgeTransport> transport)
        : cfg_(std::move(cfg)), transport_(std::move(transport)) {
        cfg_.validate();
    }

    const JudgeConfig& config() const { return cfg_; }

    // Design-error counting: the instruction goes out verbatim with the PNG,
    // cfg.runs times; the mean of the parsed counts is the verdict.
    JudgeVerdict judge_design_errors(const std::string& png_bytes) {
        return run_judged(png_bytes, design_error_judge_instruction(), ParseAs::count);
    }

    // Blank-ratio estimation over a grid-overlaid PNG; mean of parsed ratios.
    JudgeVerdict judge_blank_verdict(const std::string& png_with_grid_bytes) {
        return run_judged(png_with_grid_bytes, blank_ratio_judge_instruction(), ParseAs::ratio);
    }

    double judge_blank_ratio(const std::string& png_with_grid_bytes) {
        return judge_blank_verdict(png_with_grid_bytes).mean_value;
    }

private:
    enum class ParseAs { count, ratio };

    // Cache key: (sha256(image), model, instruction). One file per key holding
    // every raw response, replaced atomically.
    std::string cache_key(const std::string& image_bytes, const std::string& instruction) const {
        return sha256_hex(sha256_hex(image_bytes) + "\x1f" + cfg_.model_name + "\x1f" + instruction);
    }

    std::filesystem::path cache_path(const std::string& key) const {
        return std::filesystem::path(cfg_.cache_dir) / (key + ".json");
    }

    std::optional<std::vector<std::string>> load_cached(const std::string& key) const {
        std::ifstream in(cache_path(key), std::ios::binary);
        if (!in) return std::nullopt;
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception&) {
            return std::nullopt; // damaged entry: treated as a miss
        }
        if (!j.contains("responses") || !j["responses"].is_array()) return std::nullopt;
        std::vector<std::string> responses;
        for (const auto& r : j["responses"]) responses.push_back(r.get<std::string>());
        if (static_cast<int>(responses.size()) < cfg_.runs) return std::nullopt;
        return responses;
    }

    void store_cached(const std::string& key, const std::string& image_sha,
                      const std::string& instruction,
                      const std::vector<std::string>& responses) const {
        namespace fs = std::filesystem;
        fs::create_directories(cfg_.cache_dir);
        nlohmann::json j;
        j["schema_version"] = schema_version;
        j["image_sha256"] = image_sha;
        j["model"] = cfg_.model_name;
        j["instruction_sha256"] = sha256_hex(instruction);
        j["request_digest"] = key;
        j["responses"] = responses;
        j["timestamps"] = nlohmann::json::array();
        for (std::size_t i = 0; i < responses.size(); ++i)
            j["timestamps"].push_back(judge_detail::iso8601_now());
        const fs::path final_path = cache_path(key);
        const fs::path tmp = final_path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << j.dump(2) << '\n';
        }
        fs::rename(tmp, final_path); // atomic replace
    }

    nlohmann::json build_body(const std::string& png_bytes, const std::string& instruction) const {
        nlohmann::json body;
        body["model"] = cfg_.model_name;
        body["temperature"] = cfg_.temperature;
        body["messages"] = nlohmann::json::array({nlohmann::json{
            {"role", "user"},
            {"content",
             nlohmann::json::array(
                 {nlohmann::json{{"type", "text"}, {"text", instruction}},
                  nlohmann::json{{"type", "image_url"},
                                 {"image_url",
                                  {{"url", "data:image/png;base64," +
                                               base64_encode(png_bytes)}}}}})}}});
        return body;
    }

    JudgeVerdict run_judged(const std::string& image_bytes, const std::string& instruction,
                            ParseAs parse_as) {
        const std::string key = cache_key(image_bytes, instruction);
        std::lock_guard<std::mutex> lk(key_mutex(key)); // serialize duplicate in-flight keys

        JudgeVerdict verdict;
        if (auto cached = load_cached(key)) {
            verdict.raw_responses = std::move(*cached);
            verdict.from_cache = true;
        } else {
            for (int run = 0; run < cfg_.runs; ++run) {
                JudgeRequest req;
                req.endpoint = cfg_.endpoint;
                req.api_key = cfg_.api_key;
                req.timeout_seconds = cfg_.timeout_seconds;
                req.body = build_body(image_bytes, instruction);
                const JudgeResponse resp = transport_->post(req);
                if (!resp.ok)
                    raise(ErrorKind::judge_unreachable,
                          "judge endpoint failed: " + (resp.error.empty()
                                                           ? "HTTP " + std::to_string(resp.status)
                                                           : resp.error));
                verdict.raw_responses.push_back(judge_detail::extract_content(resp.body));
            }
            store_cached(key, sha256_hex(image_bytes), instruction, verdict.raw_responses);
        }

        for (const auto& raw : verdict.raw_responses) {
            const auto v = judge_detail::parse_final_number(raw);
            if (!v) continue; // discarded, not retried: run counts stay auditable
            if (parse_as == ParseAs::count && *v != std::floor(*v)) continue;
            if (parse_as == ParseAs::ratio && *v > 1.0) continue;
            verdict.parsed_values.push_back(*v);
        }
        if (verdict.parsed_values.empty())
            raise(ErrorKind::unparseable_verdict, "no judge run produced a final numeric line");
        double sum = 0.0;
        for (const double v : verdict.parsed_values) sum += v;
        verdict.mean_value = sum / static_cast<double>(verdict.parsed_values.size());
        return verdict;
    }

    std::mutex& key_mutex(const std::string& key) {
        std::lock_guard<std::mutex> lk(registry_mutex_);
        return key_mutexes_[key];
    }

    JudgeConfig cfg_;
    std::shared_ptr<JudgeTransport> transport_;
    std::mutex registry_mutex_;
    std::map<std::string, std::mutex> key_mutexes_;
};

} // namespace diagbench
