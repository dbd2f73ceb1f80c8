#pragma once

#include <string>

#include <httplib.h>

#include "diagbench/judge.hpp"

namespace diagbench {

// Plain-HTTP chat-completions transport. Split from judge.hpp so tests that
// mock the transport never pull in the HTTP stack.
class HttpTransport : public JudgeTransport {
public:
    JudgeResponse post(const JudgeRequest& req) override {
        JudgeResponse out;
        std::string host;
        std::string path = "/";
        if (!split_endpoint(req.endpoint, host, path)) {
            out.error = "bad endpoint '" + req.endpoint + "'";
            return out;
        }
        httplib::Client client(host);
        client.set_connection_timeout(static_cast<int>(req.timeout_seconds));
        client.set_read_timeout(static_cast<int>(req.timeout_seconds));
        httplib::Headers headers;
        if (!req.api_key.empty()) headers.emplace("Authorization", "Bearer " + req.api_key);
        const auto res = client.Post(path, headers, req.body.dump(), "application/json");
        if (!res) {
            out.error = "connection failed";
            return out;
        }
        out.status = res->status;
        out.body = res->body;
        out.ok = res->status >= 200 && res->status < 300;
        if (!out.ok) out.error = "HTTP " + std::to_string(res->status);
        return out;
    }

private:
    static bool split_endpoint(const std::string& endpoint, std::string& host, std::string& path) {
        std::string rest = endpoint;
        const std::string http = "http://";
        if (rest.rfind(http, 0) == 0) rest = rest.substr(http.size());
        else if (rest.rfind("https://", 0) == 0) return false; // TLS not built in
        if (rest.empty()) return false;
        const std::size_t slash = rest.find('/');
        host = "http://" + (slash == std::string::npos ? rest : rest.substr(0, slash));
        path = (slash == std::string::npos) ? "/" : rest.substr(slash);
        return true;
    }
};

} // namespace diagbench
