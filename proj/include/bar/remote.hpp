#pragma once

#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "bar/consistency.hpp"
#include "bar/decomposer.hpp"
#include "bar/domain.hpp"
#include "bar/errors.hpp"
#include "bar/prompts.hpp"

namespace bar {

// ============================================================================
// Remote (LLM) backend. One HTTP POST per call:
//   request  {"prompt": "<text>", "temperature": 0}
//   or, in chat form, {"messages": [{"role","content"}...], "temperature": 0}
//   response {"text": "<completion>"}
// ============================================================================

struct RemoteConfig {
    std::string endpoint;       // e.g. http://127.0.0.1:8018/v1/complete
    double timeout_s{60.0};
    int retries{1};             // extra attempts after the first failure
    double temperature{0.0};
    bool chat_format{false};
    std::string api_key;        // sent as a bearer token when non-empty

    static RemoteConfig from_endpoint(std::string url) {
        RemoteConfig cfg;
        cfg.endpoint = std::move(url);
        if (const char* key = std::getenv("BAR_REMOTE_API_KEY")) cfg.api_key = key;
        return cfg;
    }
};

class RemoteSession {
public:
    explicit RemoteSession(RemoteConfig cfg) : cfg_(std::move(cfg)) {
        auto rest = cfg_.endpoint;
        if (auto scheme = rest.find("://"); scheme != std::string::npos) {
            auto host_start = scheme + 3;
            auto path_start = rest.find('/', host_start);
            if (path_start == std::string::npos) {
                base_ = rest;
                path_ = "/";
            } else {
                base_ = rest.substr(0, path_start);
                path_ = rest.substr(path_start);
            }
        } else {
            throw ConfigError("remote endpoint must be a http(s) URL: " + cfg_.endpoint);
        }
    }

    const RemoteConfig& config() const { return cfg_; }

    /// Sends one prompt; retries transport failures, then throws
    /// RemoteUnavailable. A 2xx body without a "text" field throws
    /// RemoteParseError.
    std::string send(const PromptParts& prompt) const {
        nlohmann::json body;
        if (cfg_.chat_format) {
            body["messages"] = nlohmann::json::array(
                {{{"role", "system"}, {"content", prompt.system}},
                 {{"role", "user"}, {"content", prompt.user}}});
        } else {
            body["prompt"] = prompt.flat();
        }
        body["temperature"] = cfg_.temperature;
        const std::string payload = body.dump();

        std::string last_error;
        for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
            httplib::Client client(base_);
            client.set_connection_timeout(std::chrono::milliseconds(
                static_cast<int>(cfg_.timeout_s * 1000)));
            client.set_read_timeout(std::chrono::milliseconds(
                static_cast<int>(cfg_.timeout_s * 1000)));
            httplib::Headers headers;
            if (!cfg_.api_key.empty())
                headers.emplace("Authorization", "Bearer " + cfg_.api_key);
            auto res = client.Post(path_, headers, payload, "application/json");
            if (!res) {
                last_error = httplib::to_string(res.error());
                continue;
            }
            if (res->status < 200 || res->status >= 300) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception& e) {
                throw RemoteParseError(std::string("response body is not JSON: ") + e.what(),
                                       res->body);
            }
            if (!j.contains("text") || !j["text"].is_string())
                throw RemoteParseError("response JSON has no \"text\" string", res->body);
            return j["text"].get<std::string>();
        }
        throw RemoteUnavailable(cfg_.endpoint + " (" + last_error + ")");
    }

    DecompositionResult decompose_goal(const std::string& goal_text, const RecipeDb* db) const {
        return parse_decompose_response(send(format_decompose_prompt(goal_text)), db);
    }

    std::vector<StepRating> rate_plan(const std::string& goal_text, const Plan& plan) const {
        auto ratings = parse_rating_response(send(format_rate_prompt(goal_text, plan)));
        if (ratings.size() != plan.size())
            throw RemoteParseError("expected " + std::to_string(plan.size()) + " ratings, got " +
                                       std::to_string(ratings.size()),
                                   "");
        return ratings;
    }

    Plan complete_partial(const std::string& goal_text, const Step& start, const Step& end,
                          const RecipeDb* db) const {
        return parse_partial_plan_response(send(format_complete_prompt(goal_text, start, end)), db);
    }

private:
    RemoteConfig cfg_;
    std::string base_;
    std::string path_;
};

/// Decomposer backed by the remote endpoint. A stage-memory hint short-
/// circuits the network call entirely.
class RemoteDecomposer final : public Decomposer {
public:
    RemoteDecomposer(RemoteConfig cfg, const RecipeDb& db)
        : session_(std::move(cfg)), db_(&db) {}

    DecompositionResult decompose(const Goal& goal,
                                  const std::optional<DecompositionResult>& hint) override {
        if (hint) return *hint;
        return session_.decompose_goal(render_goal(goal), db_);
    }

    const RemoteSession& session() const { return session_; }

private:
    RemoteSession session_;
    const RecipeDb* db_;
};

/// Consistency hooks speaking the rating/completion prompts.
inline ConsistencyBackends remote_consistency_backends(const RemoteSession& session,
                                                       const RecipeDb& db) {
    ConsistencyBackends backends;
    backends.remote_scorer = [&session](const std::string& goal_text, const Plan& plan) {
        return session.rate_plan(goal_text, plan);
    };
    backends.remote_completer = [&session, &db](const std::string& goal_text, const Step& start,
                                                const Step& end) {
        return session.complete_partial(goal_text, start, end, &db);
    };
    return backends;
}

} // namespace bar
