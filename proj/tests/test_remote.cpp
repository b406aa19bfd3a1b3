#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "bar/remote.hpp"

#include "testutil.hpp"

using namespace bar;

namespace {

/// Loopback endpoint speaking the wire protocol; hands each request body to
/// the handler and wraps its return value as {"text": ...}.
class FakeEndpoint {
public:
    using Handler = std::function<std::string(const nlohmann::json&, const httplib::Request&)>;

    explicit FakeEndpoint(Handler handler) : handler_(std::move(handler)) {
        server_.Post("/v1/complete", [this](const httplib::Request& req, httplib::Response& res) {
            auto body = nlohmann::json::parse(req.body);
            nlohmann::json out;
            out["text"] = handler_(body, req);
            res.set_content(out.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~FakeEndpoint() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/complete"; }

private:
    Handler handler_;
    httplib::Server server_;
    int port_;
    std::thread thread_;
};

const std::string kDecomposeText =
    "Decomposed Step:\n"
    "Mine 3 stone with wooden_pickaxe\n"
    "Decomposed Sub Goals:\n"
    "1. Obtain 1 wooden_pickaxe\n"
    "2. Dig down with wooden_pickaxe\n";

} // namespace

TEST_CASE("remote decomposer speaks the prompt protocol end to end", "[remote]") {
    const auto& db = tests::default_db();
    std::string seen_prompt;
    FakeEndpoint endpoint([&](const nlohmann::json& body, const httplib::Request&) {
        REQUIRE(body.contains("prompt"));
        REQUIRE(body.contains("temperature"));
        CHECK(body["temperature"].get<double>() == 0.0);
        seen_prompt = body["prompt"].get<std::string>();
        return kDecomposeText;
    });

    RemoteDecomposer decomposer(RemoteConfig::from_endpoint(endpoint.url()), db);
    auto d = decomposer.decompose(parse_goal("collect 3 stone"), std::nullopt);
    CHECK(render_step(d.step) == "Mine 3 stone with wooden_pickaxe");
    REQUIRE(d.sub_goals.size() == 2);
    CHECK(seen_prompt.find("Goal: obtain 3 stone") != std::string::npos);
    CHECK(seen_prompt.find("System:") != std::string::npos);
}

TEST_CASE("a hint bypasses the network entirely", "[remote]") {
    const auto& db = tests::default_db();
    std::atomic<int> calls{0};
    FakeEndpoint endpoint([&](const nlohmann::json&, const httplib::Request&) {
        ++calls;
        return kDecomposeText;
    });
    RemoteDecomposer decomposer(RemoteConfig::from_endpoint(endpoint.url()), db);
    DecompositionResult hint;
    hint.step = parse_step("Mine 3 stone with wooden_pickaxe");
    auto d = decomposer.decompose(parse_goal("collect 3 stone"), hint);
    CHECK(d == hint);
    CHECK(calls.load() == 0);
}

TEST_CASE("chat-format requests carry role messages", "[remote]") {
    const auto& db = tests::default_db();
    FakeEndpoint endpoint([&](const nlohmann::json& body, const httplib::Request&) {
        REQUIRE(body.contains("messages"));
        REQUIRE(body["messages"].size() == 2);
        CHECK(body["messages"][0]["role"] == "system");
        CHECK(body["messages"][1]["role"] == "user");
        return kDecomposeText;
    });
    RemoteConfig cfg = RemoteConfig::from_endpoint(endpoint.url());
    cfg.chat_format = true;
    RemoteDecomposer decomposer(cfg, db);
    CHECK_NOTHROW(decomposer.decompose(parse_goal("collect 3 stone"), std::nullopt));
}

TEST_CASE("the api key travels as a bearer token", "[remote]") {
    const auto& db = tests::default_db();
    std::string auth;
    FakeEndpoint endpoint([&](const nlohmann::json&, const httplib::Request& req) {
        auth = req.get_header_value("Authorization");
        return kDecomposeText;
    });
    RemoteConfig cfg = RemoteConfig::from_endpoint(endpoint.url());
    cfg.api_key = "sekrit";
    RemoteDecomposer decomposer(cfg, db);
    decomposer.decompose(parse_goal("collect 3 stone"), std::nullopt);
    CHECK(auth == "Bearer sekrit");
}

TEST_CASE("unreachable endpoints raise RemoteUnavailable after retrying", "[remote]") {
    const auto& db = tests::default_db();
    RemoteConfig cfg = RemoteConfig::from_endpoint("http://127.0.0.1:9/v1/complete");
    cfg.timeout_s = 0.2;
    RemoteDecomposer decomposer(cfg, db);
    CHECK_THROWS_AS(decomposer.decompose(parse_goal("collect 3 stone"), std::nullopt),
                    RemoteUnavailable);
}

TEST_CASE("malformed response bodies raise RemoteParseError", "[remote]") {
    const auto& db = tests::default_db();

    SECTION("missing text field") {
        httplib::Server server;
        server.Post("/v1/complete", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"other": 1})", "application/json");
        });
        int port = server.bind_to_any_port("127.0.0.1");
        std::thread t([&] { server.listen_after_bind(); });
        server.wait_until_ready();
        RemoteSession session(
            RemoteConfig::from_endpoint("http://127.0.0.1:" + std::to_string(port) + "/v1/complete"));
        CHECK_THROWS_AS(session.send(format_decompose_prompt("collect 3 stone")),
                        RemoteParseError);
        server.stop();
        t.join();
    }
    SECTION("text that fails the response grammar") {
        FakeEndpoint endpoint([](const nlohmann::json&, const httplib::Request&) {
            return "I would rather chat about the weather.";
        });
        RemoteDecomposer decomposer(RemoteConfig::from_endpoint(endpoint.url()), db);
        CHECK_THROWS_AS(decomposer.decompose(parse_goal("collect 3 stone"), std::nullopt),
                        RemoteParseError);
    }
}

TEST_CASE("remote consistency backends drive scoring and completion", "[remote]") {
    const auto& db = tests::default_db();
    FakeEndpoint endpoint([&](const nlohmann::json& body, const httplib::Request&) -> std::string {
        auto prompt = body["prompt"].get<std::string>();
        if (prompt.find("rate for all the steps") != std::string::npos) {
            return "Rating:\n"
                   "1. Mine 3 log with barehand - 10\n"
                   "2. Craft 9 planks - 8\n"
                   "3. Craft 2 stick - 5\n"
                   "4. Craft 1 crafting_table - 3\n"
                   "5. Craft 1 wooden_pickaxe - 3\n"
                   "6. Mine 3 stone with wooden_pickaxe - 5\n";
        }
        return "Partial Plan:\n"
               "Craft 1 crafting_table\n"
               "Craft 1 wooden_pickaxe\n"
               "Dig down with wooden_pickaxe\n"
               "Mine 3 stone with wooden_pickaxe\n";
    });

    RemoteSession session(RemoteConfig::from_endpoint(endpoint.url()));
    ConsistencyBackends backends = remote_consistency_backends(session, db);

    Plan initial = parse_plan(
        "1. Mine 3 log with barehand\n2. Craft 9 planks\n3. Craft 2 stick\n"
        "4. Craft 1 crafting_table\n5. Craft 1 wooden_pickaxe\n"
        "6. Mine 3 stone with wooden_pickaxe\n");
    ConsistencyConfig cfg;
    Plan repaired = maintain_consistency(initial, "collect 3 stone", cfg, db, backends);
    CHECK(render_plan(repaired) ==
          tests::read_file(tests::golden_path("stone_reference_plan.txt")));
}
