#include <doctest.h>

#include <httplib.h>

#include "semchain/event_log.hpp"
#include "semchain/http_api.hpp"
#include "test_support.hpp"

using namespace semchain;
using nlohmann::json;
using semchain::testing::TempDir;

namespace {

struct Fixture {
    TempDir dir;
    std::unique_ptr<Orchestrator> orch;
    std::unique_ptr<ApiServer> server;
    std::unique_ptr<httplib::Client> client;

    Fixture() {
        OrchestratorOptions o;
        o.log_dir = dir.path();
        o.clock = Clock{true};
        o.deterministic_tokens = true;
        AgentEnvironment env;
        env.deterministic = true;
        orch = std::make_unique<Orchestrator>(semchain::testing::synthetic_table(), env, o);
        server = std::make_unique<ApiServer>(*orch);
        const int port = server->start("127.0.0.1", 0);
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
    }

    std::pair<int, json> post(const std::string& path, const json& body) {
        const auto res = client->Post(path, body.dump(), "application/json");
        REQUIRE(res);
        return {res->status, res->body.empty() ? json() : json::parse(res->body)};
    }
    std::pair<int, json> get(const std::string& path, const httplib::Headers& headers = {}) {
        const auto res = client->Get(path, headers);
        REQUIRE(res);
        return {res->status, json::parse(res->body)};
    }
};

json plan_body(const std::string& condition, bool reveal = false) {
    return {{"plan_id", "web"},
            {"targets", {default_targets()[2]}},
            {"games_per_target", 2},
            {"condition", condition},
            {"rounds_per_game", 2},
            {"turns_per_round", 2},
            {"seed", 1},
            {"reveal_max_to_players", reveal},
            {"machine_agents", {{{"agent_id", "forager"}, {"kind", "heuristic_forager"}}}}};
}

}  // namespace

TEST_CASE("health and CORS") {
    Fixture f;
    const auto res = f.client->Get("/healthz");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
    const auto pre = f.client->Options("/guess");
    REQUIRE(pre);
    CHECK(pre->status == 204);
}

TEST_CASE("a human round over HTTP") {
    Fixture f;
    const auto& table = semchain::testing::synthetic_table();
    auto [status, created] = f.post("/experiments", plan_body("human_social"));
    REQUIRE(status == 201);
    CHECK(created.at("plan_id") == "web");
    CHECK(created.at("game_ids").size() == 2);

    auto [js, joined] = f.post("/join", {{"participant_id", "ann"}, {"plan_id", "web"}});
    REQUIRE(js == 200);
    const auto token = joined.at("token").get<std::string>();
    CHECK(joined.at("round") == 1);
    CHECK(joined.at("advice_due") == false);
    CHECK(!joined.contains("max_score"));
    CHECK(joined.at("observation").at("turn") == 1);

    // Token by query, by header.
    CHECK(f.get("/observation?token=" + token).first == 200);
    CHECK(f.get("/observation", {{"X-Session-Token", token}}).first == 200);
    CHECK(f.get("/observation").first == 400);

    auto [g1s, g1] = f.post("/guess", {{"token", token}, {"guess", table.word(300)}, {"turn", 1}});
    REQUIRE(g1s == 200);
    CHECK(g1.at("round_complete") == false);
    CHECK(g1.at("observation").at("turn") == 2);
    CHECK(g1.at("observation").at("own_round_history")[0].at("word") == table.word(300));

    auto [dup, dup_body] = f.post("/guess", {{"token", token}, {"guess", table.word(301)}, {"turn", 1}});
    CHECK(dup == 409);
    CHECK(dup_body.at("code") == "double_submission");

    auto [g2s, g2] = f.post("/guess", {{"token", token}, {"guess", table.word(302)}, {"turn", 2}});
    CHECK(g2s == 200);
    CHECK(g2.at("finished") == true);
    CHECK(g2.at("observation").is_null());

    auto [after, after_body] = f.post("/guess", {{"token", token}, {"guess", "x"}});
    CHECK(after == 401);
    CHECK(after_body.at("code") == "invalid_token");

    auto [ps, progress] = f.get("/progress?plan_id=web");
    CHECK(ps == 200);
    CHECK(progress.at("guesses") == 2);
    CHECK(f.get("/progress").first == 400);
    CHECK(f.get("/progress?plan_id=none").first == 404);

    const auto game_id = progress.at("games")[0].at("game_id").get<std::string>();
    const auto log = f.client->Get("/logs/" + game_id);
    REQUIRE(log);
    CHECK(log->status == 200);
    CHECK(log->get_header_value("Content-Type") == "application/x-ndjson");
    CHECK(log->body == f.orch->game_log(game_id));
    CHECK(f.client->Get("/logs/unknown-game")->status == 404);
}

TEST_CASE("error mapping") {
    Fixture f;
    CHECK(f.post("/experiments", json::parse(R"({"condition": "nonsense"})")).first == 400);
    const auto bad = f.client->Post("/join", "{not json", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(json::parse(bad->body).at("code") == "bad_request");
    CHECK(f.post("/join", {{"participant_id", 5}}).first == 400);
    CHECK(f.post("/guess", {{"token", "nope"}, {"guess", "x"}}).first == 401);
    f.post("/experiments", plan_body("human_social"));
    CHECK(f.post("/experiments", plan_body("human_social")).first == 409);
    auto j = f.post("/join", {{"participant_id", "ann"}}).second;
    CHECK(f.post("/join", {{"participant_id", "ann"}}).second.at("code") == "already_assigned");
    auto [es, eb] = f.post("/guess", {{"token", j.at("token")}, {"guess", "   "}});
    CHECK(es == 400);
    CHECK(eb.at("code") == "rejected");
    CHECK(f.post("/advice", {{"token", j.at("token")}, {"advice", "x"}}).first == 400);
}

TEST_CASE("advice flow and the optional max score") {
    Fixture f;
    auto body = plan_body("human_social", true);
    body["channel"] = "long_advice";
    f.post("/experiments", body);
    const auto j = f.post("/join", {{"participant_id", "ann"}}).second;
    CHECK(j.at("max_score") == 201.69);
    const auto token = j.at("token");
    f.post("/guess", {{"token", token}, {"guess", "first"}});
    const auto r = f.post("/guess", {{"token", token}, {"guess", "second"}}).second;
    CHECK(r.at("advice_due") == true);
    CHECK(f.get("/observation?token=" + token.get<std::string>()).second.at("code") == "advice_due");
    auto [as, ab] = f.post("/advice", {{"token", token}, {"advice", "Think of water."}});
    CHECK(as == 200);
    CHECK(ab.at("ok") == true);
    const auto next = f.post("/join", {{"participant_id", "bob"}}).second;
    if (next.at("round") == 2) {
        CHECK(next.at("observation").at("signal").dump().find("Think of water.") != std::string::npos);
    }
}

TEST_CASE("player payloads never contain the target") {
    Fixture f;
    f.post("/experiments", plan_body("human_social"));
    const auto target = default_targets()[2];
    const auto& table = semchain::testing::synthetic_table();
    for (int i = 0; i < 4; ++i) {
        const auto res = f.client->Post("/join", json{{"participant_id", "p" + std::to_string(i)}}.dump(),
                                        "application/json");
        REQUIRE(res);
        CHECK(res->body.find(target) == std::string::npos);
        const auto token = json::parse(res->body).at("token");
        for (int t = 0; t < 2; ++t) {
            const auto g = f.client->Post(
                "/guess", json{{"token", token}, {"guess", table.word(200 + 2 * i + t)}}.dump(), "application/json");
            REQUIRE(g);
            CHECK(g->body.find(target) == std::string::npos);
            CHECK(g->body.find("201.69") == std::string::npos);
        }
    }
}
