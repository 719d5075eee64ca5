#include <doctest.h>

#include "semchain/event_log.hpp"
#include "semchain/simulate.hpp"
#include "test_support.hpp"

using namespace semchain;
using nlohmann::json;

namespace {

ExperimentPlan small_plan(Condition c = Condition::ai_only, ChannelKind channel = ChannelKind::best_guess) {
    ExperimentPlan p;
    p.plan_id = "sim";
    p.targets = {default_targets()[0], default_targets()[1]};
    p.games_per_target = 2;
    p.condition = c;
    p.channel = channel;
    p.seed = 5;
    p.machine_agents = {{"forager", HeuristicForager{0.2, 10, 100}}, {"random", RandomGuesser{}}};
    return p;
}

AgentEnvironment env_for(const EmbeddingTable& table) {
    AgentEnvironment env;
    env.table = &table;
    env.deterministic = true;
    return env;
}

}  // namespace

TEST_CASE("a machine game plays every cell once") {
    const auto& table = semchain::testing::synthetic_table();
    const Clock clock{true};
    const auto games = build_games(small_plan());
    const auto run = run_game(table, games[0], env_for(table), clock);
    const auto g = Game::replay(run.events);
    CHECK(g.complete());
    CHECK(g.state().guesses.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(g.state().guesses[i].round == i / 10 + 1);
        CHECK(g.state().guesses[i].turn == i % 10 + 1);
    }
}

TEST_CASE("same seed, same log; parallel equals serial") {
    const auto& table = semchain::testing::synthetic_table();
    const Clock clock{true};
    for (const auto channel : {ChannelKind::best_guess, ChannelKind::full_history, ChannelKind::short_advice,
                               ChannelKind::long_advice}) {
        const auto plan = small_plan(Condition::hybrid_ai, channel);
        const auto serial = run_plan(table, plan, env_for(table), clock, 1);
        const auto again = run_plan(table, plan, env_for(table), clock, 1);
        const auto parallel = run_plan(table, plan, env_for(table), clock, 3);
        REQUIRE(serial.size() == 4);
        for (std::size_t i = 0; i < serial.size(); ++i) {
            const auto text = serialize_events(serial[i].events);
            CHECK(text == serialize_events(again[i].events));
            CHECK(text == serialize_events(parallel[i].events));
        }
    }
}

TEST_CASE("a round replays from its own RNG stream") {
    const auto& table = semchain::testing::synthetic_table();
    const Clock clock{true};
    const auto config = build_games(small_plan())[0];
    const auto full = Game::replay(run_game(table, config, env_for(table), clock).events);

    // Resume after round 4 from the log prefix and play round 5 alone.
    const auto events = run_game(table, config, env_for(table), clock).events;
    std::vector<json> prefix;
    for (const auto& e : events) {
        prefix.push_back(e);
        if (e.at("type") == "round_completed" && e.at("round") == 4) break;
    }
    auto g = Game::replay(prefix, &table);
    auto env = env_for(table);
    auto agent = make_agent(config.roster[4], env);
    auto rng = round_rng(config, 5);
    play_machine_round(g, *agent, rng, clock);
    for (std::size_t i = 0; i < g.state().guesses.size(); ++i) {
        CHECK(g.state().guesses[i] == full.state().guesses[i]);
    }
}

TEST_CASE("plans with human rounds are refused") {
    const auto& table = semchain::testing::synthetic_table();
    CHECK_THROWS_AS(run_plan(table, small_plan(Condition::hybrid), env_for(table), Clock{true}),
                    std::invalid_argument);
}

TEST_CASE("advice channels record advice between rounds") {
    const auto& table = semchain::testing::synthetic_table();
    const auto config = build_games(small_plan(Condition::ai_only, ChannelKind::short_advice))[0];
    const auto run = run_game(table, config, env_for(table), Clock{true});
    std::size_t advice = 0;
    for (const auto& e : run.events) advice += e.at("type") == "advice_submitted" ? 1 : 0;
    CHECK(advice == 9);
}
