#include "semchain/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

namespace semchain {

using nlohmann::json;

Rng round_rng(const GameConfig& config, std::size_t round) {
    return Rng(mix_seed(config.seed, round));
}

void play_machine_round(Game& game, Agent& agent, Rng& rng, const Clock& clock) {
    const std::size_t round = game.state().current_round;
    const auto& agent_id = agent.descriptor().agent_id;
    while (!game.complete() && game.state().current_round == round &&
           game.state().current_turn <= game.config().turns_per_round) {
        const auto obs = game.observe();
        const auto raw = agent.next_guess(obs, rng);
        game.submit_guess(raw, agent_id, clock.now());
    }
    if (game.awaiting_advice()) {
        const auto history = game.round_history(round);
        game.submit_advice(agent.produce_advice(game.config().channel, history, rng), clock.now());
    }
}

GameRun run_game(const EmbeddingTable& table, const GameConfig& config, const AgentEnvironment& env,
                 const Clock& clock) {
    GameRun run;
    AgentEnvironment local = env;
    local.table = &table;
    local.audit = [&run, &config, outer = env.audit](const json& record) {
        json r = record;
        r["game_id"] = config.game_id;
        run.llm_exchanges.push_back(r);
        if (outer) outer(r);
    };

    Game game(table, config, clock.now());
    while (!game.complete()) {
        const std::size_t round = game.state().current_round;
        auto agent = make_agent(config.roster.at(round - 1), local);
        auto rng = round_rng(config, round);
        play_machine_round(game, *agent, rng, clock);
    }
    run.events = game.events();
    return run;
}

std::vector<GameRun> run_games(const EmbeddingTable& table, const std::vector<GameConfig>& games,
                               const AgentEnvironment& env, const Clock& clock, std::size_t jobs) {
    std::vector<GameRun> runs(games.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto worker = [&] {
        for (std::size_t i = next++; i < games.size(); i = next++) {
            try {
                runs[i] = run_game(table, games[i], env, clock);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = games.size();
            }
        }
    };

    const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(games.size(), 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return runs;
}

std::vector<GameRun> run_plan(const EmbeddingTable& table, const ExperimentPlan& plan, const AgentEnvironment& env,
                              const Clock& clock, std::size_t jobs) {
    const auto games = build_games(plan);
    for (const auto& g : games) {
        for (const auto& slot : g.roster) {
            if (slot.is_human()) {
                throw std::invalid_argument(fmt::format("plan '{}' has human rounds; run it through the service",
                                                        plan.plan_id));
            }
        }
    }
    return run_games(table, games, env, clock, jobs);
}

}  // namespace semchain
