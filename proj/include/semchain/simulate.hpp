#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "semchain/agents.hpp"
#include "semchain/game.hpp"
#include "semchain/plan.hpp"
#include "semchain/timestamp.hpp"

namespace semchain {

// Per-round RNG stream: the same (game seed, round) always draws the same
// sequence, independent of scheduling.
Rng round_rng(const GameConfig& config, std::size_t round);

// Plays the current round with `agent` until its turns are used up, then
// submits advice on advice channels when another round follows.
void play_machine_round(Game& game, Agent& agent, Rng& rng, const Clock& clock);

struct GameRun {
    std::vector<nlohmann::json> events;
    std::vector<nlohmann::json> llm_exchanges;
};

// Runs an all-machine game to completion.
GameRun run_game(const EmbeddingTable& table, const GameConfig& config, const AgentEnvironment& env,
                 const Clock& clock);

// Runs every game of a machine-only plan on up to `jobs` threads. Results
// are in build_games() order regardless of scheduling.
std::vector<GameRun> run_plan(const EmbeddingTable& table, const ExperimentPlan& plan, const AgentEnvironment& env,
                              const Clock& clock, std::size_t jobs = 1);
std::vector<GameRun> run_games(const EmbeddingTable& table, const std::vector<GameConfig>& games,
                               const AgentEnvironment& env, const Clock& clock, std::size_t jobs = 1);

}  // namespace semchain
