#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace semchain {

struct GuessRecord {
    std::size_t round = 0;
    std::size_t turn = 0;
    std::string word;
    double score = 0.0;
    std::string agent_id;
    std::string agent_kind;
};

// One game as the analysis sees it.
struct GameRecord {
    std::string game_id;
    std::string target;
    std::string condition;
    std::string plan_id;
    std::string channel;
    std::size_t rounds_per_game = 0;
    std::size_t turns_per_round = 0;
    bool complete = false;
    std::vector<GuessRecord> guesses;

    // Guesses of one round in turn order.
    std::vector<GuessRecord> round(std::size_t r) const;
    // Rounds that have at least one guess, ascending.
    std::vector<std::size_t> played_rounds() const;
};

// Rebuilds a record by replaying the events through the game engine, so a
// log the engine would reject is rejected here too.
GameRecord game_record(std::span<const nlohmann::json> events);

// Every <game_id>.jsonl in `dir` (sidecars excluded), sorted by game id.
// Throws IoError when `dir` is not a directory.
std::vector<GameRecord> read_game_logs(const std::filesystem::path& dir);

}  // namespace semchain
