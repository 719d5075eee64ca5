#include "semchain/log_reader.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "semchain/atomic_file.hpp"
#include "semchain/event_log.hpp"
#include "semchain/game.hpp"

namespace semchain {

namespace fs = std::filesystem;

std::vector<GuessRecord> GameRecord::round(std::size_t r) const {
    std::vector<GuessRecord> out;
    for (const auto& g : guesses) {
        if (g.round == r) out.push_back(g);
    }
    return out;
}

std::vector<std::size_t> GameRecord::played_rounds() const {
    std::set<std::size_t> rounds;
    for (const auto& g : guesses) rounds.insert(g.round);
    return {rounds.begin(), rounds.end()};
}

GameRecord game_record(std::span<const nlohmann::json> events) {
    const auto game = Game::replay(events);
    const auto& st = game.state();
    GameRecord r;
    r.game_id = st.config.game_id;
    r.target = st.config.target;
    r.condition = st.config.condition;
    r.plan_id = st.config.plan_id;
    r.channel = std::string(to_string(st.config.channel));
    r.rounds_per_game = st.config.rounds_per_game;
    r.turns_per_round = st.config.turns_per_round;
    r.complete = game.complete();
    for (const auto& g : st.guesses) r.guesses.push_back({g.round, g.turn, g.word, g.score, g.agent_id, g.agent_kind});
    return r;
}

std::vector<GameRecord> read_game_logs(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError(fmt::format("'{}' is not a directory", dir.string()));
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (!entry.is_regular_file() || !name.ends_with(".jsonl") || name.ends_with(".llm.jsonl")) continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<GameRecord> out;
    for (const auto& f : files) {
        const auto events = read_event_log(f);
        if (events.empty()) continue;
        try {
            out.push_back(game_record(events));
        } catch (const GameError& e) {
            throw IoError(fmt::format("{}: {}", f.string(), e.what()));
        } catch (const nlohmann::json::exception& e) {
            throw IoError(fmt::format("{}: {}", f.string(), e.what()));
        }
    }
    std::sort(out.begin(), out.end(), [](const GameRecord& a, const GameRecord& b) { return a.game_id < b.game_id; });
    return out;
}

}  // namespace semchain
