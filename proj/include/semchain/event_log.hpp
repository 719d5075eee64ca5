#pragma once

#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semchain/game.hpp"

namespace semchain {

// JSON Lines: one event object per line, keys in sorted order.
std::string serialize_events(std::span<const nlohmann::json> events);
std::vector<nlohmann::json> parse_events(std::string_view text);

std::vector<nlohmann::json> read_event_log(const std::filesystem::path& path);
void write_event_log_atomic(const std::filesystem::path& path, std::span<const nlohmann::json> events);

// Append-only writer. append() returns after the lines are flushed and
// fsync'ed, so a caller can acknowledge only durable events. Opening an
// existing log drops a torn final line.
class EventLogWriter {
public:
    explicit EventLogWriter(const std::filesystem::path& path);
    ~EventLogWriter();
    EventLogWriter(const EventLogWriter&) = delete;
    EventLogWriter& operator=(const EventLogWriter&) = delete;

    void append(std::span<const nlohmann::json> events);
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::FILE* file_ = nullptr;
};

void write_snapshot(const std::filesystem::path& path, const GameState& state);
GameState read_snapshot(const std::filesystem::path& path);

// Rebuilds a game from `<dir>/<game_id>.jsonl`, starting from
// `<dir>/<game_id>.snapshot.json` when one exists.
Game recover_game(const std::filesystem::path& log_path, const std::filesystem::path& snapshot_path,
                  const EmbeddingTable* table);

}  // namespace semchain
