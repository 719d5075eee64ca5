#include "semchain/event_log.hpp"

#include <fmt/format.h>
#include <unistd.h>

#include "semchain/atomic_file.hpp"

namespace semchain {

using nlohmann::json;

std::string serialize_events(std::span<const json> events) {
    std::string out;
    for (const auto& e : events) {
        // The engine only records valid UTF-8; replacement guards sidecar
        // records that carry provider text verbatim.
        out += e.dump(-1, ' ', false, json::error_handler_t::replace);
        out += '\n';
    }
    return out;
}

std::vector<json> parse_events(std::string_view text) {
    std::vector<json> events;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto end = text.find('\n', pos);
        const auto line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() : end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            events.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            // A torn final line is what a crash mid-append leaves behind.
            if (pos >= text.size() && end == std::string_view::npos) break;
            throw IoError(fmt::format("event log line {}: {}", line_no, e.what()));
        }
    }
    return events;
}

std::vector<json> read_event_log(const std::filesystem::path& path) {
    return parse_events(read_file(path));
}

void write_event_log_atomic(const std::filesystem::path& path, std::span<const json> events) {
    write_file_atomic(path, serialize_events(events));
}

EventLogWriter::EventLogWriter(const std::filesystem::path& path) : path_(path) {
    // Cut a torn final line so the next append starts on a fresh line.
    std::error_code ec;
    if (std::filesystem::file_size(path, ec) > 0 && !ec) {
        const auto text = read_file(path);
        if (text.back() != '\n') {
            const auto keep = text.rfind('\n');
            std::filesystem::resize_file(path, keep == std::string::npos ? 0 : keep + 1);
        }
    }
    file_ = std::fopen(path.c_str(), "ab");
    if (!file_) throw IoError(fmt::format("cannot open event log '{}'", path.string()));
}

EventLogWriter::~EventLogWriter() {
    if (file_) std::fclose(file_);
}

void EventLogWriter::append(std::span<const json> events) {
    if (events.empty()) return;
    const auto text = serialize_events(events);
    if (std::fwrite(text.data(), 1, text.size(), file_) != text.size() || std::fflush(file_) != 0 ||
        ::fsync(::fileno(file_)) != 0) {
        throw IoError(fmt::format("append to '{}' failed", path_.string()));
    }
}

void write_snapshot(const std::filesystem::path& path, const GameState& state) {
    write_file_atomic(path, snapshot_json(state).dump() + "\n");
}

GameState read_snapshot(const std::filesystem::path& path) {
    return state_from_snapshot(json::parse(read_file(path)));
}

Game recover_game(const std::filesystem::path& log_path, const std::filesystem::path& snapshot_path,
                  const EmbeddingTable* table) {
    const auto events = read_event_log(log_path);
    if (std::filesystem::exists(snapshot_path)) {
        const auto snapshot = read_snapshot(snapshot_path);
        return Game::resume(snapshot, events, table);
    }
    return Game::replay(events, table);
}

}  // namespace semchain
