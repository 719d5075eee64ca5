#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "semchain/agent_descriptor.hpp"
#include "semchain/embedding_store.hpp"
#include "semchain/scoring.hpp"
#include "semchain/timestamp.hpp"

namespace semchain {

inline constexpr std::size_t kMaxLongAdviceChars = 1000;

enum class ChannelKind { best_guess, full_history, short_advice, long_advice };

// How the best-guess hint is formed: the best over all previous rounds, or
// only the immediately preceding round.
enum class HintMode { running_max, previous_round };

std::string_view to_string(ChannelKind channel);
ChannelKind parse_channel(std::string_view name);
std::string_view to_string(HintMode mode);
HintMode parse_hint_mode(std::string_view name);

bool is_advice_channel(ChannelKind channel);

struct GameConfig {
    std::string game_id;
    std::string target;
    std::size_t rounds_per_game = 10;
    std::size_t turns_per_round = 10;
    ChannelKind channel = ChannelKind::best_guess;
    HintMode hint_mode = HintMode::running_max;
    std::vector<AgentDescriptor> roster;  // one per round
    std::uint64_t seed = 0;
    double max_score = kDefaultMaxScore;
    // Labels carried into the log for analysis.
    std::string condition;
    std::string plan_id;

    bool operator==(const GameConfig&) const = default;
};

void to_json(nlohmann::json& j, const GameConfig& c);
void from_json(const nlohmann::json& j, GameConfig& c);

struct Guess {
    std::size_t round = 0;
    std::size_t turn = 0;
    std::string word;
    std::string raw_input;
    double score = 0.0;
    std::string agent_id;
    std::string agent_kind;
    Timestamp timestamp{};

    bool operator==(const Guess&) const = default;
};

// Prior-round guesses as shown to later players: no agent identity.
struct HistoryEntry {
    std::size_t round = 0;
    std::size_t turn = 0;
    std::string word;
    double score = 0.0;

    bool operator==(const HistoryEntry&) const = default;
};

struct NoSignal {
    bool operator==(const NoSignal&) const = default;
};
struct BestGuessSignal {
    std::string word;
    double score = 0.0;
    bool operator==(const BestGuessSignal&) const = default;
};
struct FullHistorySignal {
    std::vector<HistoryEntry> guesses;
    bool operator==(const FullHistorySignal&) const = default;
};
struct ShortAdviceSignal {
    std::string word;
    bool operator==(const ShortAdviceSignal&) const = default;
};
struct LongAdviceSignal {
    std::string text;
    bool operator==(const LongAdviceSignal&) const = default;
};

using SocialSignal = std::variant<NoSignal, BestGuessSignal, FullHistorySignal, ShortAdviceSignal, LongAdviceSignal>;

// What the player of the current round is allowed to see.
struct Observation {
    SocialSignal signal;
    std::vector<ScoredWord> own_round_history;
    std::size_t round = 0;
    std::size_t turn = 0;
    std::size_t turns_per_round = 0;

    bool operator==(const Observation&) const = default;
};

// Player-facing serialisation. Never contains the target or max_score.
nlohmann::json to_json(const Observation& obs);
Observation observation_from_json(const nlohmann::json& j);

enum class GameStatus { in_progress, complete };

struct GameState {
    GameConfig config;
    std::vector<Guess> guesses;
    std::size_t current_round = 1;
    std::size_t current_turn = 1;
    std::optional<ScoredWord> running_best;
    std::vector<ScoredWord> round_bests;  // one per completed round
    std::vector<std::string> advice_chain;
    std::string round_player;  // agent bound to the current round
    GameStatus status = GameStatus::in_progress;
    std::uint64_t next_seq = 0;

    std::size_t completed_rounds() const { return round_bests.size(); }
    bool operator==(const GameState&) const = default;
};

class GameError : public std::runtime_error {
public:
    enum class Code {
        invalid_config,
        game_complete,
        empty_guess,
        wrong_agent,
        awaiting_advice,
        wrong_channel,
        advice_not_due,
        invalid_advice,
        invalid_text,  // not valid UTF-8
        bad_event,
    };
    GameError(Code code, const std::string& message) : std::runtime_error(message), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

std::string_view to_string(GameError::Code code);

// Checks rounds/turns >= 1, roster length and every descriptor.
void validate(const GameConfig& config);

// One transmission chain. Every mutation is recorded as an event and applied
// through the same path used for replay, so replaying events() on a fresh
// game reproduces state() exactly.
//
// Not internally synchronised: callers serialise submit_* per game.
class Game {
public:
    // Starts the game (emits game_started). The table must outlive the game.
    Game(const EmbeddingTable& table, GameConfig config, Timestamp now);

    // Rebuilds a game from its event log. Without a table the result is
    // read-only: observe() works but submit_guess() throws.
    static Game replay(std::span<const nlohmann::json> events, const EmbeddingTable* table = nullptr);
    // Continues from a snapshot, applying the events that follow it.
    static Game resume(const GameState& snapshot, std::span<const nlohmann::json> later_events,
                       const EmbeddingTable* table = nullptr);

    const GameState& state() const { return state_; }
    const GameConfig& config() const { return state_.config; }
    bool complete() const { return state_.status == GameStatus::complete; }

    // True when an advice channel is waiting on the previous round's advice.
    bool awaiting_advice() const;
    const AgentDescriptor& current_player() const;

    Observation observe() const;

    // Sanitises, scores and records one guess. Returns the score shown to
    // the player.
    double submit_guess(std::string_view raw, std::string_view agent_id, Timestamp now);

    // Advice from the player of the round that just finished.
    void submit_advice(std::string_view payload, Timestamp now);

    const std::vector<nlohmann::json>& events() const { return events_; }

    // Guesses of one round, in turn order.
    std::vector<ScoredWord> round_history(std::size_t round) const;

private:
    Game() = default;

    nlohmann::json make_event(std::string_view type, Timestamp now);
    void record(nlohmann::json event);
    void apply(const nlohmann::json& event);

    GameState state_;
    std::optional<Scorer> scorer_;
    std::vector<nlohmann::json> events_;
};

// Serialised snapshot of a state (the JSON form of GameState).
nlohmann::json snapshot_json(const GameState& state);
GameState state_from_snapshot(const nlohmann::json& j);

}  // namespace semchain
