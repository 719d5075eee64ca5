#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "semchain/agents.hpp"
#include "semchain/event_log.hpp"
#include "semchain/game.hpp"
#include "semchain/plan.hpp"
#include "semchain/rng.hpp"
#include "semchain/timestamp.hpp"

namespace semchain {

class ServiceError : public std::runtime_error {
public:
    enum class Code {
        bad_request,
        not_found,
        invalid_token,
        token_round_mismatch,
        double_submission,
        advice_due,
        no_open_slot,
        already_assigned,
        plan_exhausted,
        duplicate_plan,
        rejected,  // the game engine refused the move
    };
    ServiceError(Code code, const std::string& message) : std::runtime_error(message), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

std::string_view to_string(ServiceError::Code code);
int http_status(ServiceError::Code code);

struct OrchestratorOptions {
    // Holds plans/<plan_id>.json and per game <game_id>.jsonl,
    // <game_id>.snapshot.json and <game_id>.llm.jsonl.
    std::filesystem::path log_dir;
    Clock clock;
    std::size_t machine_workers = 2;
    // Idle humans: a round nobody has guessed in yet is handed to someone
    // else after this long. Unset means turns are untimed.
    std::optional<std::chrono::milliseconds> turn_timeout;
    std::uint64_t seed = 0;  // slot choice; tokens also mix in random_device
    bool deterministic_tokens = false;
};

struct SessionToken {
    std::string token;
    std::string participant_id;
    std::string game_id;
    std::size_t round = 0;
};

struct JoinResult {
    SessionToken session;
    // Absent only when a returning participant still owes advice for a
    // round played before a restart.
    std::optional<Observation> observation;
};

struct GuessResult {
    double score = 0.0;
    bool round_complete = false;
    bool advice_due = false;  // this player owes advice before leaving
    bool finished = false;    // the token has no further moves
    std::optional<Observation> observation;
};

// Runs experiment plans as live games: admits humans to their rounds, plays
// machine rounds in the background and appends every event to disk before
// acknowledging it.
class Orchestrator {
public:
    // Recovers any plans and games already present in options.log_dir.
    Orchestrator(const EmbeddingTable& table, AgentEnvironment env, OrchestratorOptions options);
    ~Orchestrator();
    Orchestrator(const Orchestrator&) = delete;
    Orchestrator& operator=(const Orchestrator&) = delete;

    std::string create_experiment(const ExperimentPlan& plan);
    std::vector<std::string> game_ids(const std::string& plan_id) const;

    // Assigns an open human round. With no plan_id every plan is eligible.
    JoinResult join(const std::string& participant_id, const std::optional<std::string>& plan_id = std::nullopt);

    Observation observation(const std::string& token) const;

    // `expected_turn`, when given, must equal the current turn; a repeat of
    // an already accepted turn is reported as a double submission.
    GuessResult post_guess(const std::string& token, const std::string& raw,
                           std::optional<std::size_t> expected_turn = std::nullopt);
    void post_advice(const std::string& token, const std::string& payload);

    nlohmann::json progress(const std::string& plan_id) const;
    // Player-visible settings of a token's plan.
    bool reveals_max_score(const std::string& token) const;
    double max_score(const std::string& token) const;

    // Raw JSONL as stored on disk.
    std::string game_log(const std::string& game_id) const;
    GameState game_state(const std::string& game_id) const;

    // Blocks until no machine round is queued or running.
    void wait_idle();

private:
    struct Slot;
    struct TokenInfo {
        std::string participant_id;
        std::string game_id;
        std::size_t round = 0;
        bool whole_game = false;  // human_asocial
        bool active = true;
        Timestamp assigned_at{};
    };
    struct PlanEntry {
        ExperimentPlan plan;
        std::vector<std::string> game_ids;
    };
    struct Participant {
        std::set<std::pair<std::string, std::string>> plan_targets;  // (plan, target) played
        std::set<std::string> games;
        std::optional<std::string> active_token;
    };

    void load_existing();
    void register_plan(const ExperimentPlan& plan, bool persist);
    Slot& slot(const std::string& game_id) const;
    std::string new_token();
    void expire_idle_locked(Timestamp now);
    bool slot_open_locked(const Slot& s) const;
    JoinResult assign_locked(Slot& s, const std::string& participant_id, bool whole_game);
    void release_token_locked(const std::string& token);
    void flush_locked(Slot& s);
    void schedule(Slot& s);
    void run_machine_rounds(Slot& s);
    void worker_loop(std::stop_token stop);
    TokenInfo token_info(const std::string& token) const;
    std::size_t games_in_plan_locked(const Participant& p, const std::string& plan_id) const;

    const EmbeddingTable& table_;
    AgentEnvironment env_;
    OrchestratorOptions options_;

    mutable std::mutex registry_mutex_;  // plans, participants, tokens, assignments
    std::map<std::string, PlanEntry> plans_;
    std::map<std::string, std::unique_ptr<Slot>> slots_;
    std::map<std::string, Participant> participants_;
    std::map<std::string, TokenInfo> tokens_;
    Rng rng_;

    std::mutex queue_mutex_;
    std::condition_variable_any queue_cv_;
    std::condition_variable idle_cv_;
    std::deque<Slot*> queue_;
    std::size_t busy_ = 0;
    std::vector<std::jthread> workers_;
};

}  // namespace semchain
