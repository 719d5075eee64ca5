#include "semchain/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <random>

#include <fmt/format.h>

#include "semchain/atomic_file.hpp"
#include "semchain/simulate.hpp"

namespace semchain {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(ServiceError::Code code) {
    using C = ServiceError::Code;
    switch (code) {
        case C::bad_request: return "bad_request";
        case C::not_found: return "not_found";
        case C::invalid_token: return "invalid_token";
        case C::token_round_mismatch: return "token_round_mismatch";
        case C::double_submission: return "double_submission";
        case C::advice_due: return "advice_due";
        case C::no_open_slot: return "no_open_slot";
        case C::already_assigned: return "already_assigned";
        case C::plan_exhausted: return "plan_exhausted";
        case C::duplicate_plan: return "duplicate_plan";
        case C::rejected: return "rejected";
    }
    return "unknown";
}

int http_status(ServiceError::Code code) {
    using C = ServiceError::Code;
    switch (code) {
        case C::bad_request:
        case C::rejected: return 400;
        case C::invalid_token: return 401;
        case C::token_round_mismatch: return 403;
        case C::not_found: return 404;
        case C::plan_exhausted: return 410;
        default: return 409;
    }
}

namespace {

// What progress() and join() read without touching the game itself.
struct Summary {
    std::size_t current_round = 1;
    std::size_t current_turn = 1;
    std::size_t completed_rounds = 0;
    std::size_t guesses = 0;
    bool complete = false;
    bool awaiting_advice = false;
    bool human_turn = false;
    std::string error;
};

Summary summarize(const Game& game) {
    Summary s;
    const auto& st = game.state();
    s.current_round = st.current_round;
    s.current_turn = st.current_turn;
    s.completed_rounds = st.completed_rounds();
    s.guesses = st.guesses.size();
    s.complete = game.complete();
    s.awaiting_advice = game.awaiting_advice();
    s.human_turn = !s.complete && game.current_player().is_human();
    return s;
}

ServiceError rejected(const GameError& e) {
    if (e.code() == GameError::Code::awaiting_advice) return {ServiceError::Code::advice_due, e.what()};
    return {ServiceError::Code::rejected, fmt::format("{}: {}", to_string(e.code()), e.what())};
}

}  // namespace

struct Orchestrator::Slot {
    // Immutable after construction.
    GameConfig config;
    Condition condition = Condition::custom;
    std::string target;

    // Guarded by `mutex`.
    std::mutex mutex;
    std::optional<Game> game;
    std::unique_ptr<EventLogWriter> writer;
    std::unique_ptr<EventLogWriter> audit;
    std::size_t flushed = 0;
    fs::path snapshot_path;

    // Guarded by the registry mutex.
    std::optional<std::string> holder;  // token owning the current human round
    std::optional<std::string> resume_participant;

    std::atomic<bool> machine_pending{false};

    mutable std::mutex summary_mutex;
    Summary summary;

    Summary read_summary() const {
        std::lock_guard lock(summary_mutex);
        return summary;
    }
    void publish(Summary s) {
        std::lock_guard lock(summary_mutex);
        summary = std::move(s);
    }
};

Orchestrator::Orchestrator(const EmbeddingTable& table, AgentEnvironment env, OrchestratorOptions options)
    : table_(table), env_(std::move(env)), options_(std::move(options)), rng_(options_.seed) {
    env_.table = &table_;
    if (options_.log_dir.empty()) throw std::invalid_argument("orchestrator needs a log directory");
    fs::create_directories(options_.log_dir / "plans");
    load_existing();
    const auto n = std::max<std::size_t>(1, options_.machine_workers);
    for (std::size_t i = 0; i < n; ++i) {
        workers_.emplace_back([this](std::stop_token stop) { worker_loop(stop); });
    }
    std::lock_guard lock(registry_mutex_);
    for (auto& [id, s] : slots_) {
        const auto sum = s->read_summary();
        if (!sum.complete && !sum.human_turn && !sum.awaiting_advice) schedule(*s);
    }
}

Orchestrator::~Orchestrator() {
    for (auto& w : workers_) w.request_stop();
    queue_cv_.notify_all();
    workers_.clear();
}

void Orchestrator::load_existing() {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(options_.log_dir / "plans")) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const auto plan = json::parse(read_file(f)).get<ExperimentPlan>();
        std::lock_guard lock(registry_mutex_);
        register_plan(plan, false);
    }
}

// Caller holds the registry mutex (or is the constructor).
void Orchestrator::register_plan(const ExperimentPlan& plan, bool persist) {
    if (plans_.contains(plan.plan_id)) {
        throw ServiceError(ServiceError::Code::duplicate_plan, fmt::format("plan '{}' already exists", plan.plan_id));
    }
    auto configs = build_games(plan);
    for (const auto& c : configs) {
        if (!table_.contains(c.target)) {
            throw ServiceError(ServiceError::Code::bad_request, fmt::format("target '{}' is not in the vocabulary", c.target));
        }
    }
    if (persist) {
        for (const auto& c : configs) {
            if (fs::exists(options_.log_dir / (c.game_id + ".jsonl"))) {
                throw ServiceError(ServiceError::Code::duplicate_plan,
                                   fmt::format("a log for game '{}' already exists", c.game_id));
            }
        }
        write_file_atomic(options_.log_dir / "plans" / (plan.plan_id + ".json"), json(plan).dump(2) + "\n");
    }

    PlanEntry entry{plan, {}};
    for (auto& c : configs) {
        auto s = std::make_unique<Slot>();
        s->condition = plan.condition;
        s->target = c.target;
        const auto log_path = options_.log_dir / (c.game_id + ".jsonl");
        s->snapshot_path = options_.log_dir / (c.game_id + ".snapshot.json");
        if (!persist && fs::exists(log_path)) {
            s->game.emplace(recover_game(log_path, s->snapshot_path, &table_));
            s->flushed = s->game->events().size();
            s->writer = std::make_unique<EventLogWriter>(log_path);
            const auto& st = s->game->state();
            // Rebuild who played what, and who holds an unfinished round.
            for (const auto& g : st.guesses) {
                if (g.agent_kind != "human") continue;
                auto& p = participants_[g.agent_id];
                p.games.insert(c.game_id);
                p.plan_targets.insert({plan.plan_id, c.target});
            }
            if (!s->game->complete()) {
                if (s->game->awaiting_advice()) {
                    const auto& prev = st.config.roster.at(st.current_round - 2);
                    if (prev.is_human()) {
                        for (const auto& g : st.guesses) {
                            if (g.round == st.current_round - 1) s->resume_participant = g.agent_id;
                        }
                    }
                } else if (s->game->current_player().is_human()) {
                    if (st.current_turn > 1) {
                        s->resume_participant = st.round_player;
                    } else if (plan.condition == Condition::human_asocial && !st.guesses.empty()) {
                        s->resume_participant = st.guesses.front().agent_id;
                    }
                }
            }
        } else {
            s->writer = std::make_unique<EventLogWriter>(log_path);
            s->game.emplace(table_, c, options_.clock.now());
            s->writer->append(s->game->events());
            s->flushed = s->game->events().size();
        }
        s->audit = std::make_unique<EventLogWriter>(options_.log_dir / (c.game_id + ".llm.jsonl"));
        s->config = s->game->config();
        s->publish(summarize(*s->game));
        entry.game_ids.push_back(c.game_id);
        slots_.emplace(c.game_id, std::move(s));
    }
    plans_.emplace(plan.plan_id, std::move(entry));
}

std::string Orchestrator::create_experiment(const ExperimentPlan& plan) {
    try {
        validate(plan);
    } catch (const std::invalid_argument& e) {
        throw ServiceError(ServiceError::Code::bad_request, e.what());
    }
    std::lock_guard lock(registry_mutex_);
    register_plan(plan, true);
    for (const auto& id : plans_.at(plan.plan_id).game_ids) {
        auto& s = *slots_.at(id);
        const auto sum = s.read_summary();
        if (!sum.complete && !sum.human_turn) schedule(s);
    }
    return plan.plan_id;
}

std::vector<std::string> Orchestrator::game_ids(const std::string& plan_id) const {
    std::lock_guard lock(registry_mutex_);
    const auto it = plans_.find(plan_id);
    if (it == plans_.end()) throw ServiceError(ServiceError::Code::not_found, fmt::format("no plan '{}'", plan_id));
    return it->second.game_ids;
}

Orchestrator::Slot& Orchestrator::slot(const std::string& game_id) const {
    const auto it = slots_.find(game_id);
    if (it == slots_.end()) throw ServiceError(ServiceError::Code::not_found, fmt::format("no game '{}'", game_id));
    return *it->second;
}

std::string Orchestrator::new_token() {
    std::uint64_t a = rng_();
    std::uint64_t b = rng_();
    if (!options_.deterministic_tokens) {
        std::random_device rd;
        a ^= (static_cast<std::uint64_t>(rd()) << 32) | rd();
        b ^= (static_cast<std::uint64_t>(rd()) << 32) | rd();
    }
    return fmt::format("{:016x}{:016x}", a, b);
}

std::size_t Orchestrator::games_in_plan_locked(const Participant& p, const std::string& plan_id) const {
    return static_cast<std::size_t>(std::count_if(p.games.begin(), p.games.end(), [&](const std::string& g) {
        return slot(g).config.plan_id == plan_id;
    }));
}

bool Orchestrator::slot_open_locked(const Slot& s) const {
    if (s.holder || s.resume_participant || s.machine_pending) return false;
    const auto sum = s.read_summary();
    if (sum.complete || sum.awaiting_advice || !sum.human_turn || sum.current_turn != 1) return false;
    // A solo game is handed out whole, before anyone has played it.
    if (s.condition == Condition::human_asocial && sum.current_round != 1) return false;
    return true;
}

void Orchestrator::release_token_locked(const std::string& token) {
    auto& info = tokens_.at(token);
    info.active = false;
    auto& p = participants_[info.participant_id];
    if (p.active_token == token) p.active_token.reset();
    auto& s = slot(info.game_id);
    if (s.holder == token) s.holder.reset();
}

void Orchestrator::expire_idle_locked(Timestamp now) {
    if (!options_.turn_timeout) return;
    std::vector<std::string> expired;
    for (const auto& [token, info] : tokens_) {
        if (!info.active || now - info.assigned_at < *options_.turn_timeout) continue;
        const auto sum = slot(info.game_id).read_summary();
        // Only rounds nobody has started are reassigned; a started round
        // stays bound to the player who opened it.
        const bool untouched = sum.current_round == info.round && sum.current_turn == 1 && !sum.awaiting_advice &&
                               (!info.whole_game || sum.current_round == 1);
        if (untouched) expired.push_back(token);
    }
    for (const auto& t : expired) release_token_locked(t);
}

JoinResult Orchestrator::assign_locked(Slot& s, const std::string& participant_id, bool whole_game) {
    const auto token = new_token();
    const auto sum = s.read_summary();
    TokenInfo info;
    info.participant_id = participant_id;
    info.game_id = s.config.game_id;
    info.round = sum.awaiting_advice ? sum.current_round - 1 : sum.current_round;
    info.whole_game = whole_game;
    info.assigned_at = now_utc();
    tokens_.emplace(token, info);
    s.holder = token;
    s.resume_participant.reset();
    auto& p = participants_[participant_id];
    p.active_token = token;
    p.games.insert(s.config.game_id);
    p.plan_targets.insert({s.config.plan_id, s.target});

    JoinResult out;
    out.session = {token, participant_id, info.game_id, info.round};
    std::lock_guard game_lock(s.mutex);
    if (!sum.awaiting_advice) out.observation = s.game->observe();
    return out;
}

JoinResult Orchestrator::join(const std::string& participant_id, const std::optional<std::string>& plan_id) {
    if (participant_id.empty()) throw ServiceError(ServiceError::Code::bad_request, "participant_id is empty");
    std::lock_guard lock(registry_mutex_);
    expire_idle_locked(now_utc());

    auto& p = participants_[participant_id];
    if (p.active_token) {
        throw ServiceError(ServiceError::Code::already_assigned,
                           fmt::format("participant '{}' already holds an open round", participant_id));
    }

    std::vector<const PlanEntry*> eligible;
    if (plan_id) {
        const auto it = plans_.find(*plan_id);
        if (it == plans_.end()) throw ServiceError(ServiceError::Code::not_found, fmt::format("no plan '{}'", *plan_id));
        eligible.push_back(&it->second);
    } else {
        for (const auto& [id, entry] : plans_) eligible.push_back(&entry);
    }

    // A round this participant left unfinished (for example across a restart)
    // comes first.
    for (const auto* entry : eligible) {
        for (const auto& id : entry->game_ids) {
            auto& s = slot(id);
            if (s.resume_participant == participant_id && !s.holder) {
                return assign_locked(s, participant_id, s.condition == Condition::human_asocial);
            }
        }
    }

    std::vector<Slot*> open;
    bool any_unfinished = false;
    for (const auto* entry : eligible) {
        const auto& plan = entry->plan;
        const bool capped = games_in_plan_locked(p, plan.plan_id) >= plan.max_games_per_participant;
        for (const auto& id : entry->game_ids) {
            auto& s = slot(id);
            if (!s.read_summary().complete) any_unfinished = true;
            if (capped || !slot_open_locked(s)) continue;
            if (p.games.contains(id) || p.plan_targets.contains({plan.plan_id, s.target})) continue;
            open.push_back(&s);
        }
    }
    if (open.empty()) {
        if (!any_unfinished) throw ServiceError(ServiceError::Code::plan_exhausted, "every game is complete");
        throw ServiceError(ServiceError::Code::no_open_slot, "no open round for this participant right now");
    }
    auto& chosen = *open[uniform_index(rng_, open.size())];
    return assign_locked(chosen, participant_id, chosen.condition == Condition::human_asocial);
}

Orchestrator::TokenInfo Orchestrator::token_info(const std::string& token) const {
    std::lock_guard lock(registry_mutex_);
    const auto it = tokens_.find(token);
    if (it == tokens_.end()) throw ServiceError(ServiceError::Code::invalid_token, "unknown session token");
    if (!it->second.active) throw ServiceError(ServiceError::Code::invalid_token, "session token is no longer active");
    return it->second;
}

Observation Orchestrator::observation(const std::string& token) const {
    const auto info = token_info(token);
    auto& s = [&]() -> Slot& {
        std::lock_guard lock(registry_mutex_);
        return slot(info.game_id);
    }();
    std::lock_guard lock(s.mutex);
    const auto& st = s.game->state();
    if (s.game->awaiting_advice()) throw ServiceError(ServiceError::Code::advice_due, "advice is due for the finished round");
    if (!info.whole_game && st.current_round != info.round) {
        throw ServiceError(ServiceError::Code::token_round_mismatch, "the token's round is over");
    }
    try {
        return s.game->observe();
    } catch (const GameError& e) {
        throw rejected(e);
    }
}

void Orchestrator::flush_locked(Slot& s) {
    const auto& events = s.game->events();
    if (s.flushed < events.size()) {
        const std::span<const json> fresh(events.data() + s.flushed, events.size() - s.flushed);
        s.writer->append(fresh);
        s.flushed = events.size();
        const bool round_closed = std::any_of(fresh.begin(), fresh.end(), [](const json& e) {
            return e.at("type") == "round_completed";
        });
        if (round_closed) write_snapshot(s.snapshot_path, s.game->state());
    }
    s.publish(summarize(*s.game));
}

GuessResult Orchestrator::post_guess(const std::string& token, const std::string& raw,
                                     std::optional<std::size_t> expected_turn) {
    const auto info = token_info(token);
    Slot* sp = nullptr;
    {
        std::lock_guard lock(registry_mutex_);
        sp = &slot(info.game_id);
        if (sp->holder != token) throw ServiceError(ServiceError::Code::invalid_token, "session token is no longer active");
    }
    auto& s = *sp;

    GuessResult out;
    bool schedule_machine = false;
    {
        std::lock_guard lock(s.mutex);
        auto& game = *s.game;
        const auto& st = game.state();
        if (game.awaiting_advice()) throw ServiceError(ServiceError::Code::advice_due, "advice is due for the finished round");
        if (game.complete() || (!info.whole_game && st.current_round != info.round)) {
            throw ServiceError(ServiceError::Code::token_round_mismatch, "the token's round is over");
        }
        if (expected_turn && *expected_turn != st.current_turn) {
            if (*expected_turn < st.current_turn) {
                throw ServiceError(ServiceError::Code::double_submission,
                                   fmt::format("turn {} was already submitted", *expected_turn));
            }
            throw ServiceError(ServiceError::Code::bad_request,
                               fmt::format("turn {} is not open; current turn is {}", *expected_turn, st.current_turn));
        }
        const auto round_before = st.current_round;
        try {
            out.score = game.submit_guess(raw, info.participant_id, options_.clock.now());
        } catch (const GameError& e) {
            throw rejected(e);
        }
        flush_locked(s);

        out.round_complete = game.complete() || st.current_round != round_before;
        out.advice_due = game.awaiting_advice();
        out.finished = game.complete() || (out.round_complete && !out.advice_due && !info.whole_game);
        if (!out.finished && !out.advice_due) out.observation = game.observe();
        schedule_machine = out.round_complete && !out.advice_due && !game.complete() && !game.current_player().is_human();
    }

    std::lock_guard lock(registry_mutex_);
    auto& t = tokens_.at(token);
    t.assigned_at = now_utc();
    if (info.whole_game && out.round_complete && !out.advice_due) t.round = s.read_summary().current_round;
    if (out.finished) release_token_locked(token);
    if (schedule_machine) schedule(s);
    return out;
}

void Orchestrator::post_advice(const std::string& token, const std::string& payload) {
    const auto info = token_info(token);
    Slot* sp = nullptr;
    {
        std::lock_guard lock(registry_mutex_);
        sp = &slot(info.game_id);
        if (sp->holder != token) throw ServiceError(ServiceError::Code::invalid_token, "session token is no longer active");
    }
    auto& s = *sp;

    bool schedule_machine = false;
    bool finished = false;
    {
        std::lock_guard lock(s.mutex);
        auto& game = *s.game;
        if (!game.awaiting_advice()) {
            throw ServiceError(ServiceError::Code::rejected, "advice is not due");
        }
        if (!info.whole_game && game.state().current_round != info.round + 1) {
            throw ServiceError(ServiceError::Code::token_round_mismatch, "advice belongs to another round");
        }
        try {
            game.submit_advice(payload, options_.clock.now());
        } catch (const GameError& e) {
            throw rejected(e);
        }
        flush_locked(s);
        finished = !info.whole_game;
        schedule_machine = !game.current_player().is_human();
    }

    std::lock_guard lock(registry_mutex_);
    auto& t = tokens_.at(token);
    t.assigned_at = now_utc();
    if (info.whole_game) t.round = s.read_summary().current_round;
    if (finished) release_token_locked(token);
    if (schedule_machine) schedule(s);
}

void Orchestrator::schedule(Slot& s) {
    s.machine_pending = true;
    {
        std::lock_guard lock(queue_mutex_);
        queue_.push_back(&s);
    }
    queue_cv_.notify_one();
}

void Orchestrator::worker_loop(std::stop_token stop) {
    while (true) {
        Slot* s = nullptr;
        {
            std::unique_lock lock(queue_mutex_);
            if (!queue_cv_.wait(lock, stop, [&] { return !queue_.empty(); })) return;
            s = queue_.front();
            queue_.pop_front();
            ++busy_;
        }
        run_machine_rounds(*s);
        {
            std::lock_guard lock(queue_mutex_);
            --busy_;
        }
        idle_cv_.notify_all();
    }
}

void Orchestrator::run_machine_rounds(Slot& s) {
    std::lock_guard lock(s.mutex);
    auto& game = *s.game;
    auto env = env_;
    const auto game_id = s.config.game_id;
    env.audit = [&s, &game_id](const json& record) {
        json r = record;
        r["game_id"] = game_id;
        s.audit->append(std::span<const json>(&r, 1));
    };
    try {
        while (!game.complete() && !game.awaiting_advice() && !game.current_player().is_human()) {
            const auto round = game.state().current_round;
            auto agent = make_agent(game.current_player(), env);
            auto rng = round_rng(game.config(), round);
            play_machine_round(game, *agent, rng, options_.clock);
            flush_locked(s);
        }
        flush_locked(s);
    } catch (const std::exception& e) {
        // Keep what was played; the failure shows up in progress().
        try {
            flush_locked(s);
        } catch (const std::exception&) {
        }
        auto sum = summarize(game);
        sum.error = e.what();
        s.publish(std::move(sum));
        std::cerr << fmt::format("game {}: machine round failed: {}\n", game_id, e.what());
    }
    s.machine_pending = false;
}

void Orchestrator::wait_idle() {
    std::unique_lock lock(queue_mutex_);
    idle_cv_.wait(lock, [&] { return queue_.empty() && busy_ == 0; });
}

json Orchestrator::progress(const std::string& plan_id) const {
    std::lock_guard lock(registry_mutex_);
    const auto it = plans_.find(plan_id);
    if (it == plans_.end()) throw ServiceError(ServiceError::Code::not_found, fmt::format("no plan '{}'", plan_id));
    const auto& plan = it->second.plan;

    std::size_t games_complete = 0, rounds_total = 0, rounds_complete = 0, human_total = 0, human_complete = 0;
    std::size_t guesses = 0, open_slots = 0, assigned = 0;
    json games = json::array();
    for (const auto& id : it->second.game_ids) {
        const auto& s = slot(id);
        const auto sum = s.read_summary();
        games_complete += sum.complete ? 1 : 0;
        rounds_total += s.config.roster.size();
        rounds_complete += sum.completed_rounds;
        guesses += sum.guesses;
        for (std::size_t r = 0; r < s.config.roster.size(); ++r) {
            if (!s.config.roster[r].is_human()) continue;
            ++human_total;
            if (r < sum.completed_rounds) ++human_complete;
        }
        const bool open = slot_open_locked(s);
        open_slots += open ? 1 : 0;
        assigned += s.holder ? 1 : 0;
        std::string waiting;
        if (sum.complete) {
            waiting = "none";
        } else if (sum.awaiting_advice) {
            waiting = "advice";
        } else if (sum.human_turn) {
            waiting = s.holder ? "human_playing" : "human_join";
        } else {
            waiting = "machine";
        }
        json g{{"game_id", id},
               {"current_round", sum.current_round},
               {"current_turn", sum.current_turn},
               {"completed_rounds", sum.completed_rounds},
               {"guesses", sum.guesses},
               {"complete", sum.complete},
               {"waiting_for", waiting}};
        if (!sum.error.empty()) g["error"] = sum.error;
        games.push_back(std::move(g));
    }
    return {{"plan_id", plan_id},
            {"condition", to_string(plan.condition)},
            {"channel", to_string(plan.channel)},
            {"games_total", it->second.game_ids.size()},
            {"games_complete", games_complete},
            {"rounds_total", rounds_total},
            {"rounds_complete", rounds_complete},
            {"human_rounds_total", human_total},
            {"human_rounds_complete", human_complete},
            {"open_human_slots", open_slots},
            {"assigned_human_slots", assigned},
            {"guesses", guesses},
            {"exhausted", games_complete == it->second.game_ids.size()},
            {"games", games}};
}

bool Orchestrator::reveals_max_score(const std::string& token) const {
    const auto info = token_info(token);
    std::lock_guard lock(registry_mutex_);
    return plans_.at(slot(info.game_id).config.plan_id).plan.reveal_max_to_players;
}

double Orchestrator::max_score(const std::string& token) const {
    const auto info = token_info(token);
    std::lock_guard lock(registry_mutex_);
    return slot(info.game_id).config.max_score;
}

std::string Orchestrator::game_log(const std::string& game_id) const {
    Slot* s = nullptr;
    {
        std::lock_guard lock(registry_mutex_);
        s = &slot(game_id);
    }
    std::lock_guard lock(s->mutex);
    return read_file(s->writer->path());
}

GameState Orchestrator::game_state(const std::string& game_id) const {
    Slot* s = nullptr;
    {
        std::lock_guard lock(registry_mutex_);
        s = &slot(game_id);
    }
    std::lock_guard lock(s->mutex);
    return s->game->state();
}

}  // namespace semchain
