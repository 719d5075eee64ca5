#include "semchain/game.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "semchain/text.hpp"

namespace semchain {

using nlohmann::json;

std::string_view to_string(ChannelKind channel) {
    switch (channel) {
        case ChannelKind::best_guess: return "best_guess";
        case ChannelKind::full_history: return "full_history";
        case ChannelKind::short_advice: return "short_advice";
        case ChannelKind::long_advice: return "long_advice";
    }
    return "best_guess";
}

ChannelKind parse_channel(std::string_view name) {
    if (name == "best_guess") return ChannelKind::best_guess;
    if (name == "full_history") return ChannelKind::full_history;
    if (name == "short_advice") return ChannelKind::short_advice;
    if (name == "long_advice") return ChannelKind::long_advice;
    throw std::invalid_argument(fmt::format("unknown channel '{}'", name));
}

std::string_view to_string(HintMode mode) {
    return mode == HintMode::running_max ? "running_max" : "previous_round";
}

HintMode parse_hint_mode(std::string_view name) {
    if (name == "running_max") return HintMode::running_max;
    if (name == "previous_round") return HintMode::previous_round;
    throw std::invalid_argument(fmt::format("unknown hint mode '{}'", name));
}

bool is_advice_channel(ChannelKind channel) {
    return channel == ChannelKind::short_advice || channel == ChannelKind::long_advice;
}

std::string_view to_string(GameError::Code code) {
    switch (code) {
        case GameError::Code::invalid_config: return "invalid_config";
        case GameError::Code::game_complete: return "game_complete";
        case GameError::Code::empty_guess: return "empty_guess";
        case GameError::Code::wrong_agent: return "wrong_agent";
        case GameError::Code::awaiting_advice: return "awaiting_advice";
        case GameError::Code::wrong_channel: return "wrong_channel";
        case GameError::Code::advice_not_due: return "advice_not_due";
        case GameError::Code::invalid_advice: return "invalid_advice";
        case GameError::Code::invalid_text: return "invalid_text";
        case GameError::Code::bad_event: return "bad_event";
    }
    return "unknown";
}

void to_json(json& j, const GameConfig& c) {
    j = json{{"game_id", c.game_id},
             {"target", c.target},
             {"rounds_per_game", c.rounds_per_game},
             {"turns_per_round", c.turns_per_round},
             {"channel", to_string(c.channel)},
             {"hint_mode", to_string(c.hint_mode)},
             {"roster", c.roster},
             {"seed", c.seed},
             {"max_score", c.max_score},
             {"condition", c.condition},
             {"plan_id", c.plan_id}};
}

void from_json(const json& j, GameConfig& c) {
    c.game_id = j.at("game_id").get<std::string>();
    c.target = j.at("target").get<std::string>();
    c.rounds_per_game = j.value("rounds_per_game", std::size_t{10});
    c.turns_per_round = j.value("turns_per_round", std::size_t{10});
    c.channel = parse_channel(j.value("channel", std::string("best_guess")));
    c.hint_mode = parse_hint_mode(j.value("hint_mode", std::string("running_max")));
    c.roster = j.at("roster").get<std::vector<AgentDescriptor>>();
    c.seed = j.value("seed", std::uint64_t{0});
    c.max_score = j.value("max_score", kDefaultMaxScore);
    c.condition = j.value("condition", std::string());
    c.plan_id = j.value("plan_id", std::string());
}

namespace {

json signal_json(const SocialSignal& signal) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, NoSignal>) {
                return {{"kind", "none"}};
            } else if constexpr (std::is_same_v<T, BestGuessSignal>) {
                return {{"kind", "best_guess"}, {"word", s.word}, {"score", s.score}};
            } else if constexpr (std::is_same_v<T, FullHistorySignal>) {
                json rows = json::array();
                for (const auto& g : s.guesses) {
                    rows.push_back({{"round", g.round}, {"turn", g.turn}, {"word", g.word}, {"score", g.score}});
                }
                return {{"kind", "full_history"}, {"guesses", std::move(rows)}};
            } else if constexpr (std::is_same_v<T, ShortAdviceSignal>) {
                return {{"kind", "short_advice"}, {"word", s.word}};
            } else {
                return {{"kind", "long_advice"}, {"text", s.text}};
            }
        },
        signal);
}

SocialSignal signal_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "none") return NoSignal{};
    if (kind == "best_guess") return BestGuessSignal{j.at("word").get<std::string>(), j.at("score").get<double>()};
    if (kind == "short_advice") return ShortAdviceSignal{j.at("word").get<std::string>()};
    if (kind == "long_advice") return LongAdviceSignal{j.at("text").get<std::string>()};
    if (kind == "full_history") {
        FullHistorySignal s;
        for (const auto& row : j.at("guesses")) {
            s.guesses.push_back({row.at("round").get<std::size_t>(), row.at("turn").get<std::size_t>(),
                                 row.at("word").get<std::string>(), row.at("score").get<double>()});
        }
        return s;
    }
    throw std::invalid_argument(fmt::format("unknown signal kind '{}'", kind));
}

json scored_json(const ScoredWord& w) {
    return {{"word", w.word}, {"score", w.score}};
}

ScoredWord scored_from_json(const json& j) {
    return {j.at("word").get<std::string>(), j.at("score").get<double>()};
}

json guess_json(const Guess& g) {
    return {{"round", g.round},         {"turn", g.turn},         {"word", g.word},
            {"raw_input", g.raw_input}, {"score", g.score},       {"agent_id", g.agent_id},
            {"agent_kind", g.agent_kind}, {"timestamp", format_timestamp(g.timestamp)}};
}

Guess guess_from_json(const json& j) {
    Guess g;
    g.round = j.at("round").get<std::size_t>();
    g.turn = j.at("turn").get<std::size_t>();
    g.word = j.at("word").get<std::string>();
    g.raw_input = j.at("raw_input").get<std::string>();
    g.score = j.at("score").get<double>();
    g.agent_id = j.at("agent_id").get<std::string>();
    g.agent_kind = j.at("agent_kind").get<std::string>();
    g.timestamp = parse_timestamp(j.at("timestamp").get<std::string>());
    return g;
}

}  // namespace

json to_json(const Observation& obs) {
    json history = json::array();
    for (const auto& g : obs.own_round_history) history.push_back(scored_json(g));
    return {{"round", obs.round},
            {"turn", obs.turn},
            {"turns_per_round", obs.turns_per_round},
            {"signal", signal_json(obs.signal)},
            {"own_round_history", std::move(history)}};
}

Observation observation_from_json(const json& j) {
    Observation obs;
    obs.round = j.at("round").get<std::size_t>();
    obs.turn = j.at("turn").get<std::size_t>();
    obs.turns_per_round = j.at("turns_per_round").get<std::size_t>();
    obs.signal = signal_from_json(j.at("signal"));
    for (const auto& g : j.at("own_round_history")) obs.own_round_history.push_back(scored_from_json(g));
    return obs;
}

void validate(const GameConfig& config) {
    const auto fail = [](const std::string& msg) { throw GameError(GameError::Code::invalid_config, msg); };
    if (config.game_id.empty()) fail("game_id must not be empty");
    if (config.rounds_per_game < 1) fail("rounds_per_game must be >= 1");
    if (config.turns_per_round < 1) fail("turns_per_round must be >= 1");
    if (config.roster.size() != config.rounds_per_game) {
        fail(fmt::format("roster has {} entries for {} rounds", config.roster.size(), config.rounds_per_game));
    }
    if (!(config.max_score > 0.0)) fail("max_score must be > 0");
    for (const auto& d : config.roster) {
        try {
            validate(d, config.turns_per_round);
        } catch (const std::invalid_argument& e) {
            fail(fmt::format("invalid roster: {}", e.what()));
        }
    }
}

Game::Game(const EmbeddingTable& table, GameConfig config, Timestamp now) {
    validate(config);
    if (!table.contains(config.target)) {
        throw GameError(GameError::Code::invalid_config, fmt::format("target '{}' is not in the vocabulary", config.target));
    }
    scorer_.emplace(table, ScoreConfig{config.max_score, config.target, false});
    state_.config.game_id = config.game_id;
    auto event = make_event("game_started", now);
    event["player_facing"] = false;
    event["config"] = config;
    record(std::move(event));
}

Game Game::replay(std::span<const json> events, const EmbeddingTable* table) {
    if (events.empty() || events.front().value("type", "") != "game_started") {
        throw GameError(GameError::Code::bad_event, "event log must begin with game_started");
    }
    Game game;
    for (const auto& e : events) game.record(e);
    if (table) game.scorer_.emplace(*table, ScoreConfig{game.config().max_score, game.config().target, false});
    return game;
}

Game Game::resume(const GameState& snapshot, std::span<const json> later_events, const EmbeddingTable* table) {
    Game game;
    game.state_ = snapshot;
    for (const auto& e : later_events) {
        if (e.at("seq").get<std::uint64_t>() < snapshot.next_seq) continue;
        game.record(e);
    }
    if (table) game.scorer_.emplace(*table, ScoreConfig{game.config().max_score, game.config().target, false});
    return game;
}

bool Game::awaiting_advice() const {
    return is_advice_channel(state_.config.channel) && !complete() &&
           state_.advice_chain.size() < state_.completed_rounds();
}

const AgentDescriptor& Game::current_player() const {
    return state_.config.roster.at(state_.current_round - 1);
}

std::vector<ScoredWord> Game::round_history(std::size_t round) const {
    std::vector<ScoredWord> out;
    for (const auto& g : state_.guesses) {
        if (g.round == round) out.push_back({g.word, g.score});
    }
    return out;
}

Observation Game::observe() const {
    if (complete()) throw GameError(GameError::Code::game_complete, "game is complete");
    if (awaiting_advice()) {
        throw GameError(GameError::Code::awaiting_advice, "waiting for advice from the previous round");
    }
    Observation obs;
    obs.round = state_.current_round;
    obs.turn = state_.current_turn;
    obs.turns_per_round = state_.config.turns_per_round;
    obs.own_round_history = round_history(obs.round);

    const std::size_t prior = obs.round - 1;
    if (prior == 0) {
        obs.signal = NoSignal{};
        return obs;
    }
    switch (state_.config.channel) {
        case ChannelKind::best_guess: {
            const auto& bests = state_.round_bests;
            const ScoredWord hint = state_.config.hint_mode == HintMode::running_max
                                        ? best_of(std::span<const ScoredWord>(bests.data(), prior))
                                        : bests[prior - 1];
            obs.signal = BestGuessSignal{hint.word, hint.score};
            break;
        }
        case ChannelKind::full_history: {
            FullHistorySignal s;
            for (const auto& g : state_.guesses) {
                if (g.round <= prior) s.guesses.push_back({g.round, g.turn, g.word, g.score});
            }
            obs.signal = std::move(s);
            break;
        }
        case ChannelKind::short_advice:
            obs.signal = ShortAdviceSignal{state_.advice_chain.back()};
            break;
        case ChannelKind::long_advice:
            obs.signal = LongAdviceSignal{state_.advice_chain.back()};
            break;
    }
    return obs;
}

double Game::submit_guess(std::string_view raw, std::string_view agent_id, Timestamp now) {
    if (complete()) throw GameError(GameError::Code::game_complete, "game is complete");
    if (!scorer_) throw GameError(GameError::Code::invalid_config, "read-only replay: no embedding table attached");
    if (trim(raw).empty()) throw GameError(GameError::Code::empty_guess, "guess is empty");
    if (!is_valid_utf8(raw)) throw GameError(GameError::Code::invalid_text, "guess is not valid UTF-8");
    if (awaiting_advice()) {
        throw GameError(GameError::Code::awaiting_advice, "waiting for advice from the previous round");
    }
    const auto& slot = current_player();
    const bool id_mismatch = (!slot.agent_id.empty() && slot.agent_id != agent_id) ||
                             (!state_.round_player.empty() && state_.round_player != agent_id);
    if (id_mismatch) {
        throw GameError(GameError::Code::wrong_agent,
                        fmt::format("agent '{}' is not assigned to round {}", agent_id, state_.current_round));
    }

    const std::string word = sanitize_guess(raw);
    const double score = scorer_->score(word);
    const std::size_t round = state_.current_round;

    auto event = make_event("guess_submitted", now);
    event["round"] = round;
    event["turn"] = state_.current_turn;
    event["agent_id"] = agent_id;
    event["agent_kind"] = kind_tag(slot);
    event["raw_input"] = raw;
    event["word"] = word;
    event["score"] = score;
    record(std::move(event));

    if (state_.current_turn > state_.config.turns_per_round) {
        const auto best = best_of(round_history(round));
        auto done = make_event("round_completed", now);
        done["round"] = round;
        done["best_word"] = best.word;
        done["best_score"] = best.score;
        record(std::move(done));

        if (round == state_.config.rounds_per_game) {
            auto finished = make_event("game_completed", now);
            finished["player_facing"] = false;
            finished["target"] = state_.config.target;
            finished["best_word"] = state_.running_best->word;
            finished["best_score"] = state_.running_best->score;
            finished["guess_count"] = state_.guesses.size();
            record(std::move(finished));
        }
    }
    return score;
}

void Game::submit_advice(std::string_view payload, Timestamp now) {
    const auto channel = state_.config.channel;
    if (!is_advice_channel(channel)) {
        throw GameError(GameError::Code::wrong_channel,
                        fmt::format("advice is not used on the {} channel", to_string(channel)));
    }
    if (complete()) throw GameError(GameError::Code::game_complete, "game is complete");
    if (!awaiting_advice()) {
        throw GameError(GameError::Code::advice_not_due, "advice is only accepted once per finished round");
    }
    if (!is_valid_utf8(payload)) throw GameError(GameError::Code::invalid_text, "advice is not valid UTF-8");

    std::string stored;
    if (channel == ChannelKind::short_advice) {
        const auto tokens = split_whitespace(payload);
        if (tokens.size() != 1) {
            throw GameError(GameError::Code::invalid_advice,
                            fmt::format("short advice must be a single word, got {} tokens", tokens.size()));
        }
        stored = sanitize_guess(tokens.front());
        if (stored.empty()) throw GameError(GameError::Code::invalid_advice, "short advice has no letters");
    } else {
        stored = truncate_utf8(payload, kMaxLongAdviceChars);
    }

    auto event = make_event("advice_submitted", now);
    event["round"] = state_.completed_rounds();
    event["payload"] = stored;
    record(std::move(event));
}

json Game::make_event(std::string_view type, Timestamp now) {
    return {{"type", type},
            {"game_id", state_.config.game_id},
            {"seq", state_.next_seq},
            {"timestamp", format_timestamp(now)}};
}

void Game::record(json event) {
    apply(event);
    events_.push_back(std::move(event));
}

void Game::apply(const json& event) {
    const auto type = event.at("type").get<std::string>();
    const auto seq = event.at("seq").get<std::uint64_t>();
    if (seq != state_.next_seq) {
        throw GameError(GameError::Code::bad_event,
                        fmt::format("event sequence gap: expected {}, got {}", state_.next_seq, seq));
    }

    if (type == "game_started") {
        const auto config = event.at("config").get<GameConfig>();
        validate(config);
        state_ = GameState{};
        state_.config = config;
    } else if (type == "guess_submitted") {
        Guess g = guess_from_json(event);
        if (complete() || g.round != state_.current_round || g.turn != state_.current_turn) {
            throw GameError(GameError::Code::bad_event,
                            fmt::format("guess for round {} turn {} out of order", g.round, g.turn));
        }
        if (state_.round_player.empty()) state_.round_player = g.agent_id;
        if (!state_.running_best || g.score > state_.running_best->score) {
            state_.running_best = ScoredWord{g.word, g.score};
        }
        state_.guesses.push_back(std::move(g));
        ++state_.current_turn;
    } else if (type == "round_completed") {
        state_.round_bests.push_back({event.at("best_word").get<std::string>(), event.at("best_score").get<double>()});
        if (state_.current_round < state_.config.rounds_per_game) {
            ++state_.current_round;
            state_.current_turn = 1;
            state_.round_player.clear();
        }
    } else if (type == "advice_submitted") {
        state_.advice_chain.push_back(event.at("payload").get<std::string>());
    } else if (type == "game_completed") {
        state_.status = GameStatus::complete;
    } else {
        throw GameError(GameError::Code::bad_event, fmt::format("unknown event type '{}'", type));
    }
    ++state_.next_seq;
}

json snapshot_json(const GameState& s) {
    json guesses = json::array();
    for (const auto& g : s.guesses) guesses.push_back(guess_json(g));
    json bests = json::array();
    for (const auto& b : s.round_bests) bests.push_back(scored_json(b));
    return {{"config", s.config},
            {"guesses", std::move(guesses)},
            {"current_round", s.current_round},
            {"current_turn", s.current_turn},
            {"running_best", s.running_best ? scored_json(*s.running_best) : json(nullptr)},
            {"round_bests", std::move(bests)},
            {"advice_chain", s.advice_chain},
            {"round_player", s.round_player},
            {"status", s.status == GameStatus::complete ? "complete" : "in_progress"},
            {"next_seq", s.next_seq}};
}

GameState state_from_snapshot(const json& j) {
    GameState s;
    s.config = j.at("config").get<GameConfig>();
    for (const auto& g : j.at("guesses")) s.guesses.push_back(guess_from_json(g));
    s.current_round = j.at("current_round").get<std::size_t>();
    s.current_turn = j.at("current_turn").get<std::size_t>();
    if (!j.at("running_best").is_null()) s.running_best = scored_from_json(j.at("running_best"));
    for (const auto& b : j.at("round_bests")) s.round_bests.push_back(scored_from_json(b));
    s.advice_chain = j.at("advice_chain").get<std::vector<std::string>>();
    s.round_player = j.at("round_player").get<std::string>();
    s.status = j.at("status").get<std::string>() == "complete" ? GameStatus::complete : GameStatus::in_progress;
    s.next_seq = j.at("next_seq").get<std::uint64_t>();
    return s;
}

}  // namespace semchain
