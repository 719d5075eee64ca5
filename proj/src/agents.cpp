#include "semchain/agents.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_set>

#include <fmt/format.h>

#include "semchain/text.hpp"

namespace semchain {

using nlohmann::json;

std::optional<std::string> sanitize_response(std::string_view raw, const EmbeddingTable& table) {
    for (auto& token : response_tokens(raw)) {
        if (table.contains(token)) return std::move(token);
    }
    return std::nullopt;
}

std::optional<std::string> anchor_word(const SocialSignal& signal, const EmbeddingTable& table) {
    std::optional<std::string> word;
    if (const auto* b = std::get_if<BestGuessSignal>(&signal)) {
        word = b->word;
    } else if (const auto* h = std::get_if<FullHistorySignal>(&signal)) {
        if (!h->guesses.empty()) {
            const auto* best = &h->guesses.front();
            for (const auto& g : h->guesses) {
                if (g.score > best->score) best = &g;
            }
            word = best->word;
        }
    } else if (const auto* s = std::get_if<ShortAdviceSignal>(&signal)) {
        word = s->word;
    } else if (const auto* l = std::get_if<LongAdviceSignal>(&signal)) {
        return sanitize_response(l->text, table);
    }
    if (word && table.contains(*word)) return word;
    return std::nullopt;
}

std::string best_word_sentence(const ScoredWord& best) {
    return fmt::format("{} was my best guess this round, with a score of {}. Try words close to it in meaning.",
                       best.word, format_score(best.score));
}

std::string Agent::produce_advice(ChannelKind channel, std::span<const ScoredWord> round_history, Rng&) {
    if (!is_advice_channel(channel)) throw AgentError("advice requested on a non-advice channel");
    if (round_history.empty()) throw AgentError("advice requested before the round was played");
    const auto best = best_of(round_history);
    return channel == ChannelKind::short_advice ? best.word : best_word_sentence(best);
}

namespace {

std::unordered_set<std::string> own_words(const Observation& obs) {
    std::unordered_set<std::string> out;
    for (const auto& g : obs.own_round_history) out.insert(g.word);
    return out;
}

class ScriptedAgent final : public Agent {
public:
    using Agent::Agent;

    std::string next_guess(const Observation& obs, Rng&) override {
        const auto& words = std::get<Scripted>(descriptor().kind).words;
        const std::size_t index = obs.turn - 1;
        if (index >= words.size()) {
            throw AgentError(fmt::format("{}: scripted list exhausted at turn {}", descriptor().agent_id, obs.turn));
        }
        return words[index];
    }
};

class RandomAgent final : public Agent {
public:
    RandomAgent(AgentDescriptor d, const EmbeddingTable& table) : Agent(std::move(d)), table_(table) {}

    std::string next_guess(const Observation&, Rng& rng) override {
        return table_.word(uniform_index(rng, table_.size()));
    }

private:
    const EmbeddingTable& table_;
};

// Explores by drawing from a random candidate pool; exploits by drawing from
// the nearest neighbours of the hint word. Never repeats its own guesses
// within a round while unguessed words remain.
class ForagerAgent final : public Agent {
public:
    ForagerAgent(AgentDescriptor d, const EmbeddingTable& table)
        : Agent(std::move(d)), params_(std::get<HeuristicForager>(descriptor().kind)), table_(table) {}

    std::string next_guess(const Observation& obs, Rng& rng) override {
        const auto own = own_words(obs);
        const auto anchor = anchor_word(obs.signal, table_);
        const bool explore = !anchor || bernoulli(rng, params_.explore_prob);
        if (!explore) {
            const auto candidates = neighbors(*anchor, own, obs.turns_per_round);
            if (!candidates.empty()) return candidates[uniform_index(rng, candidates.size())];
        }
        return explore_draw(own, rng);
    }

private:
    // The k nearest neighbours of `anchor` not yet guessed this round, in
    // nearest_neighbors order. The underlying scan is cached per anchor.
    std::vector<std::string> neighbors(const std::string& anchor, const std::unordered_set<std::string>& own,
                                       std::size_t turns_per_round) {
        const std::size_t depth = params_.neighborhood_k + turns_per_round;
        if (anchor != cached_anchor_ || cached_.size() < std::min(depth, table_.size() - 1)) {
            cached_.clear();
            for (auto& n : table_.nearest_neighbors(anchor, depth)) cached_.push_back(std::move(n.word));
            cached_anchor_ = anchor;
        }
        std::vector<std::string> out;
        for (const auto& w : cached_) {
            if (out.size() == params_.neighborhood_k) break;
            if (!own.contains(w)) out.push_back(w);
        }
        return out;
    }

    std::string explore_draw(const std::unordered_set<std::string>& own, Rng& rng) const {
        std::vector<std::size_t> pool;
        pool.reserve(params_.candidate_pool_size);
        for (std::size_t i = 0; i < params_.candidate_pool_size; ++i) {
            const auto row = uniform_index(rng, table_.size());
            if (!own.contains(table_.word(row))) pool.push_back(row);
        }
        if (!pool.empty()) return table_.word(pool[uniform_index(rng, pool.size())]);
        // Tiny vocabularies: fall back to any unguessed word.
        std::vector<std::size_t> rest;
        for (std::size_t row = 0; row < table_.size(); ++row) {
            if (!own.contains(table_.word(row))) rest.push_back(row);
        }
        if (rest.empty()) return table_.word(uniform_index(rng, table_.size()));
        return table_.word(rest[uniform_index(rng, rest.size())]);
    }

    HeuristicForager params_;
    const EmbeddingTable& table_;
    std::string cached_anchor_;
    std::vector<std::string> cached_;
};

class LlmAgent final : public Agent {
public:
    LlmAgent(AgentDescriptor d, const AgentEnvironment& env)
        : Agent(std::move(d)), params_(std::get<LlmChat>(descriptor().kind)), env_(env) {
        if (!env_.prompts->contains(params_.prompt_template)) throw UnknownTemplate(params_.prompt_template);
    }

    std::string next_guess(const Observation& obs, Rng& rng) override {
        std::vector<LlmExchange> exchanges;
        const auto word = ask(
            [&] { return render_prompt(*env_.prompts, params_.prompt_template, obs, exchanges); },
            [&](const std::string& raw) { return sanitize_response(raw, *env_.table); }, exchanges,
            {{"purpose", "guess"}, {"round", obs.round}, {"turn", obs.turn}});
        if (word) return *word;
        // Out of attempts: a seeded uniform draw keeps the round at full length.
        const auto fallback = env_.table->word(uniform_index(rng, env_.table->size()));
        report({{"purpose", "guess"}, {"round", obs.round}, {"turn", obs.turn}, {"fallback", fallback}});
        return fallback;
    }

    std::string produce_advice(ChannelKind channel, std::span<const ScoredWord> round_history, Rng& rng) override {
        if (!is_advice_channel(channel)) throw AgentError("advice requested on a non-advice channel");
        const bool is_short = channel == ChannelKind::short_advice;
        const auto& template_id = is_short ? env_.short_advice_template : env_.long_advice_template;
        std::vector<LlmExchange> exchanges;
        const auto advice = ask(
            [&] { return render_advice_prompt(*env_.prompts, template_id, round_history, exchanges); },
            [&](const std::string& raw) -> std::optional<std::string> {
                if (is_short) return sanitize_response(raw, *env_.table);
                auto text = truncate_utf8(trim(raw), kMaxLongAdviceChars);
                if (text.empty() || !is_valid_utf8(text)) return std::nullopt;
                return text;
            },
            exchanges, {{"purpose", is_short ? "short_advice" : "long_advice"}});
        if (advice) return *advice;
        auto fallback = Agent::produce_advice(channel, round_history, rng);
        report({{"purpose", is_short ? "short_advice" : "long_advice"}, {"fallback", fallback}});
        return fallback;
    }

private:
    template <typename Render, typename Accept>
    std::optional<std::string> ask(Render render, Accept accept, std::vector<LlmExchange>& exchanges,
                                   const json& context) {
        for (int attempt = 1; attempt <= std::max(1, env_.max_llm_attempts); ++attempt) {
            LlmExchange ex;
            ex.attempt = attempt;
            ex.prompt = render();
            ChatRequest request{params_.model, {{"user", ex.prompt}}, params_.temperature};
            const auto started = std::chrono::steady_clock::now();
            try {
                ex.raw_response = env_.llm->complete(request);
                ex.sanitized_word = accept(ex.raw_response);
            } catch (const ProviderError& e) {
                ex.error = e.what();
            }
            const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started);
            json record = context;
            record["agent_id"] = descriptor().agent_id;
            record["model"] = params_.model;
            record["attempt"] = attempt;
            record["prompt"] = ex.prompt;
            record["prompt_hash"] = prompt_hash(request);
            record["raw_response"] = ex.raw_response;
            record["sanitized"] = ex.sanitized_word ? json(*ex.sanitized_word) : json(nullptr);
            record["latency_ms"] = env_.deterministic ? 0.0 : elapsed.count();
            if (!ex.error.empty()) record["error"] = ex.error;
            report(std::move(record));
            exchanges.push_back(ex);
            if (ex.sanitized_word) return ex.sanitized_word;
        }
        return std::nullopt;
    }

    void report(json record) const {
        if (!record.contains("agent_id")) record["agent_id"] = descriptor().agent_id;
        if (env_.audit) env_.audit(record);
    }

    LlmChat params_;
    AgentEnvironment env_;
};

}  // namespace

std::unique_ptr<Agent> make_agent(const AgentDescriptor& descriptor, const AgentEnvironment& env) {
    if (!env.table && !std::holds_alternative<Scripted>(descriptor.kind)) {
        throw AgentError("agent environment has no embedding table");
    }
    return std::visit(
        [&](const auto& k) -> std::unique_ptr<Agent> {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, HumanPlayer>) {
                throw AgentError("human slots are played through the service, not simulated");
            } else if constexpr (std::is_same_v<T, Scripted>) {
                return std::make_unique<ScriptedAgent>(descriptor);
            } else if constexpr (std::is_same_v<T, RandomGuesser>) {
                return std::make_unique<RandomAgent>(descriptor, *env.table);
            } else if constexpr (std::is_same_v<T, HeuristicForager>) {
                return std::make_unique<ForagerAgent>(descriptor, *env.table);
            } else {
                if (!env.llm) throw AgentError(fmt::format("{}: llm_chat agent needs a chat client", descriptor.agent_id));
                return std::make_unique<LlmAgent>(descriptor, env);
            }
        },
        descriptor.kind);
}

std::string next_guess(const AgentDescriptor& descriptor, const Observation& observation, Rng& rng,
                       const AgentEnvironment& env) {
    return make_agent(descriptor, env)->next_guess(observation, rng);
}

std::string produce_advice(const AgentDescriptor& descriptor, ChannelKind channel,
                           std::span<const ScoredWord> round_history, Rng& rng, const AgentEnvironment& env) {
    return make_agent(descriptor, env)->produce_advice(channel, round_history, rng);
}

}  // namespace semchain
