#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "semchain/agent_descriptor.hpp"
#include "semchain/embedding_store.hpp"
#include "semchain/game.hpp"
#include "semchain/llm_client.hpp"
#include "semchain/prompts.hpp"
#include "semchain/rng.hpp"

namespace semchain {

class AgentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Lowercase, strip punctuation and quotes, split on whitespace and return the
// first token that is in the vocabulary.
std::optional<std::string> sanitize_response(std::string_view raw, const EmbeddingTable& table);

// The word a forager anchors its exploitation on: the best-guess word, the
// top entry of a full history, or the first in-vocabulary advice token.
std::optional<std::string> anchor_word(const SocialSignal& signal, const EmbeddingTable& table);

struct AgentEnvironment {
    const EmbeddingTable* table = nullptr;
    std::shared_ptr<ChatClient> llm;  // required by llm_chat agents
    const PromptLibrary* prompts = &PromptLibrary::builtin();
    // Receives one record per LLM call: prompt, raw response, attempt,
    // latency and outcome.
    std::function<void(const nlohmann::json&)> audit;
    bool deterministic = false;  // report zero latency
    int max_llm_attempts = 3;
    std::string short_advice_template = "advice-short-v1";
    std::string long_advice_template = "advice-long-v1";
};

class Agent {
public:
    explicit Agent(AgentDescriptor descriptor) : descriptor_(std::move(descriptor)) {}
    virtual ~Agent() = default;

    const AgentDescriptor& descriptor() const { return descriptor_; }

    // A raw guess for the engine to sanitise and score.
    virtual std::string next_guess(const Observation& observation, Rng& rng) = 0;

    // Advice for the next player on advice channels. The default names the
    // best word of the round (as a sentence on the long channel).
    virtual std::string produce_advice(ChannelKind channel, std::span<const ScoredWord> round_history, Rng& rng);

private:
    AgentDescriptor descriptor_;
};

// Throws AgentError for human slots (humans play through the service) or a
// missing table / chat client.
std::unique_ptr<Agent> make_agent(const AgentDescriptor& descriptor, const AgentEnvironment& env);

std::string next_guess(const AgentDescriptor& descriptor, const Observation& observation, Rng& rng,
                       const AgentEnvironment& env);
std::string produce_advice(const AgentDescriptor& descriptor, ChannelKind channel,
                           std::span<const ScoredWord> round_history, Rng& rng, const AgentEnvironment& env);

// Sentence used for long advice by non-LLM agents and as the LLM fallback.
std::string best_word_sentence(const ScoredWord& best);

}  // namespace semchain
