#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace semchain {

struct HumanPlayer {
    bool operator==(const HumanPlayer&) const = default;
};

struct LlmChat {
    std::string model;
    std::string prompt_template = "guess-v1";
    double temperature = 1.0;

    bool operator==(const LlmChat&) const = default;
};

struct HeuristicForager {
    double explore_prob = 0.1;
    std::size_t neighborhood_k = 10;
    std::size_t candidate_pool_size = 100;

    bool operator==(const HeuristicForager&) const = default;
};

struct RandomGuesser {
    bool operator==(const RandomGuesser&) const = default;
};

struct Scripted {
    std::vector<std::string> words;

    bool operator==(const Scripted&) const = default;
};

using AgentKind = std::variant<HumanPlayer, LlmChat, HeuristicForager, RandomGuesser, Scripted>;

// One roster slot. An empty agent_id on a human slot means "whoever joins".
struct AgentDescriptor {
    std::string agent_id;
    AgentKind kind;

    bool is_human() const { return std::holds_alternative<HumanPlayer>(kind); }
    bool operator==(const AgentDescriptor&) const = default;
};

// "human", "llm_chat", "heuristic_forager", "random" or "scripted".
std::string_view kind_tag(const AgentDescriptor& descriptor);

// Throws std::invalid_argument on explore_prob outside [0,1], zero k or pool
// size, or a scripted list shorter than `turns_per_round`.
void validate(const AgentDescriptor& descriptor, std::size_t turns_per_round);

void to_json(nlohmann::json& j, const AgentDescriptor& d);
void from_json(const nlohmann::json& j, AgentDescriptor& d);

}  // namespace semchain
