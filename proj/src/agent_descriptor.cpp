#include "semchain/agent_descriptor.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace semchain {

using nlohmann::json;

std::string_view kind_tag(const AgentDescriptor& descriptor) {
    return std::visit(
        [](const auto& k) -> std::string_view {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, HumanPlayer>) return "human";
            if constexpr (std::is_same_v<T, LlmChat>) return "llm_chat";
            if constexpr (std::is_same_v<T, HeuristicForager>) return "heuristic_forager";
            if constexpr (std::is_same_v<T, RandomGuesser>) return "random";
            if constexpr (std::is_same_v<T, Scripted>) return "scripted";
        },
        descriptor.kind);
}

void validate(const AgentDescriptor& descriptor, std::size_t turns_per_round) {
    if (const auto* f = std::get_if<HeuristicForager>(&descriptor.kind)) {
        if (!(f->explore_prob >= 0.0 && f->explore_prob <= 1.0)) {
            throw std::invalid_argument(fmt::format("{}: explore_prob {} outside [0,1]", descriptor.agent_id, f->explore_prob));
        }
        if (f->neighborhood_k < 1) throw std::invalid_argument(descriptor.agent_id + ": neighborhood_k must be >= 1");
        if (f->candidate_pool_size < 1) {
            throw std::invalid_argument(descriptor.agent_id + ": candidate_pool_size must be >= 1");
        }
    } else if (const auto* s = std::get_if<Scripted>(&descriptor.kind)) {
        if (s->words.size() < turns_per_round) {
            throw std::invalid_argument(fmt::format("{}: scripted list has {} words for {} turns", descriptor.agent_id,
                                                    s->words.size(), turns_per_round));
        }
    } else if (const auto* l = std::get_if<LlmChat>(&descriptor.kind)) {
        if (l->prompt_template.empty()) throw std::invalid_argument(descriptor.agent_id + ": empty prompt template id");
    }
}

void to_json(json& j, const AgentDescriptor& d) {
    j = json{{"agent_id", d.agent_id}, {"kind", kind_tag(d)}};
    std::visit(
        [&j](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, LlmChat>) {
                j["model"] = k.model;
                j["prompt_template"] = k.prompt_template;
                j["temperature"] = k.temperature;
            } else if constexpr (std::is_same_v<T, HeuristicForager>) {
                j["explore_prob"] = k.explore_prob;
                j["neighborhood_k"] = k.neighborhood_k;
                j["candidate_pool_size"] = k.candidate_pool_size;
            } else if constexpr (std::is_same_v<T, Scripted>) {
                j["words"] = k.words;
            }
        },
        d.kind);
}

void from_json(const json& j, AgentDescriptor& d) {
    d.agent_id = j.value("agent_id", std::string());
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "human") {
        d.kind = HumanPlayer{};
    } else if (kind == "llm_chat") {
        LlmChat k;
        k.model = j.value("model", std::string());
        k.prompt_template = j.value("prompt_template", k.prompt_template);
        k.temperature = j.value("temperature", k.temperature);
        d.kind = k;
    } else if (kind == "heuristic_forager") {
        HeuristicForager k;
        k.explore_prob = j.value("explore_prob", k.explore_prob);
        k.neighborhood_k = j.value("neighborhood_k", k.neighborhood_k);
        k.candidate_pool_size = j.value("candidate_pool_size", k.candidate_pool_size);
        d.kind = k;
    } else if (kind == "random") {
        d.kind = RandomGuesser{};
    } else if (kind == "scripted") {
        d.kind = Scripted{j.at("words").get<std::vector<std::string>>()};
    } else {
        throw std::invalid_argument(fmt::format("unknown agent kind '{}'", kind));
    }
}

}  // namespace semchain
