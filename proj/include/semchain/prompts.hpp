#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "semchain/game.hpp"

namespace semchain {

// One prompt/response round trip with a chat model.
struct LlmExchange {
    std::string prompt;
    std::string raw_response;
    std::optional<std::string> sanitized_word;
    int attempt = 1;
    std::string error;  // transport failure, if any
};

class UnknownTemplate : public std::out_of_range {
public:
    explicit UnknownTemplate(std::string_view id) : std::out_of_range("unknown prompt template '" + std::string(id) + "'") {}
};

// Instruction shown to every player, human or machine.
inline constexpr std::string_view kGuessInstruction = "Please enter your one-word guess.";

// Versioned prompt templates. Placeholders:
//   {hint}             social signal sentence(s); empty in round 1
//   {own_history}      this round's guesses with scores
//   {turn} {turns_per_round}
//   {instruction}      kGuessInstruction
//   {retry}            note about unusable earlier replies this turn
//   {round_summary}    (advice templates) the finished round's guesses
//
// Built-ins: "guess-v1", "advice-short-v1", "advice-long-v1".
class PromptLibrary {
public:
    PromptLibrary();

    // Adds or replaces templates from a JSON object {"id": "text", ...}.
    void load(const std::filesystem::path& path);
    void add(std::string id, std::string text);

    bool contains(std::string_view id) const;
    const std::string& get(std::string_view id) const;

    static const PromptLibrary& builtin();

private:
    std::map<std::string, std::string, std::less<>> templates_;
};

// Deterministic guess prompt. Uses only the observation, so it can never
// carry the target or the maximum score.
std::string render_prompt(const PromptLibrary& library, std::string_view template_id, const Observation& observation,
                          std::span<const LlmExchange> history);
std::string render_prompt(std::string_view template_id, const Observation& observation,
                          std::span<const LlmExchange> history);

std::string render_advice_prompt(const PromptLibrary& library, std::string_view template_id,
                                 std::span<const ScoredWord> round_history, std::span<const LlmExchange> history);

std::string format_score(double score);
std::string describe_signal(const SocialSignal& signal);

}  // namespace semchain
