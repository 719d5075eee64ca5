#include "semchain/prompts.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "semchain/atomic_file.hpp"

namespace semchain {

namespace {

constexpr std::string_view kGuessV1 =
    "You are playing a word-guessing game. There is a hidden target word. After each guess you receive a "
    "similarity score: the closer your word is in meaning to the hidden word, the higher the score.\n"
    "{hint}\n"
    "{own_history}\n"
    "This is turn {turn} of {turns_per_round}.\n"
    "{retry}\n"
    "{instruction} Reply with a single English word and nothing else.";

constexpr std::string_view kAdviceShortV1 =
    "You have just finished a round of a word-guessing game in which guesses are scored by their similarity "
    "in meaning to a hidden target word.\n"
    "{round_summary}\n"
    "{retry}\n"
    "Pass one word of advice to the next player. Reply with exactly one English word and nothing else.";

constexpr std::string_view kAdviceLongV1 =
    "You have just finished a round of a word-guessing game in which guesses are scored by their similarity "
    "in meaning to a hidden target word.\n"
    "{round_summary}\n"
    "{retry}\n"
    "Write a few sentences of advice for the next player (at most 1000 characters).";

// Single pass, so substituted values are never re-scanned for placeholders.
std::string substitute(std::string_view text, const std::map<std::string, std::string, std::less<>>& values) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto open = text.find('{', pos);
        if (open == std::string_view::npos) break;
        const auto close = text.find('}', open);
        if (close == std::string_view::npos) break;
        out.append(text.substr(pos, open - pos));
        const auto it = values.find(text.substr(open + 1, close - open - 1));
        if (it != values.end()) {
            out += it->second;
        } else {
            out.append(text.substr(open, close - open + 1));
        }
        pos = close + 1;
    }
    out.append(text.substr(std::min(pos, text.size())));
    return out;
}

// Drops lines left empty by unused placeholders.
std::string collapse_blank_lines(const std::string& text) {
    std::string out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        const auto line = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
        if (line.find_first_not_of(" \t") != std::string::npos) {
            if (!out.empty()) out += '\n';
            out += line;
        }
        if (end == std::string::npos) break;
        pos = end + 1;
    }
    return out;
}

std::string own_history_text(std::span<const ScoredWord> history) {
    if (history.empty()) return "You have not made any guesses yet this round.";
    std::string out = "Your guesses so far this round:";
    for (std::size_t i = 0; i < history.size(); ++i) {
        out += fmt::format("\n  {}. {} - score {}", i + 1, history[i].word, format_score(history[i].score));
    }
    return out;
}

std::string retry_text(std::span<const LlmExchange> history) {
    std::string out;
    for (const auto& ex : history) {
        if (ex.sanitized_word) continue;
        if (!out.empty()) out += '\n';
        if (!ex.error.empty()) {
            out += "Your previous reply could not be received.";
        } else {
            out += fmt::format("Your previous reply \"{}\" did not contain a usable single English word.",
                               ex.raw_response.substr(0, 200));
        }
    }
    return out;
}

}  // namespace

PromptLibrary::PromptLibrary() {
    templates_.emplace("guess-v1", kGuessV1);
    templates_.emplace("advice-short-v1", kAdviceShortV1);
    templates_.emplace("advice-long-v1", kAdviceLongV1);
}

void PromptLibrary::load(const std::filesystem::path& path) {
    const auto doc = nlohmann::json::parse(read_file(path));
    for (const auto& [id, text] : doc.items()) add(id, text.get<std::string>());
}

void PromptLibrary::add(std::string id, std::string text) {
    templates_[std::move(id)] = std::move(text);
}

bool PromptLibrary::contains(std::string_view id) const {
    return templates_.find(id) != templates_.end();
}

const std::string& PromptLibrary::get(std::string_view id) const {
    const auto it = templates_.find(id);
    if (it == templates_.end()) throw UnknownTemplate(id);
    return it->second;
}

const PromptLibrary& PromptLibrary::builtin() {
    static const PromptLibrary library;
    return library;
}

std::string format_score(double score) {
    return fmt::format("{:.2f}", score);
}

std::string describe_signal(const SocialSignal& signal) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, NoSignal>) {
                return "";
            } else if constexpr (std::is_same_v<T, BestGuessSignal>) {
                return fmt::format("The best guess so far from previous players is \"{}\" with a score of {}.",
                                   s.word, format_score(s.score));
            } else if constexpr (std::is_same_v<T, FullHistorySignal>) {
                std::string out = "Here are all guesses made by previous players, in order:";
                for (const auto& g : s.guesses) {
                    out += fmt::format("\n  round {}, turn {}: {} - score {}", g.round, g.turn, g.word,
                                       format_score(g.score));
                }
                return out;
            } else if constexpr (std::is_same_v<T, ShortAdviceSignal>) {
                return fmt::format("The previous player left you one word of advice: \"{}\".", s.word);
            } else {
                return fmt::format("The previous player left you this advice:\n\"{}\"", s.text);
            }
        },
        signal);
}

std::string render_prompt(const PromptLibrary& library, std::string_view template_id, const Observation& observation,
                          std::span<const LlmExchange> history) {
    const std::map<std::string, std::string, std::less<>> values = {
        {"instruction", std::string(kGuessInstruction)},
        {"hint", describe_signal(observation.signal)},
        {"own_history", own_history_text(observation.own_round_history)},
        {"turn", std::to_string(observation.turn)},
        {"turns_per_round", std::to_string(observation.turns_per_round)},
        {"retry", retry_text(history)},
    };
    return collapse_blank_lines(substitute(library.get(template_id), values));
}

std::string render_prompt(std::string_view template_id, const Observation& observation,
                          std::span<const LlmExchange> history) {
    return render_prompt(PromptLibrary::builtin(), template_id, observation, history);
}

std::string render_advice_prompt(const PromptLibrary& library, std::string_view template_id,
                                 std::span<const ScoredWord> round_history, std::span<const LlmExchange> history) {
    std::string summary = "Your guesses this round:";
    for (std::size_t i = 0; i < round_history.size(); ++i) {
        summary += fmt::format("\n  {}. {} - score {}", i + 1, round_history[i].word, format_score(round_history[i].score));
    }
    const std::map<std::string, std::string, std::less<>> values = {
        {"round_summary", summary},
        {"retry", retry_text(history)},
    };
    return collapse_blank_lines(substitute(library.get(template_id), values));
}

}  // namespace semchain
