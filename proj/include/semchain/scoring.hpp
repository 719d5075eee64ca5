#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "semchain/embedding_store.hpp"

namespace semchain {

inline constexpr double kDefaultMaxScore = 201.69;

struct ScoreConfig {
    double max_score = kDefaultMaxScore;
    std::string target;
    // Player-facing payloads never carry max_score unless this is set.
    bool reveal_max_to_players = false;
};

class ScoringError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Binds a ScoreConfig to a table. Validates that max_score > 0 and the
// target is in the vocabulary.
class Scorer {
public:
    Scorer(const EmbeddingTable& table, ScoreConfig cfg);

    // max_score * cos(guess, target); 0 for out-of-vocabulary guesses and
    // exactly max_score when guess == target. Negative values are kept.
    double score(std::string_view guess) const;

    const ScoreConfig& config() const { return cfg_; }
    const EmbeddingTable& table() const { return *table_; }

private:
    const EmbeddingTable* table_;
    ScoreConfig cfg_;
    std::size_t target_row_;
};

double score_guess(const EmbeddingTable& table, const ScoreConfig& cfg, std::string_view guess);

struct ScoredWord {
    std::string word;
    double score = 0.0;

    bool operator==(const ScoredWord&) const = default;
};

// Highest score wins; ties keep the earliest entry.
ScoredWord best_of(std::span<const ScoredWord> guesses);

}  // namespace semchain
