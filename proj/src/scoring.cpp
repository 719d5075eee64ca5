#include "semchain/scoring.hpp"

#include <fmt/format.h>

namespace semchain {

Scorer::Scorer(const EmbeddingTable& table, ScoreConfig cfg) : table_(&table), cfg_(std::move(cfg)) {
    if (!(cfg_.max_score > 0.0)) throw ScoringError(fmt::format("max_score must be > 0, got {}", cfg_.max_score));
    const auto row = table.find(cfg_.target);
    if (!row) throw ScoringError(fmt::format("target '{}' is not in the vocabulary", cfg_.target));
    target_row_ = *row;
}

double Scorer::score(std::string_view guess) const {
    const auto row = table_->find(guess);
    if (!row) return 0.0;
    if (*row == target_row_) return cfg_.max_score;
    return cfg_.max_score * table_->cosine_rows(*row, target_row_);
}

double score_guess(const EmbeddingTable& table, const ScoreConfig& cfg, std::string_view guess) {
    return Scorer(table, cfg).score(guess);
}

ScoredWord best_of(std::span<const ScoredWord> guesses) {
    if (guesses.empty()) throw std::invalid_argument("best_of: empty guess list");
    const ScoredWord* best = &guesses.front();
    for (const auto& g : guesses.subspan(1)) {
        if (g.score > best->score) best = &g;
    }
    return *best;
}

}  // namespace semchain
