#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "semchain/embedding_store.hpp"
#include "semchain/log_reader.hpp"
#include "semchain/stats.hpp"

namespace semchain {

class MetricError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Grouping unit for the spread of individual performance.
enum class PerformanceUnit { round, participant };

struct DiversityOptions {
    // Out-of-vocabulary guesses have no vector and are left out by default.
    // When included they count as orthogonal to every other word (and
    // identical to repeats of themselves).
    bool include_oov = false;
};

// Highest score of each played round, in (game, round) order.
std::vector<double> round_maxima(std::span<const GameRecord> games);

// Mean of per-round maxima. With PerformanceUnit::participant each round
// player's maxima are averaged first and the estimate is across players.
Estimate individual_performance(std::span<const GameRecord> games, PerformanceUnit unit = PerformanceUnit::round);

// Mean over games of the highest score reached in each game.
Estimate collective_performance(std::span<const GameRecord> games);

// 1 - mean pairwise cosine over all unordered pairs of eligible words, with
// repeats kept. Absent when fewer than two words are eligible.
std::optional<double> word_set_diversity(std::span<const std::string> words, const EmbeddingTable& table,
                                         const DiversityOptions& options = {});

struct DiversitySummary {
    std::optional<Estimate> estimate;  // absent when every round was excluded
    std::size_t rounds = 0;
    std::size_t excluded_rounds = 0;  // fewer than two eligible words
};

// Per-round diversity averaged over the rounds of `games`.
DiversitySummary individual_diversity(std::span<const GameRecord> games, const EmbeddingTable& table,
                                      const DiversityOptions& options = {});

// Diversity of every guess pooled across `games` (those sharing a target).
std::optional<double> collective_diversity(std::span<const GameRecord> games, const EmbeddingTable& table,
                                           const DiversityOptions& options = {});

// Unique words / total guesses, OOV included. Throws on an empty list.
double lexical_diversity(std::span<const std::string> words);
double lexical_diversity(std::span<const GameRecord> games);

struct CurvePoint {
    std::size_t round = 0;
    Estimate estimate;
};

// Round-r maxima across games, for every round index that was played.
std::vector<CurvePoint> performance_by_round(std::span<const GameRecord> games);

struct Centroid {
    std::string game_id;
    std::size_t round = 0;
    std::size_t words = 0;  // in-vocabulary guesses averaged
    std::vector<double> mean;
};

// Mean guess vector per round; rounds without an in-vocabulary guess are
// skipped.
std::vector<Centroid> round_centroids(const GameRecord& game, const EmbeddingTable& table);

// Pearson r between per-round diversity and per-round maximum score over the
// rounds whose diversity is defined.
std::optional<PearsonResult> performance_diversity_r(std::span<const GameRecord> games, const EmbeddingTable& table,
                                                     const DiversityOptions& options = {});

struct MetricsRow {
    std::string condition;
    std::string target;  // "all" for the pooled row
    std::size_t games = 0;
    std::size_t rounds = 0;
    std::size_t guesses = 0;
    Estimate individual_performance;
    Estimate collective_performance;
    DiversitySummary individual_diversity;
    std::optional<double> collective_diversity;  // mean over targets on "all" rows
    double lexical_diversity = 0.0;              // mean over targets on "all" rows
    std::optional<PearsonResult> performance_diversity;
};

struct AgentKindRow {
    std::string condition;
    std::string agent_kind;
    std::size_t rounds = 0;
    Estimate individual_performance;
    DiversitySummary individual_diversity;
    double lexical_diversity = 0.0;
};

struct PairwiseTest {
    std::string metric;  // "individual_performance" or "collective_performance"
    std::string condition_a;
    std::string condition_b;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    std::optional<WelchResult> welch;  // absent when a sample has n < 2
    std::optional<double> cohen_d;     // absent when undefined
    double p_adjusted = 1.0;
    bool reject = false;
};

struct CurveRow {
    std::string condition;
    std::size_t round = 0;
    Estimate estimate;
};

struct AnalysisOptions {
    PerformanceUnit unit = PerformanceUnit::round;
    DiversityOptions diversity;
    double fdr_q = 0.05;
};

struct MetricsReport {
    std::vector<MetricsRow> rows;
    std::vector<CurveRow> curves;
    std::vector<AgentKindRow> by_agent_kind;
    std::vector<PairwiseTest> tests;
};

// Groups games by condition label (and target) and computes every measure.
// Throws MetricError when `games` is empty.
MetricsReport analyze(std::span<const GameRecord> games, const EmbeddingTable& table, const AnalysisOptions& options = {});

// Writes metrics_by_condition.csv, performance_by_round.csv,
// metrics_by_agent_kind.csv and pairwise_tests.csv into `dir`, each
// atomically.
void write_report_csv(const MetricsReport& report, const std::filesystem::path& dir);

// One row per (game, round): game_id, round, words, c0 .. c{d-1}.
std::string centroids_csv(std::span<const Centroid> centroids, std::size_t dim);

}  // namespace semchain
