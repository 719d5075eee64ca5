#pragma once

// Brute-force recomputation of the analysis measures straight from raw event
// JSON, sharing no code with the metrics module.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semchain/embedding_store.hpp"
#include "semchain/game.hpp"
#include "semchain/rng.hpp"
#include "test_support.hpp"

namespace semchain::testing {

struct OracleGuess {
    std::size_t round;
    std::string word;
    double score;
};

inline std::vector<OracleGuess> oracle_guesses(const std::vector<nlohmann::json>& events) {
    std::vector<OracleGuess> out;
    for (const auto& e : events) {
        if (e["type"] != "guess_submitted") continue;
        out.push_back({e["round"].get<std::size_t>(), e["word"].get<std::string>(), e["score"].get<double>()});
    }
    return out;
}

inline double oracle_mean(const std::vector<double>& xs) {
    long double s = 0;
    for (const double x : xs) s += x;
    return static_cast<double>(s / static_cast<long double>(xs.size()));
}

// Maxima of each played round, game by game.
inline std::vector<double> oracle_round_maxima(const std::vector<std::vector<nlohmann::json>>& logs) {
    std::vector<double> out;
    for (const auto& log : logs) {
        std::map<std::size_t, double> best;
        for (const auto& g : oracle_guesses(log)) {
            const auto it = best.find(g.round);
            if (it == best.end() || g.score > it->second) best[g.round] = g.score;
        }
        for (const auto& [r, s] : best) out.push_back(s);
    }
    return out;
}

inline std::vector<double> oracle_game_maxima(const std::vector<std::vector<nlohmann::json>>& logs) {
    std::vector<double> out;
    for (const auto& log : logs) {
        const auto gs = oracle_guesses(log);
        if (gs.empty()) continue;
        double best = gs[0].score;
        for (const auto& g : gs) best = std::max(best, g.score);
        out.push_back(best);
    }
    return out;
}

// 1 - mean cosine over all unordered pairs; OOV words skipped.
inline std::optional<double> oracle_diversity(const std::vector<std::string>& words, const EmbeddingTable& table) {
    std::vector<std::string> kept;
    for (const auto& w : words) {
        if (table.contains(w)) kept.push_back(w);
    }
    if (kept.size() < 2) return std::nullopt;
    long double sum = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        for (std::size_t j = i + 1; j < kept.size(); ++j) {
            sum += kept[i] == kept[j] ? 1.0L : static_cast<long double>(oracle_cosine(table, kept[i], kept[j]));
            ++pairs;
        }
    }
    return static_cast<double>(1.0L - sum / static_cast<long double>(pairs));
}

inline std::optional<double> oracle_individual_diversity(const std::vector<std::vector<nlohmann::json>>& logs,
                                                         const EmbeddingTable& table) {
    std::vector<double> values;
    for (const auto& log : logs) {
        std::map<std::size_t, std::vector<std::string>> rounds;
        for (const auto& g : oracle_guesses(log)) rounds[g.round].push_back(g.word);
        for (const auto& [r, words] : rounds) {
            if (const auto d = oracle_diversity(words, table)) values.push_back(*d);
        }
    }
    if (values.empty()) return std::nullopt;
    return oracle_mean(values);
}

inline std::optional<double> oracle_collective_diversity(const std::vector<std::vector<nlohmann::json>>& logs,
                                                         const EmbeddingTable& table) {
    std::vector<std::string> words;
    for (const auto& log : logs) {
        for (const auto& g : oracle_guesses(log)) words.push_back(g.word);
    }
    return oracle_diversity(words, table);
}

inline double oracle_lexical(const std::vector<std::vector<nlohmann::json>>& logs) {
    std::set<std::string> unique;
    std::size_t total = 0;
    for (const auto& log : logs) {
        for (const auto& g : oracle_guesses(log)) {
            unique.insert(g.word);
            ++total;
        }
    }
    return static_cast<double>(unique.size()) / static_cast<double>(total);
}

// Round index -> mean of that round's maxima over the games that played it.
inline std::map<std::size_t, double> oracle_curve(const std::vector<std::vector<nlohmann::json>>& logs) {
    std::map<std::size_t, std::vector<double>> by_round;
    for (const auto& log : logs) {
        std::map<std::size_t, double> best;
        for (const auto& g : oracle_guesses(log)) {
            const auto it = best.find(g.round);
            if (it == best.end() || g.score > it->second) best[g.round] = g.score;
        }
        for (const auto& [r, s] : best) by_round[r].push_back(s);
    }
    std::map<std::size_t, double> out;
    for (const auto& [r, xs] : by_round) out[r] = oracle_mean(xs);
    return out;
}

// A random game played through the engine with scripted rosters: up to
// 200 guesses, a mix of vocabulary words, repeats and junk strings, and
// sometimes stopped part-way through.
inline std::vector<nlohmann::json> random_game_log(Rng& rng, const EmbeddingTable& table, const std::string& id,
                                                   const std::string& target) {
    GameConfig c;
    c.game_id = id;
    c.target = target;
    c.rounds_per_game = 1 + uniform_index(rng, 10);
    c.turns_per_round = 1 + uniform_index(rng, std::min<std::size_t>(20, 200 / c.rounds_per_game));
    c.condition = "random";
    c.plan_id = "oracle";
    std::vector<std::string> recent;
    for (std::size_t r = 0; r < c.rounds_per_game; ++r) {
        Scripted s;
        for (std::size_t t = 0; t < c.turns_per_round; ++t) {
            const auto pick = uniform_index(rng, 20);
            if (pick == 0) {
                s.words.push_back("zq" + std::to_string(uniform_index(rng, 3)));  // OOV
            } else if (pick <= 3 && !recent.empty()) {
                s.words.push_back(recent[uniform_index(rng, recent.size())]);  // repeat
            } else if (pick == 4) {
                s.words.push_back(target);
            } else {
                s.words.push_back(table.word(uniform_index(rng, table.size())));
            }
            recent.push_back(s.words.back());
        }
        c.roster.push_back({"agent" + std::to_string(uniform_index(rng, 4)), s});
    }
    Game game(table, c, Timestamp{});
    const std::size_t total = c.rounds_per_game * c.turns_per_round;
    const std::size_t play = bernoulli(rng, 0.2) ? 1 + uniform_index(rng, total) : total;
    for (std::size_t i = 0; i < play; ++i) {
        const auto& slot = c.roster[game.state().current_round - 1];
        const auto& words = std::get<Scripted>(slot.kind).words;
        game.submit_guess(words[game.state().current_turn - 1], slot.agent_id, Timestamp{});
    }
    return game.events();
}

}  // namespace semchain::testing
