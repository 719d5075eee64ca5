#include "semchain/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "semchain/atomic_file.hpp"

namespace semchain {

namespace {

double max_score_of(std::span<const GuessRecord> guesses) {
    double best = guesses.front().score;
    for (const auto& g : guesses) best = std::max(best, g.score);
    return best;
}

std::vector<std::string> words_of(std::span<const GuessRecord> guesses) {
    std::vector<std::string> out;
    out.reserve(guesses.size());
    for (const auto& g : guesses) out.push_back(g.word);
    return out;
}

std::vector<std::string> all_words(std::span<const GameRecord> games) {
    std::vector<std::string> out;
    for (const auto& g : games) {
        for (const auto& guess : g.guesses) out.push_back(guess.word);
    }
    return out;
}

// One record per played round, for per-round groupings.
std::vector<GameRecord> split_rounds(std::span<const GameRecord> games) {
    std::vector<GameRecord> out;
    for (const auto& g : games) {
        for (const auto r : g.played_rounds()) {
            GameRecord part = g;
            part.guesses = g.round(r);
            out.push_back(std::move(part));
        }
    }
    return out;
}

std::string round_kind(const GameRecord& single_round) { return single_round.guesses.front().agent_kind; }

}  // namespace

std::vector<double> round_maxima(std::span<const GameRecord> games) {
    std::vector<double> out;
    for (const auto& g : games) {
        for (const auto r : g.played_rounds()) out.push_back(max_score_of(g.round(r)));
    }
    return out;
}

Estimate individual_performance(std::span<const GameRecord> games, PerformanceUnit unit) {
    if (unit == PerformanceUnit::round) {
        const auto maxima = round_maxima(games);
        if (maxima.empty()) throw MetricError("individual_performance: no played rounds");
        return estimate(maxima);
    }
    std::map<std::string, std::vector<double>> by_player;
    for (const auto& g : games) {
        for (const auto r : g.played_rounds()) {
            const auto guesses = g.round(r);
            by_player[guesses.front().agent_id].push_back(max_score_of(guesses));
        }
    }
    if (by_player.empty()) throw MetricError("individual_performance: no played rounds");
    std::vector<double> means;
    for (const auto& [player, maxima] : by_player) means.push_back(mean(maxima));
    return estimate(means);
}

Estimate collective_performance(std::span<const GameRecord> games) {
    std::vector<double> maxima;
    for (const auto& g : games) {
        if (!g.guesses.empty()) maxima.push_back(max_score_of(g.guesses));
    }
    if (maxima.empty()) throw MetricError("collective_performance: no scored games");
    return estimate(maxima);
}

std::optional<double> word_set_diversity(std::span<const std::string> words, const EmbeddingTable& table,
                                         const DiversityOptions& options) {
    struct Item {
        std::optional<std::size_t> row;
        const std::string* word;
    };
    std::vector<Item> items;
    for (const auto& w : words) {
        const auto row = table.find(w);
        if (row || options.include_oov) items.push_back({row, &w});
    }
    if (items.size() < 2) return std::nullopt;

    double sum = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        for (std::size_t j = i + 1; j < items.size(); ++j) {
            const auto& a = items[i];
            const auto& b = items[j];
            if (a.row && b.row) {
                sum += *a.row == *b.row ? 1.0 : table.cosine_rows(*a.row, *b.row);
            } else {
                sum += *a.word == *b.word ? 1.0 : 0.0;
            }
        }
    }
    const double pairs = static_cast<double>(items.size()) * static_cast<double>(items.size() - 1) / 2.0;
    return 1.0 - sum / pairs;
}

DiversitySummary individual_diversity(std::span<const GameRecord> games, const EmbeddingTable& table,
                                      const DiversityOptions& options) {
    DiversitySummary out;
    std::vector<double> values;
    for (const auto& g : games) {
        for (const auto r : g.played_rounds()) {
            ++out.rounds;
            const auto words = words_of(g.round(r));
            if (const auto d = word_set_diversity(words, table, options)) {
                values.push_back(*d);
            } else {
                ++out.excluded_rounds;
            }
        }
    }
    if (!values.empty()) out.estimate = estimate(values);
    return out;
}

std::optional<double> collective_diversity(std::span<const GameRecord> games, const EmbeddingTable& table,
                                           const DiversityOptions& options) {
    const auto words = all_words(games);
    return word_set_diversity(words, table, options);
}

double lexical_diversity(std::span<const std::string> words) {
    if (words.empty()) throw MetricError("lexical_diversity: no guesses");
    const std::unordered_set<std::string> unique(words.begin(), words.end());
    return static_cast<double>(unique.size()) / static_cast<double>(words.size());
}

double lexical_diversity(std::span<const GameRecord> games) {
    const auto words = all_words(games);
    return lexical_diversity(words);
}

std::vector<CurvePoint> performance_by_round(std::span<const GameRecord> games) {
    std::map<std::size_t, std::vector<double>> by_round;
    for (const auto& g : games) {
        for (const auto r : g.played_rounds()) by_round[r].push_back(max_score_of(g.round(r)));
    }
    std::vector<CurvePoint> out;
    for (const auto& [r, maxima] : by_round) out.push_back({r, estimate(maxima)});
    return out;
}

std::vector<Centroid> round_centroids(const GameRecord& game, const EmbeddingTable& table) {
    std::vector<Centroid> out;
    for (const auto r : game.played_rounds()) {
        Centroid c{game.game_id, r, 0, std::vector<double>(table.dim(), 0.0)};
        for (const auto& g : game.round(r)) {
            const auto row = table.find(g.word);
            if (!row) continue;
            const auto v = table.vector(*row);
            for (std::size_t i = 0; i < v.size(); ++i) c.mean[i] += v[i];
            ++c.words;
        }
        if (c.words == 0) continue;
        for (auto& x : c.mean) x /= static_cast<double>(c.words);
        out.push_back(std::move(c));
    }
    return out;
}

std::optional<PearsonResult> performance_diversity_r(std::span<const GameRecord> games, const EmbeddingTable& table,
                                                     const DiversityOptions& options) {
    std::vector<double> div, perf;
    for (const auto& g : games) {
        for (const auto r : g.played_rounds()) {
            const auto guesses = g.round(r);
            const auto words = words_of(guesses);
            if (const auto d = word_set_diversity(words, table, options)) {
                div.push_back(*d);
                perf.push_back(max_score_of(guesses));
            }
        }
    }
    if (div.size() < 2) return std::nullopt;
    return pearson_r(div, perf);
}

MetricsReport analyze(std::span<const GameRecord> all_games, const EmbeddingTable& table, const AnalysisOptions& options) {
    std::map<std::string, std::vector<GameRecord>> by_condition;
    for (const auto& g : all_games) {
        if (g.guesses.empty()) continue;
        by_condition[g.condition.empty() ? "unlabeled" : g.condition].push_back(g);
    }
    if (by_condition.empty()) throw MetricError("no games with guesses to analyze");

    MetricsReport report;
    std::map<std::string, std::vector<double>> round_samples, game_samples;
    for (const auto& [condition, games] : by_condition) {
        std::map<std::string, std::vector<GameRecord>> by_target;
        for (const auto& g : games) by_target[g.target].push_back(g);

        const auto fill = [&](MetricsRow& row, std::span<const GameRecord> group) {
            row.games = group.size();
            row.rounds = round_maxima(group).size();
            row.guesses = all_words(group).size();
            row.individual_performance = individual_performance(group, options.unit);
            row.collective_performance = collective_performance(group);
            row.individual_diversity = individual_diversity(group, table, options.diversity);
            row.performance_diversity = performance_diversity_r(group, table, options.diversity);
        };

        std::vector<double> target_collective_div, target_lexical;
        for (const auto& [target, group] : by_target) {
            MetricsRow row;
            row.condition = condition;
            row.target = target;
            fill(row, group);
            row.collective_diversity = collective_diversity(group, table, options.diversity);
            row.lexical_diversity = lexical_diversity(group);
            if (row.collective_diversity) target_collective_div.push_back(*row.collective_diversity);
            target_lexical.push_back(row.lexical_diversity);
            report.rows.push_back(std::move(row));
        }
        MetricsRow pooled;
        pooled.condition = condition;
        pooled.target = "all";
        fill(pooled, games);
        if (!target_collective_div.empty()) pooled.collective_diversity = mean(target_collective_div);
        pooled.lexical_diversity = mean(target_lexical);
        report.rows.push_back(std::move(pooled));

        for (const auto& p : performance_by_round(games)) report.curves.push_back({condition, p.round, p.estimate});

        std::map<std::string, std::vector<GameRecord>> by_kind;
        for (auto& part : split_rounds(games)) by_kind[round_kind(part)].push_back(std::move(part));
        for (const auto& [kind, parts] : by_kind) {
            AgentKindRow row;
            row.condition = condition;
            row.agent_kind = kind;
            row.rounds = parts.size();
            row.individual_performance = individual_performance(parts, options.unit);
            row.individual_diversity = individual_diversity(parts, table, options.diversity);
            row.lexical_diversity = lexical_diversity(parts);
            report.by_agent_kind.push_back(std::move(row));
        }

        round_samples[condition] = round_maxima(games);
        for (const auto& g : games) game_samples[condition].push_back(max_score_of(g.guesses));
    }

    const auto family = [&](const std::string& metric, const std::map<std::string, std::vector<double>>& samples) {
        std::vector<PairwiseTest> tests;
        for (auto a = samples.begin(); a != samples.end(); ++a) {
            for (auto b = std::next(a); b != samples.end(); ++b) {
                PairwiseTest t;
                t.metric = metric;
                t.condition_a = a->first;
                t.condition_b = b->first;
                t.n_a = a->second.size();
                t.n_b = b->second.size();
                t.mean_a = mean(a->second);
                t.mean_b = mean(b->second);
                if (t.n_a >= 2 && t.n_b >= 2) {
                    t.welch = welch_t(a->second, b->second);
                    try {
                        t.cohen_d = cohen_d(a->second, b->second);
                    } catch (const StatsError&) {
                    }
                }
                tests.push_back(std::move(t));
            }
        }
        std::vector<double> ps;
        std::vector<std::size_t> index;
        for (std::size_t i = 0; i < tests.size(); ++i) {
            if (tests[i].welch && !std::isnan(tests[i].welch->p)) {
                ps.push_back(tests[i].welch->p);
                index.push_back(i);
            }
        }
        const auto bh = bh_fdr(ps, options.fdr_q);
        for (std::size_t k = 0; k < index.size(); ++k) {
            tests[index[k]].p_adjusted = bh.adjusted[k];
            tests[index[k]].reject = bh.reject[k];
        }
        report.tests.insert(report.tests.end(), tests.begin(), tests.end());
    };
    family("individual_performance", round_samples);
    family("collective_performance", game_samples);
    return report;
}

namespace {

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    return fmt::format("{:.10g}", x);
}

std::string opt(const std::optional<double>& x) { return x ? num(*x) : ""; }

// Quotes a field only when it needs it.
std::string field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string estimate_cells(const Estimate& e) {
    return fmt::format("{},{},{},{}", num(e.mean), num(e.se), num(e.ci_low), num(e.ci_high));
}

std::string diversity_cells(const DiversitySummary& d) {
    if (!d.estimate) return fmt::format(",,{}", d.excluded_rounds);
    return fmt::format("{},{},{}", num(d.estimate->mean), num(d.estimate->se), d.excluded_rounds);
}

}  // namespace

void write_report_csv(const MetricsReport& report, const std::filesystem::path& dir) {
    std::string rows =
        "condition,target,games,rounds,guesses,"
        "individual_performance,individual_performance_se,individual_performance_ci_low,individual_performance_ci_high,"
        "collective_performance,collective_performance_se,collective_performance_ci_low,collective_performance_ci_high,"
        "individual_diversity,individual_diversity_se,excluded_rounds,collective_diversity,lexical_diversity,"
        "performance_diversity_r,performance_diversity_p\n";
    for (const auto& r : report.rows) {
        rows += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", field(r.condition), field(r.target), r.games, r.rounds,
                            r.guesses, estimate_cells(r.individual_performance),
                            estimate_cells(r.collective_performance), diversity_cells(r.individual_diversity),
                            opt(r.collective_diversity), num(r.lexical_diversity),
                            r.performance_diversity
                                ? fmt::format("{},{}", num(r.performance_diversity->r), num(r.performance_diversity->p))
                                : std::string(","));
    }

    std::string curves = "condition,round,mean,se,ci_low,ci_high,n\n";
    for (const auto& c : report.curves) {
        curves += fmt::format("{},{},{},{}\n", field(c.condition), c.round, estimate_cells(c.estimate), c.estimate.n);
    }

    std::string kinds =
        "condition,agent_kind,rounds,individual_performance,individual_performance_se,individual_performance_ci_low,"
        "individual_performance_ci_high,individual_diversity,individual_diversity_se,excluded_rounds,lexical_diversity\n";
    for (const auto& k : report.by_agent_kind) {
        kinds += fmt::format("{},{},{},{},{},{}\n", field(k.condition), field(k.agent_kind), k.rounds,
                             estimate_cells(k.individual_performance), diversity_cells(k.individual_diversity),
                             num(k.lexical_diversity));
    }

    std::string tests = "metric,condition_a,condition_b,n_a,n_b,mean_a,mean_b,t,df,p,cohen_d,p_adjusted,reject\n";
    for (const auto& t : report.tests) {
        tests += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", t.metric, field(t.condition_a),
                             field(t.condition_b), t.n_a, t.n_b, num(t.mean_a), num(t.mean_b),
                             t.welch ? num(t.welch->t) : "", t.welch ? num(t.welch->df) : "",
                             t.welch ? num(t.welch->p) : "", opt(t.cohen_d), num(t.p_adjusted),
                             t.reject ? "true" : "false");
    }

    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "metrics_by_condition.csv", rows);
    write_file_atomic(dir / "performance_by_round.csv", curves);
    write_file_atomic(dir / "metrics_by_agent_kind.csv", kinds);
    write_file_atomic(dir / "pairwise_tests.csv", tests);
}

std::string centroids_csv(std::span<const Centroid> centroids, std::size_t dim) {
    std::string out = "game_id,round,words";
    for (std::size_t i = 0; i < dim; ++i) out += fmt::format(",c{}", i);
    out += '\n';
    for (const auto& c : centroids) {
        out += fmt::format("{},{},{}", field(c.game_id), c.round, c.words);
        for (const double x : c.mean) out += fmt::format(",{:.9g}", x);
        out += '\n';
    }
    return out;
}

}  // namespace semchain
