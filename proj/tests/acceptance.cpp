// Acceptance run: one PASS/FAIL line per headline criterion, nonzero exit if
// any fails. Each check builds its expectations from independent code in
// this file or metric_oracle.hpp rather than from the library under test.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "metric_oracle.hpp"
#include "semchain/agents.hpp"
#include "semchain/atomic_file.hpp"
#include "semchain/event_log.hpp"
#include "semchain/llm_client.hpp"
#include "semchain/log_reader.hpp"
#include "semchain/metrics.hpp"
#include "semchain/plan.hpp"
#include "semchain/prompts.hpp"
#include "semchain/scoring.hpp"
#include "semchain/simulate.hpp"
#include "semchain/stats.hpp"
#include "semchain/text.hpp"
#include "test_support.hpp"

using namespace semchain;
using namespace semchain::testing;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what) {
        if (ok) return;
        pass = false;
        if (failures.size() < 5) failures.push_back(what);
    }
};

using Seconds = std::chrono::duration<double>;

const Clock frozen{true};

std::size_t worker_count() { return std::max(2u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------

Outcome scoring_exactness() {
    Outcome o;
    const auto& table = synthetic_table();
    Rng rng(101);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto target = table.word(uniform_index(rng, table.size()));
        const auto guess = table.word(uniform_index(rng, table.size()));
        ScoreConfig cfg;
        cfg.target = target;
        const double got = score_guess(table, cfg, guess);
        const double want = guess == target ? 201.69 : 201.69 * oracle_cosine(table, guess, target);
        const double rel = std::fabs(got - want) / std::max(1e-300, std::fabs(want));
        worst = std::max(worst, std::fabs(want) < 1e-12 ? std::fabs(got - want) : rel);
        o.expect(close_rel(got, want, 1e-6), fmt::format("{} vs {}: {} != {}", guess, target, got, want));
    }
    for (std::size_t i = 0; i < 50; ++i) {
        ScoreConfig cfg;
        cfg.target = table.word(i * 97);
        o.expect(score_guess(table, cfg, cfg.target) == 201.69, "target scored " + cfg.target);
        for (const auto* junk : {"qqxzv", "", "harbor harbor", "Harbor", "zz9"}) {
            if (table.contains(junk)) continue;
            o.expect(score_guess(table, cfg, junk) == 0.0, fmt::format("OOV '{}' not 0", junk));
        }
    }
    o.detail = fmt::format("1000 pairs, worst rel err {:.2e}", worst);
    return o;
}

// ---------------------------------------------------------------------------

Outcome metric_oracle() {
    Outcome o;
    const auto& table = synthetic_table();
    Rng rng(55);
    std::vector<std::vector<json>> logs;
    std::size_t max_guesses = 0;
    for (int i = 0; i < 20; ++i) {
        logs.push_back(random_game_log(rng, table, fmt::format("g{:02}", i), default_targets()[i % 10]));
        max_guesses = std::max(max_guesses, oracle_guesses(logs.back()).size());
    }
    o.expect(max_guesses <= 200, "a log exceeds 200 guesses");

    const auto compare = [&](const std::vector<std::vector<json>>& set, const std::string& label) {
        std::vector<GameRecord> records;
        for (const auto& l : set) records.push_back(game_record(l));
        const auto check = [&](double got, double want, const char* metric) {
            o.expect(close_rel(got, want, 1e-9), fmt::format("{} {}: {} vs {}", label, metric, got, want));
        };
        if (oracle_guesses(set.front()).empty() && set.size() == 1) return;
        check(individual_performance(records).mean, oracle_mean(oracle_round_maxima(set)), "individual_performance");
        check(collective_performance(records).mean, oracle_mean(oracle_game_maxima(set)), "collective_performance");
        const auto ind = individual_diversity(records, table);
        const auto ind_want = oracle_individual_diversity(set, table);
        o.expect(ind.estimate.has_value() == ind_want.has_value(), label + " individual_diversity definedness");
        if (ind.estimate && ind_want) check(ind.estimate->mean, *ind_want, "individual_diversity");
        const auto col = collective_diversity(records, table);
        const auto col_want = oracle_collective_diversity(set, table);
        o.expect(col.has_value() == col_want.has_value(), label + " collective_diversity definedness");
        if (col && col_want) check(*col, *col_want, "collective_diversity");
        check(lexical_diversity(records), oracle_lexical(set), "lexical_diversity");
        const auto curve = performance_by_round(records);
        const auto curve_want = oracle_curve(set);
        o.expect(curve.size() == curve_want.size(), label + " curve length");
        for (const auto& p : curve) {
            const auto it = curve_want.find(p.round);
            o.expect(it != curve_want.end(), label + " curve round");
            if (it != curve_want.end()) check(p.estimate.mean, it->second, "performance_by_round");
        }
    };
    for (const auto& l : logs) compare({l}, oracle_guesses(l).empty() ? "empty" : l.front().at("game_id").get<std::string>());
    compare(logs, "pooled");
    o.detail = fmt::format("20 logs, up to {} guesses each, 6 measures per log and pooled", max_guesses);
    return o;
}

// ---------------------------------------------------------------------------

std::vector<GameConfig> thousand_games() {
    ExperimentPlan plan;
    plan.plan_id = "chain";
    plan.games_per_target = 100;
    plan.condition = Condition::hybrid_ai;
    plan.seed = 2024;
    plan.machine_agents = {{"explorer", HeuristicForager{0.5, 10, 100}}, {"exploiter", HeuristicForager{0.05, 10, 100}}};
    return build_games(plan);
}

Outcome chain_invariants() {
    Outcome o;
    const auto& table = synthetic_table();
    const auto games = thousand_games();
    o.expect(games.size() == 1000, "plan does not give 1000 games");
    AgentEnvironment env;
    env.deterministic = true;
    const auto first = run_games(table, games, env, frozen, worker_count());
    const auto second = run_games(table, games, env, frozen, 1);

    std::size_t hint_checks = 0;
    for (std::size_t g = 0; g < games.size(); ++g) {
        const auto& events = first[g].events;
        const auto bytes = serialize_events(events);
        o.expect(bytes == serialize_events(second[g].events), games[g].game_id + ": reruns differ");
        const auto replayed = Game::replay(events, &table);
        o.expect(serialize_events(replayed.events()) == bytes, games[g].game_id + ": replay differs");

        // (b) every (round, turn) cell exactly once.
        std::set<std::pair<std::size_t, std::size_t>> cells;
        std::size_t guesses = 0;
        std::map<std::size_t, std::size_t> first_guess_of_round;
        std::map<std::size_t, double> best_in_round;
        for (std::size_t i = 0; i < events.size(); ++i) {
            const auto& e = events[i];
            if (e.at("type") != "guess_submitted") continue;
            ++guesses;
            const auto r = e.at("round").get<std::size_t>();
            cells.emplace(r, e.at("turn").get<std::size_t>());
            first_guess_of_round.emplace(r, i);
            const double s = e.at("score").get<double>();
            if (!best_in_round.contains(r) || s > best_in_round[r]) best_in_round[r] = s;
        }
        o.expect(guesses == 100 && cells.size() == 100 && cells.begin()->first == 1 && cells.rbegin()->first == 10,
                 games[g].game_id + ": cells not covered exactly once");

        // (a) the hint each round opens with, read from a read-only replay of
        // the log up to that point, never drops and equals the best so far.
        double previous = -1e300;
        double best_so_far = -1e300;
        for (std::size_t r = 1; r <= 10; ++r) {
            const auto cut = first_guess_of_round.at(r);
            const auto prefix = std::span<const json>(events).first(cut);
            const auto obs = Game::replay(prefix).observe();
            if (r == 1) {
                o.expect(std::holds_alternative<NoSignal>(obs.signal), "round 1 has a hint");
            } else {
                const auto* hint = std::get_if<BestGuessSignal>(&obs.signal);
                o.expect(hint != nullptr, "missing best-guess hint");
                if (hint) {
                    o.expect(hint->score >= previous, fmt::format("{} round {}: hint dropped", games[g].game_id, r));
                    o.expect(hint->score == best_so_far, fmt::format("{} round {}: hint is not the best so far",
                                                                     games[g].game_id, r));
                    previous = hint->score;
                    ++hint_checks;
                }
            }
            best_so_far = std::max(best_so_far, best_in_round.at(r));
        }
    }
    o.detail = fmt::format("1000 games, {} hints checked, parallel/serial/replay byte-identical", hint_checks);
    return o;
}

// ---------------------------------------------------------------------------

Outcome statistics() {
    Outcome o;
    const std::vector<double> a = {4.1, 5.3, 3.8, 6.0, 5.1};
    const std::vector<double> b = {6.2, 7.1, 5.9, 8.4, 6.6};
    const auto hand_mean = [](const std::vector<double>& v) {
        long double s = 0;
        for (const double x : v) s += x;
        return static_cast<double>(s / v.size());
    };
    const auto hand_var = [&](const std::vector<double>& v) {
        const double m = hand_mean(v);
        long double s = 0;
        for (const double x : v) s += (x - m) * (x - m);
        return static_cast<double>(s / (v.size() - 1));
    };
    const double ma = hand_mean(a), mb = hand_mean(b), va = hand_var(a), vb = hand_var(b);
    const double t = (ma - mb) / std::sqrt(va / 5 + vb / 5);
    const double df = std::pow(va / 5 + vb / 5, 2) / (std::pow(va / 5, 2) / 4 + std::pow(vb / 5, 2) / 4);
    const auto w = welch_t(a, b);
    o.expect(close_rel(w.t, t, 1e-9), "welch t");
    o.expect(close_rel(w.df, df, 1e-9), "welch df");
    o.expect(close_rel(cohen_d(a, b), (ma - mb) / std::sqrt((4 * va + 4 * vb) / 8), 1e-9), "cohen d");
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        sxy += (a[i] - ma) * (b[i] - mb);
        sxx += (a[i] - ma) * (a[i] - ma);
        syy += (b[i] - mb) * (b[i] - mb);
    }
    const auto r = pearson_r(a, b);
    o.expect(r && close_rel(r->r, static_cast<double>(sxy / std::sqrt(sxx * syy)), 1e-9), "pearson r");

    // Step-up thresholds k q / m for m = 2: 0.025 and 0.05.
    const std::vector<double> p2 = {0.01, 0.04};
    const auto bh = bh_fdr(p2, 0.05);
    o.expect(0.01 <= 1 * 0.05 / 2 && 0.04 <= 2 * 0.05 / 2, "threshold oracle");
    o.expect(bh.reject == std::vector<bool>{true, true}, "BH [0.01, 0.04] must reject both");

    Rng rng(909);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> p(1 + uniform_index(rng, 40));
        for (auto& x : p) x = bernoulli(rng, 0.4) ? uniform_unit(rng) * 0.02 : uniform_unit(rng);
        std::vector<double> qs = {0.01, 0.05, 0.1, 0.2, 0.5};
        std::vector<bool> prev(p.size(), false);
        for (const double q : qs) {
            const auto res = bh_fdr(p, q);
            for (std::size_t i = 0; i < p.size(); ++i) {
                o.expect(!prev[i] || res.reject[i], fmt::format("trial {}: rejection lost raising q to {}", trial, q));
            }
            prev = res.reject;
        }
    }
    o.detail = "welch/cohen/pearson to 1e-9, BH thresholds, 100 monotonicity vectors";
    return o;
}

// ---------------------------------------------------------------------------

struct ConditionScore {
    double collective_diversity = 0;
    double collective_performance = 0;
};

ConditionScore play_condition(const std::vector<AgentDescriptor>& roster, std::uint64_t seed) {
    const auto& table = synthetic_table();
    ExperimentPlan plan;
    plan.plan_id = "ee";
    plan.condition = Condition::custom;
    plan.roster = roster;
    plan.games_per_target = 5;
    plan.seed = seed;
    AgentEnvironment env;
    env.deterministic = true;
    const auto runs = run_plan(table, plan, env, frozen, worker_count());
    std::map<std::string, std::vector<GameRecord>> by_target;
    std::vector<GameRecord> all;
    for (const auto& run : runs) {
        auto rec = game_record(run.events);
        by_target[rec.target].push_back(rec);
        all.push_back(std::move(rec));
    }
    ConditionScore s;
    for (const auto& [target, records] : by_target) s.collective_diversity += *collective_diversity(records, table);
    s.collective_diversity /= static_cast<double>(by_target.size());
    s.collective_performance = collective_performance(all).mean;
    return s;
}

Outcome explore_exploit() {
    Outcome o;
    const AgentDescriptor exploiter{"exploiter", HeuristicForager{0.05, 10, 100}};
    const AgentDescriptor explorer{"explorer", HeuristicForager{0.6, 10, 100}};
    const std::vector<AgentDescriptor> homogeneous(10, exploiter);
    std::vector<AgentDescriptor> mixed;
    for (int r = 0; r < 10; ++r) mixed.push_back(r % 2 == 0 ? explorer : exploiter);

    const std::vector<std::uint64_t> seeds = {11, 22, 33, 44, 55};
    ConditionScore h, m;
    std::string per_seed;
    for (const auto seed : seeds) {
        const auto hs = play_condition(homogeneous, seed);
        const auto ms = play_condition(mixed, seed);
        h.collective_diversity += hs.collective_diversity / seeds.size();
        h.collective_performance += hs.collective_performance / seeds.size();
        m.collective_diversity += ms.collective_diversity / seeds.size();
        m.collective_performance += ms.collective_performance / seeds.size();
        per_seed += fmt::format(" [{}: perf {:.1f}/{:.1f}]", seed, hs.collective_performance, ms.collective_performance);
    }
    o.expect(h.collective_diversity < m.collective_diversity, "homogeneous diversity is not lower");
    o.expect(h.collective_performance < m.collective_performance, "homogeneous performance is not lower");
    o.detail = fmt::format("{} seeds; exploit-only div {:.4f} perf {:.2f} vs mixed div {:.4f} perf {:.2f};{}",
                           seeds.size(), h.collective_diversity, h.collective_performance, m.collective_diversity,
                           m.collective_performance, per_seed);
    return o;
}

// ---------------------------------------------------------------------------

GameConfig scripted_game(ChannelKind channel) {
    const auto& table = synthetic_table();
    GameConfig c;
    c.game_id = "plumbing";
    c.target = default_targets()[0];
    c.channel = channel;
    for (std::size_t r = 0; r < 10; ++r) {
        Scripted s;
        for (std::size_t t = 0; t < 10; ++t) s.words.push_back(table.word(100 + r * 10 + t));
        c.roster.push_back({"p" + std::to_string(r + 1), s});
    }
    return c;
}

void play_round(Game& game) {
    const auto& slot = game.current_player();
    const auto& words = std::get<Scripted>(slot.kind).words;
    const auto round = game.state().current_round;
    while (!game.complete() && game.state().current_round == round && !game.awaiting_advice()) {
        game.submit_guess(words[game.state().current_turn - 1], slot.agent_id, Timestamp{});
    }
}

Outcome control_channels() {
    Outcome o;
    const auto& table = synthetic_table();
    {
        Game game(table, scripted_game(ChannelKind::short_advice), Timestamp{});
        play_round(game);
        for (const auto* bad : {"two words", "tide\tpool", "a b c", "", "   "}) {
            bool rejected = false;
            try {
                game.submit_advice(bad, Timestamp{});
            } catch (const GameError& e) {
                rejected = e.code() == GameError::Code::invalid_advice;
            }
            o.expect(rejected, fmt::format("short advice '{}' accepted", bad));
        }
        game.submit_advice("Harbor!", Timestamp{});
        const auto obs = game.observe();
        const auto* sig = std::get_if<ShortAdviceSignal>(&obs.signal);
        o.expect(sig && sig->word == "harbor", "single-token short advice not delivered");
    }
    {
        Game game(table, scripted_game(ChannelKind::full_history), Timestamp{});
        for (std::size_t r = 1; r <= 10; ++r) {
            const auto obs = game.observe();
            const std::size_t shown =
                r == 1 ? (std::holds_alternative<NoSignal>(obs.signal) ? 0 : 999)
                       : std::get<FullHistorySignal>(obs.signal).guesses.size();
            o.expect(shown == (r - 1) * 10, fmt::format("round {} shows {} guesses", r, shown));
            play_round(game);
        }
    }
    {
        Game game(table, scripted_game(ChannelKind::long_advice), Timestamp{});
        play_round(game);
        std::string text;
        while (text.size() < 1500) text += "look near the water and boats. ";
        game.submit_advice(text, Timestamp{});
        const auto obs = game.observe();
        const auto* sig = std::get_if<LongAdviceSignal>(&obs.signal);
        o.expect(sig && sig->text.size() == 1000 && text.rfind(sig->text, 0) == 0, "long advice not cut to 1000");
        play_round(game);
        // Multi-byte text is cut on characters, not bytes.
        std::string wide;
        for (int i = 0; i < 1200; ++i) wide += "\xC3\xA9";
        game.submit_advice(wide, Timestamp{});
        const auto obs2 = game.observe();
        const auto* sig2 = std::get_if<LongAdviceSignal>(&obs2.signal);
        o.expect(sig2 && utf8_length(sig2->text) == 1000 && sig2->text.size() == 2000, "UTF-8 advice cut wrongly");
    }
    o.detail = "short advice single-token, full history (r-1)x10, long advice 1000 chars";
    return o;
}

// ---------------------------------------------------------------------------

// Answers with a vocabulary word picked from the prompt's hash, wrapped in
// chatter, and remembers every prompt it was sent.
class EchoingChat final : public ChatClient {
public:
    explicit EchoingChat(const EmbeddingTable& table) : table_(table) {}
    std::string complete(const ChatRequest& request) override {
        std::string prompt;
        for (const auto& m : request.messages) prompt += m.content + "\n";
        prompts.push_back(prompt);
        const auto h = std::stoull(prompt_hash(request), nullptr, 16);
        return fmt::format("Let me think... my guess: \"{}\"", table_.word(h % table_.size()));
    }
    std::vector<std::string> prompts;

private:
    const EmbeddingTable& table_;
};

struct Scan {
    std::string target;
    double max_score;
    std::size_t items = 0;
    std::vector<std::string> leaks;

    void text(const std::string& s, bool target_guessed, const std::string& where) {
        ++items;
        if (target_guessed) return;
        for (const auto& tok : response_tokens(s)) {
            if (tok == target) leaks.push_back(where + ": target word");
        }
        if (s.find(format_score(max_score)) != std::string::npos || s.find(fmt::format("{}", max_score)) != std::string::npos) {
            leaks.push_back(where + ": max score");
        }
    }

    void value(const json& v, bool target_guessed, const std::string& where) {
        if (v.is_object()) {
            for (const auto& [k, x] : v.items()) {
                if (k == "target" || k == "max_score") leaks.push_back(where + ": field " + k);
                value(x, target_guessed, where + "." + k);
            }
        } else if (v.is_array()) {
            for (const auto& x : v) value(x, target_guessed, where);
        } else if (v.is_string()) {
            text(v.get<std::string>(), target_guessed, where);
        } else if (v.is_number_float() && !target_guessed && v.get<double>() == max_score) {
            leaks.push_back(where + ": max score value");
        }
    }
};

// Delegates to a real agent and scans what it was shown.
class WatchedAgent final : public Agent {
public:
    WatchedAgent(Agent& inner, const Game& game, EchoingChat& chat, Scan& scan)
        : Agent(inner.descriptor()), inner_(inner), game_(game), chat_(chat), scan_(scan) {}

    std::string next_guess(const Observation& observation, Rng& rng) override {
        const bool seen = target_guessed();
        scan_.value(to_json(observation), seen, "observation");
        const auto before = chat_.prompts.size();
        auto out = inner_.next_guess(observation, rng);
        for (auto i = before; i < chat_.prompts.size(); ++i) scan_.text(chat_.prompts[i], seen, "prompt");
        return out;
    }

    std::string produce_advice(ChannelKind channel, std::span<const ScoredWord> history, Rng& rng) override {
        const bool seen = target_guessed();
        const auto before = chat_.prompts.size();
        auto out = inner_.produce_advice(channel, history, rng);
        for (auto i = before; i < chat_.prompts.size(); ++i) scan_.text(chat_.prompts[i], seen, "advice prompt");
        return out;
    }

private:
    bool target_guessed() const {
        const auto& guesses = game_.state().guesses;
        return std::any_of(guesses.begin(), guesses.end(), [&](const Guess& g) { return g.word == game_.config().target; });
    }

    Agent& inner_;
    const Game& game_;
    EchoingChat& chat_;
    Scan& scan_;
};

Outcome secrecy() {
    Outcome o;
    const auto& table = synthetic_table();
    const std::vector<ChannelKind> channels = {ChannelKind::best_guess, ChannelKind::full_history,
                                               ChannelKind::short_advice, ChannelKind::long_advice};
    std::size_t items = 0, prompts = 0, target_hits = 0;
    for (std::size_t g = 0; g < 100; ++g) {
        auto chat = std::make_shared<EchoingChat>(table);
        AgentEnvironment env;
        env.table = &table;
        env.llm = chat;
        env.deterministic = true;
        GameConfig c;
        c.game_id = fmt::format("s{:03}", g);
        c.target = default_targets()[g % 10];
        c.channel = channels[g % 4];
        c.seed = 500 + g;
        for (std::size_t r = 0; r < 10; ++r) {
            if (r % 2 == 0) {
                c.roster.push_back({"forager", HeuristicForager{0.2, 10, 100}});
            } else {
                c.roster.push_back({"llm", LlmChat{"fake", "guess-v1", 1.0}});
            }
        }
        Scan scan{c.target, c.max_score};
        Game game(table, c, Timestamp{});
        while (!game.complete()) {
            const auto round = game.state().current_round;
            auto inner = make_agent(c.roster[round - 1], env);
            WatchedAgent watched(*inner, game, *chat, scan);
            auto rng = round_rng(c, round);
            play_machine_round(game, watched, rng, frozen);
        }
        for (const auto& guess : game.state().guesses) target_hits += guess.word == c.target ? 1 : 0;
        items += scan.items;
        prompts += chat->prompts.size();
        for (const auto& leak : scan.leaks) o.expect(false, c.game_id + " " + leak);
    }
    o.expect(prompts > 0, "no prompts were scanned");
    o.detail = fmt::format("100 games, {} payloads incl. {} prompts scanned; target guessed {} times", items, prompts,
                           target_hits);
    return o;
}

// ---------------------------------------------------------------------------

// A talkative stand-in for a live model: wraps a word in chatter and turns
// down every 30th request outright.
class ChattyProvider final : public ChatClient {
public:
    explicit ChattyProvider(const EmbeddingTable& table) : table_(table) {}
    std::string complete(const ChatRequest& request) override {
        if (++calls_ % 30 == 0) return "I'm sorry, I can't play along with that.";
        // FNV low bits barely move between similar prompts; mix before use.
        const auto h = mix_seed(std::stoull(prompt_hash(request), nullptr, 16), 0);
        const auto word = table_.word((h >> 8) % 2000);
        switch (h % 10) {
            case 0: case 1: return fmt::format("Hmm! Maybe... **{}**?", word);
            case 2: case 3: return fmt::format("\"{}\"", word);
            case 4: return fmt::format("{}.\n\nI picked it because it feels close.", word);
            default: return fmt::format("My guess: {}", word);
        }
    }

private:
    const EmbeddingTable& table_;
    std::size_t calls_ = 0;
};

Outcome llm_fixtures() {
    Outcome o;
    const auto& table = synthetic_table();
    ExperimentPlan plan;
    plan.plan_id = "llm";
    plan.targets = {default_targets()[3]};
    plan.games_per_target = 1;
    plan.condition = Condition::ai_only;
    plan.seed = 17;
    plan.machine_agents = {{"model", LlmChat{"chatty-1", "guess-v1", 0.7}}};
    const auto game = build_games(plan).at(0);

    ChattyProvider live(table);
    auto recorder = std::make_shared<RecordingChatClient>(live);
    AgentEnvironment env;
    env.deterministic = true;
    env.llm = recorder;
    const auto recorded = run_game(table, game, env, frozen);

    TempDir dir;
    write_file_atomic(dir / "fixture.json", fixtures_json(recorder->entries()).dump(2) + "\n");

    std::vector<GameRun> replays;
    for (int i = 0; i < 2; ++i) {
        env.llm = make_chat_client({{"kind", "fixture"}, {"path", "fixture.json"}}, dir.path());
        replays.push_back(run_game(table, game, env, frozen));
    }

    std::size_t guesses = 0;
    for (const auto& e : replays[0].events) guesses += e.at("type") == "guess_submitted" ? 1 : 0;
    std::size_t responses = 0, sanitized = 0;
    for (const auto& x : replays[0].llm_exchanges) {
        if (!x.contains("raw_response")) continue;
        ++responses;
        sanitized += x.at("sanitized").is_null() ? 0 : 1;
    }
    const double rate = responses == 0 ? 0.0 : static_cast<double>(sanitized) / static_cast<double>(responses);
    o.expect(guesses == 100, fmt::format("{} turns played", guesses));
    o.expect(rate >= 0.95, fmt::format("sanitized rate {:.3f}", rate));
    o.expect(sanitized < responses, "no unusable reply, so the retry path went unexercised");
    o.expect(serialize_events(replays[0].events) == serialize_events(replays[1].events), "replays differ");
    o.expect(serialize_events(replays[0].llm_exchanges) == serialize_events(replays[1].llm_exchanges),
             "replay exchanges differ");
    o.expect(serialize_events(replays[0].events) == serialize_events(recorded.events), "replay differs from recording");
    o.detail = fmt::format("{} turns, {}/{} responses sanitized ({:.1f}%), {} fixture entries", guesses, sanitized,
                           responses, 100.0 * rate, recorder->entries().size());
    return o;
}

struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_s;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"scoring-exactness", scoring_exactness, 5},
        {"metric-oracle-equivalence", metric_oracle, 30},
        {"chain-invariants", chain_invariants, 120},
        {"statistics", statistics, 60},
        {"explore-exploit-direction", explore_exploit, 600},
        {"control-channel-plumbing", control_channels, 60},
        {"secrecy", secrecy, 120},
        {"llm-fixture-replay", llm_fixtures, 60},
    };
    // Warm the shared table so its build time is not charged to one check.
    (void)synthetic_table();

    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = Seconds(std::chrono::steady_clock::now() - start).count();
        out.expect(secs < c.budget_s, fmt::format("took {:.1f} s, budget {:.0f} s", secs, c.budget_s));
        std::printf("%s %-27s %7.2fs  %s\n", out.pass ? "PASS" : "FAIL", c.name, secs, out.detail.c_str());
        for (const auto& f : out.failures) std::printf("     - %s\n", f.c_str());
        std::fflush(stdout);
        failed += out.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
