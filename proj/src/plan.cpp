#include "semchain/plan.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "semchain/rng.hpp"
#include "semchain/synthetic_vocab.hpp"

namespace semchain {

using nlohmann::json;

std::string_view to_string(Condition condition) {
    switch (condition) {
        case Condition::human_social: return "human_social";
        case Condition::human_asocial: return "human_asocial";
        case Condition::ai_only: return "ai_only";
        case Condition::hybrid: return "hybrid";
        case Condition::hybrid_ai: return "hybrid_ai";
        case Condition::custom: return "custom";
    }
    return "custom";
}

Condition parse_condition(std::string_view name) {
    for (const auto c : {Condition::human_social, Condition::human_asocial, Condition::ai_only, Condition::hybrid,
                         Condition::hybrid_ai, Condition::custom}) {
        if (name == to_string(c)) return c;
    }
    throw std::invalid_argument(fmt::format("unknown condition '{}'", name));
}

void to_json(json& j, const ExperimentPlan& p) {
    j = json{{"plan_id", p.plan_id},
             {"targets", p.targets},
             {"games_per_target", p.games_per_target},
             {"condition", to_string(p.condition)},
             {"channel", to_string(p.channel)},
             {"hint_mode", to_string(p.hint_mode)},
             {"mix_ratio", p.mix_ratio},
             {"seed", p.seed},
             {"rounds_per_game", p.rounds_per_game},
             {"turns_per_round", p.turns_per_round},
             {"max_score", p.max_score},
             {"machine_agents", p.machine_agents},
             {"roster", p.roster},
             {"max_games_per_participant", p.max_games_per_participant},
             {"reveal_max_to_players", p.reveal_max_to_players}};
}

void from_json(const json& j, ExperimentPlan& p) {
    ExperimentPlan d;
    p.plan_id = j.value("plan_id", d.plan_id);
    p.targets = j.value("targets", std::vector<std::string>{});
    p.games_per_target = j.value("games_per_target", d.games_per_target);
    p.condition = parse_condition(j.value("condition", std::string(to_string(d.condition))));
    p.channel = parse_channel(j.value("channel", std::string(to_string(d.channel))));
    p.hint_mode = parse_hint_mode(j.value("hint_mode", std::string(to_string(d.hint_mode))));
    p.mix_ratio = j.value("mix_ratio", d.mix_ratio);
    p.seed = j.value("seed", d.seed);
    p.rounds_per_game = j.value("rounds_per_game", d.rounds_per_game);
    p.turns_per_round = j.value("turns_per_round", d.turns_per_round);
    p.max_score = j.value("max_score", d.max_score);
    p.machine_agents = j.value("machine_agents", std::vector<AgentDescriptor>{});
    p.roster = j.value("roster", std::vector<AgentDescriptor>{});
    p.max_games_per_participant = j.value("max_games_per_participant", d.max_games_per_participant);
    p.reveal_max_to_players = j.value("reveal_max_to_players", d.reveal_max_to_players);
}

void validate(const ExperimentPlan& plan) {
    const auto fail = [&](const std::string& msg) { throw std::invalid_argument(fmt::format("plan '{}': {}", plan.plan_id, msg)); };
    if (plan.plan_id.empty()) fail("plan_id must not be empty");
    if (plan.games_per_target < 1) fail("games_per_target must be >= 1");
    if (!(plan.mix_ratio >= 0.0 && plan.mix_ratio <= 1.0)) fail("mix_ratio must be in [0,1]");
    if (plan.rounds_per_game < 1 || plan.turns_per_round < 1) fail("rounds and turns must be >= 1");
    const auto check_machines = [&](std::size_t needed) {
        if (plan.machine_agents.size() < needed) fail(fmt::format("condition needs {} machine agent(s)", needed));
        for (const auto& m : plan.machine_agents) {
            if (m.is_human()) fail("machine_agents may not contain human slots");
            validate(m, plan.turns_per_round);
        }
    };
    switch (plan.condition) {
        case Condition::ai_only: check_machines(1); break;
        case Condition::hybrid:
            if (plan.mix_ratio < 1.0) check_machines(1);
            break;
        case Condition::hybrid_ai: check_machines(2); break;
        case Condition::custom:
            if (plan.roster.size() != plan.rounds_per_game) fail("custom roster needs one entry per round");
            for (const auto& r : plan.roster) validate(r, plan.turns_per_round);
            break;
        default: break;
    }
}

namespace {

// Exactly `ones` true entries among `n`, seeded Fisher-Yates order.
std::vector<bool> exact_split(std::size_t n, std::size_t ones, Rng& rng) {
    std::vector<bool> v(n, false);
    std::fill(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(ones, n)), true);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = uniform_index(rng, i);
        const bool tmp = v[i - 1];
        v[i - 1] = v[j];
        v[j] = tmp;
    }
    return v;
}

AgentDescriptor human_slot() {
    return AgentDescriptor{"", HumanPlayer{}};
}

}  // namespace

std::vector<GameConfig> build_games(const ExperimentPlan& plan) {
    validate(plan);
    const auto& targets = plan.targets.empty() ? default_targets() : plan.targets;
    const std::size_t games = targets.size() * plan.games_per_target;
    const std::size_t rounds = games * plan.rounds_per_game;

    Rng rng(mix_seed(plan.seed, 0xA551));
    std::vector<bool> first_kind;  // hybrid: human round; hybrid_ai: first model
    if (plan.condition == Condition::hybrid) {
        const auto humans = static_cast<std::size_t>(std::llround(plan.mix_ratio * static_cast<double>(rounds)));
        first_kind = exact_split(rounds, humans, rng);
    } else if (plan.condition == Condition::hybrid_ai) {
        first_kind = exact_split(rounds, rounds / 2, rng);
    }

    std::vector<GameConfig> out;
    out.reserve(games);
    std::size_t slot = 0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        for (std::size_t g = 0; g < plan.games_per_target; ++g) {
            GameConfig c;
            c.game_id = fmt::format("{}-g{:03d}", plan.plan_id, out.size() + 1);
            c.target = targets[t];
            c.rounds_per_game = plan.rounds_per_game;
            c.turns_per_round = plan.turns_per_round;
            c.channel = plan.channel;
            c.hint_mode = plan.hint_mode;
            c.seed = mix_seed(plan.seed, out.size());
            c.max_score = plan.max_score;
            c.condition = std::string(to_string(plan.condition));
            c.plan_id = plan.plan_id;
            for (std::size_t r = 0; r < plan.rounds_per_game; ++r, ++slot) {
                switch (plan.condition) {
                    case Condition::human_social:
                    case Condition::human_asocial: c.roster.push_back(human_slot()); break;
                    case Condition::ai_only: c.roster.push_back(plan.machine_agents[0]); break;
                    case Condition::hybrid:
                        c.roster.push_back(first_kind[slot] ? human_slot() : plan.machine_agents[0]);
                        break;
                    case Condition::hybrid_ai:
                        c.roster.push_back(plan.machine_agents[first_kind[slot] ? 0 : 1]);
                        break;
                    case Condition::custom: c.roster.push_back(plan.roster[r]); break;
                }
            }
            out.push_back(std::move(c));
        }
    }
    return out;
}

}  // namespace semchain
