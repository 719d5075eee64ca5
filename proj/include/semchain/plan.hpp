#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "semchain/agent_descriptor.hpp"
#include "semchain/game.hpp"

namespace semchain {

enum class Condition { human_social, human_asocial, ai_only, hybrid, hybrid_ai, custom };

std::string_view to_string(Condition condition);
Condition parse_condition(std::string_view name);

struct ExperimentPlan {
    std::string plan_id = "plan";
    std::vector<std::string> targets;  // defaults to default_targets() when empty
    std::size_t games_per_target = 5;
    Condition condition = Condition::ai_only;
    ChannelKind channel = ChannelKind::best_guess;
    HintMode hint_mode = HintMode::running_max;
    double mix_ratio = 0.5;  // human share of rounds under hybrid
    std::uint64_t seed = 0;
    std::size_t rounds_per_game = 10;
    std::size_t turns_per_round = 10;
    double max_score = kDefaultMaxScore;
    // ai_only and hybrid use the first entry; hybrid_ai splits rounds
    // evenly between the first two.
    std::vector<AgentDescriptor> machine_agents;
    // custom: the roster every game uses (one entry per round).
    std::vector<AgentDescriptor> roster;
    // human_social: a participant plays at most one round per target and
    // at most this many games overall.
    std::size_t max_games_per_participant = 10;
    // When set, player payloads include max_score.
    bool reveal_max_to_players = false;
};

void to_json(nlohmann::json& j, const ExperimentPlan& p);
void from_json(const nlohmann::json& j, ExperimentPlan& p);

// Throws std::invalid_argument.
void validate(const ExperimentPlan& plan);

// targets x games_per_target game configs in (target, game) order. Game ids
// are "<plan_id>-g001", ... and never mention the target. Roster
// composition is derived from the plan seed, so the same plan always yields
// the same games.
std::vector<GameConfig> build_games(const ExperimentPlan& plan);

}  // namespace semchain
