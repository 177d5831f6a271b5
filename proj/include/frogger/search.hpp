#pragma once

#include <cstdint>
#include <vector>

#include "frogger/env.hpp"

namespace frogger {

enum class OrderPolicy : int { Fixed = 0, SeededRandom = 1 };

struct SearchConfig {
    double target_score = 1.0;       // gain relative to the root's score
    int64_t max_expansions = 100000;  // env steps simulated
    int max_plan_length = 64;
    OrderPolicy order_policy = OrderPolicy::Fixed;
    bool prune_on_life_loss = true;
    bool dedup = true;
    uint64_t seed = 0;
};

struct SearchResult {
    double achieved_score = 0.0;  // relative to root
    std::vector<Action> plan;
    int64_t nodes_expanded = 0;
    double wall_time = 0.0;  // seconds
    bool budget_exhausted = false;
};

// Iterative-deepening DFS over cloned environments. Requires sticky_prob == 0.
SearchResult brute_dfs(const FroggerEnv& root, const SearchConfig& cfg);

// Executes the plan from a copy of root, returns the cumulative reward.
double replay_plan(const FroggerEnv& root, const std::vector<Action>& plan);

struct CostCurvePoint {
    int score = 0;
    int64_t nodes_expanded = 0;
    double wall_time = 0.0;
    bool reached = false;
};

// Independent brute_dfs runs for every target 1..max_score.
std::vector<CostCurvePoint> cost_curve(const FroggerEnv& root, int max_score,
                                       const SearchConfig& cfg);

std::string cost_curve_csv(const std::vector<CostCurvePoint>& curve);

}  // namespace frogger
