#include <doctest.h>

#include "frogger/search.hpp"
#include "test_helpers.hpp"

using namespace frogger;
using testutil::safe_config;

TEST_CASE("score 1 from the start is a single hop") {
    FroggerEnv root(EnvConfig::standard());
    SearchConfig cfg;
    cfg.target_score = 1;
    SearchResult r = brute_dfs(root, cfg);
    CHECK(r.achieved_score >= 1.0);
    CHECK(r.plan.size() == 1);
    CHECK(r.plan[0] == Action::UP);
    CHECK(r.nodes_expanded <= 5);
    CHECK_FALSE(r.budget_exhausted);
}

TEST_CASE("returned plans replay to the achieved score") {
    FroggerEnv root(EnvConfig::standard());
    SearchConfig cfg;
    cfg.target_score = 4;
    SearchResult r = brute_dfs(root, cfg);
    REQUIRE(r.achieved_score >= 4.0);
    CHECK(replay_plan(root, r.plan) == r.achieved_score);
}

TEST_CASE("empty plan replays to zero") {
    FroggerEnv root(EnvConfig::standard());
    CHECK(replay_plan(root, {}) == 0.0);
}

TEST_CASE("budget of one step exhausts immediately on a deep target") {
    FroggerEnv root(EnvConfig::standard());
    SearchConfig cfg;
    cfg.target_score = 8;
    cfg.max_expansions = 1;
    SearchResult r = brute_dfs(root, cfg);
    CHECK(r.budget_exhausted);
    CHECK(r.nodes_expanded == 1);
}

TEST_CASE("expansion count never exceeds the budget") {
    FroggerEnv root(EnvConfig::standard());
    SearchConfig cfg;
    cfg.target_score = 6;
    cfg.max_expansions = 500;
    SearchResult r = brute_dfs(root, cfg);
    CHECK(r.nodes_expanded <= 500);
}

TEST_CASE("degenerate search configs are usage errors") {
    FroggerEnv root(EnvConfig::standard());
    SearchConfig cfg;
    cfg.max_expansions = 0;
    CHECK_THROWS_AS(brute_dfs(root, cfg), UsageError);
    cfg = SearchConfig{};
    cfg.target_score = 0.5;
    CHECK_THROWS_AS(brute_dfs(root, cfg), UsageError);
    EnvConfig sticky = EnvConfig::standard();
    sticky.sticky_prob = 0.25;
    cfg = SearchConfig{};
    CHECK_THROWS_AS(brute_dfs(FroggerEnv(sticky), cfg), UsageError);
}

TEST_CASE("both child orderings find the same target score") {
    FroggerEnv root(EnvConfig::standard());
    SearchConfig fixed;
    fixed.target_score = 3;
    SearchConfig shuffled = fixed;
    shuffled.order_policy = OrderPolicy::SeededRandom;
    shuffled.seed = 17;
    SearchResult a = brute_dfs(root, fixed);
    SearchResult b = brute_dfs(root, shuffled);
    CHECK(a.achieved_score >= 3.0);
    CHECK(b.achieved_score >= 3.0);
    CHECK(replay_plan(root, b.plan) == b.achieved_score);
}

TEST_CASE("seeded shuffles are reproducible") {
    FroggerEnv root(EnvConfig::standard());
    SearchConfig cfg;
    cfg.target_score = 3;
    cfg.order_policy = OrderPolicy::SeededRandom;
    cfg.seed = 5;
    SearchResult a = brute_dfs(root, cfg);
    SearchResult b = brute_dfs(root, cfg);
    CHECK(a.plan == b.plan);
    CHECK(a.nodes_expanded == b.nodes_expanded);
}

TEST_CASE("dedup prunes revisits and keeps the result") {
    FroggerEnv root(EnvConfig::standard());
    SearchConfig with;
    with.target_score = 3;
    SearchConfig without = with;
    without.dedup = false;
    SearchResult a = brute_dfs(root, with);
    SearchResult b = brute_dfs(root, without);
    CHECK(a.achieved_score >= 3.0);
    CHECK(b.achieved_score >= 3.0);
    CHECK(a.nodes_expanded <= b.nodes_expanded);
}

TEST_CASE("cost curve is monotone in expansions") {
    FroggerEnv root(EnvConfig::standard());
    SearchConfig cfg;
    cfg.max_expansions = 200000;
    std::vector<CostCurvePoint> curve = cost_curve(root, 4, cfg);
    REQUIRE(curve.size() == 4);
    for (size_t i = 1; i < curve.size(); ++i)
        CHECK(curve[i].nodes_expanded >= curve[i - 1].nodes_expanded);
    for (const auto& p : curve) CHECK(p.reached);
    std::string csv = cost_curve_csv(curve);
    CHECK(csv.rfind("score,nodes,wall_time\n", 0) == 0);
}

TEST_CASE("searching a finished game yields nothing") {
    EnvConfig cfg = EnvConfig::standard();
    cfg.lives = 1;
    FroggerEnv env(cfg);
    while (!env.done()) env.step(Action::NOOP);  // timer death burns the only life
    SearchResult r = brute_dfs(env, SearchConfig{});
    CHECK(r.plan.empty());
    CHECK(r.nodes_expanded == 0);
}
