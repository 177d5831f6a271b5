#include "frogger/search.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_map>

#include "frogger/rng.hpp"

namespace frogger {

namespace {

struct DfsState {
    const FroggerEnv& root;
    const SearchConfig& cfg;
    double root_score;
    int depth_limit = 0;
    int64_t nodes = 0;
    bool exhausted = false;
    bool found = false;
    double best_score = 0.0;
    std::vector<Action> best_plan;
    std::vector<Action> path;
    std::unordered_map<uint64_t, int> seen;  // state hash -> shallowest depth
    SplitMix64 order_rng;

    DfsState(const FroggerEnv& r, const SearchConfig& c)
        : root(r), cfg(c), root_score(r.score()), order_rng(c.seed) {}

    void child_order(std::array<Action, kNumActions>& order) {
        for (int i = 0; i < kNumActions; ++i) order[i] = static_cast<Action>(i);
        if (cfg.order_policy == OrderPolicy::SeededRandom) {
            for (int i = kNumActions - 1; i > 0; --i)
                std::swap(order[i], order[order_rng.next_below(i + 1)]);
        }
    }

    void dfs(const FroggerEnv& env, int depth) {
        if (depth >= depth_limit || found || exhausted) return;
        std::array<Action, kNumActions> order{};
        child_order(order);
        for (Action a : order) {
            if (nodes >= cfg.max_expansions) {
                exhausted = true;
                return;
            }
            FroggerEnv child = env;
            StepResult res = child.step(a);
            ++nodes;
            path.push_back(a);
            double gain = child.score() - root_score;
            if (gain > best_score) {
                best_score = gain;
                best_plan = path;
            }
            if (gain >= cfg.target_score) {
                found = true;
                path.pop_back();
                return;
            }
            bool expand = !child.done() && !(cfg.prune_on_life_loss && res.info.life_lost);
            if (expand && cfg.dedup) {
                uint64_t h = child.state_hash();
                auto [it, inserted] = seen.try_emplace(h, depth + 1);
                if (!inserted && it->second <= depth + 1) expand = false;
                else it->second = depth + 1;
            }
            if (expand) dfs(child, depth + 1);
            path.pop_back();
            if (found || exhausted) return;
        }
    }
};

}  // namespace

SearchResult brute_dfs(const FroggerEnv& root, const SearchConfig& cfg) {
    if (root.config().sticky_prob != 0.0)
        throw UsageError("brute_dfs requires sticky_prob == 0");
    if (cfg.max_expansions <= 0) throw UsageError("expansion budget must be positive");
    if (cfg.max_plan_length <= 0) throw UsageError("plan length cap must be positive");
    if (cfg.target_score < 1.0) throw UsageError("target_score must be >= 1");

    auto t0 = std::chrono::steady_clock::now();
    SearchResult out;
    if (root.done()) return out;

    DfsState st(root, cfg);
    for (int limit = 1; limit <= cfg.max_plan_length; ++limit) {
        st.depth_limit = limit;
        st.seen.clear();
        st.order_rng = SplitMix64(cfg.seed);
        st.dfs(root, 0);
        if (st.found || st.exhausted) break;
    }
    out.achieved_score = st.best_score;
    out.plan = std::move(st.best_plan);
    out.nodes_expanded = st.nodes;
    out.budget_exhausted = st.exhausted;
    out.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

double replay_plan(const FroggerEnv& root, const std::vector<Action>& plan) {
    FroggerEnv env = root;
    double total = 0.0;
    for (Action a : plan) {
        if (env.done()) throw UsageError("plan steps past terminal state");
        total += env.step(a).reward;
    }
    return total;
}

std::vector<CostCurvePoint> cost_curve(const FroggerEnv& root, int max_score,
                                       const SearchConfig& cfg) {
    std::vector<CostCurvePoint> curve;
    for (int target = 1; target <= max_score; ++target) {
        SearchConfig c = cfg;
        c.target_score = target;
        SearchResult r = brute_dfs(root, c);
        curve.push_back({target, r.nodes_expanded, r.wall_time, r.achieved_score >= target});
    }
    return curve;
}

std::string cost_curve_csv(const std::vector<CostCurvePoint>& curve) {
    std::string out = "score,nodes,wall_time\n";
    char buf[96];
    for (const auto& p : curve) {
        std::snprintf(buf, sizeof(buf), "%d,%lld,%.3f\n", p.score,
                      static_cast<long long>(p.nodes_expanded), p.wall_time);
        out += buf;
    }
    return out;
}

}  // namespace frogger
