// Command-line front end: planner runs, LLM episodes, DQN training, and the
// comparison/analysis reports, all driven by JSON config files.
//
// Exit codes: 0 success, 1 usage/config error, 2 budget exhausted, 3 transport
// failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "frogger/config_io.hpp"
#include "frogger/dqn.hpp"
#include "frogger/env.hpp"
#include "frogger/llm.hpp"
#include "frogger/objects.hpp"
#include "frogger/replay.hpp"
#include "frogger/search.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace frogger;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBudget = 2;
constexpr int kExitTransport = 3;

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

json load_config(const std::string& path) {
    return path.empty() ? json::object() : load_json_file(path);
}

EnvConfig env_from(const json& cfg, std::optional<uint64_t> seed) {
    EnvConfig env = env_config_from_json(cfg.value("env", json::object()));
    if (seed) {
        env.seed = *seed;
        env.validate();
    }
    return env;
}

// Object-text encoder used when ingesting recorded trajectories as
// demonstrations; repeats the single-frame encoding to fill the frame stack.
struct StackedObjectEncoder : TrajectoryEncoder {
    EncoderConfig enc;
    int frame_stack;

    StackedObjectEncoder(EncoderConfig e, int stack) : enc(e), frame_stack(stack) {}

    std::vector<double> encode(const std::string& objects_text) const override {
        std::vector<double> one = encode_object_state(parse_objects(objects_text), enc);
        std::vector<double> out;
        out.reserve(one.size() * frame_stack);
        for (int i = 0; i < frame_stack; ++i) out.insert(out.end(), one.begin(), one.end());
        return out;
    }
};

// ---- brute ----

int cmd_brute(const std::string& config_path, std::optional<uint64_t> seed,
              const std::string& out_dir, double target, int64_t budget, int max_len,
              const std::string& order) {
    json cfg = load_config(config_path);
    FroggerEnv root(env_from(cfg, seed));

    SearchConfig scfg;
    const json& sj = cfg.value("search", json::object());
    scfg.target_score = sj.value("target_score", target);
    scfg.max_expansions = sj.value("max_expansions", budget);
    scfg.max_plan_length = sj.value("max_plan_length", max_len);
    scfg.prune_on_life_loss = sj.value("prune_on_life_loss", true);
    scfg.dedup = sj.value("dedup", true);
    scfg.seed = sj.value("seed", seed.value_or(0));
    std::string policy = sj.value("order_policy", order);
    if (policy == "fixed") scfg.order_policy = OrderPolicy::Fixed;
    else if (policy == "random") scfg.order_policy = OrderPolicy::SeededRandom;
    else throw ConfigError("order policy must be fixed|random");

    SearchResult result = brute_dfs(root, scfg);
    std::vector<CostCurvePoint> curve =
        cost_curve(root, static_cast<int>(scfg.target_score), scfg);

    json plan = json::array();
    for (Action a : result.plan) plan.push_back(action_name(a));
    json out = {{"target_score", scfg.target_score},
                {"achieved_score", result.achieved_score},
                {"nodes_expanded", result.nodes_expanded},
                {"budget_exhausted", result.budget_exhausted},
                {"plan", plan}};
    write_file(fs::path(out_dir) / "plan.json", out.dump(2) + "\n");
    write_file(fs::path(out_dir) / "cost_curve.csv", cost_curve_csv(curve));

    std::printf("achieved %.0f / %.0f in %lld expansions\n", result.achieved_score,
                scfg.target_score, static_cast<long long>(result.nodes_expanded));
    return result.achieved_score >= scfg.target_score ? kExitOk : kExitBudget;
}

// ---- llm ----

PromptConfig prompt_config_from(const json& j) {
    PromptConfig cfg;
    json lj = j.value("llm", json::object());
    std::string past = lj.value("past_steps", "0");
    cfg.past_steps = past == "all" ? -1 : std::stoi(past);
    cfg.show_rewards = lj.value("show_rewards", true);
    std::string mode = lj.value("mode", "expert");
    if (mode == "expert") cfg.mode = PromptMode::Expert;
    else if (mode == "explore") cfg.mode = PromptMode::Explore;
    else throw ConfigError("llm mode must be expert|explore");
    cfg.reasoning_effort = lj.value("reasoning_effort", "default");
    cfg.model_id = lj.value("model_id", "scripted");
    return cfg;
}

std::unique_ptr<ChatTransport> make_transport(const std::string& cassette) {
    const char* base = std::getenv("FROGGER_LLM_BASE_URL");
    std::unique_ptr<ChatTransport> inner;
    if (base && *base) inner = make_http_transport(HttpTransportConfig{});
    if (!cassette.empty())
        return std::make_unique<CassetteTransport>(cassette, std::move(inner));
    if (!inner) throw TransportError("need --cassette or FROGGER_LLM_BASE_URL");
    return inner;
}

std::string summary_row(const PromptConfig& cfg, const Trajectory& traj) {
    std::vector<int> tokens;
    for (const auto& s : traj.steps) tokens.push_back(s.completion_tokens);
    std::sort(tokens.begin(), tokens.end());
    int median = tokens.empty() ? 0 : tokens[tokens.size() / 2];
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%.6g,%zu,%d,%d\n", cfg.label().c_str(),
                  traj.total_reward, traj.steps.size(), median, traj.parse_failures);
    return buf;
}

int cmd_llm(const std::string& config_path, std::optional<uint64_t> seed,
            const std::string& out_dir, const std::string& cassette, bool grid,
            bool reflect, int step_cap) {
    json cfg = load_config(config_path);
    EnvConfig env_cfg = env_from(cfg, seed);
    PromptConfig base = prompt_config_from(cfg);
    std::unique_ptr<ChatTransport> transport = make_transport(cassette);

    std::vector<PromptConfig> runs;
    if (grid) {
        for (int past : {0, 3, -1})
            for (bool show : {true, false}) {
                PromptConfig c = base;
                c.past_steps = past;
                c.show_rewards = show;
                runs.push_back(c);
            }
    } else {
        runs.push_back(base);
    }

    EpisodeOptions opts;
    opts.step_cap = step_cap;
    std::string summary = "config,episodic_reward,steps,completion_tokens_median,parse_failures\n";
    for (const PromptConfig& run_cfg : runs) {
        Trajectory traj = run_episode(FroggerEnv(env_cfg), run_cfg, *transport, opts);
        if (traj.aborted) {
            std::fprintf(stderr, "transport failed during %s\n", run_cfg.label().c_str());
            return kExitTransport;
        }
        save_trajectory(traj,
                        (fs::path(out_dir) / (run_cfg.label() + ".jsonl")).string());
        summary += summary_row(run_cfg, traj);

        if (reflect) {
            ChatRequest req{run_cfg.model_id, build_reflection_prompt(traj),
                            run_cfg.reasoning_effort};
            ReflectionFeedback fb = parse_reflection(transport->complete(req).content);
            write_file(fs::path(out_dir) / (run_cfg.label() + "_feedback.txt"),
                       feedback_text(fb) + "\n");
            PromptConfig round2 = apply_feedback(run_cfg, fb);
            Trajectory traj2 = run_episode(FroggerEnv(env_cfg), round2, *transport, opts);
            if (traj2.aborted) return kExitTransport;
            save_trajectory(traj2, (fs::path(out_dir) /
                                    (run_cfg.label() + "_round2.jsonl")).string());
            summary += summary_row(round2, traj2);
        }
    }
    write_file(fs::path(out_dir) / "summary.csv", summary);
    std::printf("%s", summary.c_str());
    return kExitOk;
}

// ---- train ----

int cmd_train(const std::string& config_path, std::optional<uint64_t> seed,
              const std::string& out_dir, const std::vector<std::string>& demo_files) {
    json cfg = load_config(config_path);
    EnvConfig env_cfg = env_from(cfg, std::nullopt);
    TrainConfig tcfg = train_config_from_json(cfg.value("train", json::object()));
    if (seed) tcfg.seed = *seed;

    std::vector<Transition> demos;
    StackedObjectEncoder encoder(tcfg.encoder, tcfg.frame_stack);
    for (const std::string& path : demo_files) {
        std::vector<Transition> ts = ingest_trajectory(path, encoder);
        demos.insert(demos.end(), ts.begin(), ts.end());
    }

    DqnTrainer trainer(env_cfg, tcfg, std::move(demos));
    TrainResult result = trainer.run();

    write_file(fs::path(out_dir) / "metrics.csv", metrics_csv(result.metrics));
    write_file(fs::path(out_dir) / "evals.csv", evals_csv(result.evals));
    std::vector<uint8_t> ckpt = save_checkpoint(result.params, tcfg);
    fs::create_directories(out_dir);
    std::ofstream ck(fs::path(out_dir) / "checkpoint.fqn", std::ios::binary);
    ck.write(reinterpret_cast<const char*>(ckpt.data()),
             static_cast<std::streamsize>(ckpt.size()));

    double tail = 0.0;
    int n = static_cast<int>(result.metrics.size());
    int window = std::min(100, std::max(1, n));
    for (int i = n - window; i < n; ++i) tail += result.metrics[i].reward;
    std::printf("trained %d episodes, %zu demos preloaded, final-window mean %.3f\n", n,
                result.demos_preloaded, tail / window);
    return kExitOk;
}

// ---- report ----

std::vector<double> read_metric_rewards(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open metrics file: " + path);
    std::vector<double> rewards;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        // columns: episode,steps,reward,...
        size_t c1 = line.find(',');
        size_t c2 = line.find(',', c1 + 1);
        size_t c3 = line.find(',', c2 + 1);
        if (c2 == std::string::npos) throw ConfigError(path + ": malformed metrics row");
        rewards.push_back(std::stod(line.substr(c2 + 1, c3 - c2 - 1)));
    }
    if (rewards.empty()) throw ConfigError(path + ": no metric rows");
    return rewards;
}

double final_window_mean(const std::vector<double>& rewards, int window) {
    int n = static_cast<int>(rewards.size());
    int w = std::min(window, n);
    double s = 0.0;
    for (int i = n - w; i < n; ++i) s += rewards[i];
    return s / w;
}

int episodes_to_threshold(const std::vector<double>& rewards, double threshold, int window) {
    // first episode whose trailing-window mean clears the threshold
    double s = 0.0;
    for (int i = 0; i < static_cast<int>(rewards.size()); ++i) {
        s += rewards[i];
        if (i >= window) s -= rewards[i - window];
        int w = std::min(i + 1, window);
        if (s / w >= threshold) return i;
    }
    return -1;
}

int cmd_report(const std::string& run_a, const std::string& run_b, double threshold,
               int window) {
    std::vector<double> a = read_metric_rewards(run_a);
    std::vector<double> b = read_metric_rewards(run_b);
    double ma = final_window_mean(a, window);
    double mb = final_window_mean(b, window);
    double rel = mb == 0.0 ? 0.0 : (ma - mb) / std::abs(mb) * 100.0;
    if (ma == mb) rel = 0.0;
    int ta = episodes_to_threshold(a, threshold, window);
    int tb = episodes_to_threshold(b, threshold, window);

    std::printf("run,final_window_mean,episodes_to_threshold\n");
    std::printf("A (%s),%.3f,%d\n", run_a.c_str(), ma, ta);
    std::printf("B (%s),%.3f,%d\n", run_b.c_str(), mb, tb);
    std::printf("relative difference (A vs B): %+.1f%%\n", rel);
    return kExitOk;
}

// ---- analyze ----

int cmd_analyze(const std::vector<std::string>& trajectory_files,
                const std::string& out_dir) {
    std::vector<std::pair<double, double>> records;
    std::string scatter = "trajectory,completion_tokens_total,episodic_reward\n";
    for (const std::string& path : trajectory_files) {
        Trajectory traj = load_trajectory(path);
        double tokens = 0.0;
        for (const auto& s : traj.steps) tokens += s.completion_tokens;
        records.emplace_back(tokens, traj.total_reward);
        char buf[512];
        std::snprintf(buf, sizeof(buf), "%s,%.0f,%.6g\n", path.c_str(), tokens,
                      traj.total_reward);
        scatter += buf;
    }
    if (!out_dir.empty()) write_file(fs::path(out_dir) / "token_reward.csv", scatter);
    std::printf("%s", scatter.c_str());
    if (records.size() >= 2) {
        try {
            std::printf("pearson_r,%.6f\n", token_reward_correlation(records));
        } catch (const std::invalid_argument& e) {
            std::printf("pearson_r,undefined (%s)\n", e.what());
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frogger workbench: planner, LLM harness, and DQN trainer"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", cassette, order = "fixed";
    std::optional<uint64_t> seed;
    double target = 8.0;
    int64_t budget = 1000000;
    int max_len = 64;

    auto* brute = app.add_subcommand("brute", "depth-first search for a score target");
    brute->add_option("--config", config_path, "JSON config file");
    brute->add_option("--seed", seed, "environment seed override");
    brute->add_option("--out", out_dir, "output directory");
    brute->add_option("--target", target, "score target");
    brute->add_option("--budget", budget, "max environment expansions");
    brute->add_option("--max-plan-length", max_len, "plan length cap");
    brute->add_option("--order", order, "child order: fixed|random");

    bool grid = false, reflect = false;
    int step_cap = 400;
    auto* llm = app.add_subcommand("llm", "run LLM episodes against a transport");
    llm->add_option("--config", config_path, "JSON config file");
    llm->add_option("--seed", seed, "environment seed override");
    llm->add_option("--out", out_dir, "output directory");
    llm->add_option("--cassette", cassette, "record/replay cassette file");
    llm->add_flag("--grid", grid, "run all 6 past-steps x rewards configurations");
    llm->add_flag("--reflect", reflect, "chain episode -> reflection -> round 2");
    llm->add_option("--step-cap", step_cap, "episode step cap");

    std::vector<std::string> demo_files;
    auto* train = app.add_subcommand("train", "train the DQN agent");
    train->add_option("--config", config_path, "JSON config file");
    train->add_option("--seed", seed, "training seed override");
    train->add_option("--out", out_dir, "output directory");
    train->add_option("--demos", demo_files, "trajectory files preloaded as demonstrations");

    std::string run_a, run_b;
    double threshold = 5.0;
    int window = 100;
    auto* report = app.add_subcommand("report", "compare two training metrics files");
    report->add_option("--run-a", run_a, "metrics CSV of run A")->required();
    report->add_option("--run-b", run_b, "metrics CSV of run B")->required();
    report->add_option("--threshold", threshold, "reward threshold for episodes-to-threshold");
    report->add_option("--window", window, "trailing window size");

    std::vector<std::string> traj_files;
    auto* analyze = app.add_subcommand("analyze", "token-vs-reward scatter and correlation");
    analyze->add_option("--trajectories", traj_files, "trajectory JSONL files")->required();
    analyze->add_option("--out", out_dir, "output directory (optional)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (brute->parsed())
            return cmd_brute(config_path, seed, out_dir, target, budget, max_len, order);
        if (llm->parsed())
            return cmd_llm(config_path, seed, out_dir, cassette, grid, reflect, step_cap);
        if (train->parsed()) return cmd_train(config_path, seed, out_dir, demo_files);
        if (report->parsed()) return cmd_report(run_a, run_b, threshold, window);
        if (analyze->parsed()) return cmd_analyze(traj_files, out_dir);
    } catch (const TransportError& e) {
        std::fprintf(stderr, "transport error: %s\n", e.what());
        return kExitTransport;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitUsage;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
