// End-to-end checks that drive the installed `frogger` binary as a subprocess.

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = FROGGER_CLI_PATH;

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr combined
};

RunResult run(const std::string& args) {
    std::string out_file = "cli_out_tmp.txt";
    std::string cmd = kCli + " " + args + " > " + out_file + " 2>&1";
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream in(out_file);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    std::remove(out_file.c_str());
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("missing subcommand is a usage error") {
    CHECK(run("").exit_code == 1);
    CHECK(run("frobnicate").exit_code == 1);
}

TEST_CASE("malformed config file exits with code 1") {
    TempDir dir("cli_badcfg_tmp");
    write_text(dir.path / "bad.json", "{ not json");
    RunResult r = run("brute --config " + (dir.path / "bad.json").string() +
                      " --out " + (dir.path / "out").string());
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("config error") != std::string::npos);
}

TEST_CASE("brute reaches a small target and writes plan and curve") {
    TempDir dir("cli_brute_tmp");
    write_text(dir.path / "cfg.json", R"({"env": {"preset": "mini"}})");
    RunResult r = run("brute --config " + (dir.path / "cfg.json").string() +
                      " --target 1 --budget 10000 --out " + (dir.path / "out").string());
    CHECK(r.exit_code == 0);

    json plan = json::parse(slurp(dir.path / "out" / "plan.json"));
    CHECK(plan["achieved_score"].get<double>() >= 1.0);
    CHECK(plan["budget_exhausted"] == false);
    REQUIRE(plan["plan"].size() >= 1);
    CHECK(plan["plan"][0] == "UP");

    std::string curve = slurp(dir.path / "out" / "cost_curve.csv");
    CHECK(curve.rfind("score,nodes,wall_time\n", 0) == 0);
}

TEST_CASE("brute exits 2 when the budget runs out") {
    TempDir dir("cli_budget_tmp");
    write_text(dir.path / "cfg.json", R"({"env": {"preset": "mini"}})");
    RunResult r = run("brute --config " + (dir.path / "cfg.json").string() +
                      " --target 15 --budget 3 --out " + (dir.path / "out").string());
    CHECK(r.exit_code == 2);
}

TEST_CASE("llm replay without a cassette is a transport failure") {
    TempDir dir("cli_llm_tmp");
    write_text(dir.path / "cfg.json", R"({"env": {"preset": "mini"}})");
    RunResult r = run("llm --config " + (dir.path / "cfg.json").string() + " --out " +
                      (dir.path / "out").string());
    CHECK(r.exit_code == 3);
}

TEST_CASE("llm cassette replay misses cleanly on an empty cassette") {
    TempDir dir("cli_cassette_tmp");
    write_text(dir.path / "cfg.json", R"({"env": {"preset": "mini"}})");
    write_text(dir.path / "cassette.json", "{}");
    RunResult r = run("llm --config " + (dir.path / "cfg.json").string() +
                      " --cassette " + (dir.path / "cassette.json").string() + " --out " +
                      (dir.path / "out").string());
    CHECK(r.exit_code == 3);
}

TEST_CASE("train produces metrics, evals, and a checkpoint") {
    TempDir dir("cli_train_tmp");
    write_text(dir.path / "cfg.json", R"({
        "env": {"preset": "mini"},
        "train": {"episodes": 2, "hidden": 8, "encoder_slots": 4, "batch": 4,
                  "eval_every": 0, "max_steps_per_episode": 30, "seed": 5}
    })");
    RunResult r = run("train --config " + (dir.path / "cfg.json").string() + " --out " +
                      (dir.path / "out").string());
    CHECK(r.exit_code == 0);
    std::string metrics = slurp(dir.path / "out" / "metrics.csv");
    CHECK(metrics.rfind("episode,steps,reward", 0) == 0);
    CHECK(fs::exists(dir.path / "out" / "checkpoint.fqn"));

    // same config, same seed: metrics must be byte-identical
    RunResult r2 = run("train --config " + (dir.path / "cfg.json").string() + " --out " +
                       (dir.path / "out2").string());
    CHECK(r2.exit_code == 0);
    CHECK(slurp(dir.path / "out2" / "metrics.csv") == metrics);
}

TEST_CASE("report compares two metrics files") {
    TempDir dir("cli_report_tmp");
    std::string header = "episode,steps,reward,mean_loss,epsilon,demo_fraction\n";
    std::string a = header, b = header;
    for (int i = 0; i < 10; ++i) {
        a += std::to_string(i) + ",5,24,0,0,0\n";
        b += std::to_string(i) + ",5,15,0,0,0\n";
    }
    write_text(dir.path / "a.csv", a);
    write_text(dir.path / "b.csv", b);
    RunResult r = run("report --run-a " + (dir.path / "a.csv").string() + " --run-b " +
                      (dir.path / "b.csv").string() + " --threshold 20 --window 4");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("+60.0%") != std::string::npos);
    CHECK(r.output.find("24.000") != std::string::npos);

    RunResult same = run("report --run-a " + (dir.path / "a.csv").string() +
                         " --run-b " + (dir.path / "a.csv").string());
    CHECK(same.output.find("+0.0%") != std::string::npos);

    CHECK(run("report --run-a nope.csv --run-b nope.csv").exit_code == 1);
}

TEST_CASE("analyze reports token totals and the correlation") {
    TempDir dir("cli_analyze_tmp");
    // two minimal trajectories with distinct token totals and rewards
    auto traj = [](int tokens, double reward) {
        json header = {{"type", "header"},       {"past_steps", 0},
                       {"show_rewards", true},   {"mode", "expert"},
                       {"reasoning_effort", "default"}, {"model_id", "m"},
                       {"feedback", ""},         {"total_reward", reward},
                       {"parse_failures", 0},    {"aborted", false}};
        json step = {{"type", "step"},     {"step", 0},
                     {"action", 1},        {"reward", reward},
                     {"objects_text", "Frog at (79, 171) size (7, 7)"},
                     {"raw_response", ""},
                     {"parsed", {{"game_state", ""}, {"reasoning", ""}, {"action", "UP"}}},
                     {"completion_tokens", tokens}, {"latency", 0.0},
                     {"done", true}};
        return header.dump() + "\n" + step.dump() + "\n";
    };
    write_text(dir.path / "t1.jsonl", traj(10, 1.0));
    write_text(dir.path / "t2.jsonl", traj(30, 3.0));
    write_text(dir.path / "t3.jsonl", traj(20, 2.0));
    RunResult r = run("analyze --trajectories " + (dir.path / "t1.jsonl").string() + " " +
                      (dir.path / "t2.jsonl").string() + " " +
                      (dir.path / "t3.jsonl").string() + " --out " +
                      (dir.path / "out").string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("pearson_r,1.000000") != std::string::npos);
    std::string csv = slurp(dir.path / "out" / "token_reward.csv");
    CHECK(csv.rfind("trajectory,completion_tokens_total,episodic_reward\n", 0) == 0);
}
