#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "frogger/env.hpp"
#include "frogger/objects.hpp"

namespace frogger {

enum class PromptMode : int { Expert = 0, Explore = 1 };

// past_steps: 0, 3, or -1 for "all".
struct PromptConfig {
    int past_steps = 0;
    bool show_rewards = true;
    PromptMode mode = PromptMode::Expert;
    std::string reasoning_effort = "default";  // low | medium | high | default
    std::string model_id = "scripted";
    std::string feedback;  // appended to the prompt when non-empty

    std::string label() const;  // e.g. "expert_past_0_rewards_show"
};

struct ChatMessage {
    std::string role;  // "developer" | "user"
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    std::string reasoning_effort;
};

struct ChatResponse {
    std::string content;
    int completion_tokens = 0;
    double latency = 0.0;  // seconds; deterministic transports leave it 0
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    virtual ChatResponse complete(const ChatRequest& req) = 0;
};

// Always answers with the output of a user-supplied function of the call index.
class ScriptedTransport : public ChatTransport {
public:
    explicit ScriptedTransport(std::function<ChatResponse(int call_index)> fn)
        : fn_(std::move(fn)) {}
    ChatResponse complete(const ChatRequest&) override { return fn_(calls_++); }
    int calls() const { return calls_; }

private:
    std::function<ChatResponse(int)> fn_;
    int calls_ = 0;
};

// Record/replay cache keyed by a digest of the request JSON. With no inner
// transport it replays only and a cache miss is an error.
class CassetteTransport : public ChatTransport {
public:
    CassetteTransport(std::string path, std::unique_ptr<ChatTransport> inner = nullptr);
    ChatResponse complete(const ChatRequest& req) override;

private:
    void load();
    void save() const;
    std::string path_;
    std::unique_ptr<ChatTransport> inner_;
    // digest hex -> response
    std::vector<std::pair<std::string, ChatResponse>> entries_;
};

struct HttpTransportConfig {
    std::string base_url;   // falls back to FROGGER_LLM_BASE_URL
    std::string api_key;    // falls back to FROGGER_LLM_API_KEY
    int max_retries = 3;
    double backoff_base_seconds = 0.5;
    double timeout_seconds = 120.0;
};

std::unique_ptr<ChatTransport> make_http_transport(const HttpTransportConfig& cfg);

std::string request_digest(const ChatRequest& req);

struct TrajectoryStep {
    int step = 0;
    Action action = Action::NOOP;
    double reward = 0.0;
    std::string objects_text;
    std::string raw_response;
    std::string parsed_game_state;
    std::string parsed_reasoning;
    std::string parsed_action;
    int completion_tokens = 0;
    double latency = 0.0;
    bool done = false;
};

struct Trajectory {
    PromptConfig cfg;
    std::vector<TrajectoryStep> steps;
    double total_reward = 0.0;
    int parse_failures = 0;
    bool aborted = false;
};

struct ReflectionFeedback {
    std::string reasoning;
    std::vector<std::string> observations;
    std::vector<std::string> advices;
};

// One line of the step log. `prev` is the record of the transition entering
// this step (the supplement prints the pending step with the previous action).
std::string step_line(int step, Action prev_action, double prev_reward,
                      bool show_reward, const std::string& objects_text);

// history covers steps < t; objects_text_now is the observation at step t.
std::vector<ChatMessage> build_prompt(const std::vector<TrajectoryStep>& history,
                                      const std::string& objects_text_now, int t,
                                      const PromptConfig& cfg);

struct ParsedAction {
    bool ok = false;
    Action action = Action::NOOP;
    std::string game_state;
    std::string reasoning;
    std::string action_text;
    std::string error;
};

// Tolerates code fences, leading prose, and mildly broken JSON; the action
// value may be a name in any casing or a numeric code.
ParsedAction parse_action(const std::string& raw);

struct EpisodeOptions {
    int step_cap = 400;
    int parse_retries = 1;
};

Trajectory run_episode(FroggerEnv env, const PromptConfig& cfg, ChatTransport& transport,
                       const EpisodeOptions& opts = {});

std::vector<ChatMessage> build_reflection_prompt(const Trajectory& traj);

ReflectionFeedback parse_reflection(const std::string& raw);

PromptConfig apply_feedback(const PromptConfig& cfg, const ReflectionFeedback& fb);

std::string feedback_text(const ReflectionFeedback& fb);

// Pearson correlation coefficient; throws on fewer than 2 points or zero
// variance in either coordinate.
double token_reward_correlation(const std::vector<std::pair<double, double>>& records);

// JSONL: header record with the PromptConfig, then one step per line.
std::string trajectory_to_jsonl(const Trajectory& traj);
Trajectory trajectory_from_jsonl(const std::string& text);
void save_trajectory(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory(const std::string& path);

}  // namespace frogger
