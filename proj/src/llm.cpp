#include "frogger/llm.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "frogger/rng.hpp"

namespace frogger {

namespace {

using nlohmann::json;

std::string fmt_reward(double r) {
    long long i = std::llround(r);
    if (r == static_cast<double>(i)) return std::to_string(i);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", r);
    return buf;
}

const char* kCoordLine =
    "The game objects are given by their top-left corner's (x, y) positions followed by "
    "their width and height in (w, h).";
const char* kOutputLine =
    "Output in this JSON format: {game_state: describe the current game state in detail, "
    "reasoning: reasoning for choosing an action, action: the chosen action}";
const char* kReflectionDeveloper =
    "The potential actions are NOOP, UP, RIGHT, LEFT, DOWN. Analyze the given episode of "
    "a game play in detail. Provide suggestions on how to improve future game play. Be as "
    "specific in your observations and advise as possible to help the gamer maximize "
    "cumulative reward over the entire game.";

std::string mode_name(PromptMode m) {
    return m == PromptMode::Expert ? "expert" : "explore";
}

PromptMode mode_from_name(const std::string& s) {
    if (s == "expert") return PromptMode::Expert;
    if (s == "explore") return PromptMode::Explore;
    throw std::invalid_argument("unknown prompt mode: " + s);
}

}  // namespace

std::string PromptConfig::label() const {
    std::string past = past_steps < 0 ? "all" : std::to_string(past_steps);
    return mode_name(mode) + "_past_" + past + "_rewards_" +
           (show_rewards ? "show" : "hide");
}

std::string step_line(int step, Action prev_action, double prev_reward, bool show_reward,
                      const std::string& objects_text) {
    std::string out = "Step: " + std::to_string(step) + ", action: " + action_name(prev_action);
    if (show_reward) out += ", reward: " + fmt_reward(prev_reward);
    out += ", game objects: " + objects_text;
    return out;
}

std::vector<ChatMessage> build_prompt(const std::vector<TrajectoryStep>& history,
                                      const std::string& objects_text_now, int t,
                                      const PromptConfig& cfg) {
    if (static_cast<int>(history.size()) < t)
        throw std::invalid_argument("history does not cover steps < t");

    int first = cfg.past_steps < 0 ? 0 : std::max(0, t - cfg.past_steps);
    std::string text;
    for (int i = first; i <= t; ++i) {
        Action prev_a = Action::NOOP;
        double prev_r = 0.0;
        if (i >= 1) {
            prev_a = history[i - 1].action;
            prev_r = history[i - 1].reward;
        }
        const std::string& objs = i < t ? history[i].objects_text : objects_text_now;
        if (i > first) text += "\n";
        text += step_line(i, prev_a, prev_r, cfg.show_rewards, objs);
    }
    text += "\n\n";

    if (cfg.mode == PromptMode::Expert) {
        text += "You are an expert gamer and your goal is to choose the best action to "
                "beat the game.\n\n";
        text += std::string(kCoordLine) + "\n\n";
        text += "Think about all possible actions and why each action is or is not the "
                "best action to take. You are at step " + std::to_string(t) +
                " and the potential actions you can take are NOOP, UP, RIGHT, LEFT, "
                "DOWN.\n\n";
    } else {
        text += "You are a curious gamer and your goal is to explore the game "
                "environment.\n\n";
        text += std::string(kCoordLine) + "\n\n";
        text += "You are at step " + std::to_string(t) +
                " and the potential actions you can take are NOOP, UP, RIGHT, LEFT, "
                "DOWN.\n\n";
    }
    text += kOutputLine;
    if (!cfg.feedback.empty()) text += "\n\n" + cfg.feedback;

    return {{"user", text}};
}

ParsedAction parse_action(const std::string& raw) {
    ParsedAction out;

    // try strict JSON on the outermost object first
    size_t lo = raw.find('{');
    size_t hi = raw.rfind('}');
    if (lo != std::string::npos && hi != std::string::npos && hi > lo) {
        try {
            json j = json::parse(raw.substr(lo, hi - lo + 1));
            out.game_state = j.value("game_state", "");
            out.reasoning = j.value("reasoning", "");
            if (j.contains("action")) {
                if (j["action"].is_number_integer()) {
                    int code = j["action"].get<int>();
                    if (code < 0 || code >= kNumActions) throw std::invalid_argument("code");
                    out.action = static_cast<Action>(code);
                    out.action_text = action_name(out.action);
                    out.ok = true;
                    return out;
                }
                out.action_text = j["action"].get<std::string>();
                out.action = action_from_name(out.action_text);
                out.ok = true;
                return out;
            }
        } catch (const std::exception&) {
            // fall through to the lenient scan
        }
    }

    // lenient scan: last `"action": <value>` wins
    static const std::regex key(R"lit("action"\s*:\s*"?([A-Za-z]+|[0-4])"?)lit");
    std::string found;
    for (auto it = std::sregex_iterator(raw.begin(), raw.end(), key);
         it != std::sregex_iterator(); ++it)
        found = (*it)[1].str();
    if (found.empty()) {
        out.error = "no action field found in response";
        return out;
    }
    out.action_text = found;
    try {
        out.action = action_from_name(found);
    } catch (const std::exception& e) {
        out.error = e.what();
        return out;
    }
    out.ok = true;
    return out;
}

Trajectory run_episode(FroggerEnv env, const PromptConfig& cfg, ChatTransport& transport,
                       const EpisodeOptions& opts) {
    Trajectory traj;
    traj.cfg = cfg;
    int t = 0;
    while (!env.done() && t < opts.step_cap) {
        std::string objs_text = format_objects(objects(env));
        std::vector<ChatMessage> msgs = build_prompt(traj.steps, objs_text, t, cfg);
        ChatRequest req{cfg.model_id, msgs, cfg.reasoning_effort};

        ChatResponse resp;
        ParsedAction parsed;
        bool got_action = false;
        try {
            for (int attempt = 0; attempt <= opts.parse_retries; ++attempt) {
                resp = transport.complete(req);
                parsed = parse_action(resp.content);
                if (parsed.ok) {
                    got_action = true;
                    break;
                }
            }
        } catch (const TransportError&) {
            traj.aborted = true;
            break;
        }
        if (!got_action) {
            ++traj.parse_failures;
            parsed.action = Action::NOOP;  // fallback
        }

        StepResult res = env.step(parsed.action);
        TrajectoryStep rec;
        rec.step = t;
        rec.action = parsed.action;
        rec.reward = res.reward;
        rec.objects_text = std::move(objs_text);
        rec.raw_response = resp.content;
        rec.parsed_game_state = parsed.game_state;
        rec.parsed_reasoning = parsed.reasoning;
        rec.parsed_action = parsed.action_text;
        rec.completion_tokens = resp.completion_tokens;
        rec.latency = resp.latency;
        rec.done = res.done;
        traj.total_reward += res.reward;
        traj.steps.push_back(std::move(rec));
        ++t;
    }
    return traj;
}

std::vector<ChatMessage> build_reflection_prompt(const Trajectory& traj) {
    if (traj.steps.empty()) throw std::invalid_argument("cannot reflect on an empty trajectory");
    std::string log;
    for (size_t i = 0; i < traj.steps.size(); ++i) {
        const auto& s = traj.steps[i];
        if (i) log += "\n";
        log += step_line(s.step, s.action, s.reward, true, s.objects_text);
    }
    return {{"developer", kReflectionDeveloper}, {"user", log}};
}

ReflectionFeedback parse_reflection(const std::string& raw) {
    size_t lo = raw.find('{');
    size_t hi = raw.rfind('}');
    if (lo == std::string::npos || hi == std::string::npos || hi <= lo)
        throw std::invalid_argument("no JSON object in reflection response");
    json j = json::parse(raw.substr(lo, hi - lo + 1));
    ReflectionFeedback fb;
    fb.reasoning = j.value("reasoning", "");
    for (const auto& o : j.value("observations", json::array()))
        fb.observations.push_back(o.get<std::string>());
    for (const auto& a : j.value("advices", json::array()))
        fb.advices.push_back(a.get<std::string>());
    if (fb.advices.empty())
        throw std::invalid_argument("reflection feedback has no advices");
    return fb;
}

std::string feedback_text(const ReflectionFeedback& fb) {
    std::string out = "Feedback from the previous episode:\n";
    out += "Observations:\n";
    for (const auto& o : fb.observations) out += "- " + o + "\n";
    out += "Advices:\n";
    for (const auto& a : fb.advices) out += "- " + a + "\n";
    out.pop_back();  // no trailing newline
    return out;
}

PromptConfig apply_feedback(const PromptConfig& cfg, const ReflectionFeedback& fb) {
    PromptConfig out = cfg;
    out.feedback = feedback_text(fb);
    return out;
}

double token_reward_correlation(const std::vector<std::pair<double, double>>& records) {
    size_t n = records.size();
    if (n < 2) throw std::invalid_argument("need at least 2 records");
    double mx = 0, my = 0;
    for (const auto& [x, y] : records) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (const auto& [x, y] : records) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("zero variance: correlation undefined");
    return sxy / std::sqrt(sxx * syy);
}

// --- trajectory files ---

std::string trajectory_to_jsonl(const Trajectory& traj) {
    std::string out;
    json header = {{"type", "header"},
                   {"past_steps", traj.cfg.past_steps},
                   {"show_rewards", traj.cfg.show_rewards},
                   {"mode", mode_name(traj.cfg.mode)},
                   {"reasoning_effort", traj.cfg.reasoning_effort},
                   {"model_id", traj.cfg.model_id},
                   {"feedback", traj.cfg.feedback},
                   {"total_reward", traj.total_reward},
                   {"parse_failures", traj.parse_failures},
                   {"aborted", traj.aborted}};
    out += header.dump() + "\n";
    for (const auto& s : traj.steps) {
        json rec = {{"type", "step"},
                    {"step", s.step},
                    {"action", static_cast<int>(s.action)},
                    {"reward", s.reward},
                    {"objects_text", s.objects_text},
                    {"raw_response", s.raw_response},
                    {"parsed",
                     {{"game_state", s.parsed_game_state},
                      {"reasoning", s.parsed_reasoning},
                      {"action", s.parsed_action}}},
                    {"completion_tokens", s.completion_tokens},
                    {"latency", s.latency},
                    {"done", s.done}};
        out += rec.dump() + "\n";
    }
    return out;
}

Trajectory trajectory_from_jsonl(const std::string& text) {
    Trajectory traj;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": bad trajectory json: " + e.what());
        }
        std::string type = rec.value("type", "");
        if (type == "header") {
            traj.cfg.past_steps = rec.value("past_steps", 0);
            traj.cfg.show_rewards = rec.value("show_rewards", true);
            traj.cfg.mode = mode_from_name(rec.value("mode", "expert"));
            traj.cfg.reasoning_effort = rec.value("reasoning_effort", "default");
            traj.cfg.model_id = rec.value("model_id", "");
            traj.cfg.feedback = rec.value("feedback", "");
            traj.total_reward = rec.value("total_reward", 0.0);
            traj.parse_failures = rec.value("parse_failures", 0);
            traj.aborted = rec.value("aborted", false);
            have_header = true;
        } else if (type == "step") {
            TrajectoryStep s;
            s.step = rec.at("step").get<int>();
            s.action = static_cast<Action>(rec.at("action").get<int>());
            s.reward = rec.at("reward").get<double>();
            s.objects_text = rec.at("objects_text").get<std::string>();
            s.raw_response = rec.value("raw_response", "");
            if (rec.contains("parsed")) {
                s.parsed_game_state = rec["parsed"].value("game_state", "");
                s.parsed_reasoning = rec["parsed"].value("reasoning", "");
                s.parsed_action = rec["parsed"].value("action", "");
            }
            s.completion_tokens = rec.value("completion_tokens", 0);
            s.latency = rec.value("latency", 0.0);
            s.done = rec.value("done", false);
            traj.steps.push_back(std::move(s));
        } else {
            throw std::runtime_error("line " + std::to_string(line_no) +
                                     ": unknown record type");
        }
    }
    if (!have_header) throw std::runtime_error("trajectory file has no header record");
    return traj;
}

void save_trajectory(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write trajectory file: " + path);
    out << trajectory_to_jsonl(traj);
}

Trajectory load_trajectory(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trajectory file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return trajectory_from_jsonl(ss.str());
}

// --- transports ---

std::string request_digest(const ChatRequest& req) {
    json j = {{"model", req.model}, {"reasoning_effort", req.reasoning_effort}};
    json msgs = json::array();
    for (const auto& m : req.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    j["messages"] = msgs;
    std::string dump = j.dump();
    uint64_t h = fnv1a64(dump.data(), dump.size());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

CassetteTransport::CassetteTransport(std::string path, std::unique_ptr<ChatTransport> inner)
    : path_(std::move(path)), inner_(std::move(inner)) {
    load();
}

void CassetteTransport::load() {
    std::ifstream in(path_);
    if (!in) return;  // fresh cassette
    json j;
    in >> j;
    json entry_map = j.value("entries", json::object());
    for (auto& [digest, entry] : entry_map.items()) {
        ChatResponse r;
        r.content = entry.value("content", "");
        r.completion_tokens = entry.value("completion_tokens", 0);
        entries_.emplace_back(digest, std::move(r));
    }
}

void CassetteTransport::save() const {
    json entries = json::object();
    for (const auto& [digest, r] : entries_)
        entries[digest] = {{"content", r.content}, {"completion_tokens", r.completion_tokens}};
    std::ofstream out(path_, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write cassette: " + path_);
    out << json{{"entries", entries}}.dump(2) << "\n";
}

ChatResponse CassetteTransport::complete(const ChatRequest& req) {
    std::string digest = request_digest(req);
    for (const auto& [d, r] : entries_)
        if (d == digest) return r;
    if (!inner_) throw TransportError("cassette miss for request digest " + digest);
    ChatResponse r = inner_->complete(req);
    ChatResponse stored = r;
    stored.latency = 0.0;
    entries_.emplace_back(digest, stored);
    save();
    return r;
}

namespace {

class HttpTransport : public ChatTransport {
public:
    explicit HttpTransport(HttpTransportConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.base_url.empty())
            if (const char* v = std::getenv("FROGGER_LLM_BASE_URL")) cfg_.base_url = v;
        if (cfg_.api_key.empty())
            if (const char* v = std::getenv("FROGGER_LLM_API_KEY")) cfg_.api_key = v;
        if (cfg_.base_url.empty())
            throw TransportError("no base url (set FROGGER_LLM_BASE_URL)");
    }

    ChatResponse complete(const ChatRequest& req) override;

private:
    HttpTransportConfig cfg_;
};

}  // namespace

std::unique_ptr<ChatTransport> make_http_transport(const HttpTransportConfig& cfg) {
    return std::make_unique<HttpTransport>(cfg);
}

}  // namespace frogger

// httplib pulls in a lot; keep it contained to this translation unit tail.
#include <httplib.h>

namespace frogger {

ChatResponse HttpTransport::complete(const ChatRequest& req) {
    json body = {{"model", req.model}};
    json msgs = json::array();
    for (const auto& m : req.messages)
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    body["messages"] = msgs;
    if (!req.reasoning_effort.empty() && req.reasoning_effort != "default")
        body["reasoning_effort"] = req.reasoning_effort;
    std::string payload = body.dump();

    // split base_url into host part and path prefix
    std::string url = cfg_.base_url;
    std::string prefix;
    size_t scheme = url.find("://");
    size_t slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (slash != std::string::npos) {
        prefix = url.substr(slash);
        url = url.substr(0, slash);
    }
    if (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    std::string path = prefix + "/chat/completions";

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) {
            double delay = cfg_.backoff_base_seconds * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        httplib::Client cli(url);
        cli.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_seconds));
        httplib::Headers headers;
        if (!cfg_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + cfg_.api_key);
        auto t0 = std::chrono::steady_clock::now();
        auto res = cli.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "connection failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "http status " + std::to_string(res->status);
            continue;  // retryable
        }
        if (res->status != 200)
            throw TransportError("http status " + std::to_string(res->status) + ": " + res->body);
        try {
            json j = json::parse(res->body);
            ChatResponse out;
            out.content = j.at("choices").at(0).at("message").at("content").get<std::string>();
            out.completion_tokens =
                j.value("usage", json::object()).value("completion_tokens", 0);
            out.latency =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return out;
        } catch (const std::exception& e) {
            throw TransportError(std::string("malformed completion response: ") + e.what());
        }
    }
    throw TransportError("transport failed after retries: " + last_error);
}

}  // namespace frogger
