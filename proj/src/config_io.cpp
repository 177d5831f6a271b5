#include "frogger/config_io.hpp"

#include <fstream>

namespace frogger {

using nlohmann::json;

namespace {

LaneKind lane_kind_from_name(const std::string& s) {
    if (s == "safe") return LaneKind::Safe;
    if (s == "car") return LaneKind::Car;
    if (s == "log") return LaneKind::Log;
    if (s == "turtle") return LaneKind::Turtle;
    throw ConfigError("unknown lane kind: " + s);
}

const char* lane_kind_name(LaneKind k) {
    switch (k) {
        case LaneKind::Safe: return "safe";
        case LaneKind::Car: return "car";
        case LaneKind::Log: return "log";
        case LaneKind::Turtle: return "turtle";
    }
    return "?";
}

}  // namespace

EnvConfig env_config_from_json(const json& j) {
    std::string preset = j.value("preset", "standard");
    EnvConfig cfg;
    if (preset == "standard") cfg = EnvConfig::standard();
    else if (preset == "mini") cfg = EnvConfig::mini();
    else throw ConfigError("unknown env preset: " + preset);

    if (j.contains("lane_y_table"))
        cfg.lane_y_table = j["lane_y_table"].get<std::vector<int>>();
    if (j.contains("lanes")) {
        cfg.lane_specs.clear();
        for (const auto& lj : j["lanes"]) {
            LaneSpec s;
            s.kind = lane_kind_from_name(lj.value("kind", "safe"));
            s.direction = lj.value("direction", 1);
            s.speed = lj.value("speed", 1.0);
            s.widths = lj.value("widths", std::vector<int>{});
            s.gaps = lj.value("gaps", std::vector<int>{});
            s.start_offset = lj.value("start_offset", 8);
            cfg.lane_specs.push_back(std::move(s));
        }
    }
    if (j.contains("bay_xs")) {
        auto bays = j["bay_xs"].get<std::vector<std::vector<int>>>();
        if (bays.size() != kNumBays) throw ConfigError("bay_xs must list 5 intervals");
        for (size_t i = 0; i < kNumBays; ++i) {
            if (bays[i].size() != 2) throw ConfigError("bay interval must be [lo, hi]");
            cfg.bay_xs[i] = {bays[i][0], bays[i][1]};
        }
    }
    cfg.frog_step_x = j.value("frog_step_x", cfg.frog_step_x);
    cfg.frog_start_x = j.value("frog_start_x", cfg.frog_start_x);
    cfg.x_min = j.value("x_min", cfg.x_min);
    cfg.x_max = j.value("x_max", cfg.x_max);
    cfg.lives = j.value("lives", cfg.lives);
    cfg.timer_ticks = j.value("timer_ticks", cfg.timer_ticks);
    cfg.ticks_per_second = j.value("ticks_per_second", cfg.ticks_per_second);
    cfg.sticky_prob = j.value("sticky_prob", cfg.sticky_prob);
    cfg.bay_entry_reward = j.value("bay_entry_reward", cfg.bay_entry_reward);
    cfg.all_bays_bonus = j.value("all_bays_bonus", cfg.all_bays_bonus);
    cfg.hide_current_lane = j.value("hide_current_lane", cfg.hide_current_lane);
    cfg.level_speed_multiplier = j.value("level_speed_multiplier", cfg.level_speed_multiplier);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

json env_config_to_json(const EnvConfig& cfg) {
    json lanes = json::array();
    for (const auto& s : cfg.lane_specs) {
        lanes.push_back({{"kind", lane_kind_name(s.kind)},
                         {"direction", s.direction},
                         {"speed", s.speed},
                         {"widths", s.widths},
                         {"gaps", s.gaps},
                         {"start_offset", s.start_offset}});
    }
    json bays = json::array();
    for (const auto& b : cfg.bay_xs) bays.push_back(std::vector<int>{b.lo, b.hi});
    return {{"lane_y_table", cfg.lane_y_table},
            {"lanes", lanes},
            {"bay_xs", bays},
            {"frog_step_x", cfg.frog_step_x},
            {"frog_start_x", cfg.frog_start_x},
            {"x_min", cfg.x_min},
            {"x_max", cfg.x_max},
            {"lives", cfg.lives},
            {"timer_ticks", cfg.timer_ticks},
            {"ticks_per_second", cfg.ticks_per_second},
            {"sticky_prob", cfg.sticky_prob},
            {"bay_entry_reward", cfg.bay_entry_reward},
            {"all_bays_bonus", cfg.all_bays_bonus},
            {"hide_current_lane", cfg.hide_current_lane},
            {"level_speed_multiplier", cfg.level_speed_multiplier},
            {"seed", cfg.seed}};
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    c.gamma = j.value("gamma", c.gamma);
    c.lr = j.value("lr", c.lr);
    c.batch = j.value("batch", c.batch);
    c.target_sync_every = j.value("target_sync_every", c.target_sync_every);
    c.epsilon_start = j.value("epsilon_start", c.epsilon_start);
    c.epsilon_end = j.value("epsilon_end", c.epsilon_end);
    c.epsilon_decay_steps = j.value("epsilon_decay_steps", c.epsilon_decay_steps);
    c.episodes = j.value("episodes", c.episodes);
    c.frame_stack = j.value("frame_stack", c.frame_stack);
    c.train_every = j.value("train_every", c.train_every);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
    c.buffer_capacity = j.value("buffer_capacity", c.buffer_capacity);
    c.buffer_alpha = j.value("buffer_alpha", c.buffer_alpha);
    c.buffer_epsilon = j.value("buffer_epsilon", c.buffer_epsilon);
    c.beta_start = j.value("beta_start", c.beta_start);
    c.demo_priority = j.value("demo_priority", c.demo_priority);
    c.huber_delta = j.value("huber_delta", c.huber_delta);
    c.hidden = j.value("hidden", c.hidden);
    c.max_steps_per_episode = j.value("max_steps_per_episode", c.max_steps_per_episode);
    c.encoder.slots = j.value("encoder_slots", c.encoder.slots);
    std::string mode = j.value("encoder_mode", "object_slots");
    if (mode == "object_slots") c.encoder.mode = EncoderMode::ObjectSlots;
    else if (mode == "pixels_flat") c.encoder.mode = EncoderMode::PixelsFlat;
    else throw ConfigError("unknown encoder mode: " + mode);
    c.seed = j.value("seed", c.seed);
    return c;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace frogger
