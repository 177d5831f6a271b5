#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frogger/env.hpp"
#include "frogger/objects.hpp"
#include "frogger/replay.hpp"
#include "frogger/rng.hpp"

namespace frogger {

enum class EncoderMode : int { ObjectSlots = 0, PixelsFlat = 1 };

struct EncoderConfig {
    EncoderMode mode = EncoderMode::ObjectSlots;
    int slots = 24;  // K nearest-to-frog objects kept

    // [presence, one-hot category(4), x/160, y/210, w/160, h/210] per slot,
    // frog pose (4 values) prepended.
    int feature_len() const { return 4 + slots * 9; }
};

// Frog pose first; remaining objects by ascending distance to the frog.
std::vector<double> encode_object_state(const ObjectList& objs, const EncoderConfig& cfg);

// Fully connected [in -> 128 -> 128 -> 5], rectifier hidden, linear output.
struct QNetParams {
    std::vector<int> layer_sizes;  // e.g. {in, 128, 128, 5}
    std::vector<std::vector<double>> weights;  // [layer][out*in]
    std::vector<std::vector<double>> biases;   // [layer][out]

    static QNetParams init(const std::vector<int>& sizes, SplitMix64& rng);
    size_t param_count() const;
};

std::vector<double> q_forward(const QNetParams& params, const std::vector<double>& features);

struct TdBatch {
    std::vector<const Transition*> transitions;
    std::vector<double> is_weights;
};

// target_i = r_i (+ gamma * max_a Qtarget(s') when not terminal); delta_i =
// target_i - Q(s_i, a_i).
void td_targets(const TdBatch& batch, const QNetParams& online,
                const QNetParams& target, double gamma,
                std::vector<double>& targets_out, std::vector<double>& deltas_out);

struct TrainConfig {
    double gamma = 0.99;
    double lr = 1e-4;
    int batch = 32;
    int target_sync_every = 1000;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    int epsilon_decay_steps = 50000;
    int episodes = 5000;
    int frame_stack = 2;        // consecutive object-feature vectors concatenated
    int train_every = 1;        // env steps between gradient updates
    int eval_every = 25;        // episodes between greedy evaluations (0 = off)
    int eval_episodes = 3;
    size_t buffer_capacity = 8000;
    double buffer_alpha = 0.6;
    double buffer_epsilon = 0.01;
    double beta_start = 0.4;    // IS exponent, annealed linearly to 1.0
    double demo_priority = 5.0;
    double huber_delta = 1.0;
    int hidden = 128;
    int max_steps_per_episode = 2000;
    EncoderConfig encoder;
    uint64_t seed = 0;
};

struct EpisodeMetrics {
    int episode = 0;
    int steps = 0;
    double reward = 0.0;
    double mean_loss = 0.0;
    double epsilon = 0.0;
    double demo_fraction = 0.0;  // of transitions sampled this episode
};

struct EvalPoint {
    int episode = 0;
    double mean_reward = 0.0;
};

struct TrainResult {
    std::vector<EpisodeMetrics> metrics;
    std::vector<EvalPoint> evals;
    QNetParams params;
    size_t demos_preloaded = 0;
};

// One env step + learning bookkeeping wrapped into a class so the CLI, the
// tests, and train() share the exact same loop.
class DqnTrainer {
public:
    DqnTrainer(EnvConfig env_cfg, TrainConfig cfg,
               std::vector<Transition> demos = {});

    TrainResult run();

    // Single gradient update on the buffer; returns the IS-weighted Huber loss.
    double train_step();

    PrioritizedBuffer& buffer() { return buffer_; }
    const QNetParams& params() const { return online_; }
    const QNetParams& target_params() const { return target_; }
    int64_t global_step() const { return global_step_; }
    double last_sampled_demo_fraction() const { return last_demo_fraction_; }

private:
    double epsilon_at(int64_t step) const;
    double beta_at(int64_t step) const;
    std::vector<double> stacked_features() const;
    void push_frame(const std::vector<double>& feat);

    EnvConfig env_cfg_;
    TrainConfig cfg_;
    FroggerEnv env_;
    PrioritizedBuffer buffer_;
    QNetParams online_, target_;
    // adaptive-moment optimizer state
    std::vector<std::vector<double>> m_w_, v_w_, m_b_, v_b_;
    int64_t adam_t_ = 0;
    int64_t global_step_ = 0;
    int64_t total_steps_estimate_ = 1;
    std::vector<std::vector<double>> frame_ring_;
    SplitMix64 rng_;
    size_t demos_preloaded_ = 0;
    double last_demo_fraction_ = 0.0;
    int64_t sampled_count_ = 0, sampled_demo_count_ = 0;
};

double evaluate(const QNetParams& params, const EnvConfig& env_cfg, int episodes,
                uint64_t seed, const EncoderConfig& enc, int frame_stack,
                std::vector<double>* per_episode = nullptr);

// Central finite differences (h = 1e-4) against the analytic gradient on every
// parameter; returns the max relative error. Keep the net tiny.
double grad_check(const QNetParams& params, const TdBatch& batch, double gamma,
                  double huber_delta);

std::string metrics_csv(const std::vector<EpisodeMetrics>& rows);
std::string evals_csv(const std::vector<EvalPoint>& rows);

// Versioned binary checkpoint, magic "FQN1".
std::vector<uint8_t> save_checkpoint(const QNetParams& params, const TrainConfig& cfg);
QNetParams load_checkpoint(const std::vector<uint8_t>& blob, TrainConfig* cfg_out = nullptr);

}  // namespace frogger
