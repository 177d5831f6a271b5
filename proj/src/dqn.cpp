#include "frogger/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

namespace frogger {

namespace {

int category_slot(ObjectCategory c) {
    switch (c) {
        case ObjectCategory::Car: return 0;
        case ObjectCategory::Log: return 1;
        case ObjectCategory::Turtle: return 2;
        case ObjectCategory::LadyFrog: return 3;
        default: return -1;
    }
}

double huber(double d, double k) {
    double a = std::abs(d);
    return a <= k ? 0.5 * d * d : k * (a - 0.5 * k);
}

double huber_grad(double d, double k) {  // d(huber)/dd
    return std::abs(d) <= k ? d : (d > 0 ? k : -k);
}

struct ForwardCache {
    std::vector<std::vector<double>> activations;  // per layer, post-activation
};

std::vector<double> forward_cached(const QNetParams& p, const std::vector<double>& x,
                                   ForwardCache* cache) {
    if (static_cast<int>(x.size()) != p.layer_sizes.front())
        throw std::invalid_argument("feature length mismatch");
    std::vector<double> a = x;
    if (cache) cache->activations.push_back(a);
    const size_t layers = p.weights.size();
    for (size_t l = 0; l < layers; ++l) {
        int in = p.layer_sizes[l], out = p.layer_sizes[l + 1];
        std::vector<double> z(out);
        const double* w = p.weights[l].data();
        for (int o = 0; o < out; ++o) {
            double acc = p.biases[l][o];
            const double* wr = w + static_cast<size_t>(o) * in;
            for (int i = 0; i < in; ++i) acc += wr[i] * a[i];
            z[o] = acc;
        }
        if (l + 1 < layers)
            for (auto& v : z) v = std::max(v, 0.0);  // rectifier on hidden layers
        a = std::move(z);
        if (cache) cache->activations.push_back(a);
    }
    return a;
}

struct Grads {
    std::vector<std::vector<double>> w, b;
    explicit Grads(const QNetParams& p) {
        for (const auto& lw : p.weights) w.emplace_back(lw.size(), 0.0);
        for (const auto& lb : p.biases) b.emplace_back(lb.size(), 0.0);
    }
};

// Accumulates d(loss)/d(params) for one sample given d(loss)/d(output).
void backward(const QNetParams& p, const ForwardCache& cache,
              std::vector<double> dout, Grads& g) {
    const size_t layers = p.weights.size();
    for (size_t l = layers; l-- > 0;) {
        const auto& a_in = cache.activations[l];
        int in = p.layer_sizes[l], out = p.layer_sizes[l + 1];
        for (int o = 0; o < out; ++o) {
            g.b[l][o] += dout[o];
            double* gw = g.w[l].data() + static_cast<size_t>(o) * in;
            for (int i = 0; i < in; ++i) gw[i] += dout[o] * a_in[i];
        }
        if (l == 0) break;
        std::vector<double> din(in, 0.0);
        const double* w = p.weights[l].data();
        for (int o = 0; o < out; ++o) {
            const double* wr = w + static_cast<size_t>(o) * in;
            for (int i = 0; i < in; ++i) din[i] += wr[i] * dout[o];
        }
        // rectifier gate: a_in is the post-activation of the previous layer
        for (int i = 0; i < in; ++i)
            if (a_in[i] <= 0.0) din[i] = 0.0;
        dout = std::move(din);
    }
}

// Loss on a batch with fixed targets; used by train_step and grad_check.
double batch_loss_and_grads(const QNetParams& online, const TdBatch& batch,
                            const std::vector<double>& targets, double huber_delta,
                            Grads* grads, std::vector<double>* deltas_out) {
    const size_t n = batch.transitions.size();
    double loss = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const Transition& t = *batch.transitions[k];
        ForwardCache cache;
        std::vector<double> q = forward_cached(online, t.state_features, &cache);
        double delta = targets[k] - q[t.action];
        if (deltas_out) (*deltas_out)[k] = delta;
        double w = batch.is_weights.empty() ? 1.0 : batch.is_weights[k];
        loss += w * huber(delta, huber_delta) / n;
        if (grads) {
            std::vector<double> dout(q.size(), 0.0);
            dout[t.action] = -w * huber_grad(delta, huber_delta) / n;
            backward(online, cache, std::move(dout), *grads);
        }
    }
    return loss;
}

uint64_t mix_seed(uint64_t a, uint64_t b) {
    SplitMix64 r(a ^ (b * 0x9e3779b97f4a7c15ull));
    return r.next();
}

}  // namespace

std::vector<double> encode_object_state(const ObjectList& objs, const EncoderConfig& cfg) {
    std::vector<double> out(cfg.feature_len(), 0.0);
    const GameObject* frog = nullptr;
    for (const auto& o : objs)
        if (o.category == ObjectCategory::Frog) {
            frog = &o;
            break;
        }
    if (frog) {
        out[0] = frog->x / 160.0;
        out[1] = frog->y / 210.0;
        out[2] = frog->w / 160.0;
        out[3] = frog->h / 210.0;
    }

    // nearest-to-frog ordering on integer center distances (x2 to stay exact)
    struct Ranked {
        int64_t dist2;
        size_t idx;
    };
    std::vector<Ranked> ranked;
    int fx2 = frog ? 2 * frog->x + frog->w : 0;
    int fy2 = frog ? 2 * frog->y + frog->h : 0;
    for (size_t i = 0; i < objs.size(); ++i) {
        if (objs[i].category == ObjectCategory::Frog) continue;
        int64_t dx = 2 * objs[i].x + objs[i].w - fx2;
        int64_t dy = 2 * objs[i].y + objs[i].h - fy2;
        ranked.push_back({dx * dx + dy * dy, i});
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const Ranked& a, const Ranked& b) { return a.dist2 < b.dist2; });

    int filled = std::min<int>(cfg.slots, static_cast<int>(ranked.size()));
    for (int s = 0; s < filled; ++s) {
        const auto& o = objs[ranked[s].idx];
        double* slot = out.data() + 4 + static_cast<size_t>(s) * 9;
        slot[0] = 1.0;  // presence
        slot[1 + category_slot(o.category)] = 1.0;
        slot[5] = o.x / 160.0;
        slot[6] = o.y / 210.0;
        slot[7] = o.w / 160.0;
        slot[8] = o.h / 210.0;
    }
    return out;
}

QNetParams QNetParams::init(const std::vector<int>& sizes, SplitMix64& rng) {
    if (sizes.size() < 2) throw std::invalid_argument("need at least one layer");
    QNetParams p;
    p.layer_sizes = sizes;
    for (size_t l = 0; l + 1 < sizes.size(); ++l) {
        int in = sizes[l], out = sizes[l + 1];
        double bound = std::sqrt(6.0 / in);
        std::vector<double> w(static_cast<size_t>(in) * out);
        for (auto& v : w) v = (2.0 * rng.next_double() - 1.0) * bound;
        p.weights.push_back(std::move(w));
        p.biases.emplace_back(out, 0.0);
    }
    return p;
}

size_t QNetParams::param_count() const {
    size_t n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
}

std::vector<double> q_forward(const QNetParams& params, const std::vector<double>& features) {
    return forward_cached(params, features, nullptr);
}

void td_targets(const TdBatch& batch, const QNetParams& online, const QNetParams& target,
                double gamma, std::vector<double>& targets_out,
                std::vector<double>& deltas_out) {
    const size_t n = batch.transitions.size();
    if (n == 0) throw std::invalid_argument("empty batch");
    targets_out.resize(n);
    deltas_out.resize(n);
    for (size_t k = 0; k < n; ++k) {
        const Transition& t = *batch.transitions[k];
        double y = t.reward;
        if (!t.done) {
            std::vector<double> qn = q_forward(target, t.next_state_features);
            y += gamma * *std::max_element(qn.begin(), qn.end());
        }
        targets_out[k] = y;
        std::vector<double> q = q_forward(online, t.state_features);
        deltas_out[k] = y - q[t.action];
    }
}

double grad_check(const QNetParams& params, const TdBatch& batch, double gamma,
                  double huber_delta) {
    std::vector<double> targets, deltas;
    td_targets(batch, params, params, gamma, targets, deltas);

    Grads analytic(params);
    std::vector<double> tmp(batch.transitions.size());
    batch_loss_and_grads(params, batch, targets, huber_delta, &analytic, &tmp);

    const double h = 1e-4;
    double max_rel = 0.0;
    QNetParams p = params;
    auto probe = [&](double* v, double ga) {
        double orig = *v;
        *v = orig + h;
        double lp = batch_loss_and_grads(p, batch, targets, huber_delta, nullptr, &tmp);
        *v = orig - h;
        double lm = batch_loss_and_grads(p, batch, targets, huber_delta, nullptr, &tmp);
        *v = orig;
        double gn = (lp - lm) / (2.0 * h);
        double denom = std::max(std::abs(ga) + std::abs(gn), 1e-6);
        max_rel = std::max(max_rel, std::abs(ga - gn) / denom);
    };
    for (size_t l = 0; l < p.weights.size(); ++l) {
        for (size_t i = 0; i < p.weights[l].size(); ++i)
            probe(&p.weights[l][i], analytic.w[l][i]);
        for (size_t i = 0; i < p.biases[l].size(); ++i)
            probe(&p.biases[l][i], analytic.b[l][i]);
    }
    return max_rel;
}

DqnTrainer::DqnTrainer(EnvConfig env_cfg, TrainConfig cfg, std::vector<Transition> demos)
    : env_cfg_(std::move(env_cfg)),
      cfg_(cfg),
      env_(env_cfg_),
      buffer_(cfg.buffer_capacity,
              static_cast<size_t>(cfg.frame_stack) * cfg.encoder.feature_len(),
              cfg.buffer_alpha, cfg.buffer_epsilon),
      rng_(cfg.seed) {
    int in = cfg_.frame_stack * cfg_.encoder.feature_len();
    SplitMix64 init_rng(mix_seed(cfg_.seed, 0xd1f));
    online_ = QNetParams::init({in, cfg_.hidden, cfg_.hidden, kNumActions}, init_rng);
    target_ = online_;
    for (const auto& w : online_.weights) {
        m_w_.emplace_back(w.size(), 0.0);
        v_w_.emplace_back(w.size(), 0.0);
    }
    for (const auto& b : online_.biases) {
        m_b_.emplace_back(b.size(), 0.0);
        v_b_.emplace_back(b.size(), 0.0);
    }
    if (!demos.empty()) {
        demos_preloaded_ = demos.size();
        buffer_.preload_demos(std::move(demos), cfg_.demo_priority);
    }
    total_steps_estimate_ = std::max<int64_t>(1, cfg_.epsilon_decay_steps);
}

double DqnTrainer::epsilon_at(int64_t step) const {
    double f = std::min(1.0, static_cast<double>(step) / cfg_.epsilon_decay_steps);
    return cfg_.epsilon_start + f * (cfg_.epsilon_end - cfg_.epsilon_start);
}

double DqnTrainer::beta_at(int64_t step) const {
    double f = std::min(1.0, static_cast<double>(step) / total_steps_estimate_);
    return cfg_.beta_start + f * (1.0 - cfg_.beta_start);
}

std::vector<double> DqnTrainer::stacked_features() const {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(cfg_.frame_stack) * cfg_.encoder.feature_len());
    for (const auto& f : frame_ring_) out.insert(out.end(), f.begin(), f.end());
    return out;
}

void DqnTrainer::push_frame(const std::vector<double>& feat) {
    frame_ring_.erase(frame_ring_.begin());
    frame_ring_.push_back(feat);
}

double DqnTrainer::train_step() {
    SampleBatch batch = buffer_.sample(cfg_.batch, beta_at(global_step_), rng_);
    TdBatch tb{batch.transitions, batch.is_weights};
    std::vector<double> targets, deltas;
    td_targets(tb, online_, target_, cfg_.gamma, targets, deltas);

    Grads grads(online_);
    std::vector<double> fresh_deltas(batch.transitions.size());
    double loss =
        batch_loss_and_grads(online_, tb, targets, cfg_.huber_delta, &grads, &fresh_deltas);

    // adaptive-moment update
    ++adam_t_;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double corr1 = 1.0 - std::pow(b1, static_cast<double>(adam_t_));
    double corr2 = 1.0 - std::pow(b2, static_cast<double>(adam_t_));
    auto apply = [&](std::vector<double>& p, std::vector<double>& m, std::vector<double>& v,
                     const std::vector<double>& g) {
        for (size_t i = 0; i < p.size(); ++i) {
            m[i] = b1 * m[i] + (1 - b1) * g[i];
            v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
            p[i] -= cfg_.lr * (m[i] / corr1) / (std::sqrt(v[i] / corr2) + eps);
        }
    };
    for (size_t l = 0; l < online_.weights.size(); ++l) {
        apply(online_.weights[l], m_w_[l], v_w_[l], grads.w[l]);
        apply(online_.biases[l], m_b_[l], v_b_[l], grads.b[l]);
    }

    buffer_.update_priorities(batch.indices, batch.stamps, fresh_deltas);

    for (const auto* t : batch.transitions) {
        ++sampled_count_;
        if (t->is_demo) ++sampled_demo_count_;
    }
    if (cfg_.target_sync_every > 0 && adam_t_ % cfg_.target_sync_every == 0)
        target_ = online_;
    return loss;
}

TrainResult DqnTrainer::run() {
    TrainResult out;
    out.demos_preloaded = demos_preloaded_;
    for (int ep = 0; ep < cfg_.episodes; ++ep) {
        env_.reset_with_seed(mix_seed(cfg_.seed, static_cast<uint64_t>(ep) + 1));
        // Deterministic configs replay identical traffic every episode; rotate
        // through start phases (matching evaluate()) via a short NOOP prefix.
        for (int k = 0; k < ep % 5 && !env_.done(); ++k) env_.step(Action::NOOP);
        frame_ring_.assign(cfg_.frame_stack, encode_object_state(objects(env_), cfg_.encoder));

        double ep_reward = 0.0;
        double loss_sum = 0.0;
        int loss_count = 0;
        int steps = 0;
        sampled_count_ = sampled_demo_count_ = 0;

        while (!env_.done() && steps < cfg_.max_steps_per_episode) {
            std::vector<double> s = stacked_features();
            double eps = epsilon_at(global_step_);
            int a;
            if (rng_.next_double() < eps) {
                a = static_cast<int>(rng_.next_below(kNumActions));
            } else {
                std::vector<double> q = q_forward(online_, s);
                a = 0;
                for (int i = 1; i < kNumActions; ++i)
                    if (q[i] > q[a]) a = i;  // lowest-code tie-break
            }
            StepResult res = env_.step(static_cast<Action>(a));
            std::vector<double> feat = encode_object_state(objects(env_), cfg_.encoder);
            if (res.info.life_lost)
                frame_ring_.assign(cfg_.frame_stack, feat);
            else
                push_frame(feat);

            Transition t;
            t.state_features = std::move(s);
            t.action = a;
            t.reward = res.reward;
            t.next_state_features = stacked_features();
            t.done = res.done || res.info.life_lost;
            buffer_.push(std::move(t));

            if (buffer_.size() >= static_cast<size_t>(cfg_.batch) &&
                global_step_ % cfg_.train_every == 0) {
                loss_sum += train_step();
                ++loss_count;
            }
            ep_reward += res.reward;
            ++global_step_;
            ++steps;
        }

        EpisodeMetrics m;
        m.episode = ep;
        m.steps = steps;
        m.reward = ep_reward;
        m.mean_loss = loss_count ? loss_sum / loss_count : 0.0;
        m.epsilon = epsilon_at(global_step_);
        m.demo_fraction =
            sampled_count_ ? static_cast<double>(sampled_demo_count_) / sampled_count_ : 0.0;
        last_demo_fraction_ = m.demo_fraction;
        out.metrics.push_back(m);

        if (cfg_.eval_every > 0 && (ep + 1) % cfg_.eval_every == 0) {
            double mean = evaluate(online_, env_cfg_, cfg_.eval_episodes,
                                   mix_seed(cfg_.seed, 0xe7a1), cfg_.encoder,
                                   cfg_.frame_stack);
            out.evals.push_back({ep + 1, mean});
        }
    }
    out.params = online_;
    return out;
}

double evaluate(const QNetParams& params, const EnvConfig& env_cfg, int episodes,
                uint64_t seed, const EncoderConfig& enc, int frame_stack,
                std::vector<double>* per_episode) {
    double total = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
        FroggerEnv env(env_cfg);
        env.reset_with_seed(mix_seed(seed, static_cast<uint64_t>(ep)));
        // On deterministic configs every reseed replays the same traffic, so
        // stagger each episode by a NOOP prefix to sample distinct phases.
        for (int k = 0; k < ep && !env.done(); ++k) env.step(Action::NOOP);
        std::vector<std::vector<double>> ring(frame_stack,
                                              encode_object_state(objects(env), enc));
        double ep_reward = 0.0;
        int steps = 0;
        while (!env.done() && steps < 2000) {
            std::vector<double> s;
            for (const auto& f : ring) s.insert(s.end(), f.begin(), f.end());
            std::vector<double> q = q_forward(params, s);
            int a = 0;
            for (int i = 1; i < kNumActions; ++i)
                if (q[i] > q[a]) a = i;
            StepResult res = env.step(static_cast<Action>(a));
            std::vector<double> feat = encode_object_state(objects(env), enc);
            if (res.info.life_lost)
                ring.assign(frame_stack, feat);
            else {
                ring.erase(ring.begin());
                ring.push_back(feat);
            }
            ep_reward += res.reward;
            ++steps;
        }
        if (per_episode) per_episode->push_back(ep_reward);
        total += ep_reward;
    }
    return episodes ? total / episodes : 0.0;
}

std::string metrics_csv(const std::vector<EpisodeMetrics>& rows) {
    std::string out = "episode,steps,reward,mean_loss,epsilon,demo_fraction\n";
    char buf[160];
    for (const auto& m : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.6g,%.6g,%.6g,%.6g\n", m.episode, m.steps,
                      m.reward, m.mean_loss, m.epsilon, m.demo_fraction);
        out += buf;
    }
    return out;
}

std::string evals_csv(const std::vector<EvalPoint>& rows) {
    std::string out = "episode,mean_eval_reward\n";
    char buf[64];
    for (const auto& e : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.6g\n", e.episode, e.mean_reward);
        out += buf;
    }
    return out;
}

namespace {

constexpr uint8_t kCkptMagic[4] = {'F', 'Q', 'N', '1'};

void put_u32(std::vector<uint8_t>& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(uint8_t(v >> (8 * i)));
}
void put_f64(std::vector<uint8_t>& b, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) b.push_back(uint8_t(bits >> (8 * i)));
}
uint32_t get_u32(const std::vector<uint8_t>& b, size_t& p) {
    if (p + 4 > b.size()) throw std::runtime_error("checkpoint truncated");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(b[p++]) << (8 * i);
    return v;
}
double get_f64(const std::vector<uint8_t>& b, size_t& p) {
    if (p + 8 > b.size()) throw std::runtime_error("checkpoint truncated");
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= uint64_t(b[p++]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

std::vector<uint8_t> save_checkpoint(const QNetParams& params, const TrainConfig& cfg) {
    std::vector<uint8_t> b(kCkptMagic, kCkptMagic + 4);
    put_u32(b, 1);  // version
    put_f64(b, cfg.gamma);
    put_f64(b, cfg.lr);
    put_u32(b, static_cast<uint32_t>(cfg.frame_stack));
    put_u32(b, static_cast<uint32_t>(cfg.encoder.slots));
    put_u32(b, static_cast<uint32_t>(params.layer_sizes.size()));
    for (int s : params.layer_sizes) put_u32(b, static_cast<uint32_t>(s));
    for (const auto& w : params.weights)
        for (double v : w) put_f64(b, v);
    for (const auto& bias : params.biases)
        for (double v : bias) put_f64(b, v);
    return b;
}

QNetParams load_checkpoint(const std::vector<uint8_t>& blob, TrainConfig* cfg_out) {
    size_t p = 0;
    if (blob.size() < 4 || std::memcmp(blob.data(), kCkptMagic, 4) != 0)
        throw std::runtime_error("bad checkpoint magic");
    p = 4;
    if (get_u32(blob, p) != 1) throw std::runtime_error("unsupported checkpoint version");
    double gamma = get_f64(blob, p);
    double lr = get_f64(blob, p);
    uint32_t stack = get_u32(blob, p);
    uint32_t slots = get_u32(blob, p);
    if (cfg_out) {
        cfg_out->gamma = gamma;
        cfg_out->lr = lr;
        cfg_out->frame_stack = static_cast<int>(stack);
        cfg_out->encoder.slots = static_cast<int>(slots);
    }
    QNetParams q;
    uint32_t n_sizes = get_u32(blob, p);
    if (n_sizes < 2 || n_sizes > 64) throw std::runtime_error("corrupt checkpoint");
    q.layer_sizes.resize(n_sizes);
    for (auto& s : q.layer_sizes) s = static_cast<int>(get_u32(blob, p));
    for (size_t l = 0; l + 1 < q.layer_sizes.size(); ++l) {
        q.weights.emplace_back(static_cast<size_t>(q.layer_sizes[l]) * q.layer_sizes[l + 1]);
        for (auto& v : q.weights.back()) v = get_f64(blob, p);
    }
    for (size_t l = 0; l + 1 < q.layer_sizes.size(); ++l) {
        q.biases.emplace_back(q.layer_sizes[l + 1]);
    }
    for (auto& bias : q.biases)
        for (auto& v : bias) v = get_f64(blob, p);
    return q;
}

}  // namespace frogger
