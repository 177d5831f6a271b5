#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frogger/env.hpp"
#include "frogger/rng.hpp"

namespace frogger {

struct Transition {
    std::vector<double> state_features;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_state_features;
    bool done = false;
    bool is_demo = false;
};

// p_i = (|delta| + epsilon)^alpha
double priority(double delta, double epsilon, double alpha);

struct SampleBatch {
    std::vector<size_t> indices;        // slot ids, valid until the slot is reused
    std::vector<uint64_t> stamps;       // slot versions, for stale-update detection
    std::vector<const Transition*> transitions;
    std::vector<double> is_weights;
};

// Capacity-bounded sum-tree buffer. When full, the minimum-priority item is
// evicted, which is what lets preloaded demonstrations age out naturally.
class PrioritizedBuffer {
public:
    explicit PrioritizedBuffer(size_t capacity = 8000, size_t feature_len = 0,
                               double alpha = 0.6, double epsilon = 0.01);

    size_t size() const { return size_; }
    size_t capacity() const { return capacity_; }
    double alpha() const { return alpha_; }
    double epsilon() const { return epsilon_; }
    double total_priority() const;
    double max_priority() const;
    uint64_t stale_update_count() const { return stale_updates_; }
    size_t demo_count() const { return demo_count_; }

    // Inserts with the given priority, defaulting to the current max (1.0 when
    // empty). Returns the slot id.
    size_t push(Transition t, std::optional<double> prio = std::nullopt);

    SampleBatch sample(size_t batch, double beta, SplitMix64& rng) const;

    // p_i = priority(delta_i, epsilon, alpha); stale slots are counted, not fatal.
    void update_priorities(const std::vector<size_t>& indices,
                           const std::vector<uint64_t>& stamps,
                           const std::vector<double>& deltas);

    // All inserted with priority demo_initial_priority and is_demo = true.
    void preload_demos(std::vector<Transition> transitions,
                       double demo_initial_priority = 5.0);

    double slot_priority(size_t slot) const;
    const Transition& slot_transition(size_t slot) const;
    bool slot_live(size_t slot) const { return slot < occupied_.size() && occupied_[slot]; }

    // "index,priority,is_demo,reward" diagnostic rows.
    std::string to_csv() const;

    // Recomputed-leaf-sum check used by the tests.
    double recompute_total() const;

private:
    void set_priority(size_t slot, double p);
    size_t find_prefix(double mass) const;  // sum-tree descent
    size_t argmin_slot() const;

    size_t capacity_;
    size_t feature_len_;
    double alpha_;
    double epsilon_;
    size_t size_ = 0;
    size_t next_free_ = 0;  // slots [0, next_free_) have been used at least once
    size_t demo_count_ = 0;
    uint64_t stale_updates_ = 0;
    std::vector<Transition> items_;
    std::vector<bool> occupied_;
    std::vector<uint64_t> stamp_;
    std::vector<double> sum_tree_;  // 1-based segment tree over capacity leaves
    std::vector<double> min_tree_;
    std::vector<double> max_tree_;
    size_t tree_size_;  // number of leaves (power of two >= capacity)
};

// Reads a trajectory JSONL file and converts each step into a Transition.
// The encoder maps an object-list prompt string to features; supplied by the
// dqn side so the two modules stay decoupled.
struct TrajectoryEncoder {
    virtual ~TrajectoryEncoder() = default;
    virtual std::vector<double> encode(const std::string& objects_text) const = 0;
};

std::vector<Transition> ingest_trajectory(const std::string& path,
                                          const TrajectoryEncoder& encoder);

}  // namespace frogger
