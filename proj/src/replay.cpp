#include "frogger/replay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace frogger {

double priority(double delta, double epsilon, double alpha) {
    if (!std::isfinite(delta)) throw std::invalid_argument("non-finite TD-error");
    if (epsilon <= 0.0) epsilon = 1e-12;
    if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    return std::pow(std::abs(delta) + epsilon, alpha);
}

PrioritizedBuffer::PrioritizedBuffer(size_t capacity, size_t feature_len, double alpha,
                                     double epsilon)
    : capacity_(capacity), feature_len_(feature_len), alpha_(alpha), epsilon_(epsilon) {
    if (capacity_ == 0) throw std::invalid_argument("capacity must be positive");
    tree_size_ = 1;
    while (tree_size_ < capacity_) tree_size_ <<= 1;
    sum_tree_.assign(2 * tree_size_, 0.0);
    min_tree_.assign(2 * tree_size_, std::numeric_limits<double>::infinity());
    max_tree_.assign(2 * tree_size_, 0.0);
    items_.resize(capacity_);
    occupied_.assign(capacity_, false);
    stamp_.assign(capacity_, 0);
}

double PrioritizedBuffer::total_priority() const { return sum_tree_[1]; }

double PrioritizedBuffer::max_priority() const { return max_tree_[1]; }

void PrioritizedBuffer::set_priority(size_t slot, double p) {
    size_t i = tree_size_ + slot;
    sum_tree_[i] = p;
    min_tree_[i] = occupied_[slot] ? p : std::numeric_limits<double>::infinity();
    max_tree_[i] = occupied_[slot] ? p : 0.0;
    for (i >>= 1; i >= 1; i >>= 1) {
        sum_tree_[i] = sum_tree_[2 * i] + sum_tree_[2 * i + 1];
        min_tree_[i] = std::min(min_tree_[2 * i], min_tree_[2 * i + 1]);
        max_tree_[i] = std::max(max_tree_[2 * i], max_tree_[2 * i + 1]);
        if (i == 1) break;
    }
}

size_t PrioritizedBuffer::argmin_slot() const {
    size_t i = 1;
    while (i < tree_size_)
        i = min_tree_[2 * i] <= min_tree_[2 * i + 1] ? 2 * i : 2 * i + 1;
    return i - tree_size_;
}

size_t PrioritizedBuffer::push(Transition t, std::optional<double> prio) {
    if (feature_len_ == 0 && !t.state_features.empty())
        feature_len_ = t.state_features.size();
    if (t.state_features.size() != feature_len_ ||
        t.next_state_features.size() != feature_len_)
        throw std::invalid_argument("transition feature length mismatch");

    double p = prio.value_or(size_ == 0 ? 1.0 : max_priority());
    if (!(p > 0.0)) throw std::invalid_argument("priority must be > 0");

    size_t slot;
    if (size_ < capacity_) {
        slot = next_free_++;
    } else {
        slot = argmin_slot();
        if (items_[slot].is_demo) --demo_count_;
        --size_;
    }
    if (t.is_demo) ++demo_count_;
    items_[slot] = std::move(t);
    occupied_[slot] = true;
    ++stamp_[slot];
    ++size_;
    set_priority(slot, p);
    return slot;
}

size_t PrioritizedBuffer::find_prefix(double mass) const {
    size_t i = 1;
    while (i < tree_size_) {
        if (mass < sum_tree_[2 * i] || sum_tree_[2 * i + 1] <= 0.0) {
            i = 2 * i;
        } else {
            mass -= sum_tree_[2 * i];
            i = 2 * i + 1;
        }
    }
    return i - tree_size_;
}

SampleBatch PrioritizedBuffer::sample(size_t batch, double beta, SplitMix64& rng) const {
    if (size_ == 0) throw std::invalid_argument("sample from empty buffer");
    if (batch == 0) throw std::invalid_argument("batch must be >= 1");

    SampleBatch out;
    double total = total_priority();
    double segment = total / static_cast<double>(batch);
    double max_w = 0.0;
    for (size_t k = 0; k < batch; ++k) {
        // stratified: one draw per equal-mass segment
        double mass = (static_cast<double>(k) + rng.next_double()) * segment;
        size_t slot = find_prefix(std::min(mass, std::nextafter(total, 0.0)));
        double p = sum_tree_[tree_size_ + slot];
        double prob = p / total;
        double w = std::pow(static_cast<double>(size_) * prob, -beta);
        out.indices.push_back(slot);
        out.stamps.push_back(stamp_[slot]);
        out.transitions.push_back(&items_[slot]);
        out.is_weights.push_back(w);
        max_w = std::max(max_w, w);
    }
    for (auto& w : out.is_weights) w /= max_w;
    return out;
}

void PrioritizedBuffer::update_priorities(const std::vector<size_t>& indices,
                                          const std::vector<uint64_t>& stamps,
                                          const std::vector<double>& deltas) {
    if (indices.size() != deltas.size() || indices.size() != stamps.size())
        throw std::invalid_argument("indices/stamps/deltas length mismatch");
    for (size_t k = 0; k < indices.size(); ++k) {
        size_t slot = indices[k];
        if (slot >= capacity_ || !occupied_[slot] || stamp_[slot] != stamps[k]) {
            ++stale_updates_;  // evicted since sampling
            continue;
        }
        set_priority(slot, priority(deltas[k], epsilon_, alpha_));
    }
}

void PrioritizedBuffer::preload_demos(std::vector<Transition> transitions,
                                      double demo_initial_priority) {
    if (size_ + transitions.size() > capacity_)
        throw std::invalid_argument("demonstrations do not fit in the buffer");
    for (auto& t : transitions) {
        t.is_demo = true;
        push(std::move(t), demo_initial_priority);
    }
}

double PrioritizedBuffer::slot_priority(size_t slot) const {
    return sum_tree_[tree_size_ + slot];
}

const Transition& PrioritizedBuffer::slot_transition(size_t slot) const {
    if (!slot_live(slot)) throw std::out_of_range("dead slot");
    return items_[slot];
}

std::string PrioritizedBuffer::to_csv() const {
    std::string out = "index,priority,is_demo,reward\n";
    char buf[96];
    for (size_t i = 0; i < next_free_; ++i) {
        if (!occupied_[i]) continue;
        std::snprintf(buf, sizeof(buf), "%zu,%.6g,%d,%.6g\n", i, slot_priority(i),
                      items_[i].is_demo ? 1 : 0, items_[i].reward);
        out += buf;
    }
    return out;
}

double PrioritizedBuffer::recompute_total() const {
    double s = 0.0;
    for (size_t i = 0; i < capacity_; ++i)
        if (occupied_[i]) s += sum_tree_[tree_size_ + i];
    return s;
}

std::vector<Transition> ingest_trajectory(const std::string& path,
                                          const TrajectoryEncoder& encoder) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trajectory file: " + path);

    struct Row {
        std::string objects_text;
        int action;
        double reward;
        bool done;
    };
    std::vector<Row> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
            std::string type = rec.value("type", "");
            if (type == "header") continue;
            if (type != "step") throw std::runtime_error("unknown record type");
            rows.push_back({rec.at("objects_text").get<std::string>(),
                            rec.at("action").get<int>(), rec.at("reward").get<double>(),
                            rec.value("done", false)});
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": malformed trajectory record: " + e.what());
        }
    }
    if (rows.empty()) throw std::runtime_error(path + ": trajectory has no steps");

    std::vector<Transition> out;
    for (size_t i = 0; i < rows.size(); ++i) {
        Transition t;
        t.state_features = encoder.encode(rows[i].objects_text);
        t.action = rows[i].action;
        t.reward = rows[i].reward;
        t.next_state_features = i + 1 < rows.size()
                                    ? encoder.encode(rows[i + 1].objects_text)
                                    : t.state_features;
        t.done = i + 1 < rows.size() ? rows[i].done : true;
        t.is_demo = true;
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace frogger
