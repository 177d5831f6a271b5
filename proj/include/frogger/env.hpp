#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "frogger/rng.hpp"

namespace frogger {

// Screen geometry follows the Atari convention: 160 wide, 210 tall,
// origin top-left, y increases downward.
inline constexpr int kScreenW = 160;
inline constexpr int kScreenH = 210;
inline constexpr int kFrogSize = 7;
inline constexpr int kNumBays = 5;

// Lane object positions and speeds are kept in 24.8 fixed point so that
// fractional speeds (level multiplier 1.25) stay bit-exact across platforms.
inline constexpr int kFpShift = 8;
inline constexpr int32_t kFpOne = 1 << kFpShift;
inline constexpr int32_t kRingFp = kScreenW * kFpOne;

enum class Action : int { NOOP = 0, UP = 1, RIGHT = 2, LEFT = 3, DOWN = 4 };
inline constexpr int kNumActions = 5;

const char* action_name(Action a);
// Maps "UP"/"up"/"2" etc. to an action; throws std::invalid_argument on junk.
Action action_from_name(const std::string& name);

enum class LaneKind : int {
    Safe = 0,    // bank row, no objects
    Car = 1,     // road lane, objects kill on contact
    Log = 2,     // river lane, frog must stand on an object
    Turtle = 3,  // river lane, same rule as Log
};

struct LaneSpec {
    LaneKind kind = LaneKind::Safe;
    int direction = 1;          // +1 moves right, -1 moves left
    double speed = 1.0;         // px per tick
    std::vector<int> widths;    // object widths, px
    std::vector<int> gaps;      // gap after each object; widths+gaps must close the 160px ring
    int start_offset = 8;       // x of the first object at tick 0, px
};

struct BayInterval {
    int lo = 0;  // inclusive, px
    int hi = 0;  // exclusive, px
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SnapshotError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EnvConfig {
    // Row y-coordinates from the start row down at index 0 up to the home row
    // at the back; strictly decreasing. Interior rows carry one LaneSpec each.
    std::vector<int> lane_y_table;
    std::vector<LaneSpec> lane_specs;

    int frog_step_x = 7;
    int frog_start_x = 79;
    int x_min = 8;
    int x_max = 152;  // visible window is [x_min, x_max)
    int lives = 4;
    int timer_ticks = 120;
    int ticks_per_second = 4;
    double sticky_prob = 0.0;
    std::array<BayInterval, kNumBays> bay_xs{};
    int bay_entry_reward = 10;
    int all_bays_bonus = 100;
    bool hide_current_lane = false;
    double level_speed_multiplier = 1.25;
    uint64_t seed = 0;

    void validate() const;  // throws ConfigError

    int num_rows() const { return static_cast<int>(lane_y_table.size()); }
    int home_row() const { return num_rows() - 1; }

    // Full 13-row layout matching the coordinates the agents observe.
    static EnvConfig standard();
    // Desk-scale benchmark: 3 road lanes, 2 river lanes, short timer, 2 lives.
    static EnvConfig mini();
};

struct LaneObject {
    int32_t x_fp = 0;  // ring position, fixed point
    int width = 0;     // px
};

struct StepInfo {
    bool life_lost = false;
    int bay_entered = -1;  // -1 when none
    bool level_completed = false;
    Action effective_action = Action::NOOP;
};

struct StepResult {
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

// The simulator. Owns its config; copyable (copies are independent worlds),
// which is what the search agent relies on.
class FroggerEnv {
public:
    explicit FroggerEnv(EnvConfig cfg);

    void reset();                     // back to the initial state for cfg.seed
    void reset_with_seed(uint64_t s); // same layout, different rng stream

    StepResult step(Action a);  // throws UsageError when already done

    // -- observation side --
    const EnvConfig& config() const { return cfg_; }
    int frog_x() const { return frog_x_fp_ >> kFpShift; }
    int32_t frog_x_fp() const { return frog_x_fp_; }
    int frog_row() const { return frog_row_; }
    int frog_y() const { return cfg_.lane_y_table[frog_row_]; }
    int lives_left() const { return lives_left_; }
    int timer_remaining() const { return timer_remaining_; }
    double score() const { return score_; }
    int max_row_this_life() const { return max_row_this_life_; }
    int level() const { return level_; }
    int64_t tick() const { return tick_; }
    bool done() const { return lives_left_ == 0; }
    const std::array<bool, kNumBays>& bays_filled() const { return bays_filled_; }
    const std::vector<std::vector<LaneObject>>& lanes() const { return lane_objects_; }
    double lane_speed(int lane_idx) const {
        return static_cast<double>(lane_speed_fp_[lane_idx]) / kFpOne;
    }
    int32_t lane_speed_fp(int lane_idx) const { return lane_speed_fp_[lane_idx]; }
    Action prev_action() const { return prev_action_; }

    // Pure function of the logical state, stable across runs and platforms.
    uint64_t state_hash() const;

    // Versioned binary blob, magic "FRG1"; restore() is bit-exact.
    std::vector<uint8_t> snapshot() const;
    static FroggerEnv restore(const std::vector<uint8_t>& blob);

private:
    FroggerEnv() = default;  // for restore()

    void init_objects();
    void reset_frog();
    int32_t frog_x_min_fp() const { return cfg_.x_min << kFpShift; }
    int32_t frog_x_max_fp() const { return (cfg_.x_max - kFrogSize) << kFpShift; }

    EnvConfig cfg_;

    int32_t frog_x_fp_ = 0;
    int frog_row_ = 0;
    std::vector<std::vector<LaneObject>> lane_objects_;  // one list per interior row
    std::vector<int32_t> lane_speed_fp_;
    std::array<bool, kNumBays> bays_filled_{};
    int lives_left_ = 0;
    int timer_remaining_ = 0;
    double score_ = 0.0;
    int max_row_this_life_ = 0;
    int level_ = 1;
    int64_t tick_ = 0;
    SplitMix64 rng_;
    Action prev_action_ = Action::NOOP;
};

// Sticky-action rule: keep the previous action with probability sticky_prob.
// Consumes exactly one rng draw.
Action apply_sticky(Action prev, Action requested, double sticky_prob, SplitMix64& rng);

}  // namespace frogger
