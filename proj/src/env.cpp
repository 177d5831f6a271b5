#include "frogger/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace frogger {

namespace {

const char* kActionNames[kNumActions] = {"NOOP", "UP", "RIGHT", "LEFT", "DOWN"};

int32_t ring_wrap(int64_t x_fp) {
    int64_t r = x_fp % kRingFp;
    if (r < 0) r += kRingFp;
    return static_cast<int32_t>(r);
}

// Does the frog rectangle [fx, fx+7) overlap the object [ox, ox+w) on the ring?
// Objects can straddle the wrap point, the frog cannot (it is clamped inside
// the playfield), so it is enough to also test the shifted copy.
bool overlaps(int32_t frog_fp, int32_t obj_fp, int width) {
    int64_t f0 = frog_fp, f1 = frog_fp + kFrogSize * kFpOne;
    for (int64_t shift : {int64_t{0}, int64_t{-kRingFp}}) {
        int64_t o0 = obj_fp + shift, o1 = o0 + static_cast<int64_t>(width) * kFpOne;
        if (f0 < o1 && o0 < f1) return true;
    }
    return false;
}

bool contains_center(int32_t center_fp, int32_t obj_fp, int width) {
    for (int64_t shift : {int64_t{0}, int64_t{-kRingFp}}) {
        int64_t o0 = obj_fp + shift, o1 = o0 + static_cast<int64_t>(width) * kFpOne;
        if (center_fp >= o0 && center_fp < o1) return true;
    }
    return false;
}

// --- little-endian binary stream helpers (snapshot format) ---

struct ByteWriter {
    std::vector<uint8_t> buf;
    void u8(uint8_t v) { buf.push_back(v); }
    void u16(uint16_t v) { for (int i = 0; i < 2; ++i) buf.push_back(uint8_t(v >> (8 * i))); }
    void i32(int32_t v) { u32(static_cast<uint32_t>(v)); }
    void u32(uint32_t v) { for (int i = 0; i < 4; ++i) buf.push_back(uint8_t(v >> (8 * i))); }
    void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
    void u64(uint64_t v) { for (int i = 0; i < 8; ++i) buf.push_back(uint8_t(v >> (8 * i))); }
    void f64(double v) { uint64_t bits; std::memcpy(&bits, &v, 8); u64(bits); }
};

struct ByteReader {
    const std::vector<uint8_t>& buf;
    size_t pos = 0;
    explicit ByteReader(const std::vector<uint8_t>& b) : buf(b) {}
    void need(size_t n) const {
        if (pos + n > buf.size()) throw SnapshotError("snapshot truncated");
    }
    uint8_t u8() { need(1); return buf[pos++]; }
    uint16_t u16() { need(2); uint16_t v = 0; for (int i = 0; i < 2; ++i) v |= uint16_t(buf[pos++]) << (8 * i); return v; }
    uint32_t u32() { need(4); uint32_t v = 0; for (int i = 0; i < 4; ++i) v |= uint32_t(buf[pos++]) << (8 * i); return v; }
    int32_t i32() { return static_cast<int32_t>(u32()); }
    uint64_t u64() { need(8); uint64_t v = 0; for (int i = 0; i < 8; ++i) v |= uint64_t(buf[pos++]) << (8 * i); return v; }
    int64_t i64() { return static_cast<int64_t>(u64()); }
    double f64() { uint64_t bits = u64(); double v; std::memcpy(&v, &bits, 8); return v; }
};

constexpr uint8_t kSnapshotMagic[4] = {'F', 'R', 'G', '1'};
constexpr uint16_t kSnapshotVersion = 1;

}  // namespace

const char* action_name(Action a) {
    int i = static_cast<int>(a);
    if (i < 0 || i >= kNumActions) throw std::invalid_argument("bad action code");
    return kActionNames[i];
}

Action action_from_name(const std::string& name) {
    std::string up;
    for (char c : name) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    for (int i = 0; i < kNumActions; ++i)
        if (up == kActionNames[i]) return static_cast<Action>(i);
    if (up.size() == 1 && up[0] >= '0' && up[0] <= '4') return static_cast<Action>(up[0] - '0');
    throw std::invalid_argument("unknown action name: " + name);
}

Action apply_sticky(Action prev, Action requested, double sticky_prob, SplitMix64& rng) {
    if (sticky_prob < 0.0 || sticky_prob > 1.0) throw UsageError("sticky_prob out of [0,1]");
    double u = rng.next_double();
    return u < sticky_prob ? prev : requested;
}

void EnvConfig::validate() const {
    if (lane_y_table.size() < 3) throw ConfigError("lane_y_table needs at least 3 rows");
    for (size_t i = 1; i < lane_y_table.size(); ++i)
        if (lane_y_table[i] >= lane_y_table[i - 1])
            throw ConfigError("lane_y_table must be strictly decreasing");
    if (lane_specs.size() != lane_y_table.size() - 2)
        throw ConfigError("lane_specs must cover every interior row");
    for (const auto& spec : lane_specs) {
        if (spec.kind == LaneKind::Safe) {
            if (!spec.widths.empty()) throw ConfigError("safe lane must carry no objects");
            continue;
        }
        if (spec.widths.empty()) throw ConfigError("moving lane has no objects");
        if (spec.widths.size() != spec.gaps.size())
            throw ConfigError("widths and gaps must pair up");
        if (spec.direction != 1 && spec.direction != -1)
            throw ConfigError("lane direction must be +1 or -1");
        if (spec.speed < 1.0 / kFpOne) throw ConfigError("lane speed must be positive");
        int total = 0;
        for (int w : spec.widths) {
            if (w < 1) throw ConfigError("object width must be >= 1");
            total += w;
        }
        for (int g : spec.gaps) {
            if (g < 0) throw ConfigError("gap must be >= 0");
            total += g;
        }
        if (total != kScreenW)
            throw ConfigError("lane widths+gaps must close the 160px ring");
    }
    if (frog_step_x < 1) throw ConfigError("frog_step_x must be >= 1");
    if (x_min < 0 || x_max > kScreenW || x_max - x_min < kFrogSize)
        throw ConfigError("bad playfield clamp");
    if (lives < 1) throw ConfigError("lives must be >= 1");
    if (timer_ticks < 1 || ticks_per_second < 1) throw ConfigError("bad timer config");
    if (sticky_prob < 0.0 || sticky_prob > 1.0) throw ConfigError("sticky_prob out of [0,1]");
    for (int i = 0; i < kNumBays; ++i) {
        const auto& b = bay_xs[i];
        if (b.lo >= b.hi || b.lo < x_min || b.hi > x_max)
            throw ConfigError("bay interval outside playfield");
        for (int j = 0; j < i; ++j)
            if (b.lo < bay_xs[j].hi && bay_xs[j].lo < b.hi)
                throw ConfigError("bay intervals overlap");
    }
    if (level_speed_multiplier <= 0.0) throw ConfigError("bad level speed multiplier");
}

EnvConfig EnvConfig::standard() {
    EnvConfig c;
    c.lane_y_table = {171, 161, 148, 135, 122, 109, 95, 83, 70, 57, 44, 31, 18};
    auto lane = [](LaneKind k, int dir, double sp, std::vector<int> w, std::vector<int> g, int off) {
        LaneSpec s;
        s.kind = k; s.direction = dir; s.speed = sp;
        s.widths = std::move(w); s.gaps = std::move(g); s.start_offset = off;
        return s;
    };
    c.lane_specs = {
        lane(LaneKind::Car, -1, 1.0, {8, 8}, {72, 72}, 36),           // y=161
        lane(LaneKind::Car, +1, 1.0, {8, 8}, {72, 72}, 19),           // y=148
        lane(LaneKind::Car, -1, 1.0, {8, 8, 8, 8}, {32, 32, 32, 32}, 8),  // y=135
        lane(LaneKind::Car, +1, 1.0, {8, 8}, {72, 72}, 39),           // y=122
        lane(LaneKind::Car, -1, 2.0, {16, 16}, {64, 64}, 33),         // y=109
        lane(LaneKind::Safe, +1, 1.0, {}, {}, 0),                     // y=95 median bank
        lane(LaneKind::Turtle, -1, 1.0, {8, 8, 8}, {8, 8, 120}, 40),  // y=83
        lane(LaneKind::Log, +1, 1.0, {16, 16, 16}, {16, 16, 80}, 18), // y=70
        lane(LaneKind::Log, -1, 1.0, {32, 32}, {48, 48}, 8),          // y=57
        lane(LaneKind::Turtle, +1, 1.0, {8, 8, 8}, {8, 48, 80}, 80),  // y=44
        lane(LaneKind::Log, -1, 1.0, {32, 32}, {48, 48}, 11),         // y=31
    };
    c.bay_xs = {BayInterval{12, 24}, {41, 53}, {70, 82}, {99, 111}, {128, 140}};
    return c;
}

EnvConfig EnvConfig::mini() {
    EnvConfig c;
    c.lane_y_table = {171, 161, 148, 135, 122, 109, 95};
    auto lane = [](LaneKind k, int dir, double sp, std::vector<int> w, std::vector<int> g, int off) {
        LaneSpec s;
        s.kind = k; s.direction = dir; s.speed = sp;
        s.widths = std::move(w); s.gaps = std::move(g); s.start_offset = off;
        return s;
    };
    c.lane_specs = {
        lane(LaneKind::Car, -1, 1.0, {8, 8, 8}, {45, 45, 46}, 36),   // y=161
        lane(LaneKind::Car, +1, 1.25, {8, 8, 8}, {45, 45, 46}, 19),  // y=148
        lane(LaneKind::Car, -1, 1.0, {8, 8, 8}, {45, 45, 46}, 60),   // y=135
        lane(LaneKind::Log, +1, 1.0, {32, 32}, {48, 48}, 20),        // y=122
        lane(LaneKind::Turtle, -1, 1.0, {24, 24}, {56, 56}, 50),     // y=109
    };
    c.bay_xs = {BayInterval{12, 24}, {41, 53}, {70, 82}, {99, 111}, {128, 140}};
    c.lives = 2;
    c.timer_ticks = 40;
    return c;
}

FroggerEnv::FroggerEnv(EnvConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    reset();
}

void FroggerEnv::reset() {
    reset_with_seed(cfg_.seed);
}

void FroggerEnv::reset_with_seed(uint64_t s) {
    rng_ = SplitMix64(s);
    init_objects();
    bays_filled_.fill(false);
    lives_left_ = cfg_.lives;
    score_ = 0.0;
    level_ = 1;
    tick_ = 0;
    prev_action_ = Action::NOOP;
    lane_speed_fp_.clear();
    for (const auto& spec : cfg_.lane_specs)
        lane_speed_fp_.push_back(static_cast<int32_t>(std::lround(spec.speed * kFpOne)));
    reset_frog();
}

void FroggerEnv::init_objects() {
    lane_objects_.clear();
    for (const auto& spec : cfg_.lane_specs) {
        std::vector<LaneObject> objs;
        int x = spec.start_offset;
        for (size_t i = 0; i < spec.widths.size(); ++i) {
            LaneObject o;
            o.x_fp = ring_wrap(static_cast<int64_t>(x) * kFpOne);
            o.width = spec.widths[i];
            objs.push_back(o);
            x += spec.widths[i] + spec.gaps[i];
        }
        lane_objects_.push_back(std::move(objs));
    }
}

void FroggerEnv::reset_frog() {
    int32_t start = cfg_.frog_start_x << kFpShift;
    frog_x_fp_ = std::clamp(start, frog_x_min_fp(), frog_x_max_fp());
    frog_row_ = 0;
    timer_remaining_ = cfg_.timer_ticks;
    max_row_this_life_ = 0;
}

StepResult FroggerEnv::step(Action requested) {
    if (done()) throw UsageError("step on terminal state");

    StepResult res;
    Action eff = apply_sticky(prev_action_, requested, cfg_.sticky_prob, rng_);
    prev_action_ = eff;
    res.info.effective_action = eff;

    // frog intent move (clamped; blocked moves are no-ops)
    switch (eff) {
        case Action::NOOP: break;
        case Action::UP:
            if (frog_row_ < cfg_.home_row()) frog_row_ += 1;
            break;
        case Action::DOWN:
            if (frog_row_ > 0) frog_row_ -= 1;
            break;
        case Action::LEFT: {
            int32_t nx = frog_x_fp_ - (cfg_.frog_step_x << kFpShift);
            if (nx >= frog_x_min_fp()) frog_x_fp_ = nx;
            break;
        }
        case Action::RIGHT: {
            int32_t nx = frog_x_fp_ + (cfg_.frog_step_x << kFpShift);
            if (nx <= frog_x_max_fp()) frog_x_fp_ = nx;
            break;
        }
    }

    // world advances every tick
    for (size_t li = 0; li < lane_objects_.size(); ++li) {
        int32_t delta = cfg_.lane_specs[li].direction * lane_speed_fp_[li];
        for (auto& o : lane_objects_[li]) o.x_fp = ring_wrap(int64_t{o.x_fp} + delta);
    }
    ++tick_;
    --timer_remaining_;

    bool dead = false;
    bool frog_resets = false;

    if (frog_row_ == cfg_.home_row()) {
        int32_t center = frog_x_fp_ + (kFrogSize * kFpOne) / 2;
        int entered = -1;
        for (int b = 0; b < kNumBays; ++b) {
            if (center >= (cfg_.bay_xs[b].lo << kFpShift) && center < (cfg_.bay_xs[b].hi << kFpShift)) {
                entered = b;
                break;
            }
        }
        if (entered >= 0 && !bays_filled_[entered]) {
            bays_filled_[entered] = true;
            res.reward += cfg_.bay_entry_reward;
            res.info.bay_entered = entered;
            bool all = std::all_of(bays_filled_.begin(), bays_filled_.end(), [](bool f) { return f; });
            if (all) {
                int seconds_left = timer_remaining_ > 0 ? timer_remaining_ / cfg_.ticks_per_second : 0;
                res.reward += cfg_.all_bays_bonus + 2 * seconds_left;
                res.info.level_completed = true;
                level_ += 1;
                int32_t mult_fp = static_cast<int32_t>(std::lround(cfg_.level_speed_multiplier * kFpOne));
                for (auto& sp : lane_speed_fp_)
                    sp = static_cast<int32_t>((int64_t{sp} * mult_fp) >> kFpShift);
                bays_filled_.fill(false);
            }
            frog_resets = true;
        } else {
            dead = true;  // barrier or occupied bay
        }
    } else if (frog_row_ > 0) {
        int lane_idx = frog_row_ - 1;
        const auto& spec = cfg_.lane_specs[lane_idx];
        const auto& objs = lane_objects_[lane_idx];
        if (spec.kind == LaneKind::Car) {
            for (const auto& o : objs) {
                if (overlaps(frog_x_fp_, o.x_fp, o.width)) {
                    dead = true;
                    break;
                }
            }
        } else if (spec.kind == LaneKind::Log || spec.kind == LaneKind::Turtle) {
            int32_t center = frog_x_fp_ + (kFrogSize * kFpOne) / 2;
            const LaneObject* support = nullptr;
            for (const auto& o : objs) {
                if (contains_center(center, o.x_fp, o.width)) {
                    support = &o;
                    break;
                }
            }
            if (support) {
                frog_x_fp_ += spec.direction * lane_speed_fp_[lane_idx];
                if (frog_x_fp_ < frog_x_min_fp() || frog_x_fp_ > frog_x_max_fp())
                    dead = true;  // drifted off the playfield
            } else {
                dead = true;  // in the water
            }
        }
    }

    if (!dead && !frog_resets && frog_row_ > max_row_this_life_) {
        max_row_this_life_ = frog_row_;
        res.reward += 1.0;
    }

    if (!dead && !frog_resets && timer_remaining_ <= 0) dead = true;

    if (dead) {
        lives_left_ -= 1;
        res.info.life_lost = true;
        res.reward = 0.0;
        if (lives_left_ > 0) reset_frog();
        else frog_row_ = 0;  // terminal pose
    } else if (frog_resets) {
        reset_frog();
    }

    score_ += res.reward;
    res.done = done();
    return res;
}

uint64_t FroggerEnv::state_hash() const {
    ByteWriter w;
    w.i32(frog_x_fp_);
    w.i32(frog_row_);
    for (size_t li = 0; li < lane_objects_.size(); ++li) {
        for (const auto& o : lane_objects_[li]) {
            w.i32(o.x_fp);
            w.i32(o.width);
        }
        w.i32(lane_speed_fp_[li]);
    }
    for (bool b : bays_filled_) w.u8(b ? 1 : 0);
    w.i32(lives_left_);
    w.i32(timer_remaining_);
    w.i64(static_cast<int64_t>(score_ * 256.0));
    w.i32(max_row_this_life_);
    w.i32(level_);
    w.i64(tick_);
    w.u64(rng_.state);
    w.u8(static_cast<uint8_t>(prev_action_));
    return fnv1a64(w.buf.data(), w.buf.size());
}

std::vector<uint8_t> FroggerEnv::snapshot() const {
    ByteWriter w;
    for (uint8_t m : kSnapshotMagic) w.u8(m);
    w.u16(kSnapshotVersion);

    // config
    w.u32(static_cast<uint32_t>(cfg_.lane_y_table.size()));
    for (int y : cfg_.lane_y_table) w.i32(y);
    for (const auto& s : cfg_.lane_specs) {
        w.u8(static_cast<uint8_t>(s.kind));
        w.i32(s.direction);
        w.f64(s.speed);
        w.u32(static_cast<uint32_t>(s.widths.size()));
        for (int v : s.widths) w.i32(v);
        for (int v : s.gaps) w.i32(v);
        w.i32(s.start_offset);
    }
    w.i32(cfg_.frog_step_x);
    w.i32(cfg_.frog_start_x);
    w.i32(cfg_.x_min);
    w.i32(cfg_.x_max);
    w.i32(cfg_.lives);
    w.i32(cfg_.timer_ticks);
    w.i32(cfg_.ticks_per_second);
    w.f64(cfg_.sticky_prob);
    for (const auto& b : cfg_.bay_xs) {
        w.i32(b.lo);
        w.i32(b.hi);
    }
    w.i32(cfg_.bay_entry_reward);
    w.i32(cfg_.all_bays_bonus);
    w.u8(cfg_.hide_current_lane ? 1 : 0);
    w.f64(cfg_.level_speed_multiplier);
    w.u64(cfg_.seed);

    // state
    w.i32(frog_x_fp_);
    w.i32(frog_row_);
    for (size_t li = 0; li < lane_objects_.size(); ++li) {
        w.u32(static_cast<uint32_t>(lane_objects_[li].size()));
        for (const auto& o : lane_objects_[li]) {
            w.i32(o.x_fp);
            w.i32(o.width);
        }
        w.i32(lane_speed_fp_[li]);
    }
    for (bool b : bays_filled_) w.u8(b ? 1 : 0);
    w.i32(lives_left_);
    w.i32(timer_remaining_);
    w.f64(score_);
    w.i32(max_row_this_life_);
    w.i32(level_);
    w.i64(tick_);
    w.u64(rng_.state);
    w.u8(static_cast<uint8_t>(prev_action_));
    return std::move(w.buf);
}

FroggerEnv FroggerEnv::restore(const std::vector<uint8_t>& blob) {
    ByteReader r(blob);
    for (uint8_t m : kSnapshotMagic)
        if (r.u8() != m) throw SnapshotError("bad snapshot magic");
    if (r.u16() != kSnapshotVersion) throw SnapshotError("unsupported snapshot version");

    EnvConfig cfg;
    uint32_t rows = r.u32();
    if (rows > 1024) throw SnapshotError("implausible row count");
    cfg.lane_y_table.resize(rows);
    for (auto& y : cfg.lane_y_table) y = r.i32();
    if (rows < 3) throw SnapshotError("corrupt snapshot: too few rows");
    cfg.lane_specs.resize(rows - 2);
    for (auto& s : cfg.lane_specs) {
        s.kind = static_cast<LaneKind>(r.u8());
        s.direction = r.i32();
        s.speed = r.f64();
        uint32_t n = r.u32();
        if (n > 4096) throw SnapshotError("implausible object count");
        s.widths.resize(n);
        for (auto& v : s.widths) v = r.i32();
        s.gaps.resize(n);
        for (auto& v : s.gaps) v = r.i32();
        s.start_offset = r.i32();
    }
    cfg.frog_step_x = r.i32();
    cfg.frog_start_x = r.i32();
    cfg.x_min = r.i32();
    cfg.x_max = r.i32();
    cfg.lives = r.i32();
    cfg.timer_ticks = r.i32();
    cfg.ticks_per_second = r.i32();
    cfg.sticky_prob = r.f64();
    for (auto& b : cfg.bay_xs) {
        b.lo = r.i32();
        b.hi = r.i32();
    }
    cfg.bay_entry_reward = r.i32();
    cfg.all_bays_bonus = r.i32();
    cfg.hide_current_lane = r.u8() != 0;
    cfg.level_speed_multiplier = r.f64();
    cfg.seed = r.u64();

    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw SnapshotError(std::string("corrupt snapshot config: ") + e.what());
    }

    FroggerEnv env;
    env.cfg_ = std::move(cfg);
    env.frog_x_fp_ = r.i32();
    env.frog_row_ = r.i32();
    env.lane_objects_.resize(env.cfg_.lane_specs.size());
    env.lane_speed_fp_.resize(env.cfg_.lane_specs.size());
    for (size_t li = 0; li < env.lane_objects_.size(); ++li) {
        uint32_t n = r.u32();
        if (n > 4096) throw SnapshotError("implausible object count");
        env.lane_objects_[li].resize(n);
        for (auto& o : env.lane_objects_[li]) {
            o.x_fp = r.i32();
            o.width = r.i32();
        }
        env.lane_speed_fp_[li] = r.i32();
    }
    for (auto& b : env.bays_filled_) b = r.u8() != 0;
    env.lives_left_ = r.i32();
    env.timer_remaining_ = r.i32();
    env.score_ = r.f64();
    env.max_row_this_life_ = r.i32();
    env.level_ = r.i32();
    env.tick_ = r.i64();
    env.rng_.state = r.u64();
    env.prev_action_ = static_cast<Action>(r.u8());
    if (r.pos != blob.size()) throw SnapshotError("trailing bytes in snapshot");
    if (env.frog_row_ < 0 || env.frog_row_ >= env.cfg_.num_rows())
        throw SnapshotError("corrupt snapshot: frog row out of range");
    return env;
}

}  // namespace frogger
