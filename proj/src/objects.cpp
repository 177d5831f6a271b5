#include "frogger/objects.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <regex>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace frogger {

namespace {

const char* kCategoryNames[] = {"Frog", "Car", "Log", "Turtle", "LadyFrog"};

// Visible fragments of a ring object inside the [x_min, x_max) window.
// Wide objects can straddle the wrap point and show up as two pieces.
void visible_fragments(int x_px, int width, int x_min, int x_max,
                       std::vector<std::pair<int, int>>& out) {
    for (int shift : {0, -kScreenW}) {
        int lo = std::max(x_px + shift, x_min);
        int hi = std::min(x_px + shift + width, x_max);
        if (lo < hi) out.emplace_back(lo, hi - lo);
    }
}

ObjectCategory category_for_lane(LaneKind k) {
    switch (k) {
        case LaneKind::Car: return ObjectCategory::Car;
        case LaneKind::Log: return ObjectCategory::Log;
        case LaneKind::Turtle: return ObjectCategory::Turtle;
        default: throw std::logic_error("safe lane has no objects");
    }
}

}  // namespace

const char* category_name(ObjectCategory c) {
    return kCategoryNames[static_cast<int>(c)];
}

ObjectCategory category_from_name(const std::string& name) {
    for (int i = 0; i < 5; ++i)
        if (name == kCategoryNames[i]) return static_cast<ObjectCategory>(i);
    throw std::invalid_argument("unknown object category: " + name);
}

uint8_t PixelPalette::value_for(ObjectCategory c) const {
    switch (c) {
        case ObjectCategory::Frog: return frog;
        case ObjectCategory::Car: return car;
        case ObjectCategory::Log: return log;
        case ObjectCategory::Turtle: return turtle;
        case ObjectCategory::LadyFrog: return lady_frog;
    }
    throw std::logic_error("bad category");
}

bool PixelPalette::category_for(uint8_t v, ObjectCategory& out) const {
    for (int i = 0; i < 5; ++i) {
        auto c = static_cast<ObjectCategory>(i);
        if (value_for(c) == v) {
            out = c;
            return true;
        }
    }
    return false;
}

ObjectList objects(const FroggerEnv& env) {
    const auto& cfg = env.config();
    ObjectList out;
    out.push_back({ObjectCategory::Frog, env.frog_x(), env.frog_y(), kFrogSize, kFrogSize});

    int hidden_lane = -1;
    if (cfg.hide_current_lane && env.frog_row() > 0 && env.frog_row() < cfg.home_row())
        hidden_lane = env.frog_row() - 1;

    std::vector<std::pair<int, int>> frags;
    for (LaneKind kind : {LaneKind::Car, LaneKind::Log, LaneKind::Turtle}) {
        for (size_t li = 0; li < cfg.lane_specs.size(); ++li) {
            if (cfg.lane_specs[li].kind != kind || static_cast<int>(li) == hidden_lane) continue;
            int y = cfg.lane_y_table[li + 1];
            for (const auto& o : env.lanes()[li]) {
                frags.clear();
                visible_fragments(o.x_fp >> kFpShift, o.width, cfg.x_min, cfg.x_max, frags);
                for (auto [x, w] : frags)
                    out.push_back({category_for_lane(kind), x, y, w, kFrogSize});
            }
        }
    }
    return out;
}

std::string format_objects(const ObjectList& objs) {
    std::string out;
    char buf[96];
    for (size_t i = 0; i < objs.size(); ++i) {
        const auto& o = objs[i];
        std::snprintf(buf, sizeof(buf), "%s at (%d, %d) size (%d, %d)",
                      category_name(o.category), o.x, o.y, o.w, o.h);
        if (i) out += ", ";
        out += buf;
    }
    return out;
}

ObjectList parse_objects(const std::string& text) {
    static const std::regex entry(
        R"((Frog|Car|Log|Turtle|LadyFrog) at \((-?\d+), (-?\d+)\) size \((\d+), (\d+)\))");
    ObjectList out;
    auto begin = std::sregex_iterator(text.begin(), text.end(), entry);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        out.push_back({category_from_name(m[1].str()), std::stoi(m[2]), std::stoi(m[3]),
                       std::stoi(m[4]), std::stoi(m[5])});
    }
    bool has_word = text.find_first_not_of(" \t\r\n") != std::string::npos;
    if (out.empty() && has_word)
        throw std::invalid_argument("unparseable object list: " + text);
    return out;
}

Frame render(const FroggerEnv& env, const PixelPalette& palette) {
    const auto& cfg = env.config();
    Frame f;
    f.pixels.fill(palette.road);

    auto fill_band = [&](int y, uint8_t v) {
        for (int row = y; row < std::min(y + kFrogSize, kScreenH); ++row)
            for (int x = 0; x < kScreenW; ++x) f.set(row, x, v);
    };
    fill_band(cfg.lane_y_table.front(), palette.bank);
    fill_band(cfg.lane_y_table.back(), palette.bank);
    for (size_t li = 0; li < cfg.lane_specs.size(); ++li) {
        LaneKind k = cfg.lane_specs[li].kind;
        int y = cfg.lane_y_table[li + 1];
        if (k == LaneKind::Safe) fill_band(y, palette.bank);
        else if (k == LaneKind::Log || k == LaneKind::Turtle) fill_band(y, palette.river);
    }

    auto draw = [&](const GameObject& o) {
        uint8_t v = palette.value_for(o.category);
        for (int yy = o.y; yy < std::min(o.y + o.h, kScreenH); ++yy)
            for (int xx = std::max(o.x, 0); xx < std::min(o.x + o.w, kScreenW); ++xx)
                f.set(yy, xx, v);
    };
    ObjectList objs = objects(env);
    for (const auto& o : objs)
        if (o.category != ObjectCategory::Frog) draw(o);
    for (const auto& o : objs)
        if (o.category == ObjectCategory::Frog) draw(o);  // frog on top
    return f;
}

Frame to_grayscale(const std::vector<uint8_t>& rgb) {
    if (rgb.size() != static_cast<size_t>(kScreenW) * kScreenH * 3)
        throw std::invalid_argument("rgb frame must be 210x160x3");
    Frame f;
    for (int i = 0; i < kScreenW * kScreenH; ++i) {
        double luma = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
        f.pixels[i] = static_cast<uint8_t>(std::clamp(std::lround(luma), 0l, 255l));
    }
    return f;
}

ObjectList extract(const Frame& frame, const PixelPalette& palette) {
    std::vector<int32_t> label(kScreenW * kScreenH, -1);
    ObjectList out;
    std::queue<int> frontier;
    for (int start = 0; start < kScreenW * kScreenH; ++start) {
        if (label[start] >= 0 || frame.pixels[start] < palette.threshold) continue;
        // flood fill one 4-connected component
        int id = static_cast<int>(out.size());
        label[start] = id;
        frontier.push(start);
        int min_x = kScreenW, max_x = -1, min_y = kScreenH, max_y = -1, area = 0;
        std::array<int, 256> value_count{};
        while (!frontier.empty()) {
            int p = frontier.front();
            frontier.pop();
            int y = p / kScreenW, x = p % kScreenW;
            ++area;
            ++value_count[frame.pixels[p]];
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
            const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                int nx = x + dx[d], ny = y + dy[d];
                if (nx < 0 || nx >= kScreenW || ny < 0 || ny >= kScreenH) continue;
                int q = ny * kScreenW + nx;
                if (label[q] >= 0 || frame.pixels[q] < palette.threshold) continue;
                label[q] = id;
                frontier.push(q);
            }
        }
        if (area < palette.min_object_area) continue;
        int dominant = static_cast<int>(
            std::max_element(value_count.begin(), value_count.end()) - value_count.begin());
        ObjectCategory cat;
        if (!palette.category_for(static_cast<uint8_t>(dominant), cat)) continue;
        out.push_back({cat, min_x, min_y, max_x - min_x + 1, max_y - min_y + 1});
    }
    return out;
}

std::vector<double> preprocess(const std::vector<Frame>& frames) {
    if (frames.size() != 4) throw std::invalid_argument("preprocess expects exactly 4 frames");
    const int out_n = kPreprocessSize;
    std::vector<double> out(static_cast<size_t>(4) * out_n * out_n);

    // fractional box coverage per output cell (exact area average)
    auto axis_span = [](int i, double scale, double& lo, double& hi) {
        lo = i * scale;
        hi = (i + 1) * scale;
    };
    const double sy = static_cast<double>(kScreenH) / out_n;
    const double sx = static_cast<double>(kScreenW) / out_n;
    for (size_t c = 0; c < 4; ++c) {
        const Frame& f = frames[c];
        for (int oy = 0; oy < out_n; ++oy) {
            double y0, y1;
            axis_span(oy, sy, y0, y1);
            for (int ox = 0; ox < out_n; ++ox) {
                double x0, x1;
                axis_span(ox, sx, x0, x1);
                double sum = 0.0;
                for (int iy = static_cast<int>(y0); iy < static_cast<int>(std::ceil(y1)); ++iy) {
                    double wy = std::min<double>(y1, iy + 1) - std::max<double>(y0, iy);
                    for (int ix = static_cast<int>(x0); ix < static_cast<int>(std::ceil(x1)); ++ix) {
                        double wx = std::min<double>(x1, ix + 1) - std::max<double>(x0, ix);
                        sum += wy * wx * f.at(iy, ix);
                    }
                }
                out[(c * out_n + oy) * out_n + ox] = sum / (sy * sx) / 255.0;
            }
        }
    }
    return out;
}

std::string to_pgm(const Frame& frame) {
    std::string out = "P5\n160 210\n255\n";
    out.append(reinterpret_cast<const char*>(frame.pixels.data()), frame.pixels.size());
    return out;
}

std::string objects_to_json(const ObjectList& objs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& o : objs) {
        arr.push_back({{"category", category_name(o.category)},
                       {"x", o.x},
                       {"y", o.y},
                       {"w", o.w},
                       {"h", o.h}});
    }
    return arr.dump();
}

}  // namespace frogger
