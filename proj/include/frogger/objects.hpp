#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "frogger/env.hpp"

namespace frogger {

enum class ObjectCategory : int { Frog = 0, Car = 1, Log = 2, Turtle = 3, LadyFrog = 4 };

const char* category_name(ObjectCategory c);
ObjectCategory category_from_name(const std::string& name);

struct GameObject {
    ObjectCategory category = ObjectCategory::Frog;
    int x = 0, y = 0;  // top-left, px
    int w = 0, h = 0;

    bool operator==(const GameObject&) const = default;
};

using ObjectList = std::vector<GameObject>;

// 210x160 grayscale frame, row-major.
struct Frame {
    std::array<uint8_t, kScreenW * kScreenH> pixels{};

    uint8_t at(int y, int x) const { return pixels[y * kScreenW + x]; }
    void set(int y, int x, uint8_t v) { pixels[y * kScreenW + x] = v; }
};

struct PixelPalette {
    uint8_t road = 0;
    uint8_t river = 32;
    uint8_t bank = 16;
    uint8_t frog = 124;
    uint8_t car = 200;
    uint8_t log = 160;
    uint8_t turtle = 96;
    uint8_t lady_frog = 220;
    uint8_t threshold = 64;
    int min_object_area = 5;

    uint8_t value_for(ObjectCategory c) const;
    // Returns true and fills `out` when v is one of the foreground values.
    bool category_for(uint8_t v, ObjectCategory& out) const;
};

// The observation the agents see: frog first, then lane objects grouped by
// category (cars, then logs, then turtles), clipped to the visible window.
ObjectList objects(const FroggerEnv& env);

// "Category at (x, y) size (w, h)" entries joined by ", ".
std::string format_objects(const ObjectList& objs);

// Inverse of format_objects; throws std::invalid_argument on malformed text.
ObjectList parse_objects(const std::string& text);

Frame render(const FroggerEnv& env, const PixelPalette& palette = {});

// luma = round(0.299R + 0.587G + 0.114B); rgb is 210*160*3 interleaved.
Frame to_grayscale(const std::vector<uint8_t>& rgb);

// Binarize, 4-connected components, area filter, classify by dominant value.
ObjectList extract(const Frame& frame, const PixelPalette& palette = {});

// Four 210x160 frames -> 84x84x4 unit-scaled stack (time-major channels).
std::vector<double> preprocess(const std::vector<Frame>& frames);
inline constexpr int kPreprocessSize = 84;

std::string to_pgm(const Frame& frame);

// JSON records [{"category":..., "x":..., ...}, ...]
std::string objects_to_json(const ObjectList& objs);

}  // namespace frogger
