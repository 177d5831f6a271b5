#include <doctest.h>

#include <algorithm>

#include "frogger/objects.hpp"
#include "test_helpers.hpp"

using namespace frogger;
using testutil::safe_config;

namespace {

// Canonical order for set-wise comparison; extract() reports in scan order
// while objects() groups by category.
ObjectList sorted(ObjectList v) {
    std::sort(v.begin(), v.end(), [](const GameObject& a, const GameObject& b) {
        return std::tie(a.category, a.y, a.x, a.w, a.h) <
               std::tie(b.category, b.y, b.x, b.w, b.h);
    });
    return v;
}

bool boxes_touch(const GameObject& a, const GameObject& b) {
    return a.x <= b.x + b.w && b.x <= a.x + a.w && a.y <= b.y + b.h && b.y <= a.y + a.h;
}

// True when no two objects touch or overlap (flood fill would merge them).
bool all_separated(const ObjectList& objs) {
    for (size_t i = 0; i < objs.size(); ++i)
        for (size_t j = i + 1; j < objs.size(); ++j)
            if (boxes_touch(objs[i], objs[j])) return false;
    return true;
}

}  // namespace

TEST_CASE("object list starts with the frog at its start pose") {
    FroggerEnv env(EnvConfig::standard());
    ObjectList objs = objects(env);
    REQUIRE_FALSE(objs.empty());
    CHECK(objs[0] == GameObject{ObjectCategory::Frog, 79, 171, 7, 7});
    // grouped: all cars before all logs before all turtles
    std::vector<int> cat_order;
    for (size_t i = 1; i < objs.size(); ++i) cat_order.push_back(static_cast<int>(objs[i].category));
    CHECK(std::is_sorted(cat_order.begin(), cat_order.end()));
}

TEST_CASE("format and parse are inverse on a crafted list") {
    ObjectList objs = {{ObjectCategory::Frog, 79, 171, 7, 7},
                       {ObjectCategory::Car, 36, 161, 8, 7},
                       {ObjectCategory::Log, 8, 57, 30, 7},
                       {ObjectCategory::Turtle, 140, 44, 8, 7},
                       {ObjectCategory::LadyFrog, 93, 70, 7, 7}};
    std::string text = format_objects(objs);
    CHECK(text ==
          "Frog at (79, 171) size (7, 7), Car at (36, 161) size (8, 7), "
          "Log at (8, 57) size (30, 7), Turtle at (140, 44) size (8, 7), "
          "LadyFrog at (93, 70) size (7, 7)");
    CHECK(parse_objects(text) == objs);
}

TEST_CASE("parse_objects rejects junk and accepts empty text") {
    CHECK_THROWS_AS(parse_objects("not an object list"), std::invalid_argument);
    CHECK(parse_objects("").empty());
    CHECK(parse_objects("  \n").empty());
}

TEST_CASE("live object text round-trips through the parser") {
    FroggerEnv env(EnvConfig::standard());
    for (int i = 0; i < 40; ++i) {
        ObjectList objs = objects(env);
        CHECK(parse_objects(format_objects(objs)) == objs);
        env.step(Action::NOOP);
    }
}

TEST_CASE("hide_current_lane removes the frog's own lane from the listing") {
    EnvConfig cfg = EnvConfig::standard();
    cfg.hide_current_lane = true;
    FroggerEnv env(cfg);
    // on the start bank nothing is hidden
    size_t full = objects(env).size();
    env.step(Action::UP);  // now standing in the first car lane (y=161)
    ObjectList objs = objects(env);
    CHECK(objs.size() < full);
    for (const auto& o : objs)
        if (o.category != ObjectCategory::Frog) CHECK(o.y != 161);
}

TEST_CASE("wide wrapping objects split into at most two fragments") {
    FroggerEnv env(EnvConfig::standard());
    for (int i = 0; i < 200; ++i) {
        for (const auto& o : objects(env)) {
            CHECK(o.x >= env.config().x_min);
            CHECK(o.x + o.w <= env.config().x_max);
            CHECK(o.w >= 1);
        }
        env.step(Action::NOOP);
        if (env.done()) break;
    }
}

TEST_CASE("render paints the frog and the background bands") {
    FroggerEnv env(safe_config());
    PixelPalette pal;
    Frame f = render(env);
    int frog_px = 0;
    for (uint8_t v : f.pixels)
        if (v == pal.frog) ++frog_px;
    CHECK(frog_px == 49);  // 7x7, nothing else shares the value
    CHECK(f.at(171, 79) == pal.frog);
    CHECK(f.at(161, 8) == pal.bank);  // safe_config turns every lane into a bank band
    CHECK(f.at(18, 8) == pal.bank);   // home row band
}

TEST_CASE("background stays below the foreground threshold") {
    FroggerEnv env(EnvConfig::standard());
    PixelPalette pal;
    Frame f = render(env);
    ObjectList objs = objects(env);
    auto covered = [&](int x, int y) {
        for (const auto& o : objs)
            if (x >= o.x && x < o.x + o.w && y >= o.y && y < o.y + o.h) return true;
        return false;
    };
    for (int y = 0; y < kScreenH; ++y)
        for (int x = 0; x < kScreenW; ++x)
            if (!covered(x, y)) CHECK(f.at(y, x) < pal.threshold);
}

TEST_CASE("to_grayscale matches the luma formula") {
    std::vector<uint8_t> rgb(kScreenW * kScreenH * 3, 255);
    CHECK(to_grayscale(rgb).at(0, 0) == 255);
    std::fill(rgb.begin(), rgb.end(), 0);
    rgb[2] = 255;  // pure blue in the first pixel
    Frame f = to_grayscale(rgb);
    CHECK(f.at(0, 0) == 29);  // round(0.114 * 255)
    CHECK(f.at(0, 1) == 0);
    CHECK_THROWS_AS(to_grayscale(std::vector<uint8_t>(10)), std::invalid_argument);
}

TEST_CASE("extract ignores blobs under the area threshold") {
    Frame f;
    PixelPalette pal;
    f.pixels.fill(pal.road);
    // 2x2 frog-colored speck: area 4 < 5
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) f.set(100 + y, 50 + x, pal.frog);
    CHECK(extract(f).empty());
    // full 7x7 frog is found
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 7; ++x) f.set(30 + y, 90 + x, pal.frog);
    ObjectList objs = extract(f);
    REQUIRE(objs.size() == 1);
    CHECK(objs[0] == GameObject{ObjectCategory::Frog, 90, 30, 7, 7});
}

TEST_CASE("extract inverts render on drifting game states") {
    FroggerEnv env(EnvConfig::standard());
    int checked = 0;
    for (int i = 0; i < 200 && !env.done(); ++i) {
        ObjectList truth = objects(env);
        if (all_separated(truth)) {
            CHECK(sorted(extract(render(env))) == sorted(truth));
            ++checked;
        }
        env.step(Action::NOOP);
    }
    CHECK(checked > 50);
}

TEST_CASE("preprocess shape and value bounds") {
    FroggerEnv env(EnvConfig::standard());
    std::vector<Frame> frames;
    for (int i = 0; i < 4; ++i) {
        frames.push_back(render(env));
        env.step(Action::NOOP);
    }
    std::vector<double> out = preprocess(frames);
    CHECK(out.size() == 4u * 84 * 84);
    for (double v : out) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS_AS(preprocess(std::vector<Frame>(3)), std::invalid_argument);
}

TEST_CASE("preprocess of constant frames is constant") {
    Frame f;
    f.pixels.fill(255);
    std::vector<double> out = preprocess(std::vector<Frame>(4, f));
    for (double v : out) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    f.pixels.fill(0);
    for (double v : preprocess(std::vector<Frame>(4, f))) CHECK(v == 0.0);
}

TEST_CASE("preprocess conserves total mass exactly") {
    FroggerEnv env(EnvConfig::standard());
    Frame f = render(env);
    double in_sum = 0.0;
    for (uint8_t v : f.pixels) in_sum += v / 255.0;
    std::vector<double> out = preprocess(std::vector<Frame>(4, f));
    double out_sum = 0.0;
    for (size_t i = 0; i < 84u * 84; ++i) out_sum += out[i];
    // each output cell is an area-weighted average over (210/84)*(160/84) inputs
    double cell_area = (210.0 / 84) * (160.0 / 84);
    CHECK(out_sum * cell_area == doctest::Approx(in_sum).epsilon(1e-9));
}

TEST_CASE("pgm header is well-formed") {
    Frame f;
    f.pixels.fill(7);
    std::string pgm = to_pgm(f);
    CHECK(pgm.substr(0, 15) == "P5\n160 210\n255\n");
    CHECK(pgm.size() == 15 + f.pixels.size());
}
