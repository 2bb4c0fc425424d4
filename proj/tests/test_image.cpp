#include "membench/error.hpp"
#include "membench/image.hpp"
#include "membench/trace.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace membench;
using membench::testing::make_attempt;

namespace {

// Counts maximal runs of divider-coloured columns along the middle row.
int divider_runs(const Image& img) {
    int runs = 0;
    bool in = false;
    const int y = img.height() / 2;
    for (int x = 0; x < img.width(); ++x) {
        const bool d = img.at(x, y) == colors::divider;
        if (d && !in) ++runs;
        in = d;
    }
    return runs;
}

// Blue channel of the pane centred at column x, which encodes the step index.
int pane_step(const Image& img, int x) { return img.at(x, img.height() / 2).b - 100; }

}  // namespace

TEST(Image, PngRoundTripIsLossless) {
    std::mt19937 rng(3);
    Image img(17, 9);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 17; ++x)
            img.set(x, y, Rgb{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                              static_cast<std::uint8_t>(rng())});
    EXPECT_EQ(decode_png(encode_png(img)), img);
    EXPECT_ANY_THROW(decode_png(Bytes{1, 2, 3}));
}

TEST(Composite, LastNStripHasNPanesInStepOrder) {
    const AttemptRecord a = make_attempt("t", 5);
    const CompositeImage c = compose_last_n(a, 3);
    EXPECT_EQ(c.member_steps, (std::vector<int>{2, 3, 4}));
    EXPECT_EQ(divider_runs(c.pixels), 2);
    EXPECT_EQ(c.pixels.width(), 3 * 40 + 2 * pane_divider_px);
    // After-action frames (index + 50) are used when present.
    EXPECT_EQ(pane_step(c.pixels, 20), 52);
    EXPECT_EQ(pane_step(c.pixels, 40 + pane_divider_px + 20), 53);
    EXPECT_EQ(pane_step(c.pixels, 2 * (40 + pane_divider_px) + 20), 54);
}

TEST(Composite, LastNFallsBackToBeforeFramesAndShortAttempts) {
    const AttemptRecord a = make_attempt("t", 2, 1, false);
    const CompositeImage c = compose_last_n(a, 3);
    EXPECT_EQ(c.member_steps, (std::vector<int>{0, 1}));
    EXPECT_EQ(divider_runs(c.pixels), 1);
    EXPECT_EQ(pane_step(c.pixels, 20), 0);
}

TEST(Composite, BeforeAfterPanelMarksTouchPoint) {
    const AttemptRecord a = make_attempt("t", 1);
    const CompositeImage c = compose_before_after(a.steps[0]);
    EXPECT_EQ(divider_runs(c.pixels), 1);
    // Red centroid sits on the touch point inside the left panel.
    long sx = 0, sy = 0, n = 0;
    for (int y = 0; y < c.pixels.height(); ++y)
        for (int x = 0; x < c.pixels.width(); ++x)
            if (c.pixels.at(x, y) == colors::red) {
                sx += x;
                sy += y;
                ++n;
            }
    ASSERT_GT(n, 0);
    EXPECT_NEAR(static_cast<double>(sx) / n, 20.0, 0.5);
    EXPECT_NEAR(static_cast<double>(sy) / n, 30.0, 0.5);
    EXPECT_EQ(pane_step(c.pixels, 40 + pane_divider_px + 20), 50);
}

TEST(Composite, MissingAfterDuplicatesBefore) {
    const AttemptRecord a = make_attempt("t", 1, 1, false);
    const CompositeImage c = compose_before_after(a.steps[0]);
    EXPECT_EQ(pane_step(c.pixels, 40 + pane_divider_px + 5), 0);
}

TEST(Composite, RequestedStripSortsDeduplicatesAndRejectsUnknown) {
    const AttemptRecord a = make_attempt("t", 8);
    const std::vector<int> req{6, 2, 4, 2};
    const CompositeImage c = compose_requested(a, req);
    EXPECT_EQ(c.member_steps, (std::vector<int>{2, 4, 6}));
    EXPECT_EQ(divider_runs(c.pixels), 2);
    const std::vector<int> bad{1, 99};
    try {
        compose_requested(a, bad);
        FAIL();
    } catch (const UnknownStepError& e) {
        EXPECT_EQ(e.step_index(), 99);
    }
}

TEST(Composite, MarkerGeometryScalesWithScreen) {
    EXPECT_EQ(marker_geometry(1080, 2400).radius, 22);
    EXPECT_EQ(marker_geometry(1080, 2400).square_side, 66);
    EXPECT_EQ(marker_geometry(10, 10).radius, 1);
}

TEST(Composite, ObservationHashDependsOnPixelsAndTree) {
    const Bytes a = membench::testing::step_png(1), b = membench::testing::step_png(2);
    EXPECT_EQ(observation_hash(a, std::nullopt), observation_hash(a, std::nullopt));
    EXPECT_NE(observation_hash(a, std::nullopt), observation_hash(b, std::nullopt));
    EXPECT_NE(observation_hash(a, std::string("x")), observation_hash(a, std::nullopt));
}
