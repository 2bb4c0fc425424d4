#include "membench/error.hpp"
#include "membench/trace.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace membench {

std::string_view to_string(CompositeLayout layout) {
    switch (layout) {
        case CompositeLayout::last_n_strip: return "last_n_strip";
        case CompositeLayout::before_after_panel: return "before_after_panel";
        case CompositeLayout::requested_strip: return "requested_strip";
    }
    return "last_n_strip";
}

const Bytes& strip_frame(const StepRecord& step) {
    return step.screenshot_after ? *step.screenshot_after : step.screenshot_before;
}

namespace {

Image stitch(const std::vector<Image>& panes) {
    int height = 0;
    for (const auto& p : panes) height = std::max(height, p.height());
    std::vector<Image> scaled;
    scaled.reserve(panes.size());
    int width = 0;
    for (const auto& p : panes) {
        scaled.push_back(p.scaled_to_height(height));
        width += scaled.back().width();
    }
    width += pane_divider_px * static_cast<int>(panes.size() - 1);
    Image out(width, height, colors::divider);
    int x = 0;
    for (const auto& p : scaled) {
        out.blit(p, x, 0);
        x += p.width() + pane_divider_px;
    }
    return out;
}

CompositeImage strip_of(const AttemptRecord& attempt, const std::vector<std::size_t>& positions,
                        CompositeLayout layout) {
    CompositeImage c;
    c.layout = layout;
    std::vector<Image> panes;
    for (std::size_t pos : positions) {
        const StepRecord& s = attempt.steps[pos];
        panes.push_back(decode_png(strip_frame(s)));
        c.member_steps.push_back(s.step_index);
    }
    c.pixels = stitch(panes);
    return c;
}

}  // namespace

CompositeImage compose_last_n(const AttemptRecord& attempt, int n) {
    if (n < 1) throw std::invalid_argument("compose_last_n: n must be positive");
    std::vector<std::size_t> with_frames;
    for (std::size_t i = 0; i < attempt.steps.size(); ++i)
        if (!attempt.steps[i].screenshot_before.empty() || attempt.steps[i].screenshot_after) with_frames.push_back(i);
    if (with_frames.empty()) throw UnknownStepError(-1, "attempt has no screenshots");
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(n), with_frames.size());
    std::vector<std::size_t> chosen(with_frames.end() - static_cast<std::ptrdiff_t>(take), with_frames.end());
    return strip_of(attempt, chosen, CompositeLayout::last_n_strip);
}

MarkerGeometry marker_geometry(int width, int height) {
    MarkerGeometry g;
    g.radius = std::max(1, static_cast<int>(std::lround(0.02 * std::min(width, height))));
    g.square_side = 3 * g.radius;
    g.glyph_scale = std::max(1, static_cast<int>(std::lround(g.radius / 7.0)));
    return g;
}

void draw_touch_marker(Image& image, Point p) {
    const MarkerGeometry g = marker_geometry(image.width(), image.height());
    const int half = g.square_side / 2;
    const int thickness = std::max(1, g.radius / 4);
    const int sx = p.x - half, sy = p.y - half;
    image.stroke_rect(sx, sy, g.square_side, g.square_side, thickness, colors::green);
    draw_text(image, sx + thickness + 1, sy + thickness + 1, "C", g.glyph_scale, colors::green);
    image.fill_circle(p.x, p.y, g.radius, colors::red);
}

CompositeImage compose_before_after(const StepRecord& step) {
    if (step.screenshot_before.empty()) {
        throw UnknownStepError(step.step_index, "step " + std::to_string(step.step_index) +
                                                    " has no before-action screenshot");
    }
    const Image plain_before = decode_png(step.screenshot_before);
    Image before = plain_before;
    if (step.touch_point) draw_touch_marker(before, *step.touch_point);
    const Image after = step.screenshot_after ? decode_png(*step.screenshot_after) : plain_before;

    CompositeImage c;
    c.layout = CompositeLayout::before_after_panel;
    c.member_steps = {step.step_index};
    c.pixels = stitch({before, after});
    return c;
}

CompositeImage compose_requested(const AttemptRecord& attempt, std::span<const int> required_steps) {
    if (required_steps.empty()) throw std::invalid_argument("compose_requested: no steps requested");
    std::set<int> wanted(required_steps.begin(), required_steps.end());
    std::vector<std::size_t> positions;
    for (int idx : wanted) {
        auto it = std::find_if(attempt.steps.begin(), attempt.steps.end(),
                               [&](const StepRecord& s) { return s.step_index == idx; });
        if (it == attempt.steps.end() || it->screenshot_before.empty()) {
            throw UnknownStepError(idx, "requested step " + std::to_string(idx) + " does not exist in attempt");
        }
        positions.push_back(static_cast<std::size_t>(it - attempt.steps.begin()));
    }
    return strip_of(attempt, positions, CompositeLayout::requested_strip);
}

std::string observation_hash(const Bytes& screenshot_png, const std::optional<std::string>& ui_tree) {
    const Image img = decode_png(screenshot_png);
    Bytes buf = img.data();
    const std::string dims = std::to_string(img.width()) + "x" + std::to_string(img.height());
    buf.insert(buf.end(), dims.begin(), dims.end());
    if (ui_tree) buf.insert(buf.end(), ui_tree->begin(), ui_tree->end());
    return sha256_hex(buf);
}

}  // namespace membench
