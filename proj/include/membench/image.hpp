#pragma once

#include "membench/util.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace membench {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

namespace colors {
inline constexpr Rgb black{0, 0, 0};
inline constexpr Rgb white{255, 255, 255};
inline constexpr Rgb red{255, 0, 0};
inline constexpr Rgb green{0, 255, 0};
// Divider between composite panes; never produced by the synthetic renderer.
inline constexpr Rgb divider{255, 0, 255};
}  // namespace colors

/// 8-bit RGB raster, row-major.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb fill = colors::white);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return width_ == 0 || height_ == 0; }

    Rgb at(int x, int y) const;
    void set(int x, int y, Rgb c);
    /// Like set() but silently ignores out-of-bounds coordinates.
    void plot(int x, int y, Rgb c);

    void fill_rect(int x, int y, int w, int h, Rgb c);
    void stroke_rect(int x, int y, int w, int h, int thickness, Rgb c);
    void fill_circle(int cx, int cy, int radius, Rgb c);
    void blit(const Image& src, int x, int y);

    /// Nearest-neighbour resample to the given height, preserving aspect ratio.
    Image scaled_to_height(int height) const;
    /// Copy of the sub-rectangle [x, x+w) x [y, y+h).
    Image crop(int x, int y, int w, int h) const;

    const std::vector<std::uint8_t>& data() const noexcept { return data_; }
    std::vector<std::uint8_t>& data() noexcept { return data_; }

    bool operator==(const Image&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

Bytes encode_png(const Image& image);
Image decode_png(std::span<const std::uint8_t> png);

/// Draws text with a built-in 5x7 bitmap font. Each glyph cell is 6*scale wide
/// and 7*scale tall. Lowercase letters render as uppercase.
void draw_text(Image& image, int x, int y, std::string_view text, int scale, Rgb color);
int text_width(std::string_view text, int scale);

}  // namespace membench
