#include "membench/image.hpp"

#include "membench/error.hpp"

#include <algorithm>
#include <stdexcept>

namespace membench {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw std::invalid_argument("negative image dimensions");
    data_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
    for (std::size_t i = 0; i < data_.size(); i += 3) {
        data_[i] = fill.r;
        data_[i + 1] = fill.g;
        data_[i + 2] = fill.b;
    }
}

Rgb Image::at(int x, int y) const {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) throw std::out_of_range("pixel out of range");
    const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
    return {data_[i], data_[i + 1], data_[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) throw std::out_of_range("pixel out of range");
    plot(x, y, c);
}

void Image::plot(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
    const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
    data_[i] = c.r;
    data_[i + 1] = c.g;
    data_[i + 2] = c.b;
}

void Image::fill_rect(int x, int y, int w, int h, Rgb c) {
    const int x0 = std::max(0, x), y0 = std::max(0, y);
    const int x1 = std::min(width_, x + w), y1 = std::min(height_, y + h);
    for (int yy = y0; yy < y1; ++yy)
        for (int xx = x0; xx < x1; ++xx) plot(xx, yy, c);
}

void Image::stroke_rect(int x, int y, int w, int h, int thickness, Rgb c) {
    fill_rect(x, y, w, thickness, c);
    fill_rect(x, y + h - thickness, w, thickness, c);
    fill_rect(x, y, thickness, h, c);
    fill_rect(x + w - thickness, y, thickness, h, c);
}

void Image::fill_circle(int cx, int cy, int radius, Rgb c) {
    const long r2 = static_cast<long>(radius) * radius;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (static_cast<long>(dx) * dx + static_cast<long>(dy) * dy <= r2) plot(cx + dx, cy + dy, c);
}

void Image::blit(const Image& src, int x, int y) {
    for (int yy = 0; yy < src.height_; ++yy)
        for (int xx = 0; xx < src.width_; ++xx) plot(x + xx, y + yy, src.at(xx, yy));
}

Image Image::scaled_to_height(int height) const {
    if (height == height_) return *this;
    if (height_ == 0) return Image(0, height);
    const long w = std::max<long>(1, (static_cast<long>(width_) * height + height_ / 2) / height_);
    Image out(static_cast<int>(w), height);
    for (int y = 0; y < height; ++y) {
        const int sy = static_cast<int>(static_cast<long>(y) * height_ / height);
        for (int x = 0; x < out.width_; ++x) {
            const int sx = static_cast<int>(static_cast<long>(x) * width_ / w);
            out.plot(x, y, at(sx, sy));
        }
    }
    return out;
}

Image Image::crop(int x, int y, int w, int h) const {
    if (x < 0 || y < 0 || w < 0 || h < 0 || x + w > width_ || y + h > height_) {
        throw std::out_of_range("crop rectangle out of range");
    }
    Image out(w, h);
    for (int yy = 0; yy < h; ++yy)
        for (int xx = 0; xx < w; ++xx) out.plot(xx, yy, at(x + xx, y + yy));
    return out;
}

}  // namespace membench
