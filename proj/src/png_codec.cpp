#include "membench/error.hpp"
#include "membench/image.hpp"

#include <png.h>

#include <cstring>

namespace membench {

Bytes encode_png(const Image& image) {
    if (image.empty()) throw Error("cannot encode an empty image");
    png_image desc;
    std::memset(&desc, 0, sizeof desc);
    desc.version = PNG_IMAGE_VERSION;
    desc.width = static_cast<png_uint_32>(image.width());
    desc.height = static_cast<png_uint_32>(image.height());
    desc.format = PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&desc, nullptr, &size, 0, image.data().data(), 0, nullptr)) {
        throw Error(std::string("png encode failed: ") + desc.message);
    }
    Bytes out(size);
    if (!png_image_write_to_memory(&desc, out.data(), &size, 0, image.data().data(), 0, nullptr)) {
        throw Error(std::string("png encode failed: ") + desc.message);
    }
    out.resize(size);
    return out;
}

Image decode_png(std::span<const std::uint8_t> png) {
    png_image desc;
    std::memset(&desc, 0, sizeof desc);
    desc.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&desc, png.data(), png.size())) {
        throw ParseError(std::string("png decode failed: ") + desc.message);
    }
    desc.format = PNG_FORMAT_RGB;
    Image out(static_cast<int>(desc.width), static_cast<int>(desc.height));
    if (!png_image_finish_read(&desc, nullptr, out.data().data(), 0, nullptr)) {
        png_image_free(&desc);
        throw ParseError(std::string("png decode failed: ") + desc.message);
    }
    return out;
}

}  // namespace membench
