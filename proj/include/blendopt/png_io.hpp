#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace blendopt {

struct Image8 {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;
    std::vector<std::uint8_t> pixels;
};

/// Reads any PNG as 8-bit grayscale. Throws std::runtime_error on failure.
Image8 read_png_gray(const std::string& path);
Image8 read_png_rgb(const std::string& path);

/// Writes 1-channel (gray) or 3-channel (RGB) 8-bit images.
void write_png(const std::string& path, const Image8& image);

}  // namespace blendopt
