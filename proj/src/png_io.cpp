#include "blendopt/png_io.hpp"

#include <png.h>

#include <cstring>
#include <stdexcept>

namespace blendopt {
namespace {

Image8 read_png(const std::string& path, png_uint_32 format, std::size_t channels) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str())) {
        throw std::runtime_error(path + ": " + img.message);
    }
    img.format = format;
    Image8 out;
    out.width = img.width;
    out.height = img.height;
    out.channels = channels;
    out.pixels.resize(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
        const std::string msg = img.message;
        png_image_free(&img);
        throw std::runtime_error(path + ": " + msg);
    }
    return out;
}

}  // namespace

Image8 read_png_gray(const std::string& path) { return read_png(path, PNG_FORMAT_GRAY, 1); }

Image8 read_png_rgb(const std::string& path) { return read_png(path, PNG_FORMAT_RGB, 3); }

void write_png(const std::string& path, const Image8& image) {
    if (image.channels != 1 && image.channels != 3) throw std::invalid_argument("write_png: 1 or 3 channels");
    if (image.pixels.size() != image.width * image.height * image.channels) {
        throw std::invalid_argument("write_png: pixel buffer size mismatch");
    }
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width);
    img.height = static_cast<png_uint_32>(image.height);
    img.format = image.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, path.c_str(), 0, image.pixels.data(), 0, nullptr)) {
        throw std::runtime_error(path + ": " + img.message);
    }
}

}  // namespace blendopt
