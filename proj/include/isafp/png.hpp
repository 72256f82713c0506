#pragma once

#include <png.h>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "isafp/json_io.hpp"
#include "isafp/sim.hpp"

namespace isafp {

/// 8-bit RGB canvas, row-major.
struct RgbImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // r, g, b interleaved

    RgbImage() = default;
    RgbImage(std::size_t w, std::size_t h, std::uint8_t fill = 255) : width(w), height(h), pixels(w * h * 3, fill) {}

    void set(std::ptrdiff_t x, std::ptrdiff_t y, std::uint8_t r, std::uint8_t g, std::uint8_t b)
    {
        if (x < 0 || y < 0 || x >= static_cast<std::ptrdiff_t>(width) || y >= static_cast<std::ptrdiff_t>(height)) return;
        auto* p = &pixels[(static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)) * 3];
        p[0] = r;
        p[1] = g;
        p[2] = b;
    }
};

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline void write_png_rows(const fs::path& path, std::size_t width, std::size_t height, int color_type,
                           const std::uint8_t* data, std::size_t row_bytes)
{
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed for " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(data + y * row_bytes));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace detail

inline void write_png_gray(const fs::path& path, std::size_t width, std::size_t height,
                           const std::vector<std::uint8_t>& gray)
{
    if (gray.size() != width * height) throw ValidationError("write_png_gray: buffer size mismatch");
    detail::write_png_rows(path, width, height, PNG_COLOR_TYPE_GRAY, gray.data(), width);
}

inline void write_png_rgb(const fs::path& path, const RgbImage& img)
{
    detail::write_png_rows(path, img.width, img.height, PNG_COLOR_TYPE_RGB, img.pixels.data(), img.width * 3);
}

/// Decodes any PNG to 8-bit grayscale scaled to [0, 1].
inline GrayImage read_png_gray(const fs::path& path)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
    image.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        png_image_free(&image);
        throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
    }
    GrayImage g;
    g.width = image.width;
    g.height = image.height;
    g.pixels.resize(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) g.pixels[i] = buf[i] / 255.0;
    return g;
}

inline GrayImage read_gray_f32(const fs::path& path)
{
    const std::size_t n = f32_side_length(path);
    const RealRaster r = read_f32(path, n);
    return GrayImage{n, n, std::vector<double>(r.begin(), r.end())};
}

/// PNG (any colour type) or headerless square .f32 raster.
inline GrayImage read_gray_image(const fs::path& path)
{
    if (!fs::exists(path)) throw IoError("no such file: " + path.string());
    if (path.extension() == ".f32") return read_gray_f32(path);
    return read_png_gray(path);
}

}  // namespace isafp
