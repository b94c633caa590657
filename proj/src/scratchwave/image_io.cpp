#include "scratchwave/image_io.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "scratchwave/error.hpp"
#include "scratchwave/spectral.hpp"

namespace scratchwave {

namespace {

void check_finite(const Image& image) {
    for (size_t i = 0; i < image.rgb.size(); ++i) {
        if (!std::isfinite(image.rgb[i])) {
            const size_t p = i / 3;
            fail(ErrorCode::InvalidArgument, "non-finite value at pixel (" + std::to_string(p % image.width) + ", " +
                                                 std::to_string(p / image.width) + ")");
        }
    }
}

struct File {
    std::FILE* f;
    ~File() {
        if (f) std::fclose(f);
    }
};

void write_pfm(const Image& image, const std::filesystem::path& path) {
    File file{std::fopen(path.c_str(), "wb")};
    if (!file.f) fail(ErrorCode::Io, "cannot open " + path.string() + ": " + std::strerror(errno));
    std::fprintf(file.f, "PF\n%d %d\n-1.0\n", image.width, image.height);
    std::vector<unsigned char> row(static_cast<size_t>(image.width) * 12);
    for (int y = image.height - 1; y >= 0; --y) {
        const float* src = image.pixel(0, y);
        for (size_t i = 0; i < static_cast<size_t>(image.width) * 3; ++i) {
            auto bits = std::bit_cast<std::uint32_t>(src[i]);
            for (int b = 0; b < 4; ++b) row[i * 4 + b] = static_cast<unsigned char>(bits >> (8 * b));
        }
        if (std::fwrite(row.data(), 1, row.size(), file.f) != row.size()) fail(ErrorCode::Io, "write failed: " + path.string());
    }
    const int rc = std::fclose(file.f);
    file.f = nullptr;
    if (rc != 0) fail(ErrorCode::Io, "write failed: " + path.string());
}

void write_png(const Image& image, const std::filesystem::path& path, double exposure) {
    File file{std::fopen(path.c_str(), "wb")};
    if (!file.f) fail(ErrorCode::Io, "cannot open " + path.string() + ": " + std::strerror(errno));
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(ErrorCode::Internal, "libpng initialization failed");
    }
    std::vector<png_byte> pixels(static_cast<size_t>(image.width) * image.height * 3);
    for (size_t i = 0; i < pixels.size(); ++i) {
        const double v = srgb_encode(image.rgb[i] * exposure);
        pixels[i] = static_cast<png_byte>(std::lround(v * 255.0));
    }
    std::vector<png_bytep> rows(static_cast<size_t>(image.height));
    for (int y = 0; y < image.height; ++y) rows[static_cast<size_t>(y)] = &pixels[static_cast<size_t>(y) * image.width * 3];
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorCode::Io, "PNG encoding failed: " + path.string());
    }
    png_init_io(png, file.f);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_sRGB(png, info, PNG_sRGB_INTENT_PERCEPTUAL);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    const int rc = std::fclose(file.f);
    file.f = nullptr;
    if (rc != 0) fail(ErrorCode::Io, "write failed: " + path.string());
}

}  // namespace

ImageFormat format_from_path(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".pfm") return ImageFormat::Pfm;
    if (ext == ".png") return ImageFormat::Png;
    fail(ErrorCode::InvalidArgument, "unsupported image extension \"" + ext + "\" (use .pfm or .png)");
}

void write_image(const Image& image, const std::filesystem::path& path, ImageFormat format, double exposure) {
    if (image.width < 1 || image.height < 1 || image.rgb.size() != static_cast<size_t>(image.width) * image.height * 3) {
        fail(ErrorCode::InvalidArgument, "image has inconsistent dimensions");
    }
    if (!(exposure > 0.0) || !std::isfinite(exposure)) fail(ErrorCode::InvalidArgument, "exposure must be positive");
    check_finite(image);
    if (format == ImageFormat::Pfm) {
        write_pfm(image, path);
    } else {
        write_png(image, path, exposure);
    }
}

Image read_pfm(const std::filesystem::path& path) {
    File file{std::fopen(path.c_str(), "rb")};
    if (!file.f) fail(ErrorCode::Io, "cannot open " + path.string());
    char magic[3] = {};
    int w = 0;
    int h = 0;
    double scale = 0.0;
    if (std::fscanf(file.f, "%2s %d %d %lf", magic, &w, &h, &scale) != 4 || std::strcmp(magic, "PF") != 0 || w < 1 ||
        h < 1) {
        fail(ErrorCode::ParseError, "not a color PFM: " + path.string());
    }
    std::fgetc(file.f);
    Image img(w, h);
    std::vector<unsigned char> row(static_cast<size_t>(w) * 12);
    for (int y = h - 1; y >= 0; --y) {
        if (std::fread(row.data(), 1, row.size(), file.f) != row.size()) fail(ErrorCode::ParseError, "truncated PFM: " + path.string());
        float* dst = img.pixel(0, y);
        for (size_t i = 0; i < static_cast<size_t>(w) * 3; ++i) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) {
                const int shift = scale < 0.0 ? 8 * b : 8 * (3 - b);
                bits |= static_cast<std::uint32_t>(row[i * 4 + b]) << shift;
            }
            dst[i] = std::bit_cast<float>(bits);
        }
    }
    return img;
}

}  // namespace scratchwave
