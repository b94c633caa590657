#pragma once

#include <filesystem>
#include <vector>

namespace scratchwave {

// Linear sRGB, row 0 at the top.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<float> rgb;

    Image() = default;
    Image(int w, int h) : width(w), height(h), rgb(static_cast<size_t>(w) * h * 3, 0.0f) {}
    float* pixel(int x, int y) { return &rgb[(static_cast<size_t>(y) * width + x) * 3]; }
    const float* pixel(int x, int y) const { return &rgb[(static_cast<size_t>(y) * width + x) * 3]; }
};

enum class ImageFormat { Pfm, Png };

// PFM: "PF\n<w> <h>\n-1.0\n", little-endian floats, bottom row first.
// PNG: 8-bit sRGB after the exposure scale. Non-finite pixels are rejected.
void write_image(const Image& image, const std::filesystem::path& path, ImageFormat format, double exposure = 1.0);

// Format from the extension (.pfm or .png); anything else is an error.
ImageFormat format_from_path(const std::filesystem::path& path);

Image read_pfm(const std::filesystem::path& path);

}  // namespace scratchwave
