#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wireforge/geometry.hpp"

namespace wireforge {

/// Row-major H x W grayscale image of doubles. Used for renders (1 = white
/// paper, 0 = full ink), targets, and per-pixel gradients.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data;
    std::optional<ViewId> view;

    Image() = default;
    Image(int w, int h, double fill = 0.0) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return data.size(); }
    bool same_shape(const Image& o) const { return width == o.width && height == o.height; }
};

/// 8-bit quantization used by every export: round(clamp(v,0,1) * 255).
unsigned char quantize(double v);
std::vector<unsigned char> quantize(const Image& img);

/// Writes PNG or PGM (P5) by extension. Throws Error on I/O failure.
void write_image(const Image& img, const std::filesystem::path& path);

/// Reads any PNG/PGM (color inputs are converted to gray) into [0,1].
Image read_image(const std::filesystem::path& path);

std::vector<unsigned char> encode_png(const Image& img);
Image decode_png(std::span<const unsigned char> bytes);

/// Bilinear resize to (w, h); used to fit targets to the canvas.
Image resize(const Image& img, int w, int h);

}  // namespace wireforge
