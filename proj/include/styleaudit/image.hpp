#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace styleaudit {

// Interleaved 8-bit RGB image, row-major.
struct ImageU8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // height * width * 3

    ImageU8() = default;
    ImageU8(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h),
          pixels(static_cast<std::size_t>(w) * h * 3, fill) {}

    std::uint8_t* at(int x, int y) {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    bool empty() const { return pixels.empty(); }
};

// Bilinear resample to out_w x out_h (align-corners=false convention).
ImageU8 resize_bilinear(const ImageU8& src, int out_w, int out_h);

// Decodes a PNG or JPEG file; throws DecodeFailure. Grayscale/paletted/alpha
// inputs are converted to RGB.
ImageU8 load_image(const std::filesystem::path& path);

// Writes an 8-bit RGB PNG; throws IoError.
void save_png(const ImageU8& image, const std::filesystem::path& path);

bool has_image_extension(const std::filesystem::path& path);

// RGB <-> HSV with all components in [0, 1]; hue wraps.
std::array<float, 3> rgb_to_hsv(float r, float g, float b);
std::array<float, 3> hsv_to_rgb(float h, float s, float v);

inline std::uint8_t to_u8(float v) {
    const float scaled = v * 255.0f + 0.5f;
    if (scaled <= 0.0f) return 0;
    if (scaled >= 255.0f) return 255;
    return static_cast<std::uint8_t>(scaled);
}

}  // namespace styleaudit
