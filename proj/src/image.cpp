#include "styleaudit/image.hpp"

#include <algorithm>
#include <cmath>

#include "styleaudit/errors.hpp"

namespace styleaudit {

ImageU8 resize_bilinear(const ImageU8& src, int out_w, int out_h) {
    if (src.width <= 0 || src.height <= 0)
        throw InvalidConfig("resize of empty image");
    if (src.width == out_w && src.height == out_h) return src;

    ImageU8 dst(out_w, out_h);
    const float sx = static_cast<float>(src.width) / out_w;
    const float sy = static_cast<float>(src.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        float fy = (y + 0.5f) * sy - 0.5f;
        fy = std::clamp(fy, 0.0f, static_cast<float>(src.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const float wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            float fx = (x + 0.5f) * sx - 0.5f;
            fx = std::clamp(fx, 0.0f, static_cast<float>(src.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const float wx = fx - x0;
            const std::uint8_t* p00 = src.at(x0, y0);
            const std::uint8_t* p10 = src.at(x1, y0);
            const std::uint8_t* p01 = src.at(x0, y1);
            const std::uint8_t* p11 = src.at(x1, y1);
            std::uint8_t* out = dst.at(x, y);
            for (int c = 0; c < 3; ++c) {
                const float top = p00[c] + (p10[c] - p00[c]) * wx;
                const float bot = p01[c] + (p11[c] - p01[c]) * wx;
                const float v = top + (bot - top) * wy;
                out[c] = static_cast<std::uint8_t>(
                    std::clamp(v + 0.5f, 0.0f, 255.0f));
            }
        }
    }
    return dst;
}

std::array<float, 3> rgb_to_hsv(float r, float g, float b) {
    const float mx = std::max({r, g, b});
    const float mn = std::min({r, g, b});
    const float d = mx - mn;
    float h = 0.0f;
    if (d > 0.0f) {
        if (mx == r)
            h = std::fmod((g - b) / d, 6.0f);
        else if (mx == g)
            h = (b - r) / d + 2.0f;
        else
            h = (r - g) / d + 4.0f;
        h /= 6.0f;
        if (h < 0.0f) h += 1.0f;
    }
    const float s = mx <= 0.0f ? 0.0f : d / mx;
    return {h, s, mx};
}

std::array<float, 3> hsv_to_rgb(float h, float s, float v) {
    h = h - std::floor(h);
    const float c = v * s;
    const float hp = h * 6.0f;
    const float x = c * (1.0f - std::fabs(std::fmod(hp, 2.0f) - 1.0f));
    float r = 0.0f, g = 0.0f, b = 0.0f;
    if (hp < 1.0f) {
        r = c; g = x;
    } else if (hp < 2.0f) {
        r = x; g = c;
    } else if (hp < 3.0f) {
        g = c; b = x;
    } else if (hp < 4.0f) {
        g = x; b = c;
    } else if (hp < 5.0f) {
        r = x; b = c;
    } else {
        r = c; b = x;
    }
    const float m = v - c;
    return {r + m, g + m, b + m};
}

bool has_image_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace styleaudit
