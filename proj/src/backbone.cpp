#include "styleaudit/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "styleaudit/digest.hpp"
#include "styleaudit/errors.hpp"
#include "styleaudit/kernels.hpp"
#include "styleaudit/rng.hpp"

namespace styleaudit {

BackboneArch BackboneArch::preset(const std::string& name) {
    BackboneArch arch;
    arch.name = name;
    if (name == "vgg16") {
        arch.block_channels = {64, 128, 256, 512, 512};
        arch.block_convs = {2, 2, 3, 3, 3};
        arch.norm_mean = {0.485f, 0.456f, 0.406f};
        arch.norm_std = {0.229f, 0.224f, 0.225f};
    } else if (name == "vgg-micro") {
        arch.block_channels = {16, 32, 64, 128, 128};
        arch.block_convs = {1, 1, 1, 1, 1};
        arch.norm_mean = {0.5f, 0.5f, 0.5f};
        arch.norm_std = {0.5f, 0.5f, 0.5f};
    } else {
        throw InvalidConfig("unknown backbone preset: " + name);
    }
    return arch;
}

BackboneAdapter Backbone::adapter() const {
    BackboneAdapter adapter;
    adapter.name = arch_.name;
    adapter.input_side = arch_.input_side;
    adapter.norm_mean = arch_.norm_mean;
    adapter.norm_std = arch_.norm_std;
    for (std::size_t b = 0; b < arch_.block_channels.size(); ++b)
        adapter.stages.push_back(
            {static_cast<int>(b), arch_.block_channels[b]});
    return adapter;
}

Backbone Backbone::random_init(const BackboneArch& arch, std::uint64_t seed) {
    if (arch.block_channels.size() != arch.block_convs.size() ||
        arch.block_channels.empty())
        throw InvalidConfig("backbone arch: channel/conv lists mismatch");

    Backbone net;
    net.arch_ = arch;
    const Rng base(seed);
    int in_ch = 3;
    for (std::size_t b = 0; b < arch.block_channels.size(); ++b) {
        std::vector<ConvLayer> block;
        for (int c = 0; c < arch.block_convs[b]; ++c) {
            ConvLayer layer;
            layer.in_ch = in_ch;
            layer.out_ch = arch.block_channels[b];
            layer.weights.resize(static_cast<std::size_t>(layer.out_ch) *
                                 layer.in_ch * 9);
            layer.bias.assign(layer.out_ch, 0.0f);
            Rng rng = base.derive(b, static_cast<std::uint64_t>(c));
            const double he_std = std::sqrt(2.0 / (9.0 * layer.in_ch));
            for (auto& w : layer.weights)
                w = static_cast<float>(rng.normal(0.0, he_std));
            in_ch = layer.out_ch;
            block.push_back(std::move(layer));
        }
        net.blocks_.push_back(std::move(block));
    }
    net.compute_digest();
    return net;
}

namespace {

constexpr std::uint32_t kWeightsMagic = 0x53414257;  // "SABW"
constexpr std::uint32_t kWeightsVersion = 1;

template <typename T>
void write_raw(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
void read_raw(std::istream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(value));
}

void write_string(std::ostream& out, const std::string& s) {
    write_raw(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    std::uint32_t n = 0;
    read_raw(in, n);
    if (n > (1u << 20)) throw WeightsUnavailable("corrupt string length");
    std::string s(n, '\0');
    in.read(s.data(), n);
    return s;
}

}  // namespace

void Backbone::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write weights: " + path.string());
    write_raw(out, kWeightsMagic);
    write_raw(out, kWeightsVersion);
    write_string(out, arch_.name);
    write_raw(out, static_cast<std::int32_t>(arch_.input_side));
    for (const float v : arch_.norm_mean) write_raw(out, v);
    for (const float v : arch_.norm_std) write_raw(out, v);
    write_raw(out, static_cast<std::uint32_t>(blocks_.size()));
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        write_raw(out, static_cast<std::uint32_t>(blocks_[b].size()));
        write_raw(out, static_cast<std::int32_t>(arch_.block_channels[b]));
    }
    for (const auto& block : blocks_)
        for (const auto& layer : block) {
            out.write(reinterpret_cast<const char*>(layer.weights.data()),
                      static_cast<std::streamsize>(layer.weights.size() *
                                                   sizeof(float)));
            out.write(reinterpret_cast<const char*>(layer.bias.data()),
                      static_cast<std::streamsize>(layer.bias.size() *
                                                   sizeof(float)));
        }
    if (!out) throw IoError("short write to " + path.string());
}

Backbone Backbone::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw WeightsUnavailable("weights file not found: " + path.string());
    std::uint32_t magic = 0, version = 0;
    read_raw(in, magic);
    read_raw(in, version);
    if (!in || magic != kWeightsMagic)
        throw WeightsUnavailable(path.string() + ": not a weights file");
    if (version != kWeightsVersion)
        throw WeightsUnavailable(path.string() + ": unsupported version " +
                                 std::to_string(version));

    Backbone net;
    net.arch_.name = read_string(in);
    std::int32_t side = 0;
    read_raw(in, side);
    net.arch_.input_side = side;
    for (float& v : net.arch_.norm_mean) read_raw(in, v);
    for (float& v : net.arch_.norm_std) read_raw(in, v);
    std::uint32_t n_blocks = 0;
    read_raw(in, n_blocks);
    if (!in || n_blocks == 0 || n_blocks > 16)
        throw WeightsUnavailable(path.string() + ": corrupt block count");
    for (std::uint32_t b = 0; b < n_blocks; ++b) {
        std::uint32_t convs = 0;
        std::int32_t channels = 0;
        read_raw(in, convs);
        read_raw(in, channels);
        if (!in || convs == 0 || convs > 8 || channels <= 0 || channels > 4096)
            throw WeightsUnavailable(path.string() + ": corrupt block header");
        net.arch_.block_convs.push_back(static_cast<int>(convs));
        net.arch_.block_channels.push_back(channels);
    }
    int in_ch = 3;
    for (std::uint32_t b = 0; b < n_blocks; ++b) {
        std::vector<ConvLayer> block;
        for (int c = 0; c < net.arch_.block_convs[b]; ++c) {
            ConvLayer layer;
            layer.in_ch = in_ch;
            layer.out_ch = net.arch_.block_channels[b];
            layer.weights.resize(static_cast<std::size_t>(layer.out_ch) *
                                 layer.in_ch * 9);
            layer.bias.resize(layer.out_ch);
            in.read(reinterpret_cast<char*>(layer.weights.data()),
                    static_cast<std::streamsize>(layer.weights.size() *
                                                 sizeof(float)));
            in.read(reinterpret_cast<char*>(layer.bias.data()),
                    static_cast<std::streamsize>(layer.bias.size() *
                                                 sizeof(float)));
            if (!in)
                throw WeightsUnavailable(path.string() + ": truncated weights");
            in_ch = layer.out_ch;
            block.push_back(std::move(layer));
        }
        net.blocks_.push_back(std::move(block));
    }
    net.compute_digest();
    return net;
}

void Backbone::compute_digest() {
    Digest digest;
    digest.update(arch_.name);
    digest.update_value(arch_.input_side);
    for (const float v : arch_.norm_mean) digest.update_value(v);
    for (const float v : arch_.norm_std) digest.update_value(v);
    for (const auto& block : blocks_)
        for (const auto& layer : block) {
            digest.update(layer.weights.data(),
                          layer.weights.size() * sizeof(float));
            digest.update(layer.bias.data(), layer.bias.size() * sizeof(float));
        }
    digest_ = digest.hex();
}

namespace {

// 3x3 same-padding convolution as im2col + gemm. The column buffer holds
// [in_ch * 9] x [side * side] and is reused across layers.
void conv3x3(const float* src, int in_ch, int side, const float* weights,
             const float* bias, int out_ch, float* dst, std::vector<float>& col) {
    const std::size_t plane = static_cast<std::size_t>(side) * side;
    const std::size_t k = static_cast<std::size_t>(in_ch) * 9;
    col.resize(k * plane);
    for (int c = 0; c < in_ch; ++c) {
        const float* chan = src + c * plane;
        for (int ky = -1; ky <= 1; ++ky)
            for (int kx = -1; kx <= 1; ++kx) {
                float* row =
                    col.data() + (static_cast<std::size_t>(c) * 9 +
                                  static_cast<std::size_t>(ky + 1) * 3 +
                                  (kx + 1)) *
                                     plane;
                for (int y = 0; y < side; ++y) {
                    const int sy = y + ky;
                    float* out_row = row + static_cast<std::size_t>(y) * side;
                    if (sy < 0 || sy >= side) {
                        std::memset(out_row, 0, sizeof(float) * side);
                        continue;
                    }
                    const float* src_row = chan + static_cast<std::size_t>(sy) * side;
                    const int x0 = std::max(0, -kx);
                    const int x1 = side - std::max(0, kx);
                    if (x0 > 0) out_row[0] = 0.0f;
                    if (x1 < side) out_row[side - 1] = 0.0f;
                    std::memcpy(out_row + x0, src_row + x0 + kx,
                                sizeof(float) * static_cast<std::size_t>(x1 - x0));
                }
            }
    }
    kernels::gemm_nn(static_cast<std::size_t>(out_ch), plane, k, weights,
                     col.data(), dst, /*zero_fill=*/true);
    kernels::bias_relu_rows(dst, static_cast<std::size_t>(out_ch), plane, bias);
}

}  // namespace

void Backbone::forward(
    const ImageU8& image,
    const std::function<void(int, const float*, int, int)>& on_stage) const {
    forward_count_.fetch_add(1);

    const int side0 = arch_.input_side;
    ImageU8 resized = (image.width == side0 && image.height == side0)
                          ? image
                          : resize_bilinear(image, side0, side0);

    const std::size_t plane0 = static_cast<std::size_t>(side0) * side0;
    std::vector<float> current(3 * plane0);
    for (int c = 0; c < 3; ++c) {
        const float mean = arch_.norm_mean[c];
        const float inv_std = 1.0f / arch_.norm_std[c];
        float* chan = current.data() + c * plane0;
        const std::uint8_t* px = resized.pixels.data() + c;
        for (std::size_t i = 0; i < plane0; ++i)
            chan[i] = (px[i * 3] / 255.0f - mean) * inv_std;
    }

    std::vector<float> next, col;
    int side = side0;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        for (const auto& layer : blocks_[b]) {
            next.resize(static_cast<std::size_t>(layer.out_ch) * side * side);
            conv3x3(current.data(), layer.in_ch, side, layer.weights.data(),
                    layer.bias.data(), layer.out_ch, next.data(), col);
            current.swap(next);
        }
        const int channels = arch_.block_channels[b];
        on_stage(static_cast<int>(b), current.data(), channels, side);
        if (side >= 2 && b + 1 < blocks_.size()) {
            const int half = side / 2;
            next.resize(static_cast<std::size_t>(channels) * half * half);
            for (int c = 0; c < channels; ++c)
                kernels::maxpool2x2(
                    current.data() + static_cast<std::size_t>(c) * side * side,
                    side, side,
                    next.data() + static_cast<std::size_t>(c) * half * half);
            current.swap(next);
            side = half;
        }
    }
}

}  // namespace styleaudit
