#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "styleaudit/image.hpp"

namespace styleaudit {

// Describes one tappable feature stage of a backbone.
struct StageInfo {
    int index = 0;
    int channels = 0;
};

// Loader-facing description of a backbone: enough to plan taps and validate
// representations without touching the weights.
struct BackboneAdapter {
    std::string name;
    int input_side = 224;
    std::array<float, 3> norm_mean{0.5f, 0.5f, 0.5f};
    std::array<float, 3> norm_std{0.5f, 0.5f, 0.5f};
    std::vector<StageInfo> stages;  // ordered shallow -> deep
};

// VGG-style architecture: blocks of 3x3/pad-1 convolutions with ReLU, each
// block followed by 2x2 max pooling. A stage boundary is the post-activation
// output of the last convolution in a block (before pooling).
struct BackboneArch {
    std::string name;
    int input_side = 224;
    std::array<float, 3> norm_mean{0.5f, 0.5f, 0.5f};
    std::array<float, 3> norm_std{0.5f, 0.5f, 0.5f};
    std::vector<int> block_channels;  // output channels per block
    std::vector<int> block_convs;     // conv layers per block

    // Named presets: "vgg16" (the standard 13-conv layout for imported
    // classifier weights) and "vgg-micro" (a slim desk-scale default).
    static BackboneArch preset(const std::string& name);
};

class Backbone {
public:
    Backbone() = default;
    Backbone(Backbone&& other) noexcept
        : arch_(std::move(other.arch_)),
          blocks_(std::move(other.blocks_)),
          digest_(std::move(other.digest_)),
          forward_count_(other.forward_count_.load()) {}
    Backbone& operator=(Backbone&& other) noexcept {
        arch_ = std::move(other.arch_);
        blocks_ = std::move(other.blocks_);
        digest_ = std::move(other.digest_);
        forward_count_.store(other.forward_count_.load());
        return *this;
    }

    // Deterministic He-normal initialization; stands in for pretrained
    // weights when none are available.
    static Backbone random_init(const BackboneArch& arch, std::uint64_t seed);

    // Versioned binary weight file.
    static Backbone load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    const BackboneArch& arch() const { return arch_; }
    BackboneAdapter adapter() const;
    const std::string& weights_digest() const { return digest_; }

    // Runs the forward pass; on_stage is invoked once per block, shallow to
    // deep, with the post-activation feature map (channels x side x side,
    // channel-major).
    void forward(const ImageU8& image,
                 const std::function<void(int stage, const float* data,
                                          int channels, int side)>& on_stage) const;

    // Total forward passes executed by this instance; used to verify that
    // representation caching avoids recompute.
    std::uint64_t forward_count() const { return forward_count_.load(); }

private:
    struct ConvLayer {
        int in_ch = 0;
        int out_ch = 0;
        std::vector<float> weights;  // out_ch x in_ch x 3 x 3
        std::vector<float> bias;     // out_ch
    };

    void compute_digest();

    BackboneArch arch_;
    std::vector<std::vector<ConvLayer>> blocks_;
    std::string digest_;
    mutable std::atomic<std::uint64_t> forward_count_{0};
};

}  // namespace styleaudit
