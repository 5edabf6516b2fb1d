#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "styleaudit/dataset.hpp"

namespace styleaudit {

struct StrokeParams {
    double orientation_concentration = 4.0;  // 0 => isotropic
    double length_mean = 24.0;               // pixels
    double length_std = 8.0;
    double width_mean = 5.0;
    double width_std = 1.5;
};

// Procedural painting style: a palette, stroke statistics and a canvas tone.
// Stands in for a human artist's style at desk scale.
struct StyleFamily {
    std::string family_id;
    std::vector<std::array<double, 3>> palette;  // K >= 3 RGB anchors in [0,1]
    StrokeParams strokes;
    std::int64_t texture_seed = 0;
    std::array<double, 3> background_tone{0.92, 0.92, 0.92};

    void validate() const;  // throws InvalidConfig

    nlohmann::json to_json() const;
    static StyleFamily from_json(const nlohmann::json& j);
};

// The simulated suspicious model: which styles it can render and how
// faithfully. Styles not in fine_tuned_on come out in a fixed generic style.
struct PiracyConfig {
    double fidelity = 0.9;          // in [0, 1]; 1 = faithful copy
    double distortion_sigma = 0.1;  // >= 0
    std::int64_t content_seed = 0;
    std::set<std::string> fine_tuned_on;

    void validate() const;
};

// The fixed generic style used for queries about unknown artists.
const StyleFamily& generic_family();

// Style parameters the model actually renders for a family: the family's
// own parameters shifted by a deterministic Gaussian drift of scale
// distortion_sigma * (1 - fidelity). The drift direction depends only on the
// family's texture seed, never on content.
StyleFamily mimic_style(const StyleFamily& family, const PiracyConfig& cfg);

// Renders one canvas. Stroke placement is drawn from content_rng; the style
// never depends on it.
ImageU8 render_canvas(const StyleFamily& style, class Rng& content_rng,
                      int side = 224);

// count originals of a family (role=target); content varies per image,
// style fixed. Deterministic in (family, seed).
ArtworkSet render_original(const StyleFamily& family, int count,
                           std::int64_t seed, int side = 224);

// count generated images for queries about `family` (role=generated).
// Stroke placements are disjoint from any render_original stream.
ArtworkSet render_mimic(const StyleFamily& family, const PiracyConfig& cfg,
                        int count, int side = 224);

// Single model response for scene index `scene`; render_mimic(family, cfg,
// n) equals render_mimic_scene for scenes 0..n-1, so a disk-backed benchmark
// and a live simulator answer queries identically.
ImageU8 render_mimic_scene(const StyleFamily& family, const PiracyConfig& cfg,
                           int scene, int side = 224);

struct BenchmarkConfig {
    int n_artists = 10;
    int n_pirated = 5;
    int per_artist = 20;
    int n_public = 10;           // public style families (negative pool)
    int mimics_per_artist = 20;  // pre-rendered audit queries
    double fidelity = 0.9;
    double distortion_sigma = 0.1;
    std::int64_t seed = 42;
    int image_side = 224;

    void validate() const;  // throws InvalidCounts / InvalidConfig
};

// Materializes a full benchmark on disk:
//   originals/<artist>/*.png        audited artists' artworks
//   public/<family>/*.png           public-pool artworks
//   mimics/<artist>/*.png           model outputs for audit queries
//   public_mimics/<family>/*.png    model outputs for public captions
//   manifest.json                   families, ground truth, seeds, config
// Returns the manifest path.
std::filesystem::path build_benchmark(const BenchmarkConfig& cfg,
                                      const std::filesystem::path& out_dir);

// Generates the family roster for a benchmark without touching disk;
// exposed for tests.
std::vector<StyleFamily> make_families(int count, std::int64_t seed,
                                       const std::string& id_prefix);

}  // namespace styleaudit
