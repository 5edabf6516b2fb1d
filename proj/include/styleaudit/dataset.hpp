#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "styleaudit/image.hpp"

namespace styleaudit {

enum class Role { public_pool, target, generated, augmented };

std::string role_name(Role role);
Role role_from_name(const std::string& name);

struct ArtworkRecord {
    std::string id;
    std::string artist_id;
    Role role = Role::target;
    ImageU8 pixels;
    std::filesystem::path source_path;
    std::optional<std::string> caption;
    std::string parent_id;  // set for role == augmented
};

// Reserved artist id for mixed public pools.
inline constexpr const char* kPublicArtistId = "public";

struct ArtworkSet {
    std::string artist_id;
    std::vector<ArtworkRecord> records;
    std::int64_t split_seed = 0;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

struct AugmentationConfig {
    std::pair<double, double> crop_scale{0.6, 1.0};  // area fraction range
    double flip_probability = 0.5;
    int cutout_count = 2;
    double cutout_size_fraction = 0.2;
    double gaussian_sigma = 0.05;    // intensity units on [0, 1]
    double impulse_fraction = 0.02;
    // brightness, contrast, saturation, hue
    std::array<double, 4> jitter_ranges{0.2, 0.2, 0.2, 0.05};
    int multiplicity = 10;
    std::int64_t seed = 0;

    void validate() const;  // throws InvalidConfig
};

// Loads every decodable PNG/JPEG under path (non-recursive), in filename
// lexicographic order, resized square to resize_side. A corrupt file is
// skipped with a note on stderr as long as at least one other file decodes.
ArtworkSet ingest_directory(const std::filesystem::path& path,
                            const std::string& artist_id, Role role,
                            int resize_side);

// Expands a set to multiplicity * |set| augmented records. Every output gets
// a random crop and a flip draw; cutout, Gaussian noise, impulse noise and
// color jitter each fire independently with probability 1/2. Deterministic
// in (set order, cfg.seed).
ArtworkSet augment(const ArtworkSet& set, const AugmentationConfig& cfg);

// Applies one sampled augmentation pipeline; exposed for tests.
ImageU8 augment_one(const ImageU8& image, const AugmentationConfig& cfg,
                    class Rng& rng);

// Seeded shuffle split; first part receives floor(ratio * n) records.
std::pair<ArtworkSet, ArtworkSet> split_train_valid(const ArtworkSet& set,
                                                    double ratio,
                                                    std::int64_t seed);

// Draws |target| records uniformly without replacement from pool, never
// returning the target artist's own work.
ArtworkSet sample_negatives(const ArtworkSet& target, const ArtworkSet& pool,
                            std::int64_t seed);

// Manifest of a set: id, artist, role, parent, source path, resize applied.
void write_set_manifest(const ArtworkSet& set,
                        const std::filesystem::path& path, int resize_side);

}  // namespace styleaudit
