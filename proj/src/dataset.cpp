#include "styleaudit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <unordered_set>

#include <json.hpp>

#include "styleaudit/errors.hpp"
#include "styleaudit/rng.hpp"

namespace styleaudit {

std::string role_name(Role role) {
    switch (role) {
        case Role::public_pool: return "public";
        case Role::target: return "target";
        case Role::generated: return "generated";
        case Role::augmented: return "augmented";
    }
    return "unknown";
}

Role role_from_name(const std::string& name) {
    if (name == "public") return Role::public_pool;
    if (name == "target") return Role::target;
    if (name == "generated") return Role::generated;
    if (name == "augmented") return Role::augmented;
    throw InvalidConfig("unknown role: " + name);
}

void AugmentationConfig::validate() const {
    if (!(crop_scale.first > 0.0 && crop_scale.first <= 1.0 &&
          crop_scale.second > 0.0 && crop_scale.second <= 1.0 &&
          crop_scale.first <= crop_scale.second))
        throw InvalidConfig("crop_scale must be a pair in (0, 1], lo <= hi");
    if (flip_probability < 0.0 || flip_probability > 1.0)
        throw InvalidConfig("flip_probability must be in [0, 1]");
    if (cutout_count < 0) throw InvalidConfig("cutout_count must be >= 0");
    if (cutout_count > 0 &&
        (cutout_size_fraction <= 0.0 || cutout_size_fraction >= 1.0))
        throw InvalidConfig("cutout_size_fraction must be in (0, 1)");
    if (gaussian_sigma < 0.0) throw InvalidConfig("gaussian_sigma must be >= 0");
    if (impulse_fraction < 0.0 || impulse_fraction > 1.0)
        throw InvalidConfig("impulse_fraction must be in [0, 1]");
    for (const double r : jitter_ranges)
        if (r < 0.0) throw InvalidConfig("jitter ranges must be >= 0");
    if (multiplicity < 1) throw InvalidConfig("multiplicity must be >= 1");
}

ArtworkSet ingest_directory(const std::filesystem::path& path,
                            const std::string& artist_id, Role role,
                            int resize_side) {
    namespace fs = std::filesystem;
    if (!fs::exists(path) || !fs::is_directory(path))
        throw EmptyDirectory(path.string() + " is not a readable directory");

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
        if (entry.is_regular_file() && has_image_extension(entry.path()))
            files.push_back(entry.path());
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) {
                  return a.filename().string() < b.filename().string();
              });

    ArtworkSet set;
    set.artist_id = artist_id;
    std::vector<std::string> failures;
    for (const auto& file : files) {
        try {
            ArtworkRecord record;
            record.pixels = resize_bilinear(load_image(file), resize_side,
                                            resize_side);
            record.id = artist_id + "/" + file.filename().string();
            record.artist_id = artist_id;
            record.role = role;
            record.source_path = file;
            set.records.push_back(std::move(record));
        } catch (const DecodeFailure& e) {
            failures.push_back(e.what());
        }
    }
    if (set.records.empty()) {
        if (!failures.empty())
            throw DecodeFailure("no image in " + path.string() +
                                " could be decoded; first failure: " +
                                failures.front());
        throw EmptyDirectory("no PNG/JPEG files in " + path.string());
    }
    for (const auto& failure : failures)
        std::cerr << "[ingest] skipped corrupt file: " << failure << "\n";
    return set;
}

namespace {

void random_crop(ImageU8& image, const AugmentationConfig& cfg, Rng& rng) {
    const int side = std::min(image.width, image.height);
    const double area = rng.uniform(cfg.crop_scale.first, cfg.crop_scale.second);
    const int crop = std::max(1, static_cast<int>(std::lround(side * std::sqrt(area))));
    if (crop >= image.width && crop >= image.height) return;
    const int max_x = image.width - crop;
    const int max_y = image.height - crop;
    const int x0 = max_x > 0 ? static_cast<int>(rng.uniform_int(max_x + 1)) : 0;
    const int y0 = max_y > 0 ? static_cast<int>(rng.uniform_int(max_y + 1)) : 0;
    ImageU8 cropped(crop, crop);
    for (int y = 0; y < crop; ++y)
        std::copy_n(image.at(x0, y0 + y), static_cast<std::size_t>(crop) * 3,
                    cropped.at(0, y));
    image = resize_bilinear(cropped, image.width, image.height);
}

void horizontal_flip(ImageU8& image) {
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width / 2; ++x) {
            std::uint8_t* a = image.at(x, y);
            std::uint8_t* b = image.at(image.width - 1 - x, y);
            for (int c = 0; c < 3; ++c) std::swap(a[c], b[c]);
        }
}

void cutout(ImageU8& image, const AugmentationConfig& cfg, Rng& rng) {
    const int count = 1 + static_cast<int>(rng.uniform_int(cfg.cutout_count));
    const int patch = std::max(
        1, static_cast<int>(std::lround(cfg.cutout_size_fraction *
                                        std::min(image.width, image.height))));
    for (int i = 0; i < count; ++i) {
        const int x0 = static_cast<int>(rng.uniform_int(image.width));
        const int y0 = static_cast<int>(rng.uniform_int(image.height));
        const int x1 = std::min(image.width, x0 + patch);
        const int y1 = std::min(image.height, y0 + patch);
        for (int y = y0; y < y1; ++y)
            std::fill(image.at(x0, y), image.at(x0, y) + (x1 - x0) * 3,
                      std::uint8_t{128});
    }
}

void gaussian_noise(ImageU8& image, double sigma, Rng& rng) {
    for (auto& px : image.pixels) {
        const double v = px / 255.0 + rng.normal(0.0, sigma);
        px = to_u8(static_cast<float>(v));
    }
}

void impulse_noise(ImageU8& image, double fraction, Rng& rng) {
    const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
    const auto hits = static_cast<std::size_t>(std::llround(fraction * n));
    for (std::size_t i = 0; i < hits; ++i) {
        const std::size_t p = rng.uniform_int(n);
        const std::uint8_t v = rng.bernoulli(0.5) ? 255 : 0;
        std::uint8_t* px = image.pixels.data() + p * 3;
        px[0] = px[1] = px[2] = v;
    }
}

void color_jitter(ImageU8& image, const std::array<double, 4>& ranges,
                  Rng& rng) {
    const float brightness =
        static_cast<float>(1.0 + rng.uniform(-ranges[0], ranges[0]));
    const float contrast =
        static_cast<float>(1.0 + rng.uniform(-ranges[1], ranges[1]));
    const float saturation =
        static_cast<float>(1.0 + rng.uniform(-ranges[2], ranges[2]));
    const float hue_shift = static_cast<float>(rng.uniform(-ranges[3], ranges[3]));

    // Mean luma for the contrast pivot.
    double luma_sum = 0.0;
    const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* px = image.pixels.data() + i * 3;
        luma_sum += 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
    }
    const float mean_luma = static_cast<float>(luma_sum / (255.0 * n));

    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t* px = image.pixels.data() + i * 3;
        float r = px[0] / 255.0f, g = px[1] / 255.0f, b = px[2] / 255.0f;
        r *= brightness; g *= brightness; b *= brightness;
        r = (r - mean_luma) * contrast + mean_luma;
        g = (g - mean_luma) * contrast + mean_luma;
        b = (b - mean_luma) * contrast + mean_luma;
        const float gray = 0.299f * r + 0.587f * g + 0.114f * b;
        r = gray + (r - gray) * saturation;
        g = gray + (g - gray) * saturation;
        b = gray + (b - gray) * saturation;
        auto hsv = rgb_to_hsv(std::clamp(r, 0.0f, 1.0f), std::clamp(g, 0.0f, 1.0f),
                              std::clamp(b, 0.0f, 1.0f));
        auto rgb = hsv_to_rgb(hsv[0] + hue_shift, hsv[1], hsv[2]);
        px[0] = to_u8(rgb[0]);
        px[1] = to_u8(rgb[1]);
        px[2] = to_u8(rgb[2]);
    }
}

}  // namespace

ImageU8 augment_one(const ImageU8& image, const AugmentationConfig& cfg,
                    Rng& rng) {
    ImageU8 out = image;
    random_crop(out, cfg, rng);
    if (rng.bernoulli(cfg.flip_probability)) horizontal_flip(out);
    if (cfg.cutout_count > 0 && rng.bernoulli(0.5)) cutout(out, cfg, rng);
    if (cfg.gaussian_sigma > 0.0 && rng.bernoulli(0.5))
        gaussian_noise(out, cfg.gaussian_sigma, rng);
    if (cfg.impulse_fraction > 0.0 && rng.bernoulli(0.5))
        impulse_noise(out, cfg.impulse_fraction, rng);
    const bool any_jitter =
        cfg.jitter_ranges[0] > 0.0 || cfg.jitter_ranges[1] > 0.0 ||
        cfg.jitter_ranges[2] > 0.0 || cfg.jitter_ranges[3] > 0.0;
    if (any_jitter && rng.bernoulli(0.5)) color_jitter(out, cfg.jitter_ranges, rng);
    return out;
}

ArtworkSet augment(const ArtworkSet& set, const AugmentationConfig& cfg) {
    cfg.validate();
    if (set.empty()) throw InvalidConfig("augment: input set is empty");

    const Rng base(static_cast<std::uint64_t>(cfg.seed));
    ArtworkSet out;
    out.artist_id = set.artist_id;
    out.split_seed = set.split_seed;
    out.records.reserve(set.size() * cfg.multiplicity);
    for (std::size_t i = 0; i < set.records.size(); ++i) {
        const ArtworkRecord& src = set.records[i];
        for (int copy = 0; copy < cfg.multiplicity; ++copy) {
            Rng rng = base.derive(i, static_cast<std::uint64_t>(copy));
            ArtworkRecord record;
            record.pixels = augment_one(src.pixels, cfg, rng);
            record.id = src.id + "#aug" + std::to_string(copy) + "s" +
                        std::to_string(cfg.seed);
            record.artist_id = src.artist_id;
            record.role = Role::augmented;
            record.parent_id = src.id;
            record.source_path = src.source_path;
            out.records.push_back(std::move(record));
        }
    }
    return out;
}

std::pair<ArtworkSet, ArtworkSet> split_train_valid(const ArtworkSet& set,
                                                    double ratio,
                                                    std::int64_t seed) {
    if (set.size() < 5)
        throw TooFewRecords("split requires at least 5 records, got " +
                            std::to_string(set.size()));
    if (ratio <= 0.0 || ratio >= 1.0)
        throw InvalidConfig("split ratio must be in (0, 1)");

    std::vector<std::size_t> order(set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(static_cast<std::uint64_t>(seed));
    rng.shuffle(order);

    const auto first_n =
        static_cast<std::size_t>(std::floor(ratio * double(set.size())));
    ArtworkSet first, second;
    first.artist_id = second.artist_id = set.artist_id;
    first.split_seed = second.split_seed = seed;
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto& dst = i < first_n ? first : second;
        dst.records.push_back(set.records[order[i]]);
    }
    return {std::move(first), std::move(second)};
}

ArtworkSet sample_negatives(const ArtworkSet& target, const ArtworkSet& pool,
                            std::int64_t seed) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < pool.records.size(); ++i)
        if (pool.records[i].artist_id != target.artist_id) eligible.push_back(i);
    if (eligible.size() < target.size())
        throw InsufficientPool(
            "need " + std::to_string(target.size()) + " negatives, pool has " +
            std::to_string(eligible.size()) + " eligible records");

    Rng rng(static_cast<std::uint64_t>(seed));
    rng.shuffle(eligible);
    ArtworkSet out;
    out.artist_id = target.artist_id;
    out.split_seed = seed;
    for (std::size_t i = 0; i < target.size(); ++i)
        out.records.push_back(pool.records[eligible[i]]);
    return out;
}

void write_set_manifest(const ArtworkSet& set,
                        const std::filesystem::path& path, int resize_side) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& record : set.records) {
        nlohmann::json row{
            {"id", record.id},
            {"artist_id", record.artist_id},
            {"role", role_name(record.role)},
            {"source_path", record.source_path.string()},
            {"resize_side", resize_side},
        };
        if (!record.parent_id.empty()) row["parent_id"] = record.parent_id;
        records.push_back(std::move(row));
    }
    nlohmann::json manifest{{"artist_id", set.artist_id},
                            {"split_seed", set.split_seed},
                            {"records", std::move(records)}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest: " + path.string());
    out << manifest.dump(2) << "\n";
}

}  // namespace styleaudit
