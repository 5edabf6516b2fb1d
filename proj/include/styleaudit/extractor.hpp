#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "styleaudit/backbone.hpp"
#include "styleaudit/dataset.hpp"

namespace styleaudit {

struct TapPlan {
    std::vector<int> tap_indices;   // exactly 4, strictly increasing
    std::vector<int> tap_channels;  // channel count per tapped stage
    int expected_dim = 0;           // 2 * sum(tap_channels)
    std::string hash;               // order-sensitive digest of the plan

    static std::string compute_hash(const std::string& adapter_name,
                                    const std::vector<int>& indices,
                                    const std::vector<int>& channels);
};

struct StyleRepresentation {
    std::vector<float> vector;
    std::string artwork_id;
    std::string tap_plan_hash;
};

// Picks 4 stage indices evenly spaced over the adapter's stage list:
// round(k * (S - 1) / 3) for k = 0..3, deduplicated by nudging forward.
TapPlan plan_taps(const BackboneAdapter& adapter);

// Builds a plan from explicit stage indices (alternative layer choices are
// testable without code changes; the hash keeps them from aliasing).
TapPlan plan_from_indices(const BackboneAdapter& adapter,
                          const std::vector<int>& indices);

// [max_1..max_C, mean_1..mean_C] over a C x h x w channel-major map.
std::vector<float> pool_stage(const float* data, int channels, int h, int w);

// Forward pass + per-stage pooling + shallow-to-deep concatenation.
StyleRepresentation extract(const Backbone& backbone, const TapPlan& plan,
                            const ArtworkRecord& record);

// Persistent representation cache keyed by
// (artwork_id, tap_plan_hash, weights_digest).
class RepCache {
public:
    RepCache() = default;
    explicit RepCache(std::filesystem::path path);  // loads if present

    bool lookup(const std::string& artwork_id, const std::string& plan_hash,
                const std::string& weights_digest, StyleRepresentation& out) const;
    void insert(const std::string& weights_digest,
                const StyleRepresentation& rep, bool persistent);

    // Atomically rewrites the sidecar with all persistent entries.
    void save() const;

    std::size_t size() const;

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    struct Entry {
        std::vector<float> vector;
        bool persistent = false;
    };
    std::map<std::string, Entry> entries_;
};

// Per-record extract over several sets, parallel over images, backed by an
// optional cache. Records with role `augmented` are cached in memory only;
// everything else is persisted. Map iteration is id-ordered.
std::map<std::string, StyleRepresentation> extract_batch(
    const Backbone& backbone, const TapPlan& plan,
    const std::vector<const ArtworkSet*>& sets, RepCache* cache = nullptr);

}  // namespace styleaudit
