#include "styleaudit/extractor.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include "styleaudit/digest.hpp"
#include "styleaudit/errors.hpp"
#include "styleaudit/kernels.hpp"
#include "styleaudit/parallel.hpp"

namespace styleaudit {

std::string TapPlan::compute_hash(const std::string& adapter_name,
                                  const std::vector<int>& indices,
                                  const std::vector<int>& channels) {
    Digest digest;
    digest.update(adapter_name);
    for (const int i : indices) digest.update_value(i);
    for (const int c : channels) digest.update_value(c);
    return digest.hex();
}

namespace {

TapPlan finish_plan(const BackboneAdapter& adapter, std::vector<int> indices) {
    TapPlan plan;
    plan.tap_indices = std::move(indices);
    int sum = 0;
    for (const int idx : plan.tap_indices) {
        if (idx < 0 || idx >= static_cast<int>(adapter.stages.size()))
            throw TooFewStages("tap index " + std::to_string(idx) +
                               " outside adapter stages");
        plan.tap_channels.push_back(adapter.stages[idx].channels);
        sum += adapter.stages[idx].channels;
    }
    plan.expected_dim = 2 * sum;
    plan.hash =
        TapPlan::compute_hash(adapter.name, plan.tap_indices, plan.tap_channels);
    return plan;
}

}  // namespace

TapPlan plan_taps(const BackboneAdapter& adapter) {
    const int stages = static_cast<int>(adapter.stages.size());
    if (stages < 4)
        throw TooFewStages("need at least 4 stages, adapter has " +
                           std::to_string(stages));
    std::vector<int> indices;
    for (int k = 0; k < 4; ++k) {
        int idx = static_cast<int>(
            std::llround(double(k) * double(stages - 1) / 3.0));
        if (!indices.empty() && idx <= indices.back())
            idx = indices.back() + 1;  // nudge forward on collision
        indices.push_back(idx);
    }
    return finish_plan(adapter, std::move(indices));
}

TapPlan plan_from_indices(const BackboneAdapter& adapter,
                          const std::vector<int>& indices) {
    if (indices.size() != 4)
        throw InvalidConfig("a tap plan selects exactly 4 stages");
    return finish_plan(adapter, indices);
}

std::vector<float> pool_stage(const float* data, int channels, int h, int w) {
    if (channels < 1 || h < 1 || w < 1)
        throw DimMismatch("pool_stage requires a nonempty C x h x w map");
    std::vector<float> out(static_cast<std::size_t>(channels) * 2);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int c = 0; c < channels; ++c) {
        const auto [mx, mean] = kernels::max_mean(data + c * plane, plane);
        out[c] = mx;
        out[channels + c] = mean;
    }
    return out;
}

StyleRepresentation extract(const Backbone& backbone, const TapPlan& plan,
                            const ArtworkRecord& record) {
    StyleRepresentation rep;
    rep.artwork_id = record.id;
    rep.tap_plan_hash = plan.hash;
    rep.vector.reserve(plan.expected_dim);

    std::size_t next_tap = 0;
    backbone.forward(record.pixels, [&](int stage, const float* data,
                                        int channels, int side) {
        if (next_tap >= plan.tap_indices.size() ||
            plan.tap_indices[next_tap] != stage)
            return;
        const std::vector<float> pooled = pool_stage(data, channels, side, side);
        rep.vector.insert(rep.vector.end(), pooled.begin(), pooled.end());
        ++next_tap;
    });

    if (static_cast<int>(rep.vector.size()) != plan.expected_dim)
        throw DimMismatch("extract produced " +
                          std::to_string(rep.vector.size()) +
                          " values, plan expects " +
                          std::to_string(plan.expected_dim));
    for (const float v : rep.vector)
        if (!std::isfinite(v))
            throw Degenerate("non-finite value in style representation of " +
                             record.id);
    return rep;
}

namespace {

constexpr std::uint32_t kCacheMagic = 0x53415243;  // "SARC"
constexpr std::uint32_t kCacheVersion = 1;

std::string cache_key(const std::string& artwork_id,
                      const std::string& plan_hash,
                      const std::string& weights_digest) {
    return artwork_id + '\0' + plan_hash + '\0' + weights_digest;
}

}  // namespace

RepCache::RepCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;
    std::uint32_t magic = 0, version = 0;
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (!in || magic != kCacheMagic || version != kCacheVersion)
        throw IoError("not a representation cache: " + path_.string());
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint32_t key_len = 0, dim = 0;
        in.read(reinterpret_cast<char*>(&key_len), sizeof(key_len));
        std::string key(key_len, '\0');
        in.read(key.data(), key_len);
        in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
        Entry entry;
        entry.persistent = true;
        entry.vector.resize(dim);
        in.read(reinterpret_cast<char*>(entry.vector.data()),
                static_cast<std::streamsize>(dim * sizeof(float)));
        if (!in) throw IoError("truncated representation cache: " + path_.string());
        entries_.emplace(std::move(key), std::move(entry));
    }
}

bool RepCache::lookup(const std::string& artwork_id,
                      const std::string& plan_hash,
                      const std::string& weights_digest,
                      StyleRepresentation& out) const {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(cache_key(artwork_id, plan_hash, weights_digest));
    if (it == entries_.end()) return false;
    out.vector = it->second.vector;
    out.artwork_id = artwork_id;
    out.tap_plan_hash = plan_hash;
    return true;
}

void RepCache::insert(const std::string& weights_digest,
                      const StyleRepresentation& rep, bool persistent) {
    std::lock_guard lock(mutex_);
    Entry entry{rep.vector, persistent};
    entries_.insert_or_assign(
        cache_key(rep.artwork_id, rep.tap_plan_hash, weights_digest),
        std::move(entry));
}

void RepCache::save() const {
    if (path_.empty()) return;
    std::lock_guard lock(mutex_);
    const std::filesystem::path tmp = path_.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write cache: " + tmp.string());
        std::uint64_t count = 0;
        for (const auto& [key, entry] : entries_)
            if (entry.persistent) ++count;
        out.write(reinterpret_cast<const char*>(&kCacheMagic), sizeof(kCacheMagic));
        out.write(reinterpret_cast<const char*>(&kCacheVersion),
                  sizeof(kCacheVersion));
        out.write(reinterpret_cast<const char*>(&count), sizeof(count));
        for (const auto& [key, entry] : entries_) {
            if (!entry.persistent) continue;
            const auto key_len = static_cast<std::uint32_t>(key.size());
            const auto dim = static_cast<std::uint32_t>(entry.vector.size());
            out.write(reinterpret_cast<const char*>(&key_len), sizeof(key_len));
            out.write(key.data(), key_len);
            out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
            out.write(reinterpret_cast<const char*>(entry.vector.data()),
                      static_cast<std::streamsize>(dim * sizeof(float)));
        }
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path_);
}

std::size_t RepCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::map<std::string, StyleRepresentation> extract_batch(
    const Backbone& backbone, const TapPlan& plan,
    const std::vector<const ArtworkSet*>& sets, RepCache* cache) {
    struct Task {
        const ArtworkRecord* record;
        bool persistent;
    };
    std::map<std::string, StyleRepresentation> out;
    std::vector<Task> misses;
    std::unordered_set<std::string> scheduled;
    const std::string& digest = backbone.weights_digest();

    for (const ArtworkSet* set : sets) {
        for (const ArtworkRecord& record : set->records) {
            if (out.count(record.id) || scheduled.count(record.id)) continue;
            StyleRepresentation cached;
            if (cache && cache->lookup(record.id, plan.hash, digest, cached)) {
                out.emplace(record.id, std::move(cached));
                continue;
            }
            scheduled.insert(record.id);
            misses.push_back({&record, record.role != Role::augmented});
        }
    }

    std::vector<StyleRepresentation> computed(misses.size());
    parallel_for(misses.size(), [&](std::size_t i) {
        computed[i] = extract(backbone, plan, *misses[i].record);
    });
    for (std::size_t i = 0; i < misses.size(); ++i) {
        if (cache) cache->insert(digest, computed[i], misses[i].persistent);
        out.emplace(computed[i].artwork_id, std::move(computed[i]));
    }
    return out;
}

}  // namespace styleaudit
