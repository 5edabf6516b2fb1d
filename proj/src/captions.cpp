#include "styleaudit/captions.hpp"

#include <charconv>

#include "styleaudit/errors.hpp"
#include "styleaudit/rng.hpp"

namespace styleaudit {

namespace {

// Scene index of an existing artwork: the numeric suffix of its id when one
// exists (simulator ids end in _NNNN), else a hash-derived index.
int scene_of(const ArtworkRecord& record) {
    const auto pos = record.id.find_last_not_of("0123456789");
    if (pos != std::string::npos && pos + 1 < record.id.size()) {
        int value = 0;
        const char* first = record.id.data() + pos + 1;
        const char* last = record.id.data() + record.id.size();
        if (std::from_chars(first, last, value).ec == std::errc()) return value;
    }
    return static_cast<int>(Rng::fnv1a(record.id) % 100000);
}

}  // namespace

std::string TemplateCaptionProvider::describe(const ArtworkRecord& record) const {
    return request(record.artist_id, scene_of(record));
}

std::string TemplateCaptionProvider::request(const std::string& artist_id,
                                             int scene) const {
    return "artwork by " + artist_id + ", scene " + std::to_string(scene);
}

bool TemplateCaptionProvider::parse(const std::string& caption,
                                    std::string& artist_id, int& scene) {
    constexpr const char* kPrefix = "artwork by ";
    constexpr const char* kScene = ", scene ";
    if (caption.rfind(kPrefix, 0) != 0) return false;
    const auto scene_pos = caption.rfind(kScene);
    if (scene_pos == std::string::npos) return false;
    artist_id = caption.substr(std::string(kPrefix).size(),
                               scene_pos - std::string(kPrefix).size());
    const char* first = caption.data() + scene_pos + std::string(kScene).size();
    const char* last = caption.data() + caption.size();
    return std::from_chars(first, last, scene).ec == std::errc() &&
           !artist_id.empty();
}

std::unique_ptr<CaptionProvider> make_caption_provider(const std::string& id) {
    if (id == "template" || id == "template-v1")
        return std::make_unique<TemplateCaptionProvider>();
    throw InvalidConfig("unknown caption provider: " + id);
}

}  // namespace styleaudit
