#pragma once

#include <memory>
#include <string>

#include "styleaudit/dataset.hpp"

namespace styleaudit {

// Produces text prompts from artworks; stands in for an image captioning
// model. Must be deterministic per record.
class CaptionProvider {
public:
    virtual ~CaptionProvider() = default;
    virtual std::string id() const = 0;

    // Caption describing an existing artwork (used for distortion pairs).
    virtual std::string describe(const ArtworkRecord& record) const = 0;

    // Caption requesting a new artwork in the style of artist_id
    // (used for audit queries; carries the artist's information).
    virtual std::string request(const std::string& artist_id, int scene) const = 0;
};

// Deterministic template captions: "artwork by <artist>, scene <k>".
class TemplateCaptionProvider final : public CaptionProvider {
public:
    std::string id() const override { return "template-v1"; }
    std::string describe(const ArtworkRecord& record) const override;
    std::string request(const std::string& artist_id, int scene) const override;

    // Parses a template caption back into (artist_id, scene).
    static bool parse(const std::string& caption, std::string& artist_id,
                      int& scene);
};

std::unique_ptr<CaptionProvider> make_caption_provider(const std::string& id);

// Black-box text-to-image model under audit: caption in, image out.
class SuspiciousModel {
public:
    virtual ~SuspiciousModel() = default;
    virtual ImageU8 generate(const std::string& caption) const = 0;
};

}  // namespace styleaudit
