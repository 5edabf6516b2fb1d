#include "styleaudit/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "styleaudit/errors.hpp"
#include "styleaudit/image.hpp"
#include "styleaudit/parallel.hpp"
#include "styleaudit/rng.hpp"

namespace styleaudit {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void StyleFamily::validate() const {
    if (family_id.empty()) throw InvalidConfig("family_id must be nonempty");
    if (palette.size() < 3) throw InvalidConfig("palette needs >= 3 colors");
    if (strokes.length_mean <= 0.0 || strokes.width_mean <= 0.0)
        throw InvalidConfig("stroke means must be positive");
    if (strokes.orientation_concentration < 0.0)
        throw InvalidConfig("orientation concentration must be >= 0");
}

void PiracyConfig::validate() const {
    if (fidelity < 0.0 || fidelity > 1.0)
        throw InvalidConfig("fidelity must be in [0, 1]");
    if (distortion_sigma < 0.0)
        throw InvalidConfig("distortion_sigma must be >= 0");
}

nlohmann::json StyleFamily::to_json() const {
    nlohmann::json palette_json = nlohmann::json::array();
    for (const auto& c : palette) palette_json.push_back({c[0], c[1], c[2]});
    return nlohmann::json{
        {"family_id", family_id},
        {"palette", std::move(palette_json)},
        {"strokes",
         {{"orientation_concentration", strokes.orientation_concentration},
          {"length_mean", strokes.length_mean},
          {"length_std", strokes.length_std},
          {"width_mean", strokes.width_mean},
          {"width_std", strokes.width_std}}},
        {"texture_seed", texture_seed},
        {"background_tone",
         {background_tone[0], background_tone[1], background_tone[2]}},
    };
}

StyleFamily StyleFamily::from_json(const nlohmann::json& j) {
    StyleFamily family;
    family.family_id = j.at("family_id").get<std::string>();
    for (const auto& c : j.at("palette"))
        family.palette.push_back({c.at(0).get<double>(), c.at(1).get<double>(),
                                  c.at(2).get<double>()});
    const auto& s = j.at("strokes");
    family.strokes.orientation_concentration =
        s.at("orientation_concentration").get<double>();
    family.strokes.length_mean = s.at("length_mean").get<double>();
    family.strokes.length_std = s.at("length_std").get<double>();
    family.strokes.width_mean = s.at("width_mean").get<double>();
    family.strokes.width_std = s.at("width_std").get<double>();
    family.texture_seed = j.at("texture_seed").get<std::int64_t>();
    const auto& bg = j.at("background_tone");
    family.background_tone = {bg.at(0).get<double>(), bg.at(1).get<double>(),
                              bg.at(2).get<double>()};
    family.validate();
    return family;
}

const StyleFamily& generic_family() {
    static const StyleFamily family = [] {
        StyleFamily f;
        f.family_id = "generic";
        f.palette = {{0.25, 0.25, 0.25},
                     {0.45, 0.45, 0.45},
                     {0.65, 0.65, 0.65},
                     {0.85, 0.85, 0.85}};
        f.strokes = {1.5, 22.0, 7.0, 4.5, 1.2};
        f.texture_seed = 971237;
        f.background_tone = {0.94, 0.94, 0.94};
        return f;
    }();
    return family;
}

StyleFamily mimic_style(const StyleFamily& family, const PiracyConfig& cfg) {
    cfg.validate();
    const double sigma = cfg.distortion_sigma * (1.0 - cfg.fidelity);
    Rng drift_rng =
        Rng(static_cast<std::uint64_t>(family.texture_seed)).derive("model-distortion");

    StyleFamily out = family;
    for (auto& color : out.palette)
        for (double& channel : color)
            channel = std::clamp(channel + sigma * drift_rng.normal(), 0.0, 1.0);
    for (double& channel : out.background_tone)
        channel = std::clamp(channel + sigma * drift_rng.normal(), 0.0, 1.0);
    // Positive parameters drift multiplicatively so the limit point
    // sigma -> 0 reproduces the family exactly.
    auto drift_pos = [&](double v) { return v * std::exp(sigma * drift_rng.normal()); };
    out.strokes.orientation_concentration =
        drift_pos(out.strokes.orientation_concentration);
    out.strokes.length_mean = drift_pos(out.strokes.length_mean);
    out.strokes.length_std = drift_pos(out.strokes.length_std);
    out.strokes.width_mean = drift_pos(out.strokes.width_mean);
    out.strokes.width_std = drift_pos(out.strokes.width_std);
    return out;
}

namespace {

struct CanvasF {
    int side;
    std::vector<float> rgb;  // side*side*3 interleaved

    explicit CanvasF(int s, const std::array<double, 3>& tone)
        : side(s), rgb(static_cast<std::size_t>(s) * s * 3) {
        for (std::size_t i = 0; i < rgb.size(); i += 3) {
            rgb[i] = static_cast<float>(tone[0]);
            rgb[i + 1] = static_cast<float>(tone[1]);
            rgb[i + 2] = static_cast<float>(tone[2]);
        }
    }
};

void draw_capsule(CanvasF& canvas, double cx, double cy, double theta,
                  double length, double width, const std::array<double, 3>& color) {
    const double dx = std::cos(theta), dy = std::sin(theta);
    const double hl = length * 0.5, hw = std::max(0.5, width * 0.5);
    const double ax = cx - dx * hl, ay = cy - dy * hl;
    const double bx = cx + dx * hl, by = cy + dy * hl;
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(ax, bx) - hw)));
    const int x1 = std::min(canvas.side - 1,
                            static_cast<int>(std::ceil(std::max(ax, bx) + hw)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(ay, by) - hw)));
    const int y1 = std::min(canvas.side - 1,
                            static_cast<int>(std::ceil(std::max(ay, by) + hw)));
    const double abx = bx - ax, aby = by - ay;
    const double ab2 = abx * abx + aby * aby;
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double px = x + 0.5 - ax, py = y + 0.5 - ay;
            double t = ab2 > 0.0 ? (px * abx + py * aby) / ab2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            const double qx = px - t * abx, qy = py - t * aby;
            const double dist = std::sqrt(qx * qx + qy * qy);
            if (dist > hw) continue;
            // Soft edge over the outer half-pixel.
            const double alpha = std::min(1.0, (hw - dist) * 2.0) * 0.92;
            float* px_out =
                canvas.rgb.data() +
                (static_cast<std::size_t>(y) * canvas.side + x) * 3;
            for (int c = 0; c < 3; ++c)
                px_out[c] = static_cast<float>(px_out[c] * (1.0 - alpha) +
                                               color[c] * alpha);
        }
}

}  // namespace

ImageU8 render_canvas(const StyleFamily& style, Rng& content_rng, int side) {
    style.validate();
    CanvasF canvas(side, style.background_tone);

    // Orientation mean is part of the style texture.
    Rng texture_rng =
        Rng(static_cast<std::uint64_t>(style.texture_seed)).derive("orientation");
    const double orient_mean = texture_rng.uniform(0.0, kPi);
    const double kappa = style.strokes.orientation_concentration;
    const double orient_spread = kappa < 0.05 ? -1.0 : 1.0 / std::sqrt(kappa);

    const int stroke_count =
        std::max(50, static_cast<int>(std::lround(300.0 * side * side /
                                                  (224.0 * 224.0))));
    const auto k = style.palette.size();
    for (int s = 0; s < stroke_count; ++s) {
        const double cx = content_rng.uniform(0.0, side);
        const double cy = content_rng.uniform(0.0, side);
        const double theta = orient_spread < 0.0
                                 ? content_rng.uniform(0.0, kPi)
                                 : orient_mean +
                                       content_rng.normal(0.0, orient_spread);
        const double length = std::clamp(
            content_rng.normal(style.strokes.length_mean, style.strokes.length_std),
            2.0, double(side));
        const double width = std::clamp(
            content_rng.normal(style.strokes.width_mean, style.strokes.width_std),
            1.0, 24.0);
        auto color = style.palette[content_rng.uniform_int(k)];
        const double value_jitter = content_rng.uniform(-0.05, 0.05);
        for (double& channel : color)
            channel = std::clamp(channel + value_jitter, 0.0, 1.0);
        draw_capsule(canvas, cx, cy, theta, length, width, color);
    }

    ImageU8 out(side, side);
    for (std::size_t i = 0; i < canvas.rgb.size(); ++i)
        out.pixels[i] = to_u8(canvas.rgb[i]);
    return out;
}

ArtworkSet render_original(const StyleFamily& family, int count,
                           std::int64_t seed, int side) {
    if (count < 1) throw InvalidConfig("render_original: count must be >= 1");
    family.validate();
    ArtworkSet set;
    set.artist_id = family.family_id;
    set.records.resize(count);
    const Rng base = Rng(static_cast<std::uint64_t>(seed))
                         .derive("originals")
                         .derive(Rng::fnv1a(family.family_id));
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
        Rng content = base.derive(i);
        ArtworkRecord& record = set.records[i];
        record.pixels = render_canvas(family, content, side);
        char idx[16];
        std::snprintf(idx, sizeof(idx), "%04zu", i);
        record.id = family.family_id + "/orig_" + idx;
        record.artist_id = family.family_id;
        record.role = Role::target;
    });
    return set;
}

ImageU8 render_mimic_scene(const StyleFamily& family, const PiracyConfig& cfg,
                           int scene, int side) {
    const bool known = cfg.fine_tuned_on.count(family.family_id) > 0;
    const StyleFamily style = known ? mimic_style(family, cfg) : generic_family();
    Rng content = Rng(static_cast<std::uint64_t>(cfg.content_seed))
                      .derive("mimic")
                      .derive(Rng::fnv1a(family.family_id),
                              static_cast<std::uint64_t>(scene));
    return render_canvas(style, content, side);
}

ArtworkSet render_mimic(const StyleFamily& family, const PiracyConfig& cfg,
                        int count, int side) {
    if (count < 1) throw InvalidConfig("render_mimic: count must be >= 1");
    family.validate();
    cfg.validate();
    ArtworkSet set;
    set.artist_id = family.family_id;
    set.records.resize(count);
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
        ArtworkRecord& record = set.records[i];
        record.pixels = render_mimic_scene(family, cfg, static_cast<int>(i), side);
        char idx[16];
        std::snprintf(idx, sizeof(idx), "%04zu", i);
        record.id = family.family_id + "/mimic_" + idx;
        record.artist_id = family.family_id;
        record.role = Role::generated;
    });
    return set;
}

std::vector<StyleFamily> make_families(int count, std::int64_t seed,
                                       const std::string& id_prefix) {
    std::vector<StyleFamily> families;
    const Rng base(static_cast<std::uint64_t>(seed));
    for (int i = 0; i < count; ++i) {
        Rng rng = base.derive("family").derive(static_cast<std::uint64_t>(i));
        StyleFamily family;
        char idx[16];
        std::snprintf(idx, sizeof(idx), "%02d", i);
        family.family_id = id_prefix + "_" + idx;

        // Stratified hues keep the roster's palettes distinct.
        const double hue = (i + 0.25 + 0.5 * rng.uniform()) / double(count);
        const int colors = 4;
        for (int c = 0; c < colors; ++c) {
            const double h = hue + rng.uniform(-0.06, 0.06);
            const double s = rng.uniform(0.55, 0.95);
            const double v = 0.35 + 0.55 * (c + rng.uniform(0.0, 0.8)) / colors;
            const auto rgb = hsv_to_rgb(static_cast<float>(h - std::floor(h)),
                                        static_cast<float>(s),
                                        static_cast<float>(std::min(v, 1.0)));
            family.palette.push_back({rgb[0], rgb[1], rgb[2]});
        }
        const auto bg = hsv_to_rgb(static_cast<float>(hue), 0.10f,
                                   static_cast<float>(rng.uniform(0.82, 0.95)));
        family.background_tone = {bg[0], bg[1], bg[2]};

        family.strokes.orientation_concentration =
            rng.bernoulli(0.25) ? 0.0 : rng.uniform(1.0, 24.0);
        family.strokes.length_mean = rng.uniform(12.0, 42.0);
        family.strokes.length_std = family.strokes.length_mean * 0.3;
        family.strokes.width_mean = rng.uniform(2.5, 9.0);
        family.strokes.width_std = family.strokes.width_mean * 0.25;
        family.texture_seed = static_cast<std::int64_t>(
            base.derive("texture")
                .derive(static_cast<std::uint64_t>(i), Rng::fnv1a(id_prefix))
                .next_u64() >>
            1);
        families.push_back(std::move(family));
    }
    return families;
}

void BenchmarkConfig::validate() const {
    if (n_artists < 1) throw InvalidCounts("n_artists must be >= 1");
    if (n_pirated < 1 || n_pirated > n_artists)
        throw InvalidCounts("need 1 <= n_pirated <= n_artists, got " +
                            std::to_string(n_pirated) + " of " +
                            std::to_string(n_artists));
    if (per_artist < 10) throw InvalidCounts("per_artist must be >= 10");
    if (n_public < 1) throw InvalidCounts("n_public must be >= 1");
    if (mimics_per_artist < 1)
        throw InvalidCounts("mimics_per_artist must be >= 1");
    if (image_side < 64) throw InvalidConfig("image_side must be >= 64");
    if (fidelity < 0.0 || fidelity > 1.0)
        throw InvalidConfig("fidelity must be in [0, 1]");
    if (distortion_sigma < 0.0)
        throw InvalidConfig("distortion_sigma must be >= 0");
}

std::filesystem::path build_benchmark(const BenchmarkConfig& cfg,
                                      const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    cfg.validate();

    const auto artists = make_families(cfg.n_artists, cfg.seed, "artist");
    const auto publics =
        make_families(cfg.n_public,
                      static_cast<std::int64_t>(
                          Rng(static_cast<std::uint64_t>(cfg.seed))
                              .derive("public-roster")
                              .next_u64() >> 1),
                      "public");

    std::vector<std::size_t> order(artists.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng(static_cast<std::uint64_t>(cfg.seed)).derive("pirate-split").shuffle(order);
    std::set<std::string> pirated;
    for (int i = 0; i < cfg.n_pirated; ++i)
        pirated.insert(artists[order[i]].family_id);

    PiracyConfig piracy;
    piracy.fidelity = cfg.fidelity;
    piracy.distortion_sigma = cfg.distortion_sigma;
    piracy.content_seed = static_cast<std::int64_t>(
        Rng(static_cast<std::uint64_t>(cfg.seed)).derive("model-content").next_u64() >> 1);
    piracy.fine_tuned_on = pirated;
    // The model renders world-famous styles from pretraining regardless of
    // the fine-tuning split.
    for (const auto& family : publics) piracy.fine_tuned_on.insert(family.family_id);

    fs::create_directories(out_dir);
    auto save_set = [&](const ArtworkSet& set, const fs::path& dir,
                        nlohmann::json& listing) {
        fs::create_directories(dir);
        nlohmann::json files = nlohmann::json::array();
        for (std::size_t i = 0; i < set.records.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "img_%04zu.png", i);
            const fs::path file = dir / name;
            save_png(set.records[i].pixels, file);
            files.push_back(fs::relative(file, out_dir).generic_string());
        }
        listing[set.artist_id] = std::move(files);
    };

    nlohmann::json originals_json, publics_json, mimics_json, public_mimics_json;
    for (const auto& family : artists) {
        save_set(render_original(family, cfg.per_artist, cfg.seed, cfg.image_side),
                 out_dir / "originals" / family.family_id, originals_json);
        save_set(render_mimic(family, piracy, cfg.mimics_per_artist, cfg.image_side),
                 out_dir / "mimics" / family.family_id, mimics_json);
    }
    for (const auto& family : publics) {
        save_set(render_original(family, cfg.per_artist, cfg.seed, cfg.image_side),
                 out_dir / "public" / family.family_id, publics_json);
        save_set(render_mimic(family, piracy, cfg.per_artist, cfg.image_side),
                 out_dir / "public_mimics" / family.family_id,
                 public_mimics_json);
    }

    nlohmann::json families_json = nlohmann::json::array();
    nlohmann::json ground_truth;
    for (const auto& family : artists) {
        nlohmann::json entry = family.to_json();
        entry["pirated"] = pirated.count(family.family_id) > 0;
        families_json.push_back(std::move(entry));
        ground_truth[family.family_id] = pirated.count(family.family_id) > 0;
    }
    nlohmann::json public_families_json = nlohmann::json::array();
    for (const auto& family : publics)
        public_families_json.push_back(family.to_json());

    nlohmann::json manifest{
        {"format", "styleaudit-benchmark"},
        {"version", 1},
        {"seed", cfg.seed},
        {"n_artists", cfg.n_artists},
        {"n_pirated", cfg.n_pirated},
        {"per_artist", cfg.per_artist},
        {"n_public", cfg.n_public},
        {"mimics_per_artist", cfg.mimics_per_artist},
        {"fidelity", cfg.fidelity},
        {"distortion_sigma", cfg.distortion_sigma},
        {"image_side", cfg.image_side},
        {"content_seed", piracy.content_seed},
        {"families", std::move(families_json)},
        {"public_families", std::move(public_families_json)},
        {"ground_truth", std::move(ground_truth)},
        {"images",
         {{"originals", std::move(originals_json)},
          {"public", std::move(publics_json)},
          {"mimics", std::move(mimics_json)},
          {"public_mimics", std::move(public_mimics_json)}}},
    };

    const fs::path manifest_path = out_dir / "manifest.json";
    std::ofstream out(manifest_path);
    if (!out) throw IoError("cannot write " + manifest_path.string());
    out << manifest.dump(2) << "\n";
    return manifest_path;
}

}  // namespace styleaudit
