#include "styleaudit/config.hpp"

#include <fstream>
#include <set>

#include "styleaudit/errors.hpp"

namespace styleaudit {
namespace {

void reject_unknown(const nlohmann::json& section, const std::string& name,
                    const std::set<std::string>& known) {
    for (const auto& [key, value] : section.items())
        if (!known.count(key))
            throw InvalidConfig("unknown key \"" + key + "\" in section \"" +
                                name + "\"");
}

template <typename T>
void read_if(const nlohmann::json& section, const char* key, T& out) {
    if (section.contains(key)) out = section.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::with_derived_paths() const {
    RunConfig out = *this;
    if (out.benchmark_dir.empty()) out.benchmark_dir = out.out_dir / "benchmark";
    if (out.weights_path.empty()) out.weights_path = out.out_dir / "weights.sabw";
    if (out.cache_path.empty()) out.cache_path = out.out_dir / "reps.sarc";
    if (out.discriminator_dir.empty())
        out.discriminator_dir = out.out_dir / "discriminators";
    return out;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidConfig(path.string() + ": " + e.what());
    }

    reject_unknown(j, "(top level)",
                   {"paths", "extractor", "augmentation", "training",
                    "simulator", "experiment"});

    RunConfig cfg;
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        reject_unknown(p, "paths",
                       {"out_dir", "benchmark_dir", "weights", "cache",
                        "discriminator_dir"});
        if (p.contains("out_dir")) cfg.out_dir = p.at("out_dir").get<std::string>();
        if (p.contains("benchmark_dir"))
            cfg.benchmark_dir = p.at("benchmark_dir").get<std::string>();
        if (p.contains("weights"))
            cfg.weights_path = p.at("weights").get<std::string>();
        if (p.contains("cache")) cfg.cache_path = p.at("cache").get<std::string>();
        if (p.contains("discriminator_dir"))
            cfg.discriminator_dir = p.at("discriminator_dir").get<std::string>();
    }
    if (j.contains("extractor")) {
        const auto& e = j.at("extractor");
        reject_unknown(e, "extractor", {"arch", "weights_init_seed"});
        read_if(e, "arch", cfg.arch);
        if (e.contains("weights_init_seed")) {
            if (e.at("weights_init_seed").is_null())
                cfg.weights_init_seed.reset();
            else
                cfg.weights_init_seed =
                    e.at("weights_init_seed").get<std::int64_t>();
        }
    }
    if (j.contains("augmentation")) {
        const auto& a = j.at("augmentation");
        reject_unknown(a, "augmentation",
                       {"crop_scale", "flip_probability", "cutout_count",
                        "cutout_size_fraction", "gaussian_sigma",
                        "impulse_fraction", "jitter_ranges", "multiplicity"});
        AugmentationConfig& aug = cfg.experiment.augmentation;
        if (a.contains("crop_scale")) {
            const auto& cs = a.at("crop_scale");
            if (!cs.is_array() || cs.size() != 2)
                throw InvalidConfig("crop_scale must be [lo, hi]");
            aug.crop_scale = {cs.at(0).get<double>(), cs.at(1).get<double>()};
        }
        read_if(a, "flip_probability", aug.flip_probability);
        read_if(a, "cutout_count", aug.cutout_count);
        read_if(a, "cutout_size_fraction", aug.cutout_size_fraction);
        read_if(a, "gaussian_sigma", aug.gaussian_sigma);
        read_if(a, "impulse_fraction", aug.impulse_fraction);
        if (a.contains("jitter_ranges")) {
            const auto& jr = a.at("jitter_ranges");
            if (!jr.is_array() || jr.size() != 4)
                throw InvalidConfig(
                    "jitter_ranges must be [brightness, contrast, saturation, "
                    "hue]");
            for (int i = 0; i < 4; ++i)
                aug.jitter_ranges[i] = jr.at(i).get<double>();
        }
        read_if(a, "multiplicity", aug.multiplicity);
    }
    if (j.contains("training")) {
        const auto& t = j.at("training");
        reject_unknown(t, "training",
                       {"learning_rate", "max_epochs", "patience", "batch_size",
                        "hidden_sizes"});
        TrainConfig& train = cfg.experiment.training;
        read_if(t, "learning_rate", train.learning_rate);
        read_if(t, "max_epochs", train.max_epochs);
        read_if(t, "patience", train.patience);
        read_if(t, "batch_size", train.batch_size);
        read_if(t, "hidden_sizes", train.hidden_sizes);
    }
    if (j.contains("simulator")) {
        const auto& s = j.at("simulator");
        reject_unknown(s, "simulator",
                       {"n_artists", "n_pirated", "per_artist", "n_public",
                        "mimics_per_artist", "fidelity", "distortion_sigma",
                        "seed", "image_side"});
        read_if(s, "n_artists", cfg.simulator.n_artists);
        read_if(s, "n_pirated", cfg.simulator.n_pirated);
        read_if(s, "per_artist", cfg.simulator.per_artist);
        read_if(s, "n_public", cfg.simulator.n_public);
        read_if(s, "mimics_per_artist", cfg.simulator.mimics_per_artist);
        read_if(s, "fidelity", cfg.simulator.fidelity);
        read_if(s, "distortion_sigma", cfg.simulator.distortion_sigma);
        read_if(s, "seed", cfg.simulator.seed);
        read_if(s, "image_side", cfg.simulator.image_side);
    }
    if (j.contains("experiment")) {
        const auto& e = j.at("experiment");
        reject_unknown(e, "experiment",
                       {"mechanism", "seeds", "queries_per_artist",
                        "overlap_mode", "ablations", "caption_provider",
                        "pairs_per_audit", "confidence", "threshold",
                        "split_ratio", "jobs"});
        if (e.contains("mechanism"))
            cfg.experiment.mechanism = mechanism_choice_from_name(
                e.at("mechanism").get<std::string>());
        read_if(e, "seeds", cfg.experiment.seeds);
        read_if(e, "queries_per_artist", cfg.experiment.queries_per_artist);
        if (e.contains("overlap_mode"))
            cfg.experiment.overlap_mode =
                overlap_from_name(e.at("overlap_mode").get<std::string>());
        if (e.contains("ablations")) {
            const auto& ab = e.at("ablations");
            reject_unknown(ab, "experiment.ablations",
                           {"without_augmentation", "without_distortion"});
            read_if(ab, "without_augmentation",
                    cfg.experiment.ablations.without_augmentation);
            read_if(ab, "without_distortion",
                    cfg.experiment.ablations.without_distortion);
        }
        read_if(e, "caption_provider", cfg.experiment.caption_provider);
        read_if(e, "pairs_per_audit", cfg.experiment.pairs_per_audit);
        read_if(e, "confidence", cfg.experiment.confidence);
        read_if(e, "threshold", cfg.experiment.threshold);
        read_if(e, "split_ratio", cfg.experiment.split_ratio);
        read_if(e, "jobs", cfg.jobs);
    }
    cfg = cfg.with_derived_paths();
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    simulator.validate();
    experiment.validate();
    if (jobs < 0) throw InvalidConfig("jobs must be >= 0");
    BackboneArch::preset(arch);  // throws on unknown arch
}

nlohmann::json RunConfig::to_json() const {
    const AugmentationConfig& aug = experiment.augmentation;
    const TrainConfig& train = experiment.training;
    return nlohmann::json{
        {"paths",
         {{"out_dir", out_dir.string()},
          {"benchmark_dir", benchmark_dir.string()},
          {"weights", weights_path.string()},
          {"cache", cache_path.string()},
          {"discriminator_dir", discriminator_dir.string()}}},
        {"extractor",
         {{"arch", arch},
          {"weights_init_seed",
           weights_init_seed ? nlohmann::json(*weights_init_seed)
                             : nlohmann::json(nullptr)}}},
        {"augmentation",
         {{"crop_scale", {aug.crop_scale.first, aug.crop_scale.second}},
          {"flip_probability", aug.flip_probability},
          {"cutout_count", aug.cutout_count},
          {"cutout_size_fraction", aug.cutout_size_fraction},
          {"gaussian_sigma", aug.gaussian_sigma},
          {"impulse_fraction", aug.impulse_fraction},
          {"jitter_ranges", aug.jitter_ranges},
          {"multiplicity", aug.multiplicity}}},
        {"training",
         {{"learning_rate", train.learning_rate},
          {"max_epochs", train.max_epochs},
          {"patience", train.patience},
          {"batch_size", train.batch_size},
          {"hidden_sizes", train.hidden_sizes}}},
        {"simulator",
         {{"n_artists", simulator.n_artists},
          {"n_pirated", simulator.n_pirated},
          {"per_artist", simulator.per_artist},
          {"n_public", simulator.n_public},
          {"mimics_per_artist", simulator.mimics_per_artist},
          {"fidelity", simulator.fidelity},
          {"distortion_sigma", simulator.distortion_sigma},
          {"seed", simulator.seed},
          {"image_side", simulator.image_side}}},
        {"experiment",
         {{"mechanism", mechanism_choice_name(experiment.mechanism)},
          {"seeds", experiment.seeds},
          {"queries_per_artist", experiment.queries_per_artist},
          {"overlap_mode", overlap_name(experiment.overlap_mode)},
          {"ablations",
           {{"without_augmentation", experiment.ablations.without_augmentation},
            {"without_distortion", experiment.ablations.without_distortion}}},
          {"caption_provider", experiment.caption_provider},
          {"pairs_per_audit", experiment.pairs_per_audit},
          {"confidence", experiment.confidence},
          {"threshold", experiment.threshold},
          {"split_ratio", experiment.split_ratio},
          {"jobs", jobs}}},
    };
}

}  // namespace styleaudit
