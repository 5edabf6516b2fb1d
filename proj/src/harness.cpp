#include "styleaudit/harness.hpp"

#include <algorithm>
#include <fstream>

#include "styleaudit/errors.hpp"
#include "styleaudit/parallel.hpp"
#include "styleaudit/rng.hpp"

namespace styleaudit {

std::string overlap_name(OverlapMode mode) {
    switch (mode) {
        case OverlapMode::complete: return "complete";
        case OverlapMode::partial: return "partial";
        case OverlapMode::disjoint: return "disjoint";
    }
    return "unknown";
}

OverlapMode overlap_from_name(const std::string& name) {
    if (name == "complete") return OverlapMode::complete;
    if (name == "partial") return OverlapMode::partial;
    if (name == "disjoint") return OverlapMode::disjoint;
    throw InvalidConfig("unknown overlap mode: " + name);
}

std::string mechanism_choice_name(MechanismChoice choice) {
    switch (choice) {
        case MechanismChoice::threshold: return "threshold";
        case MechanismChoice::t_test: return "t_test";
        case MechanismChoice::both: return "both";
    }
    return "unknown";
}

MechanismChoice mechanism_choice_from_name(const std::string& name) {
    if (name == "threshold") return MechanismChoice::threshold;
    if (name == "t_test") return MechanismChoice::t_test;
    if (name == "both") return MechanismChoice::both;
    throw InvalidConfig("unknown mechanism: " + name);
}

std::string AblationFlags::describe() const {
    if (without_augmentation && without_distortion)
        return "without_augmentation+without_distortion";
    if (without_augmentation) return "without_augmentation";
    if (without_distortion) return "without_distortion";
    return "none";
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw InvalidConfig("experiment needs >= 1 seed");
    if (queries_per_artist < 1)
        throw InvalidConfig("queries_per_artist must be >= 1");
    if (pairs_per_audit < 1) throw InvalidConfig("pairs_per_audit must be >= 1");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw InvalidConfig("confidence must be in (0, 1)");
    if (!(split_ratio > 0.0 && split_ratio < 1.0))
        throw InvalidConfig("split_ratio must be in (0, 1)");
    augmentation.validate();
    training.validate();
}

std::vector<std::string> Benchmark::artist_ids() const {
    std::vector<std::string> ids;
    for (const auto& family : artists) ids.push_back(family.family_id);
    return ids;
}

namespace {

ArtworkSet load_listed_set(const nlohmann::json& listing,
                           const std::filesystem::path& root,
                           const std::string& artist_id, Role role,
                           int input_side, const std::string& id_stub) {
    ArtworkSet set;
    set.artist_id = artist_id;
    const auto& files = listing.at(artist_id);
    set.records.resize(files.size());
    parallel_for(files.size(), [&](std::size_t i) {
        const std::filesystem::path file = root / files[i].get<std::string>();
        ArtworkRecord& record = set.records[i];
        record.pixels =
            resize_bilinear(load_image(file), input_side, input_side);
        char idx[16];
        std::snprintf(idx, sizeof(idx), "%04zu", i);
        record.id = artist_id + "/" + id_stub + "_" + idx;
        record.artist_id = artist_id;
        record.role = role;
        record.source_path = file;
    });
    return set;
}

}  // namespace

Benchmark Benchmark::load(const std::filesystem::path& manifest_path,
                          int input_side) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest: " + manifest_path.string());
    nlohmann::json manifest;
    in >> manifest;
    if (manifest.value("format", "") != "styleaudit-benchmark")
        throw InvalidConfig(manifest_path.string() +
                            " is not a benchmark manifest");

    Benchmark bench;
    bench.config.seed = manifest.at("seed").get<std::int64_t>();
    bench.config.n_artists = manifest.at("n_artists").get<int>();
    bench.config.n_pirated = manifest.at("n_pirated").get<int>();
    bench.config.per_artist = manifest.at("per_artist").get<int>();
    bench.config.n_public = manifest.at("n_public").get<int>();
    bench.config.mimics_per_artist = manifest.at("mimics_per_artist").get<int>();
    bench.config.fidelity = manifest.at("fidelity").get<double>();
    bench.config.distortion_sigma = manifest.at("distortion_sigma").get<double>();
    bench.config.image_side = manifest.at("image_side").get<int>();

    bench.piracy.fidelity = bench.config.fidelity;
    bench.piracy.distortion_sigma = bench.config.distortion_sigma;
    bench.piracy.content_seed = manifest.at("content_seed").get<std::int64_t>();

    for (const auto& entry : manifest.at("families"))
        bench.artists.push_back(StyleFamily::from_json(entry));
    for (const auto& entry : manifest.at("public_families"))
        bench.publics.push_back(StyleFamily::from_json(entry));
    for (const auto& [artist, flag] : manifest.at("ground_truth").items()) {
        bench.ground_truth[artist] = flag.get<bool>();
        if (flag.get<bool>()) bench.piracy.fine_tuned_on.insert(artist);
    }
    for (const auto& family : bench.publics)
        bench.piracy.fine_tuned_on.insert(family.family_id);

    const std::filesystem::path root = manifest_path.parent_path();
    const auto& images = manifest.at("images");
    for (const auto& family : bench.artists) {
        bench.originals[family.family_id] =
            load_listed_set(images.at("originals"), root, family.family_id,
                            Role::target, input_side, "orig");
        bench.mimics[family.family_id] =
            load_listed_set(images.at("mimics"), root, family.family_id,
                            Role::generated, input_side, "mimic");
    }
    bench.public_pool.artist_id = kPublicArtistId;
    for (const auto& family : bench.publics) {
        ArtworkSet set =
            load_listed_set(images.at("public"), root, family.family_id,
                            Role::public_pool, input_side, "orig");
        bench.public_mimics[family.family_id] =
            load_listed_set(images.at("public_mimics"), root, family.family_id,
                            Role::generated, input_side, "mimic");
        for (auto& record : set.records)
            bench.public_pool.records.push_back(std::move(record));
    }
    return bench;
}

ImageU8 BenchmarkModel::generate(const std::string& caption) const {
    std::string artist;
    int scene = 0;
    if (!TemplateCaptionProvider::parse(caption, artist, scene))
        throw InvalidConfig("benchmark model cannot parse caption: " + caption);
    const ArtworkSet* set = nullptr;
    if (const auto it = benchmark_.mimics.find(artist);
        it != benchmark_.mimics.end())
        set = &it->second;
    else if (const auto pit = benchmark_.public_mimics.find(artist);
             pit != benchmark_.public_mimics.end())
        set = &pit->second;
    if (!set)
        throw InvalidConfig("benchmark has no outputs for artist: " + artist);
    if (scene < 0 || scene >= static_cast<int>(set->size()))
        throw InvalidConfig("benchmark has no scene " + std::to_string(scene) +
                            " for artist " + artist +
                            "; re-render with more mimics per artist");
    return set->records[scene].pixels;
}

LiveSimulatorModel::LiveSimulatorModel(std::vector<StyleFamily> families,
                                       PiracyConfig piracy, int side)
    : piracy_(std::move(piracy)), side_(side) {
    for (auto& family : families)
        families_.emplace(family.family_id, std::move(family));
}

ImageU8 LiveSimulatorModel::generate(const std::string& caption) const {
    std::string artist;
    int scene = 0;
    if (!TemplateCaptionProvider::parse(caption, artist, scene))
        throw InvalidConfig("simulator model cannot parse caption: " + caption);
    const auto it = families_.find(artist);
    if (it == families_.end())
        throw InvalidConfig("unknown artist in caption: " + artist);
    return render_mimic_scene(it->second, piracy_, scene, side_);
}

std::pair<ArtworkSet, ArtworkSet> apply_overlap_mode(const ArtworkSet& target,
                                                     OverlapMode mode,
                                                     std::int64_t seed) {
    if (target.size() < 4)
        throw TooFewRecords("overlap modes need >= 4 records, got " +
                            std::to_string(target.size()));
    if (mode == OverlapMode::complete) return {target, target};
    if (mode == OverlapMode::partial && target.size() % 2 != 0)
        throw InvalidConfig("partial overlap requires an even record count");

    std::vector<std::size_t> order(target.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng(static_cast<std::uint64_t>(seed)).shuffle(order);

    ArtworkSet fine_tune, audit;
    fine_tune.artist_id = audit.artist_id = target.artist_id;
    fine_tune.split_seed = audit.split_seed = seed;
    const std::size_t n = target.size();
    if (mode == OverlapMode::disjoint) {
        for (std::size_t i = 0; i < n; ++i)
            (i < n / 2 ? fine_tune : audit)
                .records.push_back(target.records[order[i]]);
        return {std::move(fine_tune), std::move(audit)};
    }
    // partial: both sides hold the shared half plus half of the remainder.
    const std::size_t shared = n / 2;
    const std::size_t rest_f = shared + (n - shared) / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& record = target.records[order[i]];
        if (i < shared) {
            fine_tune.records.push_back(record);
            audit.records.push_back(record);
        } else if (i < rest_f) {
            fine_tune.records.push_back(record);
        } else {
            audit.records.push_back(record);
        }
    }
    return {std::move(fine_tune), std::move(audit)};
}

namespace {

std::uint64_t audit_stream(std::int64_t seed, const std::string& artist_id) {
    return Rng(static_cast<std::uint64_t>(seed))
        .derive(Rng::fnv1a(artist_id))
        .next_u64();
}

const StyleRepresentation& rep_of(
    const std::map<std::string, StyleRepresentation>& reps,
    const std::string& id) {
    const auto it = reps.find(id);
    if (it == reps.end())
        throw Degenerate("missing representation for " + id);
    return it->second;
}

Matrix<float> matrix_of(const std::map<std::string, StyleRepresentation>& reps,
                        const std::vector<const ArtworkSet*>& sets) {
    std::vector<const StyleRepresentation*> rows;
    for (const ArtworkSet* set : sets)
        for (const auto& record : set->records)
            rows.push_back(&rep_of(reps, record.id));
    return to_matrix(rows);
}

}  // namespace

DiscriminatorBundle build_discriminator(const ArtworkSet& target,
                                        const ArtworkSet& public_pool,
                                        const SuspiciousModel& suspicious,
                                        const CaptionProvider& captions,
                                        const ExperimentConfig& cfg,
                                        std::int64_t seed,
                                        const AuditContext& ctx) {
    cfg.validate();
    if (target.empty()) throw TooFewRecords("audit target set is empty");
    if (!ctx.backbone) throw WeightsUnavailable("audit context has no backbone");

    const Rng base(audit_stream(seed, target.artist_id));
    auto sub_seed = [&](std::string_view label) {
        return static_cast<std::int64_t>(base.derive(label).next_u64() >> 1);
    };

    // Dataset preparation.
    const auto [fine_tune_set, audit_set] =
        apply_overlap_mode(target, cfg.overlap_mode, sub_seed("overlap"));
    (void)fine_tune_set;  // the adversary's half; not visible to the auditor

    const ArtworkSet negatives =
        sample_negatives(audit_set, public_pool, sub_seed("negatives"));
    const auto [pos_train, pos_val] =
        split_train_valid(audit_set, cfg.split_ratio, sub_seed("split-pos"));
    const auto [neg_train, neg_val] =
        split_train_valid(negatives, cfg.split_ratio, sub_seed("split-neg"));

    const bool use_augmentation = !cfg.ablations.without_augmentation &&
                                  cfg.training.use_augmentation;
    ArtworkSet augmented;
    augmented.artist_id = target.artist_id;
    if (use_augmentation) {
        AugmentationConfig aug_cfg = cfg.augmentation;
        aug_cfg.seed = sub_seed("augment");
        augmented = augment(pos_train, aug_cfg);
    }

    // Distortion pairs: public artworks and the model's renderings of their
    // captions.
    const bool use_distortion = !cfg.ablations.without_distortion &&
                                cfg.training.use_distortion_term;
    ArtworkSet pair_public, pair_generated;
    pair_public.artist_id = kPublicArtistId;
    pair_generated.artist_id = kPublicArtistId;
    if (use_distortion) {
        std::vector<std::size_t> pool_order(public_pool.size());
        for (std::size_t i = 0; i < pool_order.size(); ++i) pool_order[i] = i;
        Rng pair_rng(static_cast<std::uint64_t>(sub_seed("pairs")));
        pair_rng.shuffle(pool_order);
        const std::size_t count = std::min<std::size_t>(
            static_cast<std::size_t>(cfg.pairs_per_audit), pool_order.size());
        for (std::size_t i = 0; i < count; ++i)
            pair_public.records.push_back(public_pool.records[pool_order[i]]);
        pair_generated.records.resize(count);
        parallel_for(count, [&](std::size_t i) {
            const ArtworkRecord& source = pair_public.records[i];
            const std::string caption = captions.describe(source);
            ArtworkRecord generated;
            generated.pixels = suspicious.generate(caption);
            generated.id = "query/" + caption;
            generated.artist_id = source.artist_id;
            generated.role = Role::generated;
            generated.caption = caption;
            pair_generated.records[i] = std::move(generated);
        });
    }

    // Style representations for every set in one batch.
    std::vector<const ArtworkSet*> all_sets{&pos_train, &pos_val, &neg_train,
                                            &neg_val};
    if (use_augmentation) all_sets.push_back(&augmented);
    if (use_distortion) {
        all_sets.push_back(&pair_public);
        all_sets.push_back(&pair_generated);
    }
    const auto reps = extract_batch(*ctx.backbone, ctx.plan, all_sets, ctx.cache);

    // Discriminator construction.
    TrainingData data;
    if (use_augmentation)
        data.train_pos = matrix_of(reps, {&pos_train, &augmented});
    else
        data.train_pos = matrix_of(reps, {&pos_train});
    data.train_neg = matrix_of(reps, {&neg_train});
    data.val_pos = matrix_of(reps, {&pos_val});
    data.val_neg = matrix_of(reps, {&neg_val});
    if (use_distortion) {
        data.pair_public = matrix_of(reps, {&pair_public});
        data.pair_generated = matrix_of(reps, {&pair_generated});
    }

    TrainConfig train_cfg = cfg.training;
    train_cfg.seed = sub_seed("train");
    train_cfg.use_distortion_term = use_distortion;
    train_cfg.use_augmentation = use_augmentation;
    TrainResult trained =
        train(data, train_cfg, target.artist_id, ctx.plan.hash);

    DiscriminatorBundle bundle;
    bundle.discriminator = std::move(trained.discriminator);
    bundle.train_positive_count = static_cast<int>(data.train_pos.rows);
    bundle.train_negative_count = static_cast<int>(data.train_neg.rows);
    bundle.pair_count = static_cast<int>(data.pair_public.rows);
    bundle.best_epoch = trained.best_epoch;
    bundle.best_validation_loss = trained.best_validation_loss;
    return bundle;
}

AuditOutcome audit_queries(const DiscriminatorBundle& bundle,
                           const std::string& artist_id,
                           const SuspiciousModel& suspicious,
                           const CaptionProvider& captions,
                           const ExperimentConfig& cfg, std::int64_t seed,
                           const AuditContext& ctx) {
    if (!ctx.backbone) throw WeightsUnavailable("audit context has no backbone");

    // Audit queries carry the target artist's information in the caption.
    ArtworkSet queries;
    queries.artist_id = artist_id;
    queries.records.resize(static_cast<std::size_t>(cfg.queries_per_artist));
    parallel_for(queries.records.size(), [&](std::size_t q) {
        const std::string caption = captions.request(artist_id, static_cast<int>(q));
        ArtworkRecord record;
        record.pixels = suspicious.generate(caption);
        record.id = "query/" + caption;
        record.artist_id = artist_id;
        record.role = Role::generated;
        record.caption = caption;
        queries.records[q] = std::move(record);
    });
    const auto reps = extract_batch(*ctx.backbone, ctx.plan, {&queries}, ctx.cache);

    AuditOutcome outcome;
    outcome.artist_id = artist_id;
    outcome.seed = seed;
    outcome.train_positive_count = bundle.train_positive_count;
    outcome.train_negative_count = bundle.train_negative_count;
    outcome.pair_count = bundle.pair_count;
    outcome.best_epoch = bundle.best_epoch;
    outcome.best_validation_loss = bundle.best_validation_loss;

    outcome.sample.artist_id = artist_id;
    outcome.sample.source = ScoreSource::discriminator;
    for (const auto& record : queries.records)
        outcome.sample.scores.push_back(
            bundle.discriminator.score(rep_of(reps, record.id)));

    if (cfg.mechanism == MechanismChoice::threshold ||
        cfg.mechanism == MechanismChoice::both)
        outcome.threshold_decision =
            decide_threshold(outcome.sample, cfg.threshold);
    if (cfg.mechanism == MechanismChoice::t_test ||
        cfg.mechanism == MechanismChoice::both)
        outcome.ttest_decision = decide_ttest(outcome.sample, cfg.confidence);
    return outcome;
}

AuditOutcome run_audit(const ArtworkSet& target, const ArtworkSet& public_pool,
                       const SuspiciousModel& suspicious,
                       const CaptionProvider& captions,
                       const ExperimentConfig& cfg, std::int64_t seed,
                       const AuditContext& ctx) {
    const DiscriminatorBundle bundle = build_discriminator(
        target, public_pool, suspicious, captions, cfg, seed, ctx);
    return audit_queries(bundle, target.artist_id, suspicious, captions, cfg,
                         seed, ctx);
}

MetricValues MetricValues::from(std::vector<double> values) {
    MetricValues out;
    out.mean = mean_of(values);
    out.stddev = stddev_of(values);
    out.per_seed = std::move(values);
    return out;
}

namespace {

nlohmann::json metric_json(const MetricValues& values) {
    return nlohmann::json{{"per_seed", values.per_seed},
                          {"mean", values.mean},
                          {"stddev", values.stddev}};
}

MechanismReport build_mechanism_report(
    const std::vector<std::vector<BinaryOutcome>>& outcomes_per_seed,
    const std::vector<double>& auc_per_seed) {
    MechanismReport report;
    std::vector<double> acc, f1v, fprv;
    for (const auto& outcomes : outcomes_per_seed) {
        const ConfusionCounts c = confusion(outcomes);
        acc.push_back(accuracy(c));
        f1v.push_back(f1_score(c));
        fprv.push_back(false_positive_rate(c));
    }
    report.accuracy = MetricValues::from(acc);
    report.f1 = MetricValues::from(f1v);
    report.fpr = MetricValues::from(fprv);
    report.auc = MetricValues::from(auc_per_seed);
    return report;
}

}  // namespace

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json mech_json;
    for (const auto& [name, report] : mechanisms)
        mech_json[name] = nlohmann::json{{"accuracy", metric_json(report.accuracy)},
                                         {"auc", metric_json(report.auc)},
                                         {"f1", metric_json(report.f1)},
                                         {"fpr", metric_json(report.fpr)}};
    return nlohmann::json{
        {"n_artists", n_artists},
        {"seeds", seeds},
        {"queries_per_artist", queries_per_artist},
        {"overlap_mode", overlap_mode},
        {"ablation", ablation},
        {"auc_aggregation", "per-artist mean confidence scores"},
        {"mechanisms", std::move(mech_json)},
    };
}

ExperimentResult run_experiment(const Benchmark& benchmark,
                                const ExperimentConfig& cfg,
                                const AuditContext& ctx) {
    cfg.validate();
    const std::vector<std::string> artists = benchmark.artist_ids();
    if (artists.size() < 2)
        throw DegenerateGroundTruth("experiment needs >= 2 artists");
    int positives = 0;
    for (const auto& [artist, pirated] : benchmark.ground_truth)
        positives += pirated ? 1 : 0;
    if (positives == 0 ||
        positives == static_cast<int>(benchmark.ground_truth.size()))
        throw DegenerateGroundTruth(
            "ground truth needs >= 1 pirated and >= 1 clean artist");

    const BenchmarkModel model(benchmark);
    const auto captions = make_caption_provider(cfg.caption_provider);

    ExperimentResult result;
    std::vector<std::vector<BinaryOutcome>> thold_outcomes, ttest_outcomes;
    std::vector<double> auc_per_seed;

    for (const std::int64_t seed : cfg.seeds) {
        std::vector<AuditOutcome> seed_outcomes(artists.size());
        parallel_for(artists.size(), [&](std::size_t a) {
            const ArtworkSet& target = benchmark.originals.at(artists[a]);
            seed_outcomes[a] = run_audit(target, benchmark.public_pool, model,
                                         *captions, cfg, seed, ctx);
        });

        std::vector<BinaryOutcome> thold_seed, ttest_seed;
        std::vector<double> mean_scores;
        std::vector<bool> labels;
        for (std::size_t a = 0; a < artists.size(); ++a) {
            const AuditOutcome& outcome = seed_outcomes[a];
            const bool actual = benchmark.ground_truth.at(artists[a]);
            if (outcome.threshold_decision)
                thold_seed.push_back(
                    {actual, outcome.threshold_decision->verdict ==
                                 Verdict::infringing});
            if (outcome.ttest_decision)
                ttest_seed.push_back(
                    {actual,
                     outcome.ttest_decision->verdict == Verdict::infringing});
            mean_scores.push_back(mean_of(outcome.sample.scores));
            labels.push_back(actual);
            result.outcomes.push_back(std::move(seed_outcomes[a]));
        }
        if (!thold_seed.empty()) thold_outcomes.push_back(std::move(thold_seed));
        if (!ttest_seed.empty()) ttest_outcomes.push_back(std::move(ttest_seed));
        auc_per_seed.push_back(auc(mean_scores, labels));
    }

    MetricsReport& report = result.report;
    report.n_artists = static_cast<int>(artists.size());
    report.seeds = cfg.seeds;
    report.queries_per_artist = cfg.queries_per_artist;
    report.overlap_mode = overlap_name(cfg.overlap_mode);
    report.ablation = cfg.ablations.describe();
    if (!thold_outcomes.empty())
        report.mechanisms["threshold"] =
            build_mechanism_report(thold_outcomes, auc_per_seed);
    if (!ttest_outcomes.empty())
        report.mechanisms["t_test"] =
            build_mechanism_report(ttest_outcomes, auc_per_seed);
    return result;
}

AblationResult run_ablation(const Benchmark& benchmark,
                            const ExperimentConfig& cfg,
                            const AuditContext& ctx) {
    ExperimentConfig baseline_cfg = cfg;
    baseline_cfg.ablations = AblationFlags{};
    AblationResult result;
    result.ablation_name = cfg.ablations.describe();
    result.baseline = run_experiment(benchmark, baseline_cfg, ctx);
    result.ablation = run_experiment(benchmark, cfg, ctx);
    return result;
}

void write_decisions_csv(const std::vector<AuditOutcome>& outcomes,
                         const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << AuditDecision::csv_header() << "\n";
    for (const auto& outcome : outcomes) {
        if (outcome.threshold_decision)
            out << outcome.threshold_decision->csv_row() << "\n";
        if (outcome.ttest_decision)
            out << outcome.ttest_decision->csv_row() << "\n";
    }
}

}  // namespace styleaudit
