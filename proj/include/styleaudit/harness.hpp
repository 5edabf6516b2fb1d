#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "styleaudit/captions.hpp"
#include "styleaudit/decision.hpp"
#include "styleaudit/discriminator.hpp"
#include "styleaudit/extractor.hpp"
#include "styleaudit/metrics.hpp"
#include "styleaudit/simulator.hpp"

namespace styleaudit {

enum class OverlapMode { complete, partial, disjoint };
enum class MechanismChoice { threshold, t_test, both };

std::string overlap_name(OverlapMode mode);
OverlapMode overlap_from_name(const std::string& name);
std::string mechanism_choice_name(MechanismChoice choice);
MechanismChoice mechanism_choice_from_name(const std::string& name);

struct AblationFlags {
    bool without_augmentation = false;
    bool without_distortion = false;

    bool any() const { return without_augmentation || without_distortion; }
    std::string describe() const;
};

struct ExperimentConfig {
    MechanismChoice mechanism = MechanismChoice::both;
    std::vector<std::int64_t> seeds{1, 2, 3, 4, 5};
    int queries_per_artist = 20;
    OverlapMode overlap_mode = OverlapMode::complete;
    AblationFlags ablations;
    std::string caption_provider = "template";
    int pairs_per_audit = 20;
    double confidence = 0.95;
    double threshold = 0.0;
    double split_ratio = 0.8;
    AugmentationConfig augmentation;  // per-audit seeds are derived
    TrainConfig training;

    void validate() const;
};

// A benchmark loaded back from its on-disk manifest.
struct Benchmark {
    BenchmarkConfig config;
    std::vector<StyleFamily> artists;
    std::vector<StyleFamily> publics;
    std::map<std::string, bool> ground_truth;        // audited artists only
    std::map<std::string, ArtworkSet> originals;     // role = target
    ArtworkSet public_pool;                          // role = public
    std::map<std::string, ArtworkSet> mimics;        // role = generated
    std::map<std::string, ArtworkSet> public_mimics; // role = generated
    PiracyConfig piracy;

    std::vector<std::string> artist_ids() const;

    static Benchmark load(const std::filesystem::path& manifest_path,
                          int input_side);
};

// Suspicious model backed by a benchmark's pre-rendered outputs.
class BenchmarkModel final : public SuspiciousModel {
public:
    explicit BenchmarkModel(const Benchmark& benchmark)
        : benchmark_(benchmark) {}
    ImageU8 generate(const std::string& caption) const override;

private:
    const Benchmark& benchmark_;
};

// Suspicious model that renders on demand from the family roster; produces
// the same images as the pre-rendered benchmark for the same captions.
class LiveSimulatorModel final : public SuspiciousModel {
public:
    LiveSimulatorModel(std::vector<StyleFamily> families, PiracyConfig piracy,
                       int side);
    ImageU8 generate(const std::string& caption) const override;

private:
    std::map<std::string, StyleFamily> families_;
    PiracyConfig piracy_;
    int side_;
};

// Shared expensive state across audits.
struct AuditContext {
    const Backbone* backbone = nullptr;
    TapPlan plan;
    RepCache* cache = nullptr;  // optional
};

struct AuditOutcome {
    ScoreSample sample;
    std::optional<AuditDecision> threshold_decision;
    std::optional<AuditDecision> ttest_decision;
    std::string artist_id;
    std::int64_t seed = 0;
    int train_positive_count = 0;
    int train_negative_count = 0;
    int pair_count = 0;
    int best_epoch = -1;
    double best_validation_loss = 0.0;
};

// Relation between the artworks the adversary fine-tuned on and those the
// auditor holds. complete: both are the full set. partial: the two sets
// share exactly |set|/2 records. disjoint: an equal-size partition.
std::pair<ArtworkSet, ArtworkSet> apply_overlap_mode(const ArtworkSet& target,
                                                     OverlapMode mode,
                                                     std::int64_t seed);

struct DiscriminatorBundle {
    Discriminator discriminator;
    int train_positive_count = 0;
    int train_negative_count = 0;
    int pair_count = 0;
    int best_epoch = -1;
    double best_validation_loss = 0.0;
};

// Dataset preparation + discriminator construction: overlap filtering,
// negative sampling, 8:2 split, augmentation of the training originals,
// distortion pairs from public captions, then training.
DiscriminatorBundle build_discriminator(const ArtworkSet& target,
                                        const ArtworkSet& public_pool,
                                        const SuspiciousModel& suspicious,
                                        const CaptionProvider& captions,
                                        const ExperimentConfig& cfg,
                                        std::int64_t seed,
                                        const AuditContext& ctx);

// Auditing process: query the model with captions carrying the target
// artist's information, score, decide.
AuditOutcome audit_queries(const DiscriminatorBundle& bundle,
                           const std::string& artist_id,
                           const SuspiciousModel& suspicious,
                           const CaptionProvider& captions,
                           const ExperimentConfig& cfg, std::int64_t seed,
                           const AuditContext& ctx);

// Full audit of one artist: dataset preparation (augment + distortion
// pairs), discriminator construction, audit queries, decision.
AuditOutcome run_audit(const ArtworkSet& target, const ArtworkSet& public_pool,
                       const SuspiciousModel& suspicious,
                       const CaptionProvider& captions,
                       const ExperimentConfig& cfg, std::int64_t seed,
                       const AuditContext& ctx);

struct MetricValues {
    std::vector<double> per_seed;
    double mean = 0.0;
    double stddev = 0.0;

    static MetricValues from(std::vector<double> values);
};

struct MechanismReport {
    MetricValues accuracy;
    MetricValues auc;
    MetricValues f1;
    MetricValues fpr;
};

struct MetricsReport {
    std::map<std::string, MechanismReport> mechanisms;
    int n_artists = 0;
    std::vector<std::int64_t> seeds;
    int queries_per_artist = 0;
    std::string overlap_mode;
    std::string ablation;

    nlohmann::json to_json() const;
};

struct ExperimentResult {
    MetricsReport report;
    // Outcomes in (seed, artist) order.
    std::vector<AuditOutcome> outcomes;
};

ExperimentResult run_experiment(const Benchmark& benchmark,
                                const ExperimentConfig& cfg,
                                const AuditContext& ctx);

struct AblationResult {
    ExperimentResult baseline;
    ExperimentResult ablation;
    std::string ablation_name;
};

// Baseline (flags cleared) and the flagged variant on identical seeds and
// data. With no flags set the two reports are identical.
AblationResult run_ablation(const Benchmark& benchmark,
                            const ExperimentConfig& cfg,
                            const AuditContext& ctx);

void write_decisions_csv(const std::vector<AuditOutcome>& outcomes,
                         const std::filesystem::path& path);

}  // namespace styleaudit
