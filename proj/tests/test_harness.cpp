#include <cmath>
#include <set>

#include <doctest.h>

#include "styleaudit/errors.hpp"
#include "styleaudit/harness.hpp"
#include "styleaudit/metrics.hpp"

#include "testutil.hpp"

using namespace styleaudit;

namespace {

ArtworkSet sequential_set(const std::string& artist, int count) {
    ArtworkSet set;
    set.artist_id = artist;
    for (int i = 0; i < count; ++i) {
        ArtworkRecord r;
        r.id = artist + "/" + std::to_string(i);
        r.artist_id = artist;
        r.role = Role::target;
        set.records.push_back(std::move(r));
    }
    return set;
}

std::set<std::string> ids_of(const ArtworkSet& set) {
    std::set<std::string> ids;
    for (const auto& r : set.records) ids.insert(r.id);
    return ids;
}

// Small but complete benchmark for integration tests.
struct TinyWorld {
    testutil::ScratchDir dir{"harness"};
    Benchmark bench;
    Backbone backbone = testutil::tiny_backbone(3, 64);
    TapPlan plan = plan_taps(backbone.adapter());
    RepCache cache;
    AuditContext ctx;

    explicit TinyWorld(double fidelity = 0.95, double sigma = 0.05) {
        BenchmarkConfig cfg;
        cfg.n_artists = 3;
        cfg.n_pirated = 1;
        cfg.per_artist = 10;
        cfg.n_public = 2;
        cfg.mimics_per_artist = 6;
        cfg.image_side = 64;
        cfg.fidelity = fidelity;
        cfg.distortion_sigma = sigma;
        cfg.seed = 77;
        const auto manifest = build_benchmark(cfg, dir.path / "bench");
        bench = Benchmark::load(manifest, 64);
        ctx = AuditContext{&backbone, plan, &cache};
    }

    ExperimentConfig experiment_config() const {
        ExperimentConfig cfg;
        cfg.seeds = {1, 2};
        cfg.queries_per_artist = 6;
        cfg.pairs_per_audit = 8;
        cfg.augmentation.multiplicity = 3;
        cfg.training.hidden_sizes = {32, 16};
        cfg.training.learning_rate = 1e-3;
        cfg.training.max_epochs = 40;
        cfg.training.patience = 8;
        return cfg;
    }
};

}  // namespace

TEST_CASE("apply_overlap_mode set algebra") {
    const ArtworkSet target = sequential_set("a", 20);

    SUBCASE("complete returns the full set twice") {
        const auto [fine_tune, audit] =
            apply_overlap_mode(target, OverlapMode::complete, 5);
        REQUIRE(ids_of(fine_tune) == ids_of(target));
        REQUIRE(ids_of(audit) == ids_of(target));
    }
    SUBCASE("partial shares exactly half") {
        const auto [fine_tune, audit] =
            apply_overlap_mode(target, OverlapMode::partial, 5);
        const auto f = ids_of(fine_tune), a = ids_of(audit);
        std::vector<std::string> intersection;
        std::set_intersection(f.begin(), f.end(), a.begin(), a.end(),
                              std::back_inserter(intersection));
        REQUIRE(intersection.size() == 10);
        REQUIRE(fine_tune.size() == 15);
        REQUIRE(audit.size() == 15);
    }
    SUBCASE("disjoint splits evenly with empty intersection") {
        const auto [fine_tune, audit] =
            apply_overlap_mode(target, OverlapMode::disjoint, 5);
        REQUIRE(fine_tune.size() == 10);
        REQUIRE(audit.size() == 10);
        const auto f = ids_of(fine_tune), a = ids_of(audit);
        for (const auto& id : f) REQUIRE(a.count(id) == 0);
        std::set<std::string> all = f;
        all.insert(a.begin(), a.end());
        REQUIRE(all == ids_of(target));
    }
    SUBCASE("errors") {
        REQUIRE_THROWS_AS(
            apply_overlap_mode(sequential_set("a", 3), OverlapMode::disjoint, 1),
            TooFewRecords);
        REQUIRE_THROWS_AS(
            apply_overlap_mode(sequential_set("a", 7), OverlapMode::partial, 1),
            InvalidConfig);
    }
}

TEST_CASE("metrics match brute-force confusion counting on a 6-artist table") {
    // Hand-built verdicts: TP, TP, FN (positives) / FP, TN, TN (negatives).
    std::vector<BinaryOutcome> outcomes{
        {true, true}, {true, true}, {true, false},
        {false, true}, {false, false}, {false, false},
    };
    const ConfusionCounts c = confusion(outcomes);
    REQUIRE(c.tp == 2);
    REQUIRE(c.fn == 1);
    REQUIRE(c.fp == 1);
    REQUIRE(c.tn == 2);
    REQUIRE(accuracy(c) == doctest::Approx(4.0 / 6.0));
    REQUIRE(f1_score(c) == doctest::Approx(2.0 * 2 / (2.0 * 2 + 1 + 1)));
    REQUIRE(false_positive_rate(c) == doctest::Approx(1.0 / 3.0));

    // AUC against a pairwise-ranking oracle.
    const std::vector<double> scores{0.9, 0.6, -0.2, 0.3, -0.5, -0.4};
    const std::vector<bool> labels{true, true, true, false, false, false};
    double wins = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 3; j < 6; ++j) {
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    REQUIRE(auc(scores, labels) == doctest::Approx(wins / 9.0));
}

TEST_CASE("perfect rankings and verdicts give perfect metrics") {
    REQUIRE(auc({0.9, 0.8, -0.5}, {true, true, false}) == doctest::Approx(1.0));
    std::vector<BinaryOutcome> outcomes;
    for (int i = 0; i < 10; ++i) outcomes.push_back({i < 5, i < 5});
    const ConfusionCounts c = confusion(outcomes);
    REQUIRE(accuracy(c) == doctest::Approx(1.0));
    REQUIRE(false_positive_rate(c) == doctest::Approx(0.0));
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
    const std::vector<double> scores{0.3, -0.2, 0.8, 0.1, -0.6};
    const std::vector<bool> labels{true, false, true, false, false};
    const double base = auc(scores, labels);
    std::vector<double> warped = scores;
    for (auto& s : warped) s = std::tanh(3.0 * s) * 0.9;  // strictly increasing
    REQUIRE(auc(warped, labels) == doctest::Approx(base));
}

TEST_CASE("template captions round trip through the parser") {
    TemplateCaptionProvider provider;
    const std::string caption = provider.request("artist_03", 7);
    std::string artist;
    int scene = -1;
    REQUIRE(TemplateCaptionProvider::parse(caption, artist, scene));
    REQUIRE(artist == "artist_03");
    REQUIRE(scene == 7);

    ArtworkRecord record;
    record.id = "public_01/orig_0004";
    record.artist_id = "public_01";
    const std::string describe = provider.describe(record);
    REQUIRE(TemplateCaptionProvider::parse(describe, artist, scene));
    REQUIRE(artist == "public_01");
    REQUIRE(scene == 4);
}

TEST_CASE("benchmark model and live simulator answer captions identically") {
    TinyWorld world;
    const BenchmarkModel disk_model(world.bench);
    std::vector<StyleFamily> all = world.bench.artists;
    for (const auto& f : world.bench.publics) all.push_back(f);
    const LiveSimulatorModel live_model(all, world.bench.piracy,
                                        world.bench.config.image_side);
    TemplateCaptionProvider provider;
    for (const auto& family : world.bench.artists) {
        const std::string caption = provider.request(family.family_id, 2);
        REQUIRE(disk_model.generate(caption).pixels ==
                live_model.generate(caption).pixels);
    }
}

TEST_CASE("run_audit end to end on the tiny benchmark") {
    TinyWorld world;
    const BenchmarkModel model(world.bench);
    TemplateCaptionProvider captions;
    const ExperimentConfig cfg = world.experiment_config();

    std::string pirated_artist, clean_artist;
    for (const auto& [artist, flag] : world.bench.ground_truth)
        (flag ? pirated_artist : clean_artist) = artist;

    const AuditOutcome pirated =
        run_audit(world.bench.originals.at(pirated_artist),
                  world.bench.public_pool, model, captions, cfg, 1, world.ctx);
    REQUIRE(pirated.threshold_decision.has_value());
    REQUIRE(pirated.ttest_decision.has_value());
    REQUIRE(pirated.threshold_decision->verdict == Verdict::infringing);

    const AuditOutcome clean =
        run_audit(world.bench.originals.at(clean_artist),
                  world.bench.public_pool, model, captions, cfg, 1, world.ctx);
    REQUIRE(clean.threshold_decision->verdict == Verdict::not_infringing);
    REQUIRE(clean.ttest_decision->verdict == Verdict::not_infringing);

    // Provenance fields.
    REQUIRE(pirated.train_positive_count > 0);
    REQUIRE(pirated.pair_count == cfg.pairs_per_audit);
    REQUIRE(pirated.sample.scores.size() ==
            static_cast<std::size_t>(cfg.queries_per_artist));
}

TEST_CASE("queries_per_artist=1 with t-test surfaces TooFewScores") {
    TinyWorld world;
    const BenchmarkModel model(world.bench);
    TemplateCaptionProvider captions;
    ExperimentConfig cfg = world.experiment_config();
    cfg.queries_per_artist = 1;
    cfg.mechanism = MechanismChoice::t_test;
    const auto& artist = world.bench.artists.front().family_id;
    REQUIRE_THROWS_AS(
        run_audit(world.bench.originals.at(artist), world.bench.public_pool,
                  model, captions, cfg, 1, world.ctx),
        TooFewScores);
}

TEST_CASE("run_experiment: determinism and correct audit of the tiny world") {
    TinyWorld world;
    const ExperimentConfig cfg = world.experiment_config();

    const ExperimentResult r1 = run_experiment(world.bench, cfg, world.ctx);
    const ExperimentResult r2 = run_experiment(world.bench, cfg, world.ctx);
    REQUIRE(r1.report.to_json() == r2.report.to_json());

    const auto& thold = r1.report.mechanisms.at("threshold");
    REQUIRE(thold.accuracy.mean == doctest::Approx(1.0));
    REQUIRE(thold.fpr.mean == doctest::Approx(0.0));
    REQUIRE(r1.report.mechanisms.at("t_test").accuracy.mean >= 0.5);
    REQUIRE(thold.auc.mean == doctest::Approx(1.0));
    REQUIRE(r1.outcomes.size() == cfg.seeds.size() * world.bench.artists.size());
}

TEST_CASE("run_ablation with no flags yields identical reports") {
    TinyWorld world;
    ExperimentConfig cfg = world.experiment_config();
    cfg.seeds = {1};
    const AblationResult result = run_ablation(world.bench, cfg, world.ctx);
    REQUIRE(result.ablation_name == "none");
    REQUIRE(result.baseline.report.to_json() == result.ablation.report.to_json());
}

TEST_CASE("without_augmentation trains on originals only") {
    TinyWorld world;
    ExperimentConfig cfg = world.experiment_config();
    cfg.seeds = {1};
    cfg.ablations.without_augmentation = true;
    const AblationResult result = run_ablation(world.bench, cfg, world.ctx);
    // 10 originals, split 8:2 -> 8 training positives vs 8 * (1 + 3) with
    // augmentation multiplicity 3.
    REQUIRE(result.ablation.outcomes.front().train_positive_count == 8);
    REQUIRE(result.baseline.outcomes.front().train_positive_count == 32);
}

TEST_CASE("without_distortion drops the pairs") {
    TinyWorld world;
    ExperimentConfig cfg = world.experiment_config();
    cfg.seeds = {1};
    cfg.ablations.without_distortion = true;
    const AblationResult result = run_ablation(world.bench, cfg, world.ctx);
    REQUIRE(result.ablation.outcomes.front().pair_count == 0);
    REQUIRE(result.baseline.outcomes.front().pair_count == cfg.pairs_per_audit);
}

TEST_CASE("decisions csv has the documented columns") {
    TinyWorld world;
    ExperimentConfig cfg = world.experiment_config();
    cfg.seeds = {1};
    const ExperimentResult result = run_experiment(world.bench, cfg, world.ctx);
    const auto path = world.dir.path / "decisions.csv";
    write_decisions_csv(result.outcomes, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    REQUIRE(header ==
            "artist_id,mechanism,n,mean,stddev,t,critical_t,verdict");
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    REQUIRE(rows == static_cast<int>(2 * world.bench.artists.size()));
}
