// styleaudit CLI: benchmark generation, representation extraction,
// discriminator training, single audits, experiments and report rendering,
// all driven by one JSON config file (flags override the config).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "styleaudit/config.hpp"
#include "styleaudit/digest.hpp"
#include "styleaudit/errors.hpp"
#include "styleaudit/harness.hpp"
#include "styleaudit/kernels.hpp"
#include "styleaudit/parallel.hpp"

namespace fs = std::filesystem;
using namespace styleaudit;

namespace {

struct CliOverrides {
    std::string config_path;
    std::optional<std::int64_t> seed;
    std::string mechanism;
    std::string overlap;
    std::string ablation;
    std::optional<int> jobs;
    std::string out_dir;
};

RunConfig resolve_config(const CliOverrides& cli) {
    RunConfig cfg = cli.config_path.empty() ? RunConfig::defaults()
                                            : RunConfig::load(cli.config_path);
    if (!cli.out_dir.empty()) {
        cfg.out_dir = cli.out_dir;
        cfg.benchmark_dir.clear();
        cfg.weights_path.clear();
        cfg.cache_path.clear();
        cfg.discriminator_dir.clear();
        cfg = cfg.with_derived_paths();
    }
    if (cli.seed) {
        cfg.simulator.seed = *cli.seed;
        cfg.experiment.seeds = {*cli.seed};
    }
    if (!cli.mechanism.empty())
        cfg.experiment.mechanism = mechanism_choice_from_name(cli.mechanism);
    if (!cli.overlap.empty())
        cfg.experiment.overlap_mode = overlap_from_name(cli.overlap);
    if (!cli.ablation.empty()) {
        if (cli.ablation == "without_augmentation")
            cfg.experiment.ablations.without_augmentation = true;
        else if (cli.ablation == "without_distortion")
            cfg.experiment.ablations.without_distortion = true;
        else
            throw InvalidConfig("unknown ablation: " + cli.ablation);
    }
    if (cli.jobs) cfg.jobs = *cli.jobs;
    cfg.validate();
    set_worker_count(cfg.jobs);
    return cfg;
}

// Loads the configured weights, deterministically materializing them first
// when the file is absent and an init seed is configured.
Backbone ensure_backbone(const RunConfig& cfg) {
    if (!fs::exists(cfg.weights_path)) {
        if (!cfg.weights_init_seed)
            throw WeightsUnavailable(
                "weights file missing and no weights_init_seed configured: " +
                cfg.weights_path.string());
        const BackboneArch arch = BackboneArch::preset(cfg.arch);
        const Backbone generated = Backbone::random_init(
            arch, static_cast<std::uint64_t>(*cfg.weights_init_seed));
        fs::create_directories(cfg.weights_path.parent_path());
        generated.save(cfg.weights_path);
        std::cerr << "[extractor] initialized " << cfg.arch << " weights at "
                  << cfg.weights_path.string() << " (seed "
                  << *cfg.weights_init_seed << ")\n";
    }
    return Backbone::load(cfg.weights_path);
}

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    Digest digest;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        digest.update(buf, static_cast<std::size_t>(in.gcount()));
    return digest.hex();
}

void write_run_manifest(const RunConfig& cfg, const std::string& command,
                        const Backbone& backbone, const TapPlan& plan) {
    nlohmann::json manifest{
        {"command", command},
        {"config", cfg.to_json()},
        {"weights_digest", backbone.weights_digest()},
        {"tap_plan",
         {{"indices", plan.tap_indices},
          {"channels", plan.tap_channels},
          {"expected_dim", plan.expected_dim},
          {"hash", plan.hash}}},
        {"kernel_backend", kernels::backend_name(kernels::active_backend())},
    };
    fs::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir / "run_manifest.json");
    if (!out) throw IoError("cannot write run_manifest.json");
    out << manifest.dump(2) << "\n";
}

void print_headline(const MetricsReport& report) {
    for (const auto& [name, mech] : report.mechanisms) {
        std::printf("%-9s accuracy %.3f±%.3f  auc %.3f±%.3f  f1 %.3f±%.3f  "
                    "fpr %.3f±%.3f\n",
                    name.c_str(), mech.accuracy.mean, mech.accuracy.stddev,
                    mech.auc.mean, mech.auc.stddev, mech.f1.mean,
                    mech.f1.stddev, mech.fpr.mean, mech.fpr.stddev);
    }
}

int cmd_benchmark(const RunConfig& cfg) {
    const fs::path manifest = build_benchmark(cfg.simulator, cfg.benchmark_dir);
    std::cout << manifest.string() << "\n";
    std::cerr << "[benchmark] manifest digest " << file_digest(manifest) << "\n";
    return 0;
}

int cmd_extract(const RunConfig& cfg) {
    const Backbone backbone = ensure_backbone(cfg);
    const TapPlan plan = plan_taps(backbone.adapter());
    const Benchmark bench = Benchmark::load(cfg.benchmark_dir / "manifest.json",
                                            backbone.arch().input_side);
    RepCache cache(cfg.cache_path);
    std::vector<const ArtworkSet*> sets{&bench.public_pool};
    for (const auto& [artist, set] : bench.originals) sets.push_back(&set);
    for (const auto& [artist, set] : bench.mimics) sets.push_back(&set);
    for (const auto& [artist, set] : bench.public_mimics) sets.push_back(&set);
    const auto reps = extract_batch(backbone, plan, sets, &cache);
    cache.save();
    write_run_manifest(cfg, "extract", backbone, plan);
    std::cout << "extracted " << reps.size() << " representations (dim "
              << plan.expected_dim << ") -> " << cfg.cache_path.string() << "\n";
    return 0;
}

fs::path discriminator_path(const RunConfig& cfg, const std::string& artist,
                            std::int64_t seed) {
    return cfg.discriminator_dir /
           (artist + "_seed" + std::to_string(seed) + ".sadm");
}

int cmd_train(const RunConfig& cfg, const std::string& artist) {
    const Backbone backbone = ensure_backbone(cfg);
    const TapPlan plan = plan_taps(backbone.adapter());
    const Benchmark bench = Benchmark::load(cfg.benchmark_dir / "manifest.json",
                                            backbone.arch().input_side);
    if (!bench.originals.count(artist))
        throw InvalidConfig("benchmark has no artist: " + artist);

    RepCache cache(cfg.cache_path);
    AuditContext ctx{&backbone, plan, &cache};
    const BenchmarkModel model(bench);
    const auto captions = make_caption_provider(cfg.experiment.caption_provider);
    const std::int64_t seed = cfg.experiment.seeds.front();

    const DiscriminatorBundle bundle =
        build_discriminator(bench.originals.at(artist), bench.public_pool,
                            model, *captions, cfg.experiment, seed, ctx);
    fs::create_directories(cfg.discriminator_dir);
    const fs::path out_path = discriminator_path(cfg, artist, seed);
    bundle.discriminator.save(out_path);
    cache.save();
    write_run_manifest(cfg, "train", backbone, plan);
    std::cout << "trained discriminator for " << artist << " (best epoch "
              << bundle.best_epoch << ", val loss "
              << bundle.best_validation_loss << ") -> " << out_path.string()
              << "\n";
    return 0;
}

int cmd_audit(const RunConfig& cfg, const std::string& artist) {
    const Backbone backbone = ensure_backbone(cfg);
    const TapPlan plan = plan_taps(backbone.adapter());
    const Benchmark bench = Benchmark::load(cfg.benchmark_dir / "manifest.json",
                                            backbone.arch().input_side);
    if (!bench.originals.count(artist))
        throw InvalidConfig("benchmark has no artist: " + artist);

    RepCache cache(cfg.cache_path);
    AuditContext ctx{&backbone, plan, &cache};
    const BenchmarkModel model(bench);
    const auto captions = make_caption_provider(cfg.experiment.caption_provider);
    const std::int64_t seed = cfg.experiment.seeds.front();

    DiscriminatorBundle bundle;
    const fs::path disc_path = discriminator_path(cfg, artist, seed);
    if (fs::exists(disc_path)) {
        bundle.discriminator = Discriminator::load(disc_path);
        if (bundle.discriminator.tap_plan_hash() != plan.hash)
            throw DimMismatch("stored discriminator was trained under a "
                              "different tap plan; re-run train");
    } else {
        bundle = build_discriminator(bench.originals.at(artist),
                                     bench.public_pool, model, *captions,
                                     cfg.experiment, seed, ctx);
        fs::create_directories(cfg.discriminator_dir);
        bundle.discriminator.save(disc_path);
    }

    const AuditOutcome outcome = audit_queries(
        bundle, artist, model, *captions, cfg.experiment, seed, ctx);
    cache.save();

    nlohmann::json out = nlohmann::json::object();
    if (outcome.threshold_decision)
        out["threshold"] = outcome.threshold_decision->to_json();
    if (outcome.ttest_decision)
        out["t_test"] = outcome.ttest_decision->to_json();
    out["seed"] = seed;
    out["scores"] = outcome.sample.scores;

    fs::create_directories(cfg.out_dir);
    const fs::path decision_path =
        cfg.out_dir / ("audit_" + artist + "_seed" + std::to_string(seed) +
                       ".json");
    std::ofstream file(decision_path);
    file << out.dump(2) << "\n";
    write_run_manifest(cfg, "audit", backbone, plan);
    std::cout << out.dump(2) << "\n";
    return 0;  // the verdict is data, not an error
}

int cmd_experiment(const RunConfig& cfg) {
    const Backbone backbone = ensure_backbone(cfg);
    const TapPlan plan = plan_taps(backbone.adapter());
    const Benchmark bench = Benchmark::load(cfg.benchmark_dir / "manifest.json",
                                            backbone.arch().input_side);
    RepCache cache(cfg.cache_path);
    AuditContext ctx{&backbone, plan, &cache};

    fs::create_directories(cfg.out_dir);
    nlohmann::json metrics_json;
    if (cfg.experiment.ablations.any()) {
        const AblationResult result = run_ablation(bench, cfg.experiment, ctx);
        metrics_json = nlohmann::json{
            {"baseline", result.baseline.report.to_json()},
            {"ablation", result.ablation.report.to_json()},
            {"ablation_name", result.ablation_name},
        };
        std::vector<AuditOutcome> all = result.baseline.outcomes;
        all.insert(all.end(), result.ablation.outcomes.begin(),
                   result.ablation.outcomes.end());
        write_decisions_csv(all, cfg.out_dir / "decisions.csv");
        std::cout << "baseline:\n";
        print_headline(result.baseline.report);
        std::cout << "ablation (" << result.ablation_name << "):\n";
        print_headline(result.ablation.report);
    } else {
        const ExperimentResult result = run_experiment(bench, cfg.experiment, ctx);
        metrics_json = result.report.to_json();
        write_decisions_csv(result.outcomes, cfg.out_dir / "decisions.csv");
        print_headline(result.report);
    }

    std::ofstream metrics_file(cfg.out_dir / "metrics.json");
    metrics_file << metrics_json.dump(2) << "\n";
    cache.save();
    write_run_manifest(cfg, "experiment", backbone, plan);
    std::cerr << "[experiment] metrics digest "
              << file_digest(cfg.out_dir / "metrics.json") << "\n";
    return 0;
}

void print_metric_block(const std::string& name, const nlohmann::json& mech) {
    std::printf("  %s\n", name.c_str());
    for (const char* metric : {"accuracy", "auc", "f1", "fpr"}) {
        const auto& m = mech.at(metric);
        std::printf("    %-8s mean %.3f  stddev %.3f  per-seed [", metric,
                    m.at("mean").get<double>(), m.at("stddev").get<double>());
        const auto& per_seed = m.at("per_seed");
        for (std::size_t i = 0; i < per_seed.size(); ++i)
            std::printf("%s%.3f", i ? ", " : "", per_seed[i].get<double>());
        std::printf("]\n");
    }
}

int cmd_report(const RunConfig& cfg) {
    const fs::path metrics_path = cfg.out_dir / "metrics.json";
    std::ifstream in(metrics_path);
    if (!in) throw IoError("no metrics at " + metrics_path.string() +
                           "; run experiment first");
    nlohmann::json metrics;
    in >> metrics;

    auto print_report = [](const nlohmann::json& report) {
        std::printf("artists %d, overlap %s, ablation %s, queries/artist %d\n",
                    report.at("n_artists").get<int>(),
                    report.at("overlap_mode").get<std::string>().c_str(),
                    report.at("ablation").get<std::string>().c_str(),
                    report.at("queries_per_artist").get<int>());
        for (const auto& [name, mech] : report.at("mechanisms").items())
            print_metric_block(name, mech);
    };
    if (metrics.contains("baseline")) {
        std::printf("== baseline ==\n");
        print_report(metrics.at("baseline"));
        std::printf("== ablation: %s ==\n",
                    metrics.at("ablation_name").get<std::string>().c_str());
        print_report(metrics.at("ablation"));
    } else {
        print_report(metrics);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Artist-style data-use auditing toolkit"};
    app.require_subcommand(1);

    CliOverrides cli;
    app.add_option("--config", cli.config_path, "Config file (JSON)");
    app.add_option("--seed", cli.seed, "Override seed list with one seed");
    app.add_option("--mechanism", cli.mechanism,
                   "Decision mechanism: threshold|t_test|both");
    app.add_option("--overlap", cli.overlap,
                   "Overlap mode: complete|partial|disjoint");
    app.add_option("--ablation", cli.ablation,
                   "Ablation: without_augmentation|without_distortion");
    app.add_option("--jobs", cli.jobs, "Worker threads (0 = all cores)");
    app.add_option("--out", cli.out_dir, "Output directory");

    auto* bench_cmd = app.add_subcommand("benchmark",
                                         "Materialize the synthetic benchmark");
    auto* extract_cmd = app.add_subcommand(
        "extract", "Extract style representations into the cache");
    auto* train_cmd =
        app.add_subcommand("train", "Train a per-artist discriminator");
    auto* audit_cmd = app.add_subcommand("audit", "Audit one artist");
    auto* experiment_cmd = app.add_subcommand(
        "experiment", "Run the full multi-seed experiment with metrics");
    auto* report_cmd =
        app.add_subcommand("report", "Render metrics.json as a table");

    std::string artist;
    train_cmd->add_option("--artist", artist, "Artist id")->required();
    audit_cmd->add_option("--artist", artist, "Artist id")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = resolve_config(cli);
        if (bench_cmd->parsed()) return cmd_benchmark(cfg);
        if (extract_cmd->parsed()) return cmd_extract(cfg);
        if (train_cmd->parsed()) return cmd_train(cfg, artist);
        if (audit_cmd->parsed()) return cmd_audit(cfg, artist);
        if (experiment_cmd->parsed()) return cmd_experiment(cfg);
        if (report_cmd->parsed()) return cmd_report(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
