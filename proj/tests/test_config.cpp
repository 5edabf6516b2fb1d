#include <fstream>

#include <doctest.h>

#include "styleaudit/config.hpp"
#include "styleaudit/errors.hpp"

#include "testutil.hpp"

using namespace styleaudit;

namespace {

std::filesystem::path write_config(const testutil::ScratchDir& dir,
                                   const std::string& body) {
    const auto path = dir.path / "config.json";
    std::ofstream(path) << body;
    return path;
}

}  // namespace

TEST_CASE("defaults are sane and derived paths are filled in") {
    const RunConfig cfg = RunConfig::defaults();
    cfg.validate();
    REQUIRE(cfg.benchmark_dir == cfg.out_dir / "benchmark");
    REQUIRE(cfg.weights_path == cfg.out_dir / "weights.sabw");
    REQUIRE(cfg.experiment.seeds == std::vector<std::int64_t>{1, 2, 3, 4, 5});
    REQUIRE(cfg.experiment.queries_per_artist == 20);
    REQUIRE(cfg.experiment.training.learning_rate == doctest::Approx(5e-5));
    REQUIRE(cfg.experiment.training.max_epochs == 100);
    REQUIRE(cfg.experiment.training.patience == 10);
    REQUIRE(cfg.experiment.augmentation.multiplicity == 10);
    REQUIRE(cfg.simulator.n_artists == 10);
    REQUIRE(cfg.simulator.n_pirated == 5);
    REQUIRE(cfg.simulator.per_artist == 20);
    REQUIRE(cfg.simulator.fidelity == doctest::Approx(0.9));
    REQUIRE(cfg.simulator.distortion_sigma == doctest::Approx(0.1));
}

TEST_CASE("config file overrides named keys only") {
    testutil::ScratchDir dir("cfg");
    const auto path = write_config(dir, R"({
      "paths": {"out_dir": "runs/custom"},
      "simulator": {"n_artists": 6, "n_pirated": 2},
      "experiment": {"mechanism": "threshold", "seeds": [9]},
      "training": {"learning_rate": 0.001}
    })");
    const RunConfig cfg = RunConfig::load(path);
    REQUIRE(cfg.out_dir == std::filesystem::path("runs/custom"));
    REQUIRE(cfg.benchmark_dir == std::filesystem::path("runs/custom/benchmark"));
    REQUIRE(cfg.simulator.n_artists == 6);
    REQUIRE(cfg.simulator.per_artist == 20);  // untouched default
    REQUIRE(cfg.experiment.mechanism == MechanismChoice::threshold);
    REQUIRE(cfg.experiment.seeds == std::vector<std::int64_t>{9});
    REQUIRE(cfg.experiment.training.learning_rate == doctest::Approx(0.001));
}

TEST_CASE("unknown keys are rejected fail-fast") {
    testutil::ScratchDir dir("cfg_bad");
    SUBCASE("top level") {
        const auto path = write_config(dir, R"({"simulators": {}})");
        REQUIRE_THROWS_AS(RunConfig::load(path), InvalidConfig);
    }
    SUBCASE("nested") {
        const auto path =
            write_config(dir, R"({"simulator": {"n_artist": 5}})");
        REQUIRE_THROWS_AS(RunConfig::load(path), InvalidConfig);
    }
    SUBCASE("ablations") {
        const auto path = write_config(
            dir, R"({"experiment": {"ablations": {"without_aug": true}}})");
        REQUIRE_THROWS_AS(RunConfig::load(path), InvalidConfig);
    }
}

TEST_CASE("invalid values are rejected") {
    testutil::ScratchDir dir("cfg_vals");
    const auto path = write_config(
        dir, R"({"simulator": {"n_artists": 4, "n_pirated": 9}})");
    REQUIRE_THROWS_AS(RunConfig::load(path), InvalidCounts);
}

TEST_CASE("null weights_init_seed disables weight generation") {
    testutil::ScratchDir dir("cfg_seed");
    const auto path =
        write_config(dir, R"({"extractor": {"weights_init_seed": null}})");
    const RunConfig cfg = RunConfig::load(path);
    REQUIRE_FALSE(cfg.weights_init_seed.has_value());
}

TEST_CASE("config echo round-trips through to_json") {
    const RunConfig cfg = RunConfig::defaults();
    const auto j = cfg.to_json();
    REQUIRE(j.at("experiment").at("mechanism") == "both");
    REQUIRE(j.at("simulator").at("per_artist") == 20);
    REQUIRE(j.at("augmentation").at("multiplicity") == 10);
}
