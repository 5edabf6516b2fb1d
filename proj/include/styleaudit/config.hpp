#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "styleaudit/harness.hpp"

namespace styleaudit {

// Single config file driving all CLI commands. Unknown keys are rejected;
// missing keys fall back to the documented defaults.
struct RunConfig {
    // paths
    std::filesystem::path out_dir = "runs/default";
    std::filesystem::path benchmark_dir;      // default <out_dir>/benchmark
    std::filesystem::path weights_path;       // default <out_dir>/weights.sabw
    std::filesystem::path cache_path;         // default <out_dir>/reps.sarc
    std::filesystem::path discriminator_dir;  // default <out_dir>/discriminators

    // extractor
    std::string arch = "vgg-micro";
    std::optional<std::int64_t> weights_init_seed = 7;

    BenchmarkConfig simulator;
    ExperimentConfig experiment;
    int jobs = 0;  // 0 = all hardware threads

    static RunConfig defaults() { return RunConfig{}.with_derived_paths(); }
    static RunConfig load(const std::filesystem::path& path);

    RunConfig with_derived_paths() const;
    nlohmann::json to_json() const;
    void validate() const;
};

}  // namespace styleaudit
