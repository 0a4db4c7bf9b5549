// experiment.hpp — declarative experiment runner: figure recipes, config
// schema, caching and artifact emission

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "lab/cache.hpp"
#include "lab/evolution.hpp"
#include "lab/operators.hpp"

namespace lab::cli {

inline constexpr const char* kCodeVersion = "lab 1.0.0";
inline constexpr int kManifestSchemaVersion = 1;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string recipe;
    ops::ModelParams model;
    evo::TimeGrid grid{0.0, 1.0, 201};
    std::filesystem::path output_dir;
    std::filesystem::path cache_dir{"lab_cache"};
    nlohmann::json options;  // recipe-specific, validated and defaulted
};

std::vector<std::string> recipe_names();
std::string recipe_description(const std::string& recipe);

// Complete default configuration for a recipe (the reference parameter
// set; a recipe may override the shared model defaults).
ExperimentConfig default_config(const std::string& recipe);
nlohmann::json to_json(const ExperimentConfig& config);

// Parses and validates a config document. Unknown keys, unknown recipes and
// out-of-range values throw ConfigError with a message that points at the
// offending key and lists the valid alternatives.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& file);

struct RunResult {
    std::vector<std::string> outputs;  // files relative to output_dir
    nlohmann::json manifest;
};

// Executes the recipe: CSV data files, SVG line charts and manifest.json in
// config.output_dir. CSV output is byte-identical across runs for a fixed
// config and code version.
RunResult run(const ExperimentConfig& config, std::ostream& log);

}  // namespace lab::cli
