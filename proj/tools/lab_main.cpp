// lab_main.cpp — command line front end: run experiment recipes, validate
// configs, list recipes and manage the eigensystem cache

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "lab/cache.hpp"
#include "lab/experiment.hpp"

namespace {

int cmd_run(const std::string& config_path) {
    const lab::cli::ExperimentConfig config = lab::cli::load_config(config_path);
    std::cerr << "lab: running recipe '" << config.recipe << "' -> " << config.output_dir.string()
              << "\n";
    const lab::cli::RunResult result = lab::cli::run(config, std::cerr);
    for (const auto& file : result.outputs) {
        std::cout << (config.output_dir / file).string() << "\n";
    }
    return 0;
}

int cmd_validate(const std::string& config_path) {
    const lab::cli::ExperimentConfig config = lab::cli::load_config(config_path);
    std::cout << "OK: recipe '" << config.recipe << "', output_dir '"
              << config.output_dir.string() << "'\n";
    return 0;
}

int cmd_recipes() {
    for (const auto& name : lab::cli::recipe_names()) {
        std::cout << name << ": " << lab::cli::recipe_description(name) << "\n";
        std::cout << "  defaults: " << lab::cli::to_json(lab::cli::default_config(name)).dump()
                  << "\n";
    }
    return 0;
}

int cmd_cache_ls(const std::string& dir) {
    lab::cache::EigenCache cache{std::filesystem::path(dir)};
    const auto entries = cache.list();
    if (entries.empty()) {
        std::cout << "cache " << dir << " is empty\n";
        return 0;
    }
    for (const auto& e : entries) {
        std::printf("%-22s %12llu bytes  %s\n", e.file.c_str(),
                    static_cast<unsigned long long>(e.bytes), e.key.c_str());
    }
    return 0;
}

int cmd_cache_clear(const std::string& dir) {
    lab::cache::EigenCache cache{std::filesystem::path(dir)};
    std::cout << "removed " << cache.clear() << " cache files from " << dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lab — exact-diagonalization laboratory for a two-level system coupled to a "
                 "Bose-Hubbard bath"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "execute a recipe from a config file");
    run_cmd->add_option("config", config_path, "JSON config file")->required();

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "check a config file against the schema");
    validate_cmd->add_option("config", validate_path, "JSON config file")->required();

    auto* recipes_cmd = app.add_subcommand("recipes", "list recipes and their default configs");

    auto* cache_cmd = app.add_subcommand("cache", "inspect or clear the eigensystem cache");
    std::string cache_dir = "lab_cache";
    auto* cache_ls = cache_cmd->add_subcommand("ls", "list cache entries");
    cache_ls->add_option("--dir", cache_dir, "cache directory");
    auto* cache_clear = cache_cmd->add_subcommand("clear", "remove cache entries");
    cache_clear->add_option("--dir", cache_dir, "cache directory");
    cache_cmd->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(config_path);
        if (validate_cmd->parsed()) return cmd_validate(validate_path);
        if (recipes_cmd->parsed()) return cmd_recipes();
        if (cache_ls->parsed()) return cmd_cache_ls(cache_dir);
        if (cache_clear->parsed()) return cmd_cache_clear(cache_dir);
    } catch (const lab::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
