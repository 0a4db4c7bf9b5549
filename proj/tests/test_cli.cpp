#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "lab/cache.hpp"
#include "lab/csv.hpp"
#include "lab/experiment.hpp"
#include "lab/runs.hpp"
#include "lab/svg.hpp"

using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / ("lab_test_" + name)) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

// A config small enough for unit tests: (3,4) bath, short grid.
json tiny_custom_config(const std::filesystem::path& out_dir,
                        const std::filesystem::path& cache_dir) {
    return {{"recipe", "custom"},
            {"model", {{"J", 1.0}, {"U", 0.8}, {"L", 4}, {"N", 3}, {"delta", 0.5},
                       {"epsilon", 0.2}}},
            {"grid", {{"t0", 0.0}, {"dt", 2.0}, {"steps", 6}}},
            {"output_dir", out_dir.string()},
            {"cache_dir", cache_dir.string()},
            {"options", {{"initial", "pure"}, {"g_stride", 2}}}};
}

}  // namespace

TEST_CASE("every recipe has a valid self-consistent default config") {
    for (const auto& name : lab::cli::recipe_names()) {
        const auto config = lab::cli::default_config(name);
        CHECK(config.recipe == name);
        CHECK(!lab::cli::recipe_description(name).empty());
        // the default document round-trips through the validator
        const auto reparsed = lab::cli::parse_config(lab::cli::to_json(config));
        CHECK(reparsed.recipe == name);
        CHECK(reparsed.options == config.options);
    }
    CHECK(lab::cli::default_config("fig7").model.bosons == 7);
    CHECK(lab::cli::default_config("fig7").model.sites == 8);
    CHECK(lab::cli::default_config("fig1a").model.bosons == 6);
}

TEST_CASE("config validation points at the offending key") {
    CHECK_THROWS_WITH_AS(static_cast<void>(lab::cli::parse_config(json{{"recipe", "nope"}})),
                         doctest::Contains("valid recipes"), lab::cli::ConfigError);
    CHECK_THROWS_WITH_AS(
        static_cast<void>(lab::cli::parse_config(json{{"recipe", "fig1a"}, {"bogus", 1}})),
        doctest::Contains("config.bogus"), lab::cli::ConfigError);
    CHECK_THROWS_WITH_AS(
        static_cast<void>(lab::cli::parse_config(
            json{{"recipe", "fig1a"}, {"model", {{"Q", 1.0}}}})),
        doctest::Contains("config.model.Q"), lab::cli::ConfigError);
    CHECK_THROWS_WITH_AS(
        static_cast<void>(lab::cli::parse_config(
            json{{"recipe", "fig1a"}, {"options", {{"window_min", 2.0}}}})),
        doctest::Contains("unknown option"), lab::cli::ConfigError);
    CHECK_THROWS_WITH_AS(
        static_cast<void>(lab::cli::parse_config(
            json{{"recipe", "fig1a"}, {"grid", {{"dt", -1.0}}}})),
        doctest::Contains("config.grid.dt"), lab::cli::ConfigError);
    CHECK_THROWS_AS(
        static_cast<void>(lab::cli::parse_config(
            json{{"recipe", "fig1a"}, {"model", {{"N", 40}, {"L", 40}}}})),
        lab::cli::ConfigError);
}

TEST_CASE("runs are reproducible byte for byte") {
    TempDir work("repro");
    const auto cache = work.path / "cache";
    const auto out_a = work.path / "a";
    const auto out_b = work.path / "b";
    std::ostringstream log;

    auto config_a = lab::cli::parse_config(tiny_custom_config(out_a, cache));
    auto config_b = lab::cli::parse_config(tiny_custom_config(out_b, cache));
    lab::cli::run(config_a, log);
    lab::cli::run(config_b, log);

    for (const char* name : {"rho_s_elements.csv", "g_of_t.csv", "entropy.csv"}) {
        CHECK(slurp(out_a / name) == slurp(out_b / name));
        CHECK(slurp(out_a / name).find("\r") == std::string::npos);  // LF endings
    }
    const auto manifest = json::parse(slurp(out_a / "manifest.json"));
    CHECK(manifest.at("schema_version") == lab::cli::kManifestSchemaVersion);
    CHECK(manifest.at("recipe") == "custom");
    CHECK(manifest.contains("seeds"));
    CHECK(manifest.at("outputs").size() >= 3);
}

TEST_CASE("eigen cache hits, misses and corruption recovery") {
    TempDir work("cache");
    lab::ops::ModelParams p;
    p.bosons = 3;
    p.sites = 4;

    const lab::fock::FockBasis basis(p.bosons, p.sites);
    const auto h = lab::ops::build_bath_hamiltonian(p, basis);
    const std::string key = lab::cache::key_for_bath(p);

    lab::cache::EigenCache cache(work.path);
    const auto first = cache.full(h, key);
    CHECK(cache.misses() == 1);
    const auto second = cache.full(h, key);
    CHECK(cache.hits() == 1);
    CHECK((first.energies - second.energies).cwiseAbs().maxCoeff() == 0.0);

    // a different parameter set misses
    p.interaction = 0.9;
    const auto h2 = lab::ops::build_bath_hamiltonian(p, basis);
    (void)cache.full(h2, lab::cache::key_for_bath(p));
    CHECK(cache.misses() == 2);
    CHECK(cache.list().size() == 2);

    // corrupt the first entry on disk; the spot-check must reject and recompute
    for (const auto& entry : cache.list()) {
        if (entry.key == key) {
            std::ofstream f(work.path / entry.file, std::ios::binary | std::ios::trunc);
            f << "garbage";
        }
    }
    const auto recovered = cache.full(h, key);
    CHECK(cache.misses() == 3);
    CHECK((recovered.energies - first.energies).cwiseAbs().maxCoeff() == 0.0);

    CHECK(cache.clear() >= 2);
    CHECK(cache.list().empty());
}

TEST_CASE("a stale cache entry fails the eigenpair spot-check") {
    TempDir work("stale");
    lab::ops::ModelParams p;
    p.bosons = 3;
    p.sites = 4;
    const lab::fock::FockBasis basis(p.bosons, p.sites);
    const auto h = lab::ops::build_bath_hamiltonian(p, basis);

    lab::cache::EigenCache cache(work.path);
    (void)cache.full(h, "shared-key");
    // same key, different operator: residual check must reject the entry
    lab::ops::ModelParams q = p;
    q.interaction = 1.7;
    const auto h2 = lab::ops::build_bath_hamiltonian(q, basis);
    const auto es = cache.full(h2, "shared-key");
    CHECK(cache.misses() == 2);
    const Eigen::VectorXd residual =
        h2.apply(Eigen::VectorXd(es.vectors.col(0))) - es.energies(0) * es.vectors.col(0);
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("csv writer emits the documented dialect") {
    TempDir work("csv");
    const auto file = work.path / "t.csv";
    lab::csv::Writer w(file, {"a", "b"}, {"k=v"});
    w.row({1.0, 0.1});
    w.row({2.0, 1.0 / 3.0});
    w.close();
    const std::string text = slurp(file);
    CHECK(text == "# k=v\na,b\n1,0.10000000000000001\n2,0.33333333333333331\n");
    CHECK_THROWS_AS(w.row({1.0}), std::invalid_argument);
}

TEST_CASE("svg charts are produced with data polylines") {
    TempDir work("svg");
    const auto file = work.path / "chart.svg";
    lab::svg::write_line_chart(file,
                               {{"series", {0.0, 1.0, 2.0}, {0.5, 0.25, 0.125}}},
                               {"title", "x", "y", false});
    const std::string text = slurp(file);
    CHECK(text.find("<svg") != std::string::npos);
    CHECK(text.find("polyline") != std::string::npos);
    CHECK(text.find("title") != std::string::npos);

    // log axis drops non-positive samples rather than failing
    lab::svg::write_line_chart(work.path / "log.svg",
                               {{"series", {0.0, 1.0, 2.0}, {0.5, 0.0, 0.125}}},
                               {"t", "x", "y", true});
    CHECK(slurp(work.path / "log.svg").find("polyline") != std::string::npos);
}

TEST_CASE("shipped config files validate against the schema") {
    const std::filesystem::path dir = std::filesystem::path(LAB_SOURCE_DIR) / "configs";
    REQUIRE(std::filesystem::exists(dir));
    int seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        const auto config = lab::cli::load_config(entry.path());
        CHECK(config.recipe == entry.path().stem().string());
        ++seen;
    }
    CHECK(seen == static_cast<int>(lab::cli::recipe_names().size()));
}

TEST_CASE("run rejects unknown recipes") {
    lab::cli::ExperimentConfig config;
    config.recipe = "not-a-recipe";
    std::ostringstream log;
    CHECK_THROWS_AS(static_cast<void>(lab::cli::run(config, log)), lab::cli::ConfigError);
}
