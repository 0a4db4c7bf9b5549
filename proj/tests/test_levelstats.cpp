#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "lab/levelstats.hpp"
#include "test_support.hpp"

using lab::levels::Goe2Table;
using lab::levels::Reference;

namespace {

std::vector<double> spectrum_of(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    return std::vector<double>(solver.eigenvalues().data(),
                               solver.eigenvalues().data() + solver.eigenvalues().size());
}

const Goe2Table& table() {
    static const Goe2Table t = Goe2Table::generate();
    return t;
}

}  // namespace

TEST_CASE("already uniform spectra unfold to unit spacings") {
    std::vector<double> energies;
    for (int i = 1; i <= 100; ++i) energies.push_back(static_cast<double>(i));
    const auto us = lab::levels::unfold(energies, 7, 0);
    for (double s : lab::levels::nearest_spacings(us)) {
        CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(us.discarded_edges == 0);
    CHECK(us.fit_degree == 7);
}

TEST_CASE("GOE sample unfolds to unit mean spacing and preserves order") {
    const auto energies = spectrum_of(test_support::goe_sample(500, 17));
    const auto us = lab::levels::unfold(energies, 7);
    const auto spacings = lab::levels::nearest_spacings(us);
    double mean = 0.0;
    for (double s : spacings) {
        CHECK(s > 0.0);  // ordering preserved
        mean += s;
    }
    mean /= static_cast<double>(spacings.size());
    CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("unfold input validation") {
    std::vector<double> too_few(30, 0.0);
    for (int i = 0; i < 30; ++i) too_few[static_cast<std::size_t>(i)] = i;
    CHECK_THROWS_AS(static_cast<void>(lab::levels::unfold(too_few, 7, 0)), std::invalid_argument);

    std::vector<double> unsorted = {3.0, 1.0, 2.0};
    CHECK_THROWS_AS(static_cast<void>(lab::levels::unfold(unsorted, 7, 0)), std::invalid_argument);

    std::vector<double> fine(100);
    for (int i = 0; i < 100; ++i) fine[static_cast<std::size_t>(i)] = i;
    CHECK_THROWS_AS(static_cast<void>(lab::levels::unfold(fine, 2, 0)), std::invalid_argument);
}

TEST_CASE("degenerate fits fail with advice") {
    // the sparse interaction tail of a small sector defeats the default
    // degree: the fitted map reorders levels there, and a different degree
    // resolves it
    lab::ops::ModelParams p;
    p.bosons = 5;
    p.sites = 6;
    p.coupling = 0.025;
    const lab::fock::FockBasis basis(p.bosons, p.sites);
    const auto es =
        lab::spectra::eigenvalues_only(lab::ops::build_total_hamiltonian(p, basis));
    const std::vector<double> energies(es.energies.data(), es.energies.data() + es.dim());
    CHECK_THROWS_WITH_AS(static_cast<void>(lab::levels::unfold(energies, 7)),
                         doctest::Contains("different fit degree"), std::runtime_error);
    CHECK_NOTHROW(static_cast<void>(lab::levels::unfold(energies, 8)));
}

TEST_CASE("reference curves") {
    CHECK(lab::levels::i_goe(0.0) == 0.0);
    CHECK(lab::levels::i_poisson(0.0) == 0.0);
    CHECK(lab::levels::i_goe(6.0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(lab::levels::i_poisson(20.0) == doctest::Approx(1.0).epsilon(1e-8));
    // independent sequences do not repel: more weight at small s than GOE
    CHECK(table().eval(0.1) > lab::levels::i_goe(0.1));
}

TEST_CASE("2xGOE table generation is deterministic and monotone") {
    const Goe2Table a = Goe2Table::generate(Goe2Table::kDefaultSeed, 20000);
    const Goe2Table b = Goe2Table::generate(Goe2Table::kDefaultSeed, 20000);
    CHECK(a.cdf() == b.cdf());
    for (std::size_t i = 1; i < a.cdf().size(); ++i) CHECK(a.cdf()[i] >= a.cdf()[i - 1]);
    CHECK(a.eval(0.0) == 0.0);
    CHECK(a.eval(100.0) == 1.0);
}

TEST_CASE("2xGOE table save/load round trip") {
    const Goe2Table a = Goe2Table::generate(7, 20000);
    std::ostringstream out;
    a.save(out);
    std::istringstream in(out.str());
    const Goe2Table b = Goe2Table::load(in);
    CHECK(a.grid() == b.grid());
    CHECK(a.cdf() == b.cdf());

    std::istringstream bad("nonsense\n");
    CHECK_THROWS_AS(static_cast<void>(Goe2Table::load(bad)), std::runtime_error);
}

TEST_CASE("sampled GOE matches the GOE reference") {
    // one unfolded dim-1000 sample sits at the statistical edge of the 0.03
    // band, so pool the spacings of four independent samples
    lab::levels::UnfoldedSpectrum pooled;
    pooled.fit_degree = 7;
    for (std::uint64_t seed : {23ull, 24ull, 25ull, 26ull}) {
        const auto energies = spectrum_of(test_support::goe_sample(1000, seed));
        const auto us = lab::levels::unfold(energies, 7);
        const double offset =
            pooled.levels.empty() ? 0.0 : pooled.levels.back() - us.levels.front() + 1.0;
        for (double level : us.levels) pooled.levels.push_back(level + offset);
    }
    const auto sd = lab::levels::integrated_spacing(pooled, lab::levels::default_s_grid(), table());
    CHECK(lab::levels::goe_distance(sd, Reference::goe) < 0.03);
    CHECK(lab::levels::goe_distance(sd, Reference::poisson) > 0.1);

    // empirical curve is a monotone CDF
    for (std::size_t i = 1; i < sd.empirical.size(); ++i) {
        CHECK(sd.empirical[i] >= sd.empirical[i - 1]);
    }
    CHECK(sd.empirical.front() >= 0.0);
    CHECK(sd.empirical.back() <= 1.0);
}

TEST_CASE("two interleaved GOE spectra match the superposition reference") {
    const auto ea = spectrum_of(test_support::goe_sample(1000, 31));
    const auto eb = spectrum_of(test_support::goe_sample(1000, 32));
    const auto ua = lab::levels::unfold(ea, 7);
    const auto ub = lab::levels::unfold(eb, 7);

    std::vector<double> merged;
    merged.insert(merged.end(), ua.levels.begin(), ua.levels.end());
    merged.insert(merged.end(), ub.levels.begin(), ub.levels.end());
    std::sort(merged.begin(), merged.end());
    std::vector<double> spacings(merged.size() - 1);
    double mean = 0.0;
    for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
        spacings[i] = merged[i + 1] - merged[i];
        mean += spacings[i];
    }
    mean /= static_cast<double>(spacings.size());
    for (double& s : spacings) s /= mean;
    std::sort(spacings.begin(), spacings.end());

    double dist = 0.0;
    for (double s : lab::levels::default_s_grid()) {
        const auto it = std::upper_bound(spacings.begin(), spacings.end(), s);
        const double emp = static_cast<double>(it - spacings.begin()) /
                           static_cast<double>(spacings.size());
        dist = std::max(dist, std::abs(emp - table().eval(s)));
    }
    CHECK(dist < 0.03);
}

TEST_CASE("distance to a matching reference vanishes") {
    lab::levels::SpacingDistribution sd;
    sd.s_grid = lab::levels::default_s_grid();
    for (double s : sd.s_grid) {
        sd.empirical.push_back(lab::levels::i_goe(s));
        sd.ref_goe.push_back(lab::levels::i_goe(s));
        sd.ref_poisson.push_back(lab::levels::i_poisson(s));
        sd.ref_goe2.push_back(table().eval(s));
    }
    CHECK(lab::levels::goe_distance(sd, Reference::goe) == 0.0);
    CHECK(lab::levels::goe_distance(sd, Reference::poisson) > 0.0);
}

TEST_CASE("critical epsilon sweep machinery") {
    lab::ops::ModelParams p;
    p.bosons = 4;
    p.sites = 5;
    const std::vector<double> grid = {0.05, 0.3};
    const auto result = lab::levels::critical_epsilon(p, grid, 0.05, table(), 7, 7);
    REQUIRE(result.curve.size() == 2);
    for (const auto& point : result.curve) {
        CHECK(point.dist_goe >= 0.0);
        CHECK(point.dist_goe2 >= 0.0);
        CHECK(point.dist_poisson >= 0.0);
    }
    CHECK_THROWS_AS(static_cast<void>(lab::levels::critical_epsilon(p, {0.3, 0.1}, 0.05, table())),
                    std::invalid_argument);
}
