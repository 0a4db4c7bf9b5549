#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lab/correlation.hpp"
#include "lab/fock_basis.hpp"
#include "lab/operators.hpp"

using lab::evo::TimeGrid;
using lab::fock::FockBasis;
using lab::ops::BathObservable;
using lab::ops::ModelParams;

namespace {

struct Bath {
    ModelParams params;
    FockBasis basis;
    lab::spectra::EigenSystem es;
    lab::ops::SparseOperator hop;

    explicit Bath(ModelParams p)
        : params(p),
          basis(p.bosons, p.sites),
          es(lab::spectra::diagonalize(lab::ops::build_bath_hamiltonian(p, basis))),
          hop(lab::ops::build_bath_observable(BathObservable::a1dag_a2, basis)) {}
};

lab::reduced::BathMatrix eigenstate_density(const Bath& bath, int j) {
    lab::reduced::BathMatrix rho;
    rho.factor = bath.es.vectors.col(j).cast<std::complex<double>>();
    return rho;
}

}  // namespace

TEST_CASE("spectral and time-domain forms are mutual oracles") {
    for (auto [n, l] : {std::pair{2, 3}, {3, 4}}) {
        Bath bath(ModelParams{1.0, 0.8, l, n, 0.5, 0.2});
        const TimeGrid taus{0.0, 0.25, 41};
        for (int j : {0, bath.es.dim() / 2}) {
            const auto spectral = lab::corr::correlation_spectral(bath.es, bath.hop, j, taus);
            const auto timedom = lab::corr::correlation_time_domain(
                bath.es, bath.hop, eigenstate_density(bath, j), taus);
            const double scale = std::abs(spectral.values.front());
            REQUIRE(scale > 0.0);
            for (std::size_t i = 0; i < spectral.values.size(); ++i) {
                CHECK(std::abs(spectral.values[i] - timedom.values[i]) <= 1e-8 * scale);
            }
        }
    }
}

TEST_CASE("tau = 0 value is the direct operator expectation") {
    Bath bath(ModelParams{1.0, 0.8, 4, 3, 0.5, 0.2});
    const TimeGrid tau0{0.0, 1.0, 1};
    const int j = 4;
    const auto series = lab::corr::correlation_spectral(bath.es, bath.hop, j, tau0);

    // <Psi_j| A A^dag |Psi_j> with A = a1^dag a2
    const auto a_adag = lab::ops::build_bath_observable(BathObservable::a1dag_a2_a2dag_a1,
                                                        bath.basis);
    const Eigen::VectorXcd psi = bath.es.vectors.col(j).cast<std::complex<double>>();
    const double expectation = psi.dot(a_adag.apply(psi)).real();
    CHECK(series.values.front().real() == doctest::Approx(expectation).epsilon(1e-10));
    CHECK(std::abs(series.values.front().imag()) <= 1e-12);
    CHECK(series.values.front().real() >= 0.0);
}

TEST_CASE("two-site single-particle bath oscillates at one frequency") {
    // ground state of the 2x2 hopping Hamiltonian: alpha(tau) = (1 + e^{i tau}) / 4
    Bath bath(ModelParams{1.0, 0.0, 2, 1, 0.5, 0.2});
    const TimeGrid taus{0.0, 0.1, 64};
    const auto series = lab::corr::correlation_spectral(bath.es, bath.hop, 0, taus);
    for (std::size_t i = 0; i < series.taus.size(); ++i) {
        const std::complex<double> expected =
            0.25 * (1.0 + std::polar(1.0, series.taus[i]));
        CHECK(std::abs(series.values[i] - expected) <= 1e-12);
    }
}

TEST_CASE("diagonal bath densities give alpha(-tau) = conj(alpha(tau))") {
    Bath bath(ModelParams{1.0, 0.8, 4, 3, 0.5, 0.2});
    lab::reduced::BathMatrix rho;
    rho.factor.resize(bath.es.dim(), 3);
    rho.factor.col(0) = std::sqrt(0.5) * bath.es.vectors.col(3).cast<std::complex<double>>();
    rho.factor.col(1) = std::sqrt(0.3) * bath.es.vectors.col(8).cast<std::complex<double>>();
    rho.factor.col(2) = std::sqrt(0.2) * bath.es.vectors.col(11).cast<std::complex<double>>();

    const TimeGrid forward{0.0, 0.5, 9};
    const TimeGrid backward{0.0, -0.5, 9};
    const auto plus = lab::corr::correlation_time_domain(bath.es, bath.hop, rho, forward);
    const auto minus = lab::corr::correlation_time_domain(bath.es, bath.hop, rho, backward);
    for (std::size_t i = 0; i < plus.values.size(); ++i) {
        CHECK(std::abs(minus.values[i] - std::conj(plus.values[i])) <= 1e-10);
    }
}

TEST_CASE("transition weights are non-negative and complete") {
    Bath bath(ModelParams{1.0, 0.8, 4, 3, 0.5, 0.2});
    const auto samples = lab::corr::transition_weights(bath.es, bath.hop, {0, 5, 9});
    REQUIRE(samples.size() == 3 * static_cast<std::size_t>(bath.es.dim()));
    for (const auto& s : samples) CHECK(s.weight >= 0.0);
}

TEST_CASE("gaussian envelope fitting") {
    SUBCASE("exact gaussian samples are recovered") {
        std::vector<double> xs, ys;
        const double sigma = 1.3;
        for (int i = -60; i <= 60; ++i) {
            const double x = i * 0.1;
            xs.push_back(x);
            ys.push_back(2.0 * std::exp(-x * x / (2.0 * sigma * sigma)));
        }
        const auto fit = lab::corr::fit_gaussian_envelope(xs, ys, 15);
        CHECK(fit.decaying);
        CHECK(fit.sigma == doctest::Approx(sigma).epsilon(0.05));
        CHECK(fit.amplitude == doctest::Approx(2.0).epsilon(0.05));
    }
    SUBCASE("oscillatory fine structure rides on the recovered envelope") {
        std::vector<double> xs, ys;
        const double sigma = 0.9;
        for (int i = -400; i <= 400; ++i) {
            const double x = i * 0.01;
            xs.push_back(x);
            ys.push_back(std::exp(-x * x / (2.0 * sigma * sigma)) *
                         (1.0 + 0.5 * std::cos(9.0 * x)));
        }
        const auto fit = lab::corr::fit_gaussian_envelope(xs, ys, 17);
        CHECK(fit.decaying);
        CHECK(fit.sigma == doctest::Approx(sigma).epsilon(0.05));
    }
    SUBCASE("too few populated groups fail loudly") {
        std::vector<double> xs = {0.0, 1.0, 2.0};
        std::vector<double> ys = {1.0, 0.5, 0.2};
        CHECK_THROWS_AS(static_cast<void>(lab::corr::fit_gaussian_envelope(xs, ys, 15)),
                        std::runtime_error);
    }
}

TEST_CASE("matrix element statistics on the small chaotic bath") {
    Bath bath(ModelParams{1.0, 0.8, 5, 4, 0.5, 0.2});
    std::vector<int> j_set;
    for (int j = bath.es.dim() / 2 - 10; j < bath.es.dim() / 2 + 10; ++j) j_set.push_back(j);
    const double span = bath.es.energies(bath.es.dim() - 1) - bath.es.energies(0);
    const auto stats = lab::corr::matrix_element_statistics(bath.es, bath.hop, j_set, span / 100);
    CHECK(stats.fit.sigma > 0.0);
    CHECK(stats.tau_star == doctest::Approx(std::sqrt(2.0) / stats.fit.sigma));
    for (double v : stats.v_mean) CHECK(v >= 0.0);
    CHECK_THROWS_AS(static_cast<void>(lab::corr::matrix_element_statistics(bath.es, bath.hop,
                                                                           j_set, -1.0)),
                    std::invalid_argument);
}

TEST_CASE("correlation time") {
    SUBCASE("synthetic gaussian identity") {
        lab::corr::CorrelationSeries series;
        for (int i = 0; i <= 200; ++i) {
            const double tau = i * 0.05;
            series.taus.push_back(tau);
            series.values.emplace_back(std::exp(-(tau / 3.0) * (tau / 3.0)), 0.0);
        }
        const auto ct = lab::corr::correlation_time(series);
        REQUIRE(!ct.regular);
        CHECK(ct.tau_star == doctest::Approx(3.0).epsilon(0.05 / 3.0));
        // extinction at the 5% crossing of the same Gaussian
        CHECK(ct.extinction_time == doctest::Approx(3.0 * std::sqrt(std::log(20.0))).epsilon(0.02));
    }
    SUBCASE("constant series signals a regular bath") {
        lab::corr::CorrelationSeries series;
        for (int i = 0; i <= 100; ++i) {
            series.taus.push_back(i * 0.1);
            series.values.emplace_back(0.8, 0.0);
        }
        CHECK(lab::corr::correlation_time(series).regular);
    }
    SUBCASE("non-decaying oscillation signals a regular bath") {
        // the U = 0 two-site toy: |alpha| = |cos(tau/2)| / 2
        Bath bath(ModelParams{1.0, 0.0, 2, 1, 0.5, 0.2});
        const TimeGrid taus{0.0, 0.1, 201};
        const auto series = lab::corr::correlation_spectral(bath.es, bath.hop, 0, taus);
        CHECK(lab::corr::correlation_time(series).regular);
    }
}
