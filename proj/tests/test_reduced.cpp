#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lab/evolution.hpp"
#include "lab/fock_basis.hpp"
#include "lab/operators.hpp"
#include "lab/reduced.hpp"
#include "test_support.hpp"

using lab::evo::Ensemble;
using lab::evo::StateVector;
using lab::fock::FockBasis;
using lab::ops::ModelParams;

namespace {

StateVector composite_state(const Eigen::VectorXcd& amplitudes) {
    StateVector s;
    s.amplitudes = amplitudes;
    s.basis_tag = "composite:test";
    return s;
}

StateVector product(double up_weight, const Eigen::VectorXcd& bath) {
    Eigen::Vector2cd sys;
    sys << std::sqrt(up_weight), std::sqrt(1.0 - up_weight);
    return lab::evo::product_state(sys, bath, "composite:test");
}

}  // namespace

TEST_CASE("partial trace of a product state") {
    const Eigen::VectorXcd bath = test_support::random_state(12, 5);
    const auto rho = lab::reduced::trace_out_bath(product(0.7, bath));
    CHECK(rho(0, 0).real() == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(rho(1, 1).real() == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(std::abs(rho(0, 1)) == doctest::Approx(std::sqrt(0.21)).epsilon(1e-12));
    CHECK(std::abs(rho.trace() - std::complex<double>(1.0)) < 1e-12);

    const auto rho_b = lab::reduced::trace_out_system(product(0.7, bath));
    const auto sd = lab::reduced::decompose(rho_b);
    REQUIRE(sd.weights.size() >= 1);
    CHECK(sd.weights(0) == doctest::Approx(1.0).epsilon(1e-12));  // rank one
}

TEST_CASE("maximally entangled state reduces to the identity") {
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(8);
    amps(0) = 1.0 / std::sqrt(2.0);   // |up, b1>
    amps(4 + 1) = 1.0 / std::sqrt(2.0);  // |down, b2>
    const auto rho = lab::reduced::trace_out_bath(composite_state(amps));
    CHECK(std::abs(rho(0, 0) - std::complex<double>(0.5)) < 1e-12);
    CHECK(std::abs(rho(1, 1) - std::complex<double>(0.5)) < 1e-12);
    CHECK(std::abs(rho(0, 1)) < 1e-12);
}

TEST_CASE("Schmidt and entropy identities for pure composite states") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const auto psi = composite_state(test_support::random_state(2 * 15, seed));
        const auto rho_s = lab::reduced::trace_out_bath(psi);
        const auto rho_b = lab::reduced::trace_out_system(psi);
        const auto sd_s = lab::reduced::decompose(rho_s);
        const auto sd_b = lab::reduced::decompose(rho_b);

        REQUIRE(sd_b.weights.size() == 2);  // rank <= 2 for pure composite
        CHECK(std::abs(sd_s.weights(0) - sd_b.weights(0)) <= 1e-9);
        CHECK(std::abs(sd_s.weights(1) - sd_b.weights(1)) <= 1e-9);
        CHECK(std::abs(lab::reduced::entropy(sd_s) - lab::reduced::entropy(sd_b)) <= 1e-9);

        // cross-check the factored decomposition against the dense matrix
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> dense(rho_b.dense());
        const auto& ev = dense.eigenvalues();
        CHECK(std::abs(ev(ev.size() - 1) - sd_b.weights(0)) <= 1e-10);
        CHECK(std::abs(ev(ev.size() - 2) - sd_b.weights(1)) <= 1e-10);
    }
}

TEST_CASE("partial trace is linear in the ensemble") {
    const auto a = composite_state(test_support::random_state(20, 11));
    const auto b = composite_state(test_support::random_state(20, 12));
    Ensemble e;
    e.members.push_back({0.25, a});
    e.members.push_back({0.75, b});
    const Eigen::Matrix2cd lhs = lab::reduced::trace_out_bath(e);
    const Eigen::Matrix2cd rhs =
        0.25 * lab::reduced::trace_out_bath(a) + 0.75 * lab::reduced::trace_out_bath(b);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(lab::reduced::trace_out_system(e).trace() - std::complex<double>(1.0)) <=
          1e-12);
}

TEST_CASE("entanglement measure G") {
    SUBCASE("vanishes for product states") {
        const auto psi = product(0.7, test_support::random_state(10, 21));
        CHECK(lab::reduced::entanglement_G(psi) <= 1e-12);
    }
    SUBCASE("vanishes for all times without coupling") {
        ModelParams p{1.0, 0.8, 3, 2, 0.5, 0.0};
        FockBasis basis(p.bosons, p.sites);
        const auto es = lab::spectra::diagonalize(lab::ops::build_total_hamiltonian(p, basis));
        const auto bath = lab::spectra::diagonalize(lab::ops::build_bath_hamiltonian(p, basis));
        const auto psi0 = product(0.7, bath.vectors.col(2).cast<std::complex<double>>());
        for (double t : {0.0, 3.0, 40.0}) {
            const auto psi_t = lab::evo::evolve_to(es, psi0, t);
            CHECK(lab::reduced::entanglement_G(psi_t) <= 1e-10);
        }
    }
    SUBCASE("is positive for an entangled state") {
        Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(8);
        amps(0) = 1.0 / std::sqrt(2.0);
        amps(5) = 1.0 / std::sqrt(2.0);
        CHECK(lab::reduced::entanglement_G(composite_state(amps)) > 0.3);
    }
    SUBCASE("ensemble weights can be rescaled without changing G") {
        const auto a = composite_state(test_support::random_state(16, 31));
        const auto b = composite_state(test_support::random_state(16, 32));
        Ensemble direct;
        direct.members.push_back({0.3, a});
        direct.members.push_back({0.7, b});
        Ensemble rescaled;  // same weights reached by scaling 3, 7 down
        rescaled.members.push_back({3.0 / 10.0, a});
        rescaled.members.push_back({7.0 / 10.0, b});
        CHECK(std::abs(lab::reduced::entanglement_G(direct) -
                       lab::reduced::entanglement_G(rescaled)) <= 1e-12);
    }
    SUBCASE("materialization cap is enforced with a named limit") {
        const auto psi = composite_state(test_support::random_state(64, 41));
        CHECK_THROWS_WITH_AS(static_cast<void>(lab::reduced::entanglement_G(psi, 32)),
                             doctest::Contains("cap 32"), std::invalid_argument);
    }
}

TEST_CASE("entropy of reduced weights") {
    Eigen::VectorXd pure(2), mixed(2), clipped(2);
    pure << 1.0, 0.0;
    mixed << 0.5, 0.5;
    clipped << 1.0, -5e-11;
    CHECK(lab::reduced::entropy(pure) == 0.0);
    CHECK(lab::reduced::entropy(mixed) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(lab::reduced::entropy(clipped) == 0.0);

    Eigen::VectorXd bad(2);
    bad << 1.0, -1e-9;
    CHECK_THROWS_AS(static_cast<void>(lab::reduced::entropy(bad)), std::runtime_error);
}

TEST_CASE("bath eigenstate expansion") {
    ModelParams p{1.0, 0.8, 4, 3, 0.5, 0.2};
    FockBasis basis(p.bosons, p.sites);
    const auto bath_es = lab::spectra::diagonalize(lab::ops::build_bath_hamiltonian(p, basis));
    const int dim_b = bath_es.dim();

    SUBCASE("a pure bath eigenstate expands to a unit coefficient") {
        StateVector psi;
        psi.basis_tag = "composite:test";
        psi.amplitudes = Eigen::VectorXcd::Zero(2 * dim_b);
        psi.amplitudes.head(dim_b) = bath_es.vectors.col(7).cast<std::complex<double>>();
        const auto expansion =
            lab::reduced::bath_eigenstate_expansion(lab::reduced::trace_out_system(psi), bath_es);
        REQUIRE(expansion.weights.size() == 1);
        CHECK(expansion.weights(0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(expansion.coefficients(7, 0)) == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("coefficient columns are normalized for random rank-2 states") {
        const auto psi = composite_state(test_support::random_state(2 * dim_b, 99));
        const auto expansion =
            lab::reduced::bath_eigenstate_expansion(lab::reduced::trace_out_system(psi), bath_es);
        for (Eigen::Index n = 0; n < expansion.weights.size(); ++n) {
            CHECK(expansion.coefficients.col(n).norm() == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}
