#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lab/fock_basis.hpp"
#include "lab/markov.hpp"
#include "lab/operators.hpp"
#include "lab/runs.hpp"
#include "test_support.hpp"

using lab::evo::Ensemble;
using lab::evo::TimeGrid;
using lab::fock::FockBasis;
using lab::ops::BathObservable;
using lab::ops::ModelParams;

namespace {

struct Setup {
    ModelParams params;
    FockBasis basis;
    lab::spectra::EigenSystem bath;
    lab::spectra::EigenSystem composite;
    lab::ops::SparseOperator lambda;

    explicit Setup(ModelParams p)
        : params(p),
          basis(p.bosons, p.sites),
          bath(lab::spectra::diagonalize(lab::ops::build_bath_hamiltonian(p, basis))),
          composite(lab::spectra::diagonalize(lab::ops::build_total_hamiltonian(p, basis))),
          lambda(lab::ops::build_bath_observable(BathObservable::a1dag_a2_a2dag_a1, basis)) {}

    Ensemble eigenstate_ensemble(std::initializer_list<int> indices) const {
        std::vector<lab::evo::StateVector> members;
        for (int k : indices) {
            members.push_back(lab::evo::product_state(
                lab::runs::initial_system_amplitudes(),
                bath.vectors.col(k).cast<std::complex<double>>(), params.composite_tag()));
        }
        return lab::evo::uniform_ensemble(std::move(members));
    }
};

}  // namespace

TEST_CASE("factorization is exact at t = 0 for product ensembles") {
    Setup s(ModelParams{1.0, 0.8, 4, 3, 0.5, 0.2});
    for (auto indices : {std::initializer_list<int>{4}, {2, 7, 11}}) {
        const auto point = lab::markov::factorization_at(s.eigenstate_ensemble(indices),
                                                         s.lambda, 0.0);
        CHECK(point.residual_sum <= 1e-12);
        CHECK(point.lhs_sum > 0.0);
    }
}

TEST_CASE("factorization residual vanishes for all times without coupling") {
    Setup s(ModelParams{1.0, 0.8, 4, 3, 0.5, 0.0});
    const auto report = lab::markov::factorization_test(
        s.composite, s.eigenstate_ensemble({3, 8}), s.lambda, TimeGrid{0.0, 7.0, 6});
    for (const auto& p : report.points) CHECK(p.residual_sum <= 1e-10);
}

TEST_CASE("contracted observable is Hermitian and trace-consistent") {
    Setup s(ModelParams{1.0, 0.8, 4, 3, 0.5, 0.2});
    const auto initial = s.eigenstate_ensemble({1, 6, 13});
    const auto evolved = lab::evo::evolve_ensemble_to(s.composite, initial, 17.0);
    const Eigen::Matrix2cd lhs = lab::markov::contract_bath(evolved, s.lambda);
    CHECK((lhs - lhs.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
    const std::complex<double> trace_expect = lab::markov::bath_expectation(evolved, s.lambda);
    CHECK(std::abs(lhs.trace() - trace_expect) <= 1e-10);
}

TEST_CASE("bath invariance") {
    SUBCASE("zero deviation at t = 0 and for stationary baths") {
        Setup s(ModelParams{1.0, 0.8, 4, 3, 0.5, 0.0});
        const auto series = lab::markov::bath_invariance_test(
            s.composite, s.eigenstate_ensemble({2, 9}), s.lambda, TimeGrid{0.0, 11.0, 5});
        for (const auto& p : series) {
            CHECK(!p.absolute);
            CHECK(p.deviation <= 1e-10);
        }
    }
    SUBCASE("vanishing reference trace flips to absolute deviations") {
        Setup s(ModelParams{1.0, 0.8, 4, 3, 0.5, 0.2});
        // Hermitian bath operator with zero expectation in any number state
        lab::ops::SparseOperator traceless(static_cast<int>(s.basis.size()), s.basis.tag());
        traceless.add(0, 1, {0.35, 0.0});
        traceless.add(1, 0, {0.35, 0.0});
        traceless.canonicalize();
        // bath factor concentrated on basis state 2 so <0|T|1>-type terms vanish
        std::vector<lab::evo::StateVector> members;
        Eigen::VectorXcd bath_vec = Eigen::VectorXcd::Zero(static_cast<int>(s.basis.size()));
        bath_vec(2) = 1.0;
        members.push_back(lab::evo::product_state(lab::runs::initial_system_amplitudes(),
                                                  bath_vec, s.params.composite_tag()));
        const auto series = lab::markov::bath_invariance_test(
            s.composite, lab::evo::uniform_ensemble(std::move(members)), traceless,
            TimeGrid{0.0, 5.0, 3});
        CHECK(series.front().absolute);
        CHECK(series.front().deviation <= 1e-12);
    }
}

TEST_CASE("lambda validation") {
    Setup s(ModelParams{1.0, 0.8, 4, 3, 0.5, 0.2});
    lab::ops::SparseOperator not_hermitian(static_cast<int>(s.basis.size()), s.basis.tag());
    not_hermitian.add(0, 1, {1.0, 0.0});
    not_hermitian.canonicalize();
    CHECK_THROWS_AS(
        static_cast<void>(lab::markov::contract_bath(s.eigenstate_ensemble({0}), not_hermitian)),
        std::invalid_argument);

    lab::ops::SparseOperator wrong_dim(3, "bath:small");
    wrong_dim.add(0, 0, {1.0, 0.0});
    wrong_dim.canonicalize();
    CHECK_THROWS_AS(
        static_cast<void>(lab::markov::contract_bath(s.eigenstate_ensemble({0}), wrong_dim)),
        std::invalid_argument);
}
