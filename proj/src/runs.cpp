#include "lab/runs.hpp"

#include <cmath>
#include <stdexcept>

namespace lab::runs {

Eigen::Vector2cd initial_system_amplitudes(double up_weight) {
    if (up_weight < 0.0 || up_weight > 1.0) {
        throw std::invalid_argument("initial_system_amplitudes: weight outside [0, 1]");
    }
    Eigen::Vector2cd amps;
    amps(0) = std::sqrt(up_weight);
    amps(1) = std::sqrt(1.0 - up_weight);
    return amps;
}

evo::StateVector pure_initial_state(const ops::ModelParams& params,
                                    const spectra::EigenSystem& bath_es, double target,
                                    double up_weight) {
    if (!bath_es.has_vectors()) {
        throw std::invalid_argument("pure_initial_state: bath eigensystem has no vectors");
    }
    const int k = spectra::select_by_energy(bath_es, target);
    const Eigen::VectorXcd bath = bath_es.vectors.col(k).cast<std::complex<double>>();
    return evo::product_state(initial_system_amplitudes(up_weight), bath, params.composite_tag());
}

evo::Ensemble window_ensemble(const ops::ModelParams& params, const spectra::EigenSystem& bath_es,
                              double emin, double emax, double up_weight) {
    if (!bath_es.has_vectors()) {
        throw std::invalid_argument("window_ensemble: bath eigensystem has no vectors");
    }
    const std::vector<int> indices = spectra::select_window(bath_es, emin, emax);
    if (indices.empty()) {
        throw std::invalid_argument("window_ensemble: no bath eigenstates in the window");
    }
    const Eigen::Vector2cd sys = initial_system_amplitudes(up_weight);
    std::vector<evo::StateVector> members;
    members.reserve(indices.size());
    for (int k : indices) {
        members.push_back(evo::product_state(
            sys, bath_es.vectors.col(k).cast<std::complex<double>>(), params.composite_tag()));
    }
    return evo::uniform_ensemble(std::move(members));
}

spectra::EigenSystem bath_eigensystem(const ops::ModelParams& params, cache::EigenCache* cache,
                                      int dim_cap) {
    const fock::FockBasis basis(params.bosons, params.sites);
    const ops::SparseOperator h = ops::build_bath_hamiltonian(params, basis);
    if (cache != nullptr) return cache->full(h, cache::key_for_bath(params), dim_cap);
    return spectra::diagonalize(h, dim_cap);
}

spectra::EigenSystem composite_eigensystem(const ops::ModelParams& params,
                                           cache::EigenCache* cache, int dim_cap) {
    const fock::FockBasis basis(params.bosons, params.sites);
    const ops::SparseOperator h = ops::build_total_hamiltonian(params, basis);
    if (cache != nullptr) return cache->full(h, cache::key_for_composite(params), dim_cap);
    return spectra::diagonalize(h, dim_cap);
}

std::vector<Eigen::Matrix2cd> reduced_system_series(const spectra::EigenSystem& composite_es,
                                                    const evo::Ensemble& initial,
                                                    const evo::TimeGrid& grid) {
    std::vector<Eigen::Matrix2cd> series;
    series.reserve(static_cast<std::size_t>(grid.steps));
    evo::for_each_time(composite_es, initial, grid, [&](int, double, const evo::Ensemble& at_t) {
        series.push_back(reduced::trace_out_bath(at_t));
    });
    return series;
}

}  // namespace lab::runs
