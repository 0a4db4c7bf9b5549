// runs.hpp — shared drivers: canonical initial states and reduced-matrix
// time series for the exact composite simulation

#pragma once

#include <optional>
#include <vector>

#include "lab/cache.hpp"
#include "lab/evolution.hpp"
#include "lab/fock_basis.hpp"
#include "lab/operators.hpp"
#include "lab/reduced.hpp"
#include "lab/spectra.hpp"

namespace lab::runs {

// Canonical initial data used by the default experiments.
inline constexpr double kUpWeight = 0.7;           // |<up|psi>|^2 of the initial system state
inline constexpr double kTargetBathEnergy = 2.8361;  // centre-of-spectrum eigenstate
inline constexpr double kEnsembleWindowMin = 2.45;
inline constexpr double kEnsembleWindowMax = 3.21;

// (sqrt(0.7), sqrt(0.3)) coherent superposition of the two system levels.
Eigen::Vector2cd initial_system_amplitudes(double up_weight = kUpWeight);

// Product state (system superposition) x (bath eigenstate nearest `target`).
evo::StateVector pure_initial_state(const ops::ModelParams& params,
                                    const spectra::EigenSystem& bath_es,
                                    double target = kTargetBathEnergy,
                                    double up_weight = kUpWeight);

// Equal-weight ensemble of product states over all bath eigenstates in
// [emin, emax] (the smoother mixed-bath initial condition).
evo::Ensemble window_ensemble(const ops::ModelParams& params, const spectra::EigenSystem& bath_es,
                              double emin = kEnsembleWindowMin, double emax = kEnsembleWindowMax,
                              double up_weight = kUpWeight);

// Bath and composite eigensystems for a parameter set, computed directly or
// through the cache when one is supplied.
spectra::EigenSystem bath_eigensystem(const ops::ModelParams& params, cache::EigenCache* cache,
                                      int dim_cap = 8192);
spectra::EigenSystem composite_eigensystem(const ops::ModelParams& params,
                                           cache::EigenCache* cache, int dim_cap = 8192);

// rho_S(t) along the grid for an ensemble initial condition.
std::vector<Eigen::Matrix2cd> reduced_system_series(const spectra::EigenSystem& composite_es,
                                                    const evo::Ensemble& initial,
                                                    const evo::TimeGrid& grid);

}  // namespace lab::runs
