// lindblad.hpp — two-level Lindblad master equation integrator and the
// epsilon^2 decay-rate scaling check against the exact simulation

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lab/cache.hpp"
#include "lab/evolution.hpp"
#include "lab/operators.hpp"

namespace lab::lindblad {

struct Channel {
    double rate{0.0};  // gamma_n >= 0, complete positivity of the generator
    Eigen::Matrix2cd op;
};

struct Model {
    Eigen::Matrix2cd hamiltonian;
    std::vector<Channel> channels;
};

// High-temperature bath surrogate: raising and lowering channels with equal
// rates, driving the populations to 1/2 each and the coherence to zero with
// |rho_ud(t)| = |rho_ud(0)| exp(-rate * t).
Model high_temperature_model(double splitting, double rate);

// Fixed-step RK4 of
// d rho/dt = -i[H, rho] - sum_n gamma_n/2 (rho V^dag V - 2 V rho V^dag + V^dag V rho),
// sampled on the grid. Integrates with internal substeps of at most
// `max_substep`; a halved-step consistency check runs once and throws if
// the discretization is too coarse. Trace and Hermiticity drift beyond
// 1e-9 or negativity beyond 1e-8 also throw.
std::vector<Eigen::Matrix2cd> integrate(const Model& model, const Eigen::Matrix2cd& rho0,
                                        const evo::TimeGrid& grid, double max_substep = 0.01);

struct DecayFit {
    bool exponential{false};  // false: no exponential regime detected
    double rate{0.0};
    double amplitude{0.0};
    double rms_log_residual{0.0};
    int window_begin{0};  // fitted sample range
    int window_end{0};
};

// Log-linear least squares of a positive decaying series. The default
// window runs from the start until the series first drops below
// `floor_fraction` of its initial value (noise floor of the finite bath).
DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& values,
                   double floor_fraction = 0.1);

struct ScalingRow {
    double epsilon{0.0};
    bool fit_ok{false};
    double rate{0.0};
    double rate_over_eps2{0.0};
    double rms_log_residual{0.0};
};

struct ScalingTable {
    std::vector<ScalingRow> rows;
    double relative_spread{0.0};  // spread of rate/eps^2 across ok rows
    bool proportional{false};     // spread within `spread_tol`
};

// Runs the exact composite simulation for each coupling value, fits the
// ensemble-averaged |rho_ud(t)| decay, and reports rate / eps^2 per row.
// Rows whose fit fails are flagged rather than fatal.
ScalingTable epsilon_scaling_check(const ops::ModelParams& base,
                                   const std::vector<double>& eps_list, const evo::TimeGrid& grid,
                                   cache::EigenCache* cache = nullptr, double spread_tol = 0.25);

}  // namespace lab::lindblad
