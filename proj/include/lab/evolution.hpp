// evolution.hpp — exact unitary time evolution via spectral decomposition

#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lab/spectra.hpp"

namespace lab::evo {

// Uniform sampling grid: times t0 + k * dt for k = 0 .. steps-1.
struct TimeGrid {
    double t0{0.0};
    double dt{1.0};
    int steps{1};

    double time(int k) const { return t0 + dt * k; }
};

struct StateVector {
    Eigen::VectorXcd amplitudes;
    std::string basis_tag;

    int dim() const noexcept { return static_cast<int>(amplitudes.size()); }
    double norm() const { return amplitudes.norm(); }
};

// Rank-r ensemble {(weight_j, |psi_j>)} standing in for a density operator
// sum_j w_j |psi_j><psi_j| without ever materializing it.
struct Ensemble {
    struct Member {
        double weight{1.0};
        StateVector state;
    };
    std::vector<Member> members;

    std::size_t size() const noexcept { return members.size(); }
    double total_weight() const;
    void validate() const;  // weights > 0, sum = 1 +- 1e-12, shared basis
};

// Equal-weight mixture of the given pure states.
Ensemble uniform_ensemble(std::vector<StateVector> states);

// Composite product state: amplitudes c[s * dim_bath + b] = sys[s] * bath[b].
// Both factors must be normalized.
StateVector product_state(const Eigen::Vector2cd& system_amps, const Eigen::VectorXcd& bath_amps,
                          const std::string& composite_tag);

// psi(t) = sum_k exp(-i E_k t) <k|psi0> |k>.
StateVector evolve_to(const spectra::EigenSystem& es, const StateVector& psi0, double t);
std::vector<StateVector> evolve(const spectra::EigenSystem& es, const StateVector& psi0,
                                const TimeGrid& grid);

Ensemble evolve_ensemble_to(const spectra::EigenSystem& es, const Ensemble& initial, double t);
std::vector<Ensemble> evolve_ensemble(const spectra::EigenSystem& es, const Ensemble& initial,
                                      const TimeGrid& grid);

// Streaming driver for long grids and large ensembles: the spectral
// coefficients are computed once, and each grid point's ensemble is built,
// handed to `visit`, then dropped. Memory stays at one ensemble.
void for_each_time(const spectra::EigenSystem& es, const Ensemble& initial, const TimeGrid& grid,
                   const std::function<void(int step, double t, const Ensemble&)>& visit);

// M * x for real M and complex x without materializing a complex copy of M.
Eigen::VectorXcd real_mat_apply(const Eigen::MatrixXd& m, const Eigen::VectorXcd& x);
Eigen::MatrixXcd real_mat_apply(const Eigen::MatrixXd& m, const Eigen::MatrixXcd& x);
// M^T * x
Eigen::VectorXcd real_mat_apply_t(const Eigen::MatrixXd& m, const Eigen::VectorXcd& x);
Eigen::MatrixXcd real_mat_apply_t(const Eigen::MatrixXd& m, const Eigen::MatrixXcd& x);

}  // namespace lab::evo
