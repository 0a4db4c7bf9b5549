// markov.hpp — direct numerical tests of the factorization property
// Tr_B[Lambda R(t)] = Tr_B[Lambda rho_B(t)] rho_S(t) and of the
// bath-invariance of observable expectations

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lab/evolution.hpp"
#include "lab/reduced.hpp"

namespace lab::markov {

// System-space operator obtained by contracting a bath observable over the
// bath indices of the total density operator:
// out_{ss'} = sum_j w_j <block_{s'}^{(j)}| Lambda |block_s^{(j)}>.
// Hermitian whenever Lambda is.
Eigen::Matrix2cd contract_bath(const evo::Ensemble& ensemble, const ops::SparseOperator& lambda);

// Tr[Lambda rho_B] for the ensemble's reduced bath state.
std::complex<double> bath_expectation(const evo::Ensemble& ensemble,
                                      const ops::SparseOperator& lambda);

struct FactorizationPoint {
    double t{0.0};
    Eigen::Matrix2cd lhs;     // Tr_B[Lambda R(t)]
    Eigen::Matrix2cd rhs;     // Tr[Lambda rho_B(t)] rho_S(t)
    double residual_sum{0.0}; // sum of |lhs - rhs| over the four entries
    double lhs_sum{0.0};      // sum of |lhs| entries, for relative scales
};

struct FactorizationReport {
    std::vector<FactorizationPoint> points;
    double time_avg_residual{0.0};
    double time_avg_lhs{0.0};
};

FactorizationPoint factorization_at(const evo::Ensemble& ensemble,
                                    const ops::SparseOperator& lambda, double t);

// Evolves the initial ensemble across the grid (streaming) and evaluates
// both sides at every sample.
FactorizationReport factorization_test(const spectra::EigenSystem& es, const evo::Ensemble& initial,
                                       const ops::SparseOperator& lambda, const evo::TimeGrid& grid);

struct InvariancePoint {
    double t{0.0};
    double deviation{0.0};  // |Tr[L rho_B(t)] - Tr[L rho_B(0)]| / |Tr[L rho_B(0)]|
    bool absolute{false};   // flagged when the reference trace vanished
};

std::vector<InvariancePoint> bath_invariance_test(const spectra::EigenSystem& es,
                                                  const evo::Ensemble& initial,
                                                  const ops::SparseOperator& lambda,
                                                  const evo::TimeGrid& grid);

}  // namespace lab::markov
