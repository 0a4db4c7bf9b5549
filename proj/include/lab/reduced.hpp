// reduced.hpp — partial traces, the entanglement measure G, entropy and
// Schmidt analysis of the composite spin (x) bath state

#pragma once

#include <Eigen/Dense>

#include "lab/evolution.hpp"
#include "lab/spectra.hpp"

namespace lab::reduced {

// rho_S = Tr_B R: Hermitian, unit trace, eigenvalues in [0, 1].
// Composite layout is spin-major: amplitude index s * dim_bath + b.
Eigen::Matrix2cd trace_out_bath(const evo::StateVector& psi);
Eigen::Matrix2cd trace_out_bath(const evo::Ensemble& ensemble);

// rho_B = Tr_S R held in factored form: rho_B = factor * factor^dag with one
// weighted column per (member, spin block). Rank <= 2 for a pure composite
// state. dense() materializes the dim_B x dim_B matrix.
struct BathMatrix {
    Eigen::MatrixXcd factor;

    Eigen::Index dim() const noexcept { return factor.rows(); }
    Eigen::Index rank_bound() const noexcept { return factor.cols(); }
    Eigen::MatrixXcd dense() const { return factor * factor.adjoint(); }
    std::complex<double> trace() const { return {factor.squaredNorm(), 0.0}; }

    // Tr[op * rho_B] without materializing rho_B.
    std::complex<double> expectation(const ops::SparseOperator& op) const;
};

BathMatrix trace_out_system(const evo::StateVector& psi);
BathMatrix trace_out_system(const evo::Ensemble& ensemble);

// Entanglement measure G = |R - rho_B (x) rho_S| / |R| with |M| the sum of
// entry magnitudes, evaluated in the canonical product basis. Materializes
// the dim x dim total density matrix, hence the dimension cap (default
// 4096: ~270 MB of complex doubles).
double entanglement_G(const evo::StateVector& psi, int dim_cap = 4096);
double entanglement_G(const evo::Ensemble& ensemble, int dim_cap = 4096);

// Eigendecomposition of a reduced state: weights descending, columns
// orthonormal. Weights in [-1e-10, 0) are clipped to zero; anything more
// negative signals a numerics bug and throws.
struct SpectralDecomposition {
    Eigen::VectorXd weights;
    Eigen::MatrixXcd states;
};

SpectralDecomposition decompose(const Eigen::Matrix2cd& rho_s);
// Nonzero part of the bath spectrum via the rank-limited factor (exact).
SpectralDecomposition decompose(const BathMatrix& rho_b, double weight_floor = 1e-12);

// Von Neumann entropy -sum w ln w of a decomposition (0 ln 0 = 0).
double entropy(const SpectralDecomposition& sd);
double entropy(const Eigen::VectorXd& weights);

// Expansion of the dominant rho_B eigenvectors over the bath energy basis:
// coefficients(j, n) = <Psi_j | Phi_n>, rows ordered by bath energy.
struct BathExpansion {
    Eigen::VectorXd weights;       // descending, one per kept eigenvector
    Eigen::MatrixXcd coefficients; // dim_B x kept
};

BathExpansion bath_eigenstate_expansion(const BathMatrix& rho_b,
                                        const spectra::EigenSystem& bath_es,
                                        double weight_floor = 1e-12);

}  // namespace lab::reduced
