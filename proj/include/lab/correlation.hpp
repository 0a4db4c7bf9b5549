// correlation.hpp — bath correlation function, transition matrix element
// statistics and the correlation time

#pragma once

#include <complex>
#include <vector>

#include "lab/evolution.hpp"
#include "lab/reduced.hpp"

namespace lab::corr {

using Complex = std::complex<double>;

struct CorrelationSeries {
    std::vector<double> taus;
    std::vector<Complex> values;
    double t_anchor{0.0};  // time at which rho_B was taken
};

// alpha(tau) = Tr[exp(-i H_B tau) A exp(i H_B tau) A^dag rho_B] with
// A = a1^dag a2, evaluated through the bath eigenbasis. `hop` must be the
// a1^dag a2 operator on the same basis the eigensystem was computed in.
CorrelationSeries correlation_time_domain(const spectra::EigenSystem& bath_es,
                                          const ops::SparseOperator& hop,
                                          const reduced::BathMatrix& rho_b,
                                          const evo::TimeGrid& taus, double t_anchor = 0.0);

// Spectral form for rho_B = |Psi_j><Psi_j|:
// alpha(tau) = sum_k |<Psi_j|A|Psi_k>|^2 exp(i (E_k - E_j) tau).
// Agrees with the time-domain form for a pure eigenstate bath.
CorrelationSeries correlation_spectral(const spectra::EigenSystem& bath_es,
                                       const ops::SparseOperator& hop, int initial_index,
                                       const evo::TimeGrid& taus);

// One squared transition element: delta_e = E_k - E_j,
// weight = |<Psi_j|A|Psi_k>|^2.
struct TransitionSample {
    double delta_e{0.0};
    double weight{0.0};
};

std::vector<TransitionSample> transition_weights(const spectra::EigenSystem& bath_es,
                                                 const ops::SparseOperator& hop,
                                                 const std::vector<int>& initial_indices);

// Least-squares Gaussian envelope ln y = ln(amplitude) - x^2 / (2 sigma^2),
// fitted through the per-group maxima of the samples (the crests of an
// oscillatory curve), each at the abscissa where the maximum occurred.
struct GaussianEnvelope {
    double amplitude{0.0};
    double sigma{0.0};
    double rms_log_residual{0.0};
    bool decaying{false};  // false when the fitted curvature is not negative
};

GaussianEnvelope fit_gaussian_envelope(const std::vector<double>& xs,
                                       const std::vector<double>& ys, int groups);

struct MatrixElementStats {
    std::vector<double> bin_centers;  // Delta E grid
    std::vector<double> v_mean;       // bar V per bin (empty bins dropped)
    GaussianEnvelope fit;
    double tau_star{0.0};  // sqrt(2) / sigma
};

// Bins |<Psi_j|A|Psi_k>|^2 against Delta E, averages within bins and over
// the initial-state set, and fits the Gaussian envelope through the local
// peaks. Throws if fewer than 5 envelope groups are populated.
MatrixElementStats matrix_element_statistics(const spectra::EigenSystem& bath_es,
                                             const ops::SparseOperator& hop,
                                             const std::vector<int>& initial_indices,
                                             double bin_width, int envelope_groups = 15);

struct CorrelationTime {
    bool regular{false};  // no sustained decay (a regular, non-chaotic bath)
    double tau_star{0.0}; // 1/e crossing of the fitted envelope; valid when !regular
    // Last tau at which |alpha| still reaches 5% of alpha(0): the point
    // beyond which correlations are extinguished. This is the scale visible
    // in a plot of alpha(tau); the 1/e width of the initial Gaussian drop is
    // considerably shorter whenever secondary structure follows it.
    double extinction_time{0.0};
    GaussianEnvelope envelope;
};

// tau* = the tau where the fitted Gaussian envelope of |alpha(tau)| /
// |alpha(0)| crosses 1/e. The envelope is fitted over the decaying part of
// the series only (up to 1.5x the first crossing of the late-time
// background level). Reports regular = true when the late half of the
// window still reaches 1/e (revivals), when the envelope does not decay,
// or when the crossing lies beyond the sampled range.
CorrelationTime correlation_time(const CorrelationSeries& series, int envelope_bins = 12);

}  // namespace lab::corr
