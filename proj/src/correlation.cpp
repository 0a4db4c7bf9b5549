#include "lab/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lab::corr {

namespace {

void check_inputs(const spectra::EigenSystem& bath_es, const ops::SparseOperator& hop) {
    if (!bath_es.has_vectors()) {
        throw std::invalid_argument("correlation: eigensystem carries no eigenvectors");
    }
    if (hop.dim() != bath_es.dim()) {
        throw std::invalid_argument("correlation: operator and eigensystem dimensions differ");
    }
    if (hop.basis_tag() != bath_es.operator_tag) {
        throw std::invalid_argument("correlation: operator basis '" + hop.basis_tag() +
                                    "' does not match eigensystem basis '" + bath_es.operator_tag +
                                    "'");
    }
}

// A in the bath eigenbasis: A_tilde = V^T A V (real, A and V are real).
Eigen::MatrixXd operator_in_eigenbasis(const spectra::EigenSystem& bath_es,
                                       const ops::SparseOperator& hop) {
    const int n = bath_es.dim();
    Eigen::MatrixXd av = Eigen::MatrixXd::Zero(n, n);
    for (const auto& t : hop.triplets()) {
        if (t.value.imag() != 0.0) {
            throw std::invalid_argument("correlation: expected a real bath operator");
        }
        av.row(t.row) += t.value.real() * bath_es.vectors.row(t.col);
    }
    return bath_es.vectors.transpose() * av;
}

Eigen::VectorXcd phase_vector(const Eigen::VectorXd& energies, double tau) {
    Eigen::VectorXcd u(energies.size());
    for (Eigen::Index k = 0; k < energies.size(); ++k) u(k) = std::polar(1.0, energies(k) * tau);
    return u;
}

}  // namespace

CorrelationSeries correlation_time_domain(const spectra::EigenSystem& bath_es,
                                          const ops::SparseOperator& hop,
                                          const reduced::BathMatrix& rho_b,
                                          const evo::TimeGrid& taus, double t_anchor) {
    check_inputs(bath_es, hop);
    if (rho_b.dim() != bath_es.dim()) {
        throw std::invalid_argument("correlation: rho_B dimension mismatch");
    }

    const Eigen::MatrixXd a_eig = operator_in_eigenbasis(bath_es, hop);
    // rho_B in the eigenbasis through its factor, then B = A^dag rho.
    const Eigen::MatrixXcd factor_eig = evo::real_mat_apply_t(bath_es.vectors, rho_b.factor);
    const Eigen::MatrixXcd b = a_eig.transpose() * (factor_eig * factor_eig.adjoint());

    // alpha(tau) = sum_{jk} A_jk B_kj e^{i(E_k - E_j) tau} = u^dag C u with
    // C_jk = A_jk B_kj and u_k = e^{i E_k tau}.
    const Eigen::MatrixXcd kernel = a_eig.cwiseProduct(b.transpose());

    CorrelationSeries out;
    out.t_anchor = t_anchor;
    out.taus.reserve(static_cast<std::size_t>(taus.steps));
    out.values.reserve(static_cast<std::size_t>(taus.steps));
    for (int k = 0; k < taus.steps; ++k) {
        const double tau = taus.time(k);
        const Eigen::VectorXcd u = phase_vector(bath_es.energies, tau);
        out.taus.push_back(tau);
        out.values.push_back(u.dot(kernel * u));
    }
    return out;
}

CorrelationSeries correlation_spectral(const spectra::EigenSystem& bath_es,
                                       const ops::SparseOperator& hop, int initial_index,
                                       const evo::TimeGrid& taus) {
    check_inputs(bath_es, hop);
    if (initial_index < 0 || initial_index >= bath_es.dim()) {
        throw std::invalid_argument("correlation_spectral: initial state index out of range");
    }

    // Row j of A in the eigenbasis: <Psi_j|A|Psi_k> = (V^T A V)_{jk}.
    const Eigen::VectorXd psi_j = bath_es.vectors.col(initial_index);
    Eigen::VectorXd a_psi = Eigen::VectorXd::Zero(bath_es.dim());
    for (const auto& t : hop.triplets()) {
        a_psi(t.col) += t.value.real() * psi_j(t.row);  // (A^T psi_j), row j of A V
    }
    const Eigen::VectorXd row_j = bath_es.vectors.transpose() * a_psi;
    const Eigen::VectorXd weights = row_j.cwiseAbs2();
    const double e_j = bath_es.energies(initial_index);

    CorrelationSeries out;
    out.t_anchor = 0.0;
    out.taus.reserve(static_cast<std::size_t>(taus.steps));
    out.values.reserve(static_cast<std::size_t>(taus.steps));
    for (int s = 0; s < taus.steps; ++s) {
        const double tau = taus.time(s);
        Complex acc = 0.0;
        for (Eigen::Index k = 0; k < weights.size(); ++k) {
            if (weights(k) == 0.0) continue;
            acc += weights(k) * std::polar(1.0, (bath_es.energies(k) - e_j) * tau);
        }
        out.taus.push_back(tau);
        out.values.push_back(acc);
    }
    return out;
}

std::vector<TransitionSample> transition_weights(const spectra::EigenSystem& bath_es,
                                                 const ops::SparseOperator& hop,
                                                 const std::vector<int>& initial_indices) {
    check_inputs(bath_es, hop);
    if (initial_indices.empty()) {
        throw std::invalid_argument("transition_weights: empty initial-state set");
    }
    std::vector<TransitionSample> out;
    out.reserve(initial_indices.size() * static_cast<std::size_t>(bath_es.dim()));
    for (int j : initial_indices) {
        if (j < 0 || j >= bath_es.dim()) {
            throw std::invalid_argument("transition_weights: index out of range");
        }
        const Eigen::VectorXd psi_j = bath_es.vectors.col(j);
        Eigen::VectorXd a_psi = Eigen::VectorXd::Zero(bath_es.dim());
        for (const auto& t : hop.triplets()) a_psi(t.col) += t.value.real() * psi_j(t.row);
        const Eigen::VectorXd row_j = bath_es.vectors.transpose() * a_psi;
        for (Eigen::Index k = 0; k < row_j.size(); ++k) {
            out.push_back({bath_es.energies(k) - bath_es.energies(j), row_j(k) * row_j(k)});
        }
    }
    return out;
}

GaussianEnvelope fit_gaussian_envelope(const std::vector<double>& xs, const std::vector<double>& ys,
                                       int groups) {
    if (xs.size() != ys.size() || xs.empty()) {
        throw std::invalid_argument("fit_gaussian_envelope: bad sample arrays");
    }
    if (groups < 2) throw std::invalid_argument("fit_gaussian_envelope: need at least 2 groups");

    const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
    const double lo = *lo_it;
    const double span = std::max(*hi_it - lo, 1e-300);

    // Per-group crest: the maximal sample, kept at the abscissa where it
    // occurred so a smooth decaying input is reproduced exactly.
    std::vector<double> peak_x(static_cast<std::size_t>(groups), 0.0);
    std::vector<double> peak_y(static_cast<std::size_t>(groups), -1.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        int g = static_cast<int>((xs[i] - lo) / span * groups);
        g = std::clamp(g, 0, groups - 1);
        if (ys[i] > peak_y[static_cast<std::size_t>(g)]) {
            peak_y[static_cast<std::size_t>(g)] = ys[i];
            peak_x[static_cast<std::size_t>(g)] = xs[i];
        }
    }

    // Least squares of ln y against x^2.
    double sx = 0, sxx = 0, sy = 0, sxy = 0;
    int n = 0;
    for (int g = 0; g < groups; ++g) {
        const double y = peak_y[static_cast<std::size_t>(g)];
        if (y <= 0.0) continue;
        const double x2 = peak_x[static_cast<std::size_t>(g)] * peak_x[static_cast<std::size_t>(g)];
        const double ly = std::log(y);
        sx += x2;
        sxx += x2 * x2;
        sy += ly;
        sxy += x2 * ly;
        ++n;
    }
    if (n < 5) {
        throw std::runtime_error("fit_gaussian_envelope: fewer than 5 populated groups");
    }
    const double det = n * sxx - sx * sx;
    if (det == 0.0) throw std::runtime_error("fit_gaussian_envelope: degenerate abscissae");
    const double slope = (n * sxy - sx * sy) / det;   // = -1 / (2 sigma^2)
    const double intercept = (sy - slope * sx) / n;

    GaussianEnvelope env;
    env.amplitude = std::exp(intercept);
    env.decaying = slope < 0.0;
    env.sigma = env.decaying ? std::sqrt(-0.5 / slope) : 0.0;

    double ss = 0.0;
    int m = 0;
    for (int g = 0; g < groups; ++g) {
        const double y = peak_y[static_cast<std::size_t>(g)];
        if (y <= 0.0) continue;
        const double x2 = peak_x[static_cast<std::size_t>(g)] * peak_x[static_cast<std::size_t>(g)];
        const double r = std::log(y) - (intercept + slope * x2);
        ss += r * r;
        ++m;
    }
    env.rms_log_residual = std::sqrt(ss / m);
    return env;
}

MatrixElementStats matrix_element_statistics(const spectra::EigenSystem& bath_es,
                                             const ops::SparseOperator& hop,
                                             const std::vector<int>& initial_indices,
                                             double bin_width, int envelope_groups) {
    if (bin_width <= 0.0) {
        throw std::invalid_argument("matrix_element_statistics: bin_width must be positive");
    }
    const std::vector<TransitionSample> samples = transition_weights(bath_es, hop, initial_indices);

    double lo = samples.front().delta_e;
    double hi = lo;
    for (const auto& s : samples) {
        lo = std::min(lo, s.delta_e);
        hi = std::max(hi, s.delta_e);
    }
    const int bins = std::max(1, static_cast<int>(std::ceil((hi - lo) / bin_width)));
    std::vector<double> sum(static_cast<std::size_t>(bins), 0.0);
    std::vector<int> count(static_cast<std::size_t>(bins), 0);
    for (const auto& s : samples) {
        int b = static_cast<int>((s.delta_e - lo) / bin_width);
        b = std::clamp(b, 0, bins - 1);
        sum[static_cast<std::size_t>(b)] += s.weight;
        count[static_cast<std::size_t>(b)] += 1;
    }

    MatrixElementStats stats;
    for (int b = 0; b < bins; ++b) {
        if (count[static_cast<std::size_t>(b)] == 0) continue;
        stats.bin_centers.push_back(lo + (b + 0.5) * bin_width);
        stats.v_mean.push_back(sum[static_cast<std::size_t>(b)] /
                               count[static_cast<std::size_t>(b)]);
    }

    // The envelope describes the region that actually carries weight; the
    // far tails sit many decades down and would otherwise dominate the
    // log-space fit.
    constexpr double kSupportFloor = 1e-3;
    const double v_max = *std::max_element(stats.v_mean.begin(), stats.v_mean.end());
    std::vector<double> env_x;
    std::vector<double> env_y;
    for (std::size_t b = 0; b < stats.v_mean.size(); ++b) {
        if (stats.v_mean[b] >= kSupportFloor * v_max) {
            env_x.push_back(stats.bin_centers[b]);
            env_y.push_back(stats.v_mean[b]);
        }
    }
    stats.fit = fit_gaussian_envelope(env_x, env_y, envelope_groups);
    if (!stats.fit.decaying || stats.fit.sigma <= 0.0) {
        throw std::runtime_error("matrix_element_statistics: envelope is not a decaying Gaussian");
    }
    stats.tau_star = std::sqrt(2.0) / stats.fit.sigma;
    return stats;
}

CorrelationTime correlation_time(const CorrelationSeries& series, int envelope_bins) {
    if (series.taus.size() < 8) throw std::invalid_argument("correlation_time: series too short");
    if (!std::is_sorted(series.taus.begin(), series.taus.end())) {
        throw std::invalid_argument("correlation_time: tau grid must be ascending");
    }
    const double alpha0 = std::abs(series.values.front());
    if (alpha0 <= 0.0) throw std::invalid_argument("correlation_time: alpha(0) vanishes");

    std::vector<double> xs(series.taus.begin(), series.taus.end());
    std::vector<double> ys;
    ys.reserve(series.taus.size());
    for (const auto& v : series.values) ys.push_back(std::abs(v) / alpha0);

    const double tau_lo = xs.front();
    const double tau_hi = xs.back();

    // Sustained decay means the late half of the window stays below 1/e;
    // revivals (regular baths) keep coming back up.
    double late_max = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] >= tau_lo + 0.5 * (tau_hi - tau_lo)) late_max = std::max(late_max, ys[i]);
    }

    CorrelationTime out;
    constexpr double kExtinctionFloor = 0.05;
    out.extinction_time = tau_lo;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (ys[i] >= kExtinctionFloor) out.extinction_time = xs[i];
    }
    if (late_max >= std::exp(-1.0)) {
        out.envelope = fit_gaussian_envelope(xs, ys, envelope_bins);
        out.regular = true;
        return out;
    }

    // Fit only the decaying part, not the late-time background: cut where
    // the signal first reaches the background level, with a 1.5x margin.
    const double floor = std::max(0.05, late_max);
    double tau_cut = tau_hi;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (ys[i] <= floor) {
            tau_cut = xs[i];
            break;
        }
    }
    const double tau_fit = std::min(tau_lo + 1.5 * (tau_cut - tau_lo), tau_hi);
    std::vector<double> fit_x;
    std::vector<double> fit_y;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] <= tau_fit) {
            fit_x.push_back(xs[i]);
            fit_y.push_back(ys[i]);
        }
    }
    out.envelope = fit_gaussian_envelope(fit_x, fit_y, envelope_bins);
    if (!out.envelope.decaying) {
        out.regular = true;
        return out;
    }
    // Solve amplitude * exp(-tau^2 / (2 sigma^2)) = 1/e.
    const double arg = 1.0 + std::log(out.envelope.amplitude);
    if (arg <= 0.0) {
        out.regular = true;  // envelope never reaches 1/e from above
        return out;
    }
    const double tau_star = out.envelope.sigma * std::sqrt(2.0 * arg);
    if (tau_star > tau_hi - tau_lo) {
        out.regular = true;  // no crossing within the sampled window
        return out;
    }
    out.tau_star = tau_star;
    return out;
}

}  // namespace lab::corr
