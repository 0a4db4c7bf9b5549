#include "lab/lindblad.hpp"

#include <cmath>
#include <stdexcept>

#include "lab/runs.hpp"

namespace lab::lindblad {

namespace {

Eigen::Matrix2cd generator(const Model& model, const Eigen::Matrix2cd& rho) {
    const std::complex<double> i_unit(0.0, 1.0);
    Eigen::Matrix2cd d = -i_unit * (model.hamiltonian * rho - rho * model.hamiltonian);
    for (const auto& ch : model.channels) {
        const Eigen::Matrix2cd vdv = ch.op.adjoint() * ch.op;
        d -= 0.5 * ch.rate * (rho * vdv - 2.0 * ch.op * rho * ch.op.adjoint() + vdv * rho);
    }
    return d;
}

Eigen::Matrix2cd rk4_step(const Model& model, const Eigen::Matrix2cd& rho, double h) {
    const Eigen::Matrix2cd k1 = generator(model, rho);
    const Eigen::Matrix2cd k2 = generator(model, rho + 0.5 * h * k1);
    const Eigen::Matrix2cd k3 = generator(model, rho + 0.5 * h * k2);
    const Eigen::Matrix2cd k4 = generator(model, rho + h * k3);
    Eigen::Matrix2cd next = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return 0.5 * (next + next.adjoint());  // keep roundoff Hermitian
}

Eigen::Matrix2cd advance(const Model& model, Eigen::Matrix2cd rho, double span, int substeps) {
    const double h = span / substeps;
    for (int i = 0; i < substeps; ++i) rho = rk4_step(model, rho, h);
    return rho;
}

void check_physical(const Eigen::Matrix2cd& rho) {
    if (std::abs(rho.trace().real() - 1.0) > 1e-9 || std::abs(rho.trace().imag()) > 1e-9) {
        throw std::runtime_error("lindblad: trace drifted beyond 1e-9");
    }
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::runtime_error("lindblad: Hermiticity lost");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(rho);
    if (solver.eigenvalues().minCoeff() < -1e-8) {
        throw std::runtime_error("lindblad: positivity violated beyond 1e-8 "
                                 "(generator or step-size bug)");
    }
}

}  // namespace

Model high_temperature_model(double splitting, double rate) {
    if (rate < 0.0) throw std::invalid_argument("high_temperature_model: negative rate");
    Model m;
    m.hamiltonian = splitting * ops::sigma_z();
    m.channels.push_back({rate, ops::sigma_minus()});
    m.channels.push_back({rate, ops::sigma_plus()});
    return m;
}

std::vector<Eigen::Matrix2cd> integrate(const Model& model, const Eigen::Matrix2cd& rho0,
                                        const evo::TimeGrid& grid, double max_substep) {
    if (max_substep <= 0.0) throw std::invalid_argument("integrate: max_substep must be positive");
    for (const auto& ch : model.channels) {
        if (ch.rate < 0.0) throw std::invalid_argument("integrate: negative channel rate");
    }
    if (std::abs(rho0.trace().real() - 1.0) > 1e-10) {
        throw std::invalid_argument("integrate: rho0 must have unit trace");
    }

    const int substeps = std::max(1, static_cast<int>(std::ceil(grid.dt / max_substep)));

    // One-time discretization check: the first interval integrated with
    // halved substeps must agree to 1e-8.
    if (grid.steps > 1) {
        const Eigen::Matrix2cd coarse = advance(model, rho0, grid.dt, substeps);
        const Eigen::Matrix2cd fine = advance(model, rho0, grid.dt, 2 * substeps);
        if ((coarse - fine).cwiseAbs().maxCoeff() > 1e-8) {
            throw std::invalid_argument("integrate: step too coarse, halving changes the result "
                                        "by more than 1e-8; reduce max_substep");
        }
    }

    std::vector<Eigen::Matrix2cd> out;
    out.reserve(static_cast<std::size_t>(grid.steps));
    Eigen::Matrix2cd rho = rho0;
    if (grid.t0 != 0.0) rho = advance(model, rho, grid.t0, std::max(1, static_cast<int>(std::ceil(grid.t0 / max_substep))));
    out.push_back(rho);
    check_physical(rho);
    for (int k = 1; k < grid.steps; ++k) {
        rho = advance(model, rho, grid.dt, substeps);
        check_physical(rho);
        out.push_back(rho);
    }
    return out;
}

DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& values,
                   double floor_fraction) {
    if (times.size() != values.size() || times.size() < 8) {
        throw std::invalid_argument("fit_decay: need at least 8 samples");
    }
    DecayFit fit;
    fit.window_begin = 0;

    const double start = values.front();
    if (!(start > 0.0)) return fit;  // nothing to fit

    // Window: from the start until the series first drops below the noise
    // floor (or the end).
    std::size_t end = values.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || values[i] < floor_fraction * start) {
            end = i + 1;
            break;
        }
    }
    if (end < 8) end = std::min<std::size_t>(8, values.size());
    fit.window_end = static_cast<int>(end) - 1;

    double st = 0, stt = 0, sy = 0, sty = 0;
    int n = 0;
    for (std::size_t i = 0; i < end; ++i) {
        if (!(values[i] > 0.0)) continue;
        const double ly = std::log(values[i]);
        st += times[i];
        stt += times[i] * times[i];
        sy += ly;
        sty += times[i] * ly;
        ++n;
    }
    if (n < 8) return fit;
    const double det = n * stt - st * st;
    if (det == 0.0) return fit;
    const double slope = (n * sty - st * sy) / det;
    const double intercept = (sy - slope * st) / n;

    double ss = 0.0;
    int m = 0;
    for (std::size_t i = 0; i < end; ++i) {
        if (!(values[i] > 0.0)) continue;
        const double r = std::log(values[i]) - (intercept + slope * times[i]);
        ss += r * r;
        ++m;
    }

    fit.rate = -slope;
    fit.amplitude = std::exp(intercept);
    fit.rms_log_residual = std::sqrt(ss / m);

    // An exponential regime needs an actual decay over the window: positive
    // rate and at least a factor-2 drop.
    const double window_span = times[end - 1] - times[0];
    fit.exponential = fit.rate > 1e-12 && fit.rate * window_span >= std::log(2.0);
    return fit;
}

ScalingTable epsilon_scaling_check(const ops::ModelParams& base, const std::vector<double>& eps_list,
                                   const evo::TimeGrid& grid, cache::EigenCache* cache,
                                   double spread_tol) {
    if (eps_list.size() < 3) {
        throw std::invalid_argument("epsilon_scaling_check: need at least 3 coupling values");
    }

    ScalingTable table;
    std::vector<double> normalized;
    for (double eps : eps_list) {
        ops::ModelParams p = base;
        p.coupling = eps;

        ScalingRow row;
        row.epsilon = eps;
        if (eps == 0.0) {
            // No coupling, no decay: recorded as a non-fit row.
            table.rows.push_back(row);
            continue;
        }

        const spectra::EigenSystem bath = runs::bath_eigensystem(p, cache);
        const spectra::EigenSystem composite = runs::composite_eigensystem(p, cache);
        const evo::Ensemble initial = runs::window_ensemble(p, bath);
        const std::vector<Eigen::Matrix2cd> rho_s =
            runs::reduced_system_series(composite, initial, grid);

        std::vector<double> times;
        std::vector<double> offdiag;
        times.reserve(rho_s.size());
        offdiag.reserve(rho_s.size());
        for (std::size_t k = 0; k < rho_s.size(); ++k) {
            times.push_back(grid.time(static_cast<int>(k)));
            offdiag.push_back(std::abs(rho_s[k](0, 1)));
        }
        const DecayFit fit = fit_decay(times, offdiag);
        row.fit_ok = fit.exponential;
        row.rate = fit.rate;
        row.rms_log_residual = fit.rms_log_residual;
        if (fit.exponential) {
            row.rate_over_eps2 = fit.rate / (eps * eps);
            normalized.push_back(row.rate_over_eps2);
        }
        table.rows.push_back(row);
    }

    if (normalized.size() >= 2) {
        double lo = normalized.front(), hi = normalized.front(), mean = 0.0;
        for (double v : normalized) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            mean += v;
        }
        mean /= static_cast<double>(normalized.size());
        table.relative_spread = (hi - lo) / mean;
        table.proportional = table.relative_spread <= spread_tol;
    }
    return table;
}

}  // namespace lab::lindblad
