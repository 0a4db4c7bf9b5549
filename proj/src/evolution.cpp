#include "lab/evolution.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace lab::evo {

namespace {

constexpr double kNormTol = 1e-8;

void check_grid(const TimeGrid& grid) {
    if (grid.dt <= 0.0) throw std::invalid_argument("TimeGrid: dt must be positive");
    if (grid.steps < 1) throw std::invalid_argument("TimeGrid: steps must be >= 1");
}

Eigen::VectorXcd phases(const Eigen::VectorXd& energies, double t) {
    Eigen::VectorXcd ph(energies.size());
    for (Eigen::Index k = 0; k < energies.size(); ++k) {
        ph(k) = std::polar(1.0, -energies(k) * t);
    }
    return ph;
}

}  // namespace

double Ensemble::total_weight() const {
    double w = 0.0;
    for (const auto& m : members) w += m.weight;
    return w;
}

void Ensemble::validate() const {
    if (members.empty()) throw std::invalid_argument("Ensemble: no members");
    for (const auto& m : members) {
        if (!(m.weight > 0.0)) throw std::invalid_argument("Ensemble: weights must be positive");
        if (m.state.basis_tag != members.front().state.basis_tag ||
            m.state.dim() != members.front().state.dim()) {
            throw std::invalid_argument("Ensemble: members live in different bases");
        }
    }
    if (std::abs(total_weight() - 1.0) > 1e-12) {
        throw std::invalid_argument("Ensemble: weights must sum to 1");
    }
}

Ensemble uniform_ensemble(std::vector<StateVector> states) {
    if (states.empty()) throw std::invalid_argument("uniform_ensemble: no states");
    Ensemble e;
    const double w = 1.0 / static_cast<double>(states.size());
    e.members.reserve(states.size());
    for (auto& s : states) e.members.push_back({w, std::move(s)});
    return e;
}

StateVector product_state(const Eigen::Vector2cd& system_amps, const Eigen::VectorXcd& bath_amps,
                          const std::string& composite_tag) {
    if (std::abs(system_amps.norm() - 1.0) > kNormTol) {
        throw std::invalid_argument("product_state: system factor is not normalized");
    }
    if (std::abs(bath_amps.norm() - 1.0) > kNormTol) {
        throw std::invalid_argument("product_state: bath factor is not normalized");
    }
    const Eigen::Index dim_bath = bath_amps.size();
    StateVector out;
    out.basis_tag = composite_tag;
    out.amplitudes.resize(2 * dim_bath);
    out.amplitudes.head(dim_bath) = system_amps(0) * bath_amps;
    out.amplitudes.tail(dim_bath) = system_amps(1) * bath_amps;
    return out;
}

Eigen::VectorXcd real_mat_apply(const Eigen::MatrixXd& m, const Eigen::VectorXcd& x) {
    Eigen::VectorXcd y(m.rows());
    y.real() = m * x.real();
    y.imag() = m * x.imag();
    return y;
}

Eigen::MatrixXcd real_mat_apply(const Eigen::MatrixXd& m, const Eigen::MatrixXcd& x) {
    Eigen::MatrixXcd y(m.rows(), x.cols());
    y.real() = m * x.real();
    y.imag() = m * x.imag();
    return y;
}

Eigen::VectorXcd real_mat_apply_t(const Eigen::MatrixXd& m, const Eigen::VectorXcd& x) {
    Eigen::VectorXcd y(m.cols());
    y.real() = m.transpose() * x.real();
    y.imag() = m.transpose() * x.imag();
    return y;
}

Eigen::MatrixXcd real_mat_apply_t(const Eigen::MatrixXd& m, const Eigen::MatrixXcd& x) {
    Eigen::MatrixXcd y(m.cols(), x.cols());
    y.real() = m.transpose() * x.real();
    y.imag() = m.transpose() * x.imag();
    return y;
}

namespace {

void check_state(const spectra::EigenSystem& es, const StateVector& psi) {
    if (!es.has_vectors()) {
        throw std::invalid_argument("evolve: eigensystem carries no eigenvectors");
    }
    if (psi.dim() != es.dim()) throw std::invalid_argument("evolve: dimension mismatch");
    if (std::abs(psi.norm() - 1.0) > kNormTol) {
        throw std::invalid_argument("evolve: state is not normalized");
    }
}

}  // namespace

StateVector evolve_to(const spectra::EigenSystem& es, const StateVector& psi0, double t) {
    check_state(es, psi0);
    const Eigen::VectorXcd coeff = real_mat_apply_t(es.vectors, psi0.amplitudes);
    const Eigen::VectorXcd modulated = phases(es.energies, t).cwiseProduct(coeff);
    StateVector out;
    out.basis_tag = psi0.basis_tag;
    out.amplitudes = real_mat_apply(es.vectors, modulated);
    return out;
}

std::vector<StateVector> evolve(const spectra::EigenSystem& es, const StateVector& psi0,
                                const TimeGrid& grid) {
    check_grid(grid);
    check_state(es, psi0);
    const Eigen::VectorXcd coeff = real_mat_apply_t(es.vectors, psi0.amplitudes);
    std::vector<StateVector> out;
    out.reserve(static_cast<std::size_t>(grid.steps));
    for (int k = 0; k < grid.steps; ++k) {
        const Eigen::VectorXcd modulated = phases(es.energies, grid.time(k)).cwiseProduct(coeff);
        out.push_back({real_mat_apply(es.vectors, modulated), psi0.basis_tag});
    }
    return out;
}

namespace {

// All members' spectral coefficients side by side, so one GEMM per grid
// point reconstructs the whole ensemble.
Eigen::MatrixXcd ensemble_coefficients(const spectra::EigenSystem& es, const Ensemble& initial) {
    Eigen::MatrixXcd stacked(es.dim(), static_cast<Eigen::Index>(initial.size()));
    for (std::size_t j = 0; j < initial.size(); ++j) {
        check_state(es, initial.members[j].state);
        stacked.col(static_cast<Eigen::Index>(j)) = initial.members[j].state.amplitudes;
    }
    return real_mat_apply_t(es.vectors, stacked);
}

Ensemble rebuild_at(const spectra::EigenSystem& es, const Ensemble& initial,
                    const Eigen::MatrixXcd& coeff, double t) {
    const Eigen::VectorXcd ph = phases(es.energies, t);
    Eigen::MatrixXcd modulated = coeff;
    for (Eigen::Index c = 0; c < modulated.cols(); ++c) {
        modulated.col(c) = modulated.col(c).cwiseProduct(ph);
    }
    const Eigen::MatrixXcd amps = real_mat_apply(es.vectors, modulated);
    Ensemble out;
    out.members.resize(initial.size());
    for (std::size_t j = 0; j < initial.size(); ++j) {
        out.members[j].weight = initial.members[j].weight;
        out.members[j].state.basis_tag = initial.members[j].state.basis_tag;
        out.members[j].state.amplitudes = amps.col(static_cast<Eigen::Index>(j));
    }
    return out;
}

}  // namespace

Ensemble evolve_ensemble_to(const spectra::EigenSystem& es, const Ensemble& initial, double t) {
    initial.validate();
    return rebuild_at(es, initial, ensemble_coefficients(es, initial), t);
}

std::vector<Ensemble> evolve_ensemble(const spectra::EigenSystem& es, const Ensemble& initial,
                                      const TimeGrid& grid) {
    check_grid(grid);
    initial.validate();
    const Eigen::MatrixXcd coeff = ensemble_coefficients(es, initial);
    std::vector<Ensemble> out;
    out.reserve(static_cast<std::size_t>(grid.steps));
    for (int k = 0; k < grid.steps; ++k) {
        out.push_back(rebuild_at(es, initial, coeff, grid.time(k)));
    }
    return out;
}

void for_each_time(const spectra::EigenSystem& es, const Ensemble& initial, const TimeGrid& grid,
                   const std::function<void(int, double, const Ensemble&)>& visit) {
    check_grid(grid);
    initial.validate();
    const Eigen::MatrixXcd coeff = ensemble_coefficients(es, initial);
    for (int k = 0; k < grid.steps; ++k) {
        const double t = grid.time(k);
        visit(k, t, rebuild_at(es, initial, coeff, t));
    }
}

}  // namespace lab::evo
