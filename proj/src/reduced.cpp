#include "lab/reduced.hpp"

#include <cmath>
#include <stdexcept>

namespace lab::reduced {

namespace {

Eigen::Index bath_dim_of(const evo::StateVector& psi) {
    if (psi.dim() % 2 != 0) {
        throw std::invalid_argument("reduced: composite dimension must be 2 * dim_bath");
    }
    return psi.dim() / 2;
}

}  // namespace

Eigen::Matrix2cd trace_out_bath(const evo::StateVector& psi) {
    const Eigen::Index db = bath_dim_of(psi);
    const auto up = psi.amplitudes.head(db);
    const auto down = psi.amplitudes.tail(db);
    Eigen::Matrix2cd rho;
    rho(0, 0) = up.squaredNorm();
    rho(1, 1) = down.squaredNorm();
    rho(0, 1) = down.dot(up);  // sum_b psi_up[b] conj(psi_down[b])
    rho(1, 0) = std::conj(rho(0, 1));
    return rho;
}

Eigen::Matrix2cd trace_out_bath(const evo::Ensemble& ensemble) {
    ensemble.validate();
    Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
    for (const auto& m : ensemble.members) {
        rho += m.weight * trace_out_bath(m.state);
    }
    return rho;
}

std::complex<double> BathMatrix::expectation(const ops::SparseOperator& op) const {
    if (op.dim() != dim()) throw std::invalid_argument("BathMatrix::expectation: dimension mismatch");
    // Tr[op F F^dag] = sum_c (F col)^dag op (F col)
    std::complex<double> acc = 0.0;
    for (Eigen::Index c = 0; c < factor.cols(); ++c) {
        const Eigen::VectorXcd col = factor.col(c);
        acc += col.dot(op.apply(col));
    }
    return acc;
}

BathMatrix trace_out_system(const evo::StateVector& psi) {
    const Eigen::Index db = bath_dim_of(psi);
    BathMatrix out;
    out.factor.resize(db, 2);
    out.factor.col(0) = psi.amplitudes.head(db);
    out.factor.col(1) = psi.amplitudes.tail(db);
    return out;
}

BathMatrix trace_out_system(const evo::Ensemble& ensemble) {
    ensemble.validate();
    const Eigen::Index db = bath_dim_of(ensemble.members.front().state);
    BathMatrix out;
    out.factor.resize(db, 2 * static_cast<Eigen::Index>(ensemble.size()));
    for (std::size_t j = 0; j < ensemble.size(); ++j) {
        const double root = std::sqrt(ensemble.members[j].weight);
        const auto& amps = ensemble.members[j].state.amplitudes;
        out.factor.col(2 * static_cast<Eigen::Index>(j)) = root * amps.head(db);
        out.factor.col(2 * static_cast<Eigen::Index>(j) + 1) = root * amps.tail(db);
    }
    return out;
}

namespace {

void check_g_cap(Eigen::Index dim, int dim_cap) {
    if (dim > dim_cap) {
        throw std::invalid_argument(
            "entanglement_G: composite dimension " + std::to_string(dim) +
            " exceeds the materialization cap " + std::to_string(dim_cap) +
            " (the measure needs the full density matrix; raise the cap only if memory allows)");
    }
}

double entanglement_from_total(const Eigen::MatrixXcd& total, const Eigen::MatrixXcd& rho_b,
                               const Eigen::Matrix2cd& rho_s) {
    const Eigen::Index db = rho_b.rows();
    const auto mag = [](const std::complex<double>& z) {
        return std::sqrt(z.real() * z.real() + z.imag() * z.imag());
    };
    double num = 0.0;
    double den = 0.0;
    for (int s = 0; s < 2; ++s) {
        for (int sp = 0; sp < 2; ++sp) {
            const std::complex<double> rs = rho_s(s, sp);
            for (Eigen::Index bp = 0; bp < db; ++bp) {
                for (Eigen::Index b = 0; b < db; ++b) {
                    const std::complex<double> r = total(s * db + b, sp * db + bp);
                    num += mag(r - rs * rho_b(b, bp));
                    den += mag(r);
                }
            }
        }
    }
    if (den == 0.0) throw std::runtime_error("entanglement_G: zero total density matrix");
    return num / den;
}

}  // namespace

double entanglement_G(const evo::StateVector& psi, int dim_cap) {
    check_g_cap(psi.dim(), dim_cap);
    const Eigen::MatrixXcd total = psi.amplitudes * psi.amplitudes.adjoint();
    const Eigen::MatrixXcd rho_b = trace_out_system(psi).dense();
    const Eigen::Matrix2cd rho_s = trace_out_bath(psi);
    return entanglement_from_total(total, rho_b, rho_s);
}

double entanglement_G(const evo::Ensemble& ensemble, int dim_cap) {
    ensemble.validate();
    const int dim = ensemble.members.front().state.dim();
    check_g_cap(dim, dim_cap);

    Eigen::MatrixXcd weighted(dim, static_cast<Eigen::Index>(ensemble.size()));
    for (std::size_t j = 0; j < ensemble.size(); ++j) {
        weighted.col(static_cast<Eigen::Index>(j)) =
            std::sqrt(ensemble.members[j].weight) * ensemble.members[j].state.amplitudes;
    }
    const Eigen::MatrixXcd total = weighted * weighted.adjoint();
    const Eigen::MatrixXcd rho_b = trace_out_system(ensemble).dense();
    const Eigen::Matrix2cd rho_s = trace_out_bath(ensemble);
    return entanglement_from_total(total, rho_b, rho_s);
}

namespace {

constexpr double kNegativityTol = 1e-10;

double clip_weight(double w) {
    if (w < -kNegativityTol) {
        throw std::runtime_error("reduced: density matrix eigenvalue " + std::to_string(w) +
                                 " below -1e-10; numerics bug upstream");
    }
    return w < 0.0 ? 0.0 : w;
}

}  // namespace

SpectralDecomposition decompose(const Eigen::Matrix2cd& rho_s) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(rho_s);
    if (solver.info() != Eigen::Success) throw std::runtime_error("decompose: 2x2 eigen failed");
    SpectralDecomposition sd;
    sd.weights.resize(2);
    sd.states.resize(2, 2);
    // ascending from Eigen; flip to descending
    for (int n = 0; n < 2; ++n) {
        sd.weights(n) = clip_weight(solver.eigenvalues()(1 - n));
        sd.states.col(n) = solver.eigenvectors().col(1 - n);
    }
    return sd;
}

SpectralDecomposition decompose(const BathMatrix& rho_b, double weight_floor) {
    // Nonzero spectrum of F F^dag equals that of the small Gram matrix
    // F^dag F; eigenvectors lift back through F.
    const Eigen::MatrixXcd gram = rho_b.factor.adjoint() * rho_b.factor;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram);
    if (solver.info() != Eigen::Success) throw std::runtime_error("decompose: Gram eigen failed");

    const Eigen::Index r = gram.rows();
    std::vector<std::pair<double, Eigen::Index>> order;
    for (Eigen::Index k = 0; k < r; ++k) {
        order.emplace_back(clip_weight(solver.eigenvalues()(k)), k);
    }
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    Eigen::Index kept = 0;
    while (kept < r && order[static_cast<std::size_t>(kept)].first > weight_floor) ++kept;

    SpectralDecomposition sd;
    sd.weights.resize(kept);
    sd.states.resize(rho_b.dim(), kept);
    for (Eigen::Index n = 0; n < kept; ++n) {
        const auto& [w, idx] = order[static_cast<std::size_t>(n)];
        sd.weights(n) = w;
        sd.states.col(n) = rho_b.factor * solver.eigenvectors().col(idx) / std::sqrt(w);
    }
    return sd;
}

double entropy(const Eigen::VectorXd& weights) {
    double s = 0.0;
    for (Eigen::Index n = 0; n < weights.size(); ++n) {
        const double w = clip_weight(weights(n));
        if (w > 0.0) s -= w * std::log(w);
    }
    return s;
}

double entropy(const SpectralDecomposition& sd) { return entropy(sd.weights); }

BathExpansion bath_eigenstate_expansion(const BathMatrix& rho_b,
                                        const spectra::EigenSystem& bath_es, double weight_floor) {
    if (!bath_es.has_vectors()) {
        throw std::invalid_argument("bath_eigenstate_expansion: eigensystem carries no vectors");
    }
    if (bath_es.dim() != rho_b.dim()) {
        throw std::invalid_argument("bath_eigenstate_expansion: dimension mismatch");
    }
    const SpectralDecomposition sd = decompose(rho_b, weight_floor);
    BathExpansion out;
    out.weights = sd.weights;
    out.coefficients = evo::real_mat_apply_t(bath_es.vectors, sd.states);
    return out;
}

}  // namespace lab::reduced
