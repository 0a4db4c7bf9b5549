#include "lab/markov.hpp"

#include <cmath>
#include <stdexcept>

namespace lab::markov {

namespace {

void check_lambda(const evo::Ensemble& ensemble, const ops::SparseOperator& lambda) {
    ensemble.validate();
    const int dim = ensemble.members.front().state.dim();
    if (dim % 2 != 0 || lambda.dim() != dim / 2) {
        throw std::invalid_argument("markov: Lambda must act on the bath factor of the ensemble");
    }
    if (!lambda.is_hermitian(0.0)) {
        throw std::invalid_argument("markov: Lambda must be Hermitian");
    }
}

double entry_abs_sum(const Eigen::Matrix2cd& m) {
    double s = 0.0;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) s += std::abs(m(r, c));
    }
    return s;
}

}  // namespace

Eigen::Matrix2cd contract_bath(const evo::Ensemble& ensemble, const ops::SparseOperator& lambda) {
    check_lambda(ensemble, lambda);
    const Eigen::Index db = lambda.dim();
    Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
    for (const auto& member : ensemble.members) {
        const Eigen::VectorXcd up = member.state.amplitudes.head(db);
        const Eigen::VectorXcd down = member.state.amplitudes.tail(db);
        const Eigen::VectorXcd lambda_up = lambda.apply(up);
        const Eigen::VectorXcd lambda_down = lambda.apply(down);
        // out_{ss'} += w <block_{s'}|Lambda|block_s>
        out(0, 0) += member.weight * up.dot(lambda_up);
        out(1, 1) += member.weight * down.dot(lambda_down);
        out(0, 1) += member.weight * down.dot(lambda_up);
        out(1, 0) += member.weight * up.dot(lambda_down);
    }
    return out;
}

std::complex<double> bath_expectation(const evo::Ensemble& ensemble,
                                      const ops::SparseOperator& lambda) {
    check_lambda(ensemble, lambda);
    return reduced::trace_out_system(ensemble).expectation(lambda);
}

FactorizationPoint factorization_at(const evo::Ensemble& ensemble,
                                    const ops::SparseOperator& lambda, double t) {
    FactorizationPoint point;
    point.t = t;
    point.lhs = contract_bath(ensemble, lambda);
    point.rhs = bath_expectation(ensemble, lambda) * reduced::trace_out_bath(ensemble);
    point.residual_sum = entry_abs_sum(point.lhs - point.rhs);
    point.lhs_sum = entry_abs_sum(point.lhs);
    return point;
}

FactorizationReport factorization_test(const spectra::EigenSystem& es, const evo::Ensemble& initial,
                                       const ops::SparseOperator& lambda, const evo::TimeGrid& grid) {
    FactorizationReport report;
    report.points.reserve(static_cast<std::size_t>(grid.steps));
    evo::for_each_time(es, initial, grid, [&](int, double t, const evo::Ensemble& at_t) {
        report.points.push_back(factorization_at(at_t, lambda, t));
    });
    double res = 0.0, lhs = 0.0;
    for (const auto& p : report.points) {
        res += p.residual_sum;
        lhs += p.lhs_sum;
    }
    report.time_avg_residual = res / static_cast<double>(report.points.size());
    report.time_avg_lhs = lhs / static_cast<double>(report.points.size());
    return report;
}

std::vector<InvariancePoint> bath_invariance_test(const spectra::EigenSystem& es,
                                                  const evo::Ensemble& initial,
                                                  const ops::SparseOperator& lambda,
                                                  const evo::TimeGrid& grid) {
    check_lambda(initial, lambda);
    const std::complex<double> reference = bath_expectation(initial, lambda);
    const double ref_mag = std::abs(reference);
    const bool absolute = ref_mag < 1e-14;

    std::vector<InvariancePoint> out;
    out.reserve(static_cast<std::size_t>(grid.steps));
    evo::for_each_time(es, initial, grid, [&](int, double t, const evo::Ensemble& at_t) {
        const double dev = std::abs(bath_expectation(at_t, lambda) - reference);
        out.push_back({t, absolute ? dev : dev / ref_mag, absolute});
    });
    return out;
}

}  // namespace lab::markov
