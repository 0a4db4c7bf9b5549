#include "lab/levelstats.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "lab/fock_basis.hpp"

namespace lab::levels {

namespace {

// Chebyshev design row T_0(x) .. T_d(x) for x in [-1, 1].
void chebyshev_row(double x, int degree, Eigen::MatrixXd& design, int row) {
    design(row, 0) = 1.0;
    if (degree >= 1) design(row, 1) = x;
    for (int k = 2; k <= degree; ++k) {
        design(row, k) = 2.0 * x * design(row, k - 1) - design(row, k - 2);
    }
}

double chebyshev_eval(const Eigen::VectorXd& coeff, double x) {
    double tkm1 = 1.0, tk = x, acc = coeff(0);
    if (coeff.size() >= 2) acc += coeff(1) * x;
    for (int k = 2; k < coeff.size(); ++k) {
        const double tkp1 = 2.0 * x * tk - tkm1;
        acc += coeff(k) * tkp1;
        tkm1 = tk;
        tk = tkp1;
    }
    return acc;
}

}  // namespace

UnfoldedSpectrum unfold(const std::vector<double>& energies, int fit_degree, int edge_discard) {
    if (fit_degree < 3) throw std::invalid_argument("unfold: fit_degree must be >= 3");
    if (!std::is_sorted(energies.begin(), energies.end())) {
        throw std::invalid_argument("unfold: energies must be ascending");
    }
    const int n_total = static_cast<int>(energies.size());
    if (edge_discard < 0) edge_discard = static_cast<int>(std::lround(0.02 * n_total));
    const int n = n_total - 2 * edge_discard;
    if (n < 50) throw std::invalid_argument("unfold: need at least 50 levels after edge discard");

    const double e_lo = energies[static_cast<std::size_t>(edge_discard)];
    const double e_hi = energies[static_cast<std::size_t>(edge_discard + n - 1)];
    if (e_hi <= e_lo) throw std::invalid_argument("unfold: degenerate spectrum range");
    const auto to_x = [&](double e) { return 2.0 * (e - e_lo) / (e_hi - e_lo) - 1.0; };

    // Least-squares fit of the cumulative counting function N(E) ~ i + 1/2.
    Eigen::MatrixXd design(n, fit_degree + 1);
    Eigen::VectorXd target(n);
    for (int i = 0; i < n; ++i) {
        chebyshev_row(to_x(energies[static_cast<std::size_t>(edge_discard + i)]), fit_degree,
                      design, i);
        target(i) = i + 0.5;
    }
    const Eigen::VectorXd coeff = design.colPivHouseholderQr().solve(target);

    UnfoldedSpectrum us;
    us.fit_degree = fit_degree;
    us.discarded_edges = edge_discard;
    us.levels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        us.levels[static_cast<std::size_t>(i)] =
            chebyshev_eval(coeff, to_x(energies[static_cast<std::size_t>(edge_discard + i)]));
    }
    // The map must preserve the level ordering over the data range,
    // otherwise spacings would be reshuffled or negative.
    for (int i = 1; i < n; ++i) {
        if (energies[static_cast<std::size_t>(edge_discard + i)] >
                energies[static_cast<std::size_t>(edge_discard + i - 1)] &&
            us.levels[static_cast<std::size_t>(i)] <= us.levels[static_cast<std::size_t>(i - 1)]) {
            throw std::runtime_error(
                "unfold: fitted counting function is not monotone over the data range; "
                "try a different fit degree");
        }
    }
    return us;
}

std::vector<double> nearest_spacings(const UnfoldedSpectrum& us) {
    if (us.levels.size() < 2) throw std::invalid_argument("nearest_spacings: too few levels");
    std::vector<double> s(us.levels.size() - 1);
    for (std::size_t i = 0; i + 1 < us.levels.size(); ++i) s[i] = us.levels[i + 1] - us.levels[i];
    return s;
}

double i_goe(double s) {
    if (s <= 0.0) return 0.0;
    return 1.0 - std::exp(-std::numbers::pi * s * s / 4.0);
}

double i_poisson(double s) {
    if (s <= 0.0) return 0.0;
    return 1.0 - std::exp(-s);
}

Goe2Table Goe2Table::generate(std::uint64_t seed, std::size_t spacings_per_sequence) {
    if (spacings_per_sequence < 1000) {
        throw std::invalid_argument("Goe2Table: too few samples for a stable table");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto wigner_spacing = [&]() {
        // Inverse CDF of the GOE surmise, unit mean.
        const double u = unif(rng);
        return std::sqrt(-4.0 * std::log1p(-u) / std::numbers::pi);
    };

    // Two independent level sequences of equal density, merged.
    std::vector<double> levels;
    levels.reserve(2 * spacings_per_sequence + 2);
    for (int seq = 0; seq < 2; ++seq) {
        double pos = 0.0;
        for (std::size_t i = 0; i <= spacings_per_sequence; ++i) {
            levels.push_back(pos);
            pos += wigner_spacing();
        }
    }
    std::sort(levels.begin(), levels.end());

    std::vector<double> spacings(levels.size() - 1);
    double mean = 0.0;
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
        spacings[i] = levels[i + 1] - levels[i];
        mean += spacings[i];
    }
    mean /= static_cast<double>(spacings.size());
    for (double& s : spacings) s /= mean;  // unit mean, same normalization as unfolded data
    std::sort(spacings.begin(), spacings.end());

    Goe2Table table;
    constexpr double kMax = 8.0;
    constexpr int kPoints = 4097;
    table.grid_.resize(kPoints);
    table.cdf_.resize(kPoints);
    for (int i = 0; i < kPoints; ++i) {
        const double s = kMax * i / (kPoints - 1);
        const auto it = std::upper_bound(spacings.begin(), spacings.end(), s);
        table.grid_[static_cast<std::size_t>(i)] = s;
        table.cdf_[static_cast<std::size_t>(i)] =
            static_cast<double>(it - spacings.begin()) / static_cast<double>(spacings.size());
    }
    return table;
}

double Goe2Table::eval(double s) const {
    if (grid_.empty()) throw std::logic_error("Goe2Table: empty table");
    if (s <= grid_.front()) return 0.0;
    if (s >= grid_.back()) return 1.0;
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), s);
    const std::size_t hi = static_cast<std::size_t>(it - grid_.begin());
    const std::size_t lo = hi - 1;
    const double f = (s - grid_[lo]) / (grid_[hi] - grid_[lo]);
    return cdf_[lo] + f * (cdf_[hi] - cdf_[lo]);
}

void Goe2Table::save(std::ostream& out) const {
    out << "# lab-goe2-table v1\n# points=" << grid_.size() << "\n";
    char line[64];
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        std::snprintf(line, sizeof(line), "%.17g %.17g\n", grid_[i], cdf_[i]);
        out << line;
    }
}

Goe2Table Goe2Table::load(std::istream& in) {
    std::string header;
    if (!std::getline(in, header) || header != "# lab-goe2-table v1") {
        throw std::runtime_error("Goe2Table: bad header");
    }
    std::string counts;
    if (!std::getline(in, counts)) throw std::runtime_error("Goe2Table: truncated table");
    Goe2Table table;
    double s = 0.0, c = 0.0;
    while (in >> s >> c) {
        table.grid_.push_back(s);
        table.cdf_.push_back(c);
    }
    if (table.grid_.size() < 2 || !std::is_sorted(table.grid_.begin(), table.grid_.end())) {
        throw std::runtime_error("Goe2Table: corrupt table");
    }
    return table;
}

std::vector<double> default_s_grid(double s_max, double step) {
    std::vector<double> grid;
    for (double s = 0.0; s <= s_max + 1e-12; s += step) grid.push_back(s);
    return grid;
}

SpacingDistribution integrated_spacing(const UnfoldedSpectrum& us,
                                       const std::vector<double>& s_grid, const Goe2Table& goe2) {
    if (s_grid.empty() || !std::is_sorted(s_grid.begin(), s_grid.end())) {
        throw std::invalid_argument("integrated_spacing: bad s grid");
    }
    std::vector<double> spac = nearest_spacings(us);
    std::sort(spac.begin(), spac.end());

    SpacingDistribution sd;
    sd.s_grid = s_grid;
    sd.empirical.reserve(s_grid.size());
    sd.ref_goe.reserve(s_grid.size());
    sd.ref_poisson.reserve(s_grid.size());
    sd.ref_goe2.reserve(s_grid.size());
    for (double s : s_grid) {
        const auto it = std::upper_bound(spac.begin(), spac.end(), s);
        sd.empirical.push_back(static_cast<double>(it - spac.begin()) /
                               static_cast<double>(spac.size()));
        sd.ref_goe.push_back(i_goe(s));
        sd.ref_poisson.push_back(i_poisson(s));
        sd.ref_goe2.push_back(goe2.eval(s));
    }
    return sd;
}

double goe_distance(const SpacingDistribution& sd, Reference ref) {
    const std::vector<double>* curve = nullptr;
    switch (ref) {
        case Reference::goe: curve = &sd.ref_goe; break;
        case Reference::poisson: curve = &sd.ref_poisson; break;
        case Reference::goe2: curve = &sd.ref_goe2; break;
    }
    double d = 0.0;
    for (std::size_t i = 0; i < sd.s_grid.size(); ++i) {
        d = std::max(d, std::abs(sd.empirical[i] - (*curve)[i]));
    }
    return d;
}

CriticalResult critical_epsilon(const ops::ModelParams& params,
                                const std::vector<double>& epsilon_grid, double threshold,
                                const Goe2Table& goe2, int fit_degree, int edge_discard,
                                int dim_cap) {
    if (epsilon_grid.empty() || !std::is_sorted(epsilon_grid.begin(), epsilon_grid.end())) {
        throw std::invalid_argument("critical_epsilon: epsilon grid must be ascending");
    }
    const fock::FockBasis basis(params.bosons, params.sites);
    const std::vector<double> s_grid = default_s_grid();

    CriticalResult result;
    for (double eps : epsilon_grid) {
        ops::ModelParams p = params;
        p.coupling = eps;
        const ops::SparseOperator h = ops::build_total_hamiltonian(p, basis);
        const spectra::EigenSystem es = spectra::eigenvalues_only(h, dim_cap);
        std::vector<double> energies(es.energies.data(), es.energies.data() + es.dim());
        const UnfoldedSpectrum us = unfold(energies, fit_degree, edge_discard);
        const SpacingDistribution sd = integrated_spacing(us, s_grid, goe2);

        SweepPoint point;
        point.epsilon = eps;
        point.dist_goe = goe_distance(sd, Reference::goe);
        point.dist_goe2 = goe_distance(sd, Reference::goe2);
        point.dist_poisson = goe_distance(sd, Reference::poisson);
        result.curve.push_back(point);
        if (!result.converged && point.dist_goe < threshold) {
            result.converged = true;
            result.epsilon_cr = eps;
        }
    }
    return result;
}

}  // namespace lab::levels
