// levelstats.hpp — spectral unfolding, nearest-neighbour spacing statistics,
// GOE references and critical-coupling detection

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "lab/operators.hpp"
#include "lab/spectra.hpp"

namespace lab::levels {

// Spectrum mapped through a smooth polynomial fit of the cumulative
// counting function so the mean nearest-neighbour spacing is 1.
struct UnfoldedSpectrum {
    std::vector<double> levels;  // ascending, unit mean spacing
    int fit_degree{7};
    int discarded_edges{0};  // levels removed per spectral edge before the fit
};

// Chebyshev least-squares fit of the counting function; throws if the
// fitted map is not monotone over the data range (degenerate fit) or if
// fewer than 50 levels remain. Input must be ascending.
UnfoldedSpectrum unfold(const std::vector<double>& energies, int fit_degree = 7,
                        int edge_discard = -1);  // -1: 2% of levels per edge

std::vector<double> nearest_spacings(const UnfoldedSpectrum& us);

// Wigner-surmise GOE and Poisson integrated spacing distributions.
double i_goe(double s);
double i_poisson(double s);

// Numerically generated reference for the superposition of two independent
// GOE sequences of equal density, tabulated once and reused.
class Goe2Table {
public:
    static Goe2Table generate(std::uint64_t seed = kDefaultSeed,
                              std::size_t spacings_per_sequence = 500000);
    static constexpr std::uint64_t kDefaultSeed = 409601;

    double eval(double s) const;
    void save(std::ostream& out) const;
    static Goe2Table load(std::istream& in);

    const std::vector<double>& grid() const noexcept { return grid_; }
    const std::vector<double>& cdf() const noexcept { return cdf_; }

private:
    std::vector<double> grid_;
    std::vector<double> cdf_;
};

struct SpacingDistribution {
    std::vector<double> s_grid;
    std::vector<double> empirical;
    std::vector<double> ref_goe;
    std::vector<double> ref_poisson;
    std::vector<double> ref_goe2;
};

std::vector<double> default_s_grid(double s_max = 4.0, double step = 0.04);

SpacingDistribution integrated_spacing(const UnfoldedSpectrum& us,
                                       const std::vector<double>& s_grid, const Goe2Table& goe2);

enum class Reference { goe, poisson, goe2 };

// Sup-norm distance between the empirical curve and a reference.
double goe_distance(const SpacingDistribution& sd, Reference ref);

struct SweepPoint {
    double epsilon{0.0};
    double dist_goe{0.0};
    double dist_goe2{0.0};
    double dist_poisson{0.0};
};

struct CriticalResult {
    bool converged{false};
    double epsilon_cr{0.0};  // valid when converged
    std::vector<SweepPoint> curve;
};

// Diagonalizes the composite Hamiltonian at each coupling of the ascending
// grid and reports the smallest one whose unfolded spacing distribution is
// within `threshold` of the GOE reference. Small sectors need a wider edge
// discard than the unfold default: their sparse interaction tail leaves too
// few levels per fit interval.
CriticalResult critical_epsilon(const ops::ModelParams& params,
                                const std::vector<double>& epsilon_grid, double threshold,
                                const Goe2Table& goe2, int fit_degree = 7, int edge_discard = -1,
                                int dim_cap = 8192);

}  // namespace lab::levels
