// spectra.hpp — dense real-symmetric eigendecomposition and eigenstate selection

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lab/operators.hpp"

namespace lab::spectra {

// Full spectrum of a real-symmetric operator: `energies` ascending,
// `vectors` orthonormal columns in matching order. `vectors` stays empty
// when only eigenvalues were requested. Immutable after construction and
// shared read-only by every downstream module.
struct EigenSystem {
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;
    std::string operator_tag;

    int dim() const noexcept { return static_cast<int>(energies.size()); }
    bool has_vectors() const noexcept { return vectors.size() > 0; }
};

// Densify and diagonalize. The dimension cap guards the O(dim^2) memory
// and O(dim^3) time of the dense solve (8192^2 doubles is ~0.5 GB).
// With verify = true the orthonormality (1e-10) and residual
// (1e-8 * |H|_max) invariants are checked and violations throw.
EigenSystem diagonalize(const ops::SparseOperator& op, int dim_cap = 8192, bool verify = true);

// Spectrum only; roughly 5x faster and needs no vector storage.
EigenSystem eigenvalues_only(const ops::SparseOperator& op, int dim_cap = 8192);

// Index of the eigenvalue closest to `target`; ties break toward the
// lower index.
int select_by_energy(const EigenSystem& es, double target);

// Indices with emin <= E_k <= emax, ascending. Empty window is fine.
std::vector<int> select_window(const EigenSystem& es, double emin, double emax);

struct Histogram {
    std::vector<double> centers;
    std::vector<double> weights;  // fractions, sum to 1
    double lo{0.0};
    double hi{0.0};
};

// Normalized energy histogram over [min(E), max(E)].
Histogram density_of_states(const EigenSystem& es, int bins);

// Versioned binary persistence (used by the CLI cache). The payload is
// checksummed; load() throws on any mismatch.
void save_eigensystem(const EigenSystem& es, std::ostream& out);
EigenSystem load_eigensystem(std::istream& in);

}  // namespace lab::spectra
