// operators.hpp — sparse Hermitian operators for the spin + Bose-Hubbard model

#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lab/fock_basis.hpp"

namespace lab::ops {

using Complex = std::complex<double>;

struct Triplet {
    int row{0};
    int col{0};
    Complex value{0.0, 0.0};
};

// Sparse operator over a fixed basis, stored as canonical triplets:
// merged duplicates, exact zeros dropped, sorted by (row, col). The
// canonical form makes serialized operators byte-stable.
class SparseOperator {
public:
    SparseOperator() = default;
    SparseOperator(int dim, std::string basis_tag);

    int dim() const noexcept { return dim_; }
    const std::string& basis_tag() const noexcept { return basis_tag_; }
    const std::vector<Triplet>& triplets() const noexcept { return triplets_; }
    std::size_t nnz() const noexcept { return triplets_.size(); }

    void add(int row, int col, Complex value);

    // Merge duplicates, drop zeros, sort by (row, col).
    void canonicalize();

    Eigen::MatrixXcd to_dense() const;
    // Throws if any stored amplitude has a nonzero imaginary part.
    Eigen::MatrixXd to_dense_real() const;

    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

    bool is_hermitian(double tol = 0.0) const;
    double max_abs() const;

    // Plain-text triplet dump: two '#' header lines (dim, basis_tag, nnz)
    // followed by one "row col re im" line per entry.
    void dump(std::ostream& out) const;

private:
    int dim_{0};
    std::string basis_tag_;
    std::vector<Triplet> triplets_;
    bool canonical_{true};

    void require_canonical() const;
};

SparseOperator multiply(const SparseOperator& a, const SparseOperator& b);
// a + scale * b
SparseOperator add_scaled(const SparseOperator& a, const SparseOperator& b, Complex scale = {1.0, 0.0});
SparseOperator commutator(const SparseOperator& a, const SparseOperator& b);

// Model parameters of the composite two-level + Bose-Hubbard system.
struct ModelParams {
    double hopping{1.0};      // J
    double interaction{0.8};  // U (0 gives the regular, non-chaotic bath)
    int sites{7};             // L
    int bosons{6};            // N
    double splitting{0.5};    // two-level energy delta
    double coupling{0.2};     // system-bath coupling epsilon

    std::string bath_tag() const;
    std::string composite_tag() const;
};

// Spin conventions, fixed once for the whole project: basis order
// (|up>, |down>), sigma_z = diag(+1, -1), sigma_plus |down> = |up>.
// Composite index = spin_index * dim_bath + bath_index (spin-major), so a
// composite vector is two contiguous bath-sized blocks.
Eigen::Matrix2cd sigma_z();
Eigen::Matrix2cd sigma_plus();
Eigen::Matrix2cd sigma_minus();

// Bose-Hubbard chain with open boundaries: hopping -J/2 over neighbouring
// sites plus on-site interaction U/2 * n(n-1).
SparseOperator build_bath_hamiltonian(const ModelParams& params, const fock::FockBasis& basis);

// Two-level Hamiltonian diag(+delta, -delta).
SparseOperator build_system_hamiltonian(double splitting);

// Coupling epsilon * (a1^dag a2 (x) sigma_plus + h.c.) on the composite
// space; conserves total boson number. Requires at least two sites.
SparseOperator build_interaction(const ModelParams& params, const fock::FockBasis& basis);

// H = H_S (x) 1 + 1 (x) H_B + H_int on the 2 * dim_bath composite space.
SparseOperator build_total_hamiltonian(const ModelParams& params, const fock::FockBasis& basis);

enum class BathObservable {
    a1dag_a2,          // a1^dag a2
    a2dag_a1,          // a2^dag a1
    a1dag_a2_a2dag_a1  // product, the tau = 0 correlation operator
};

SparseOperator build_bath_observable(BathObservable kind, const fock::FockBasis& basis);

// Total boson number operator on the bath space (diagonal).
SparseOperator build_bath_number(const fock::FockBasis& basis);

// Embeddings into the composite space (spin-major layout).
SparseOperator embed_bath(const SparseOperator& bath_op, const fock::FockBasis& basis);
SparseOperator embed_system(const Eigen::Matrix2cd& system_op, const fock::FockBasis& basis);

}  // namespace lab::ops
