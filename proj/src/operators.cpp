#include "lab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace lab::ops {

namespace {

constexpr double kZero = 0.0;

void check_index(int idx, int dim, const char* what) {
    if (idx < 0 || idx >= dim) {
        throw std::out_of_range(std::string("SparseOperator: ") + what + " index out of range");
    }
}

}  // namespace

SparseOperator::SparseOperator(int dim, std::string basis_tag)
    : dim_(dim), basis_tag_(std::move(basis_tag)) {
    if (dim < 0) throw std::invalid_argument("SparseOperator: negative dimension");
}

void SparseOperator::add(int row, int col, Complex value) {
    check_index(row, dim_, "row");
    check_index(col, dim_, "col");
    if (value == Complex{kZero, kZero}) return;
    triplets_.push_back({row, col, value});
    canonical_ = false;
}

void SparseOperator::canonicalize() {
    std::sort(triplets_.begin(), triplets_.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<Triplet> merged;
    merged.reserve(triplets_.size());
    for (const auto& t : triplets_) {
        if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col) {
            merged.back().value += t.value;
        } else {
            merged.push_back(t);
        }
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const Triplet& t) { return t.value == Complex{kZero, kZero}; }),
                 merged.end());
    triplets_ = std::move(merged);
    canonical_ = true;
}

void SparseOperator::require_canonical() const {
    if (!canonical_) {
        throw std::logic_error("SparseOperator: canonicalize() before reading");
    }
}

Eigen::MatrixXcd SparseOperator::to_dense() const {
    require_canonical();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim_, dim_);
    for (const auto& t : triplets_) m(t.row, t.col) += t.value;
    return m;
}

Eigen::MatrixXd SparseOperator::to_dense_real() const {
    require_canonical();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim_, dim_);
    for (const auto& t : triplets_) {
        if (t.value.imag() != kZero) {
            throw std::runtime_error("SparseOperator: operator has complex amplitudes; "
                                     "dense real form unavailable");
        }
        m(t.row, t.col) += t.value.real();
    }
    return m;
}

Eigen::VectorXcd SparseOperator::apply(const Eigen::VectorXcd& x) const {
    require_canonical();
    if (x.size() != dim_) throw std::invalid_argument("SparseOperator::apply: dimension mismatch");
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(dim_);
    for (const auto& t : triplets_) y(t.row) += t.value * x(t.col);
    return y;
}

Eigen::VectorXd SparseOperator::apply(const Eigen::VectorXd& x) const {
    require_canonical();
    if (x.size() != dim_) throw std::invalid_argument("SparseOperator::apply: dimension mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(dim_);
    for (const auto& t : triplets_) {
        if (t.value.imag() != kZero) {
            throw std::runtime_error("SparseOperator::apply: complex operator applied to real vector");
        }
        y(t.row) += t.value.real() * x(t.col);
    }
    return y;
}

bool SparseOperator::is_hermitian(double tol) const {
    require_canonical();
    std::unordered_map<std::uint64_t, Complex> map;
    map.reserve(triplets_.size());
    for (const auto& t : triplets_) {
        map.emplace((static_cast<std::uint64_t>(t.row) << 32) | static_cast<std::uint32_t>(t.col),
                    t.value);
    }
    for (const auto& t : triplets_) {
        const auto key = (static_cast<std::uint64_t>(t.col) << 32) | static_cast<std::uint32_t>(t.row);
        auto it = map.find(key);
        const Complex partner = (it == map.end()) ? Complex{0.0, 0.0} : it->second;
        if (std::abs(t.value - std::conj(partner)) > tol) return false;
    }
    return true;
}

double SparseOperator::max_abs() const {
    double m = 0.0;
    for (const auto& t : triplets_) m = std::max(m, std::abs(t.value));
    return m;
}

void SparseOperator::dump(std::ostream& out) const {
    require_canonical();
    out << "# lab-sparse-operator v1\n";
    out << "# dim=" << dim_ << " basis_tag=" << basis_tag_ << " nnz=" << triplets_.size() << "\n";
    char line[96];
    for (const auto& t : triplets_) {
        std::snprintf(line, sizeof(line), "%d %d %.17g %.17g\n", t.row, t.col, t.value.real(),
                      t.value.imag());
        out << line;
    }
}

SparseOperator multiply(const SparseOperator& a, const SparseOperator& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("multiply: dimension mismatch");
    if (a.basis_tag() != b.basis_tag()) {
        throw std::invalid_argument("multiply: operators act on different bases");
    }
    // Bucket b by row for the contraction over the shared index.
    std::vector<std::vector<Triplet>> b_rows(static_cast<std::size_t>(b.dim()));
    for (const auto& t : b.triplets()) b_rows[static_cast<std::size_t>(t.row)].push_back(t);

    SparseOperator out(a.dim(), a.basis_tag());
    for (const auto& ta : a.triplets()) {
        for (const auto& tb : b_rows[static_cast<std::size_t>(ta.col)]) {
            out.add(ta.row, tb.col, ta.value * tb.value);
        }
    }
    out.canonicalize();
    return out;
}

SparseOperator add_scaled(const SparseOperator& a, const SparseOperator& b, Complex scale) {
    if (a.dim() != b.dim()) throw std::invalid_argument("add_scaled: dimension mismatch");
    if (a.basis_tag() != b.basis_tag()) {
        throw std::invalid_argument("add_scaled: operators act on different bases");
    }
    SparseOperator out(a.dim(), a.basis_tag());
    for (const auto& t : a.triplets()) out.add(t.row, t.col, t.value);
    for (const auto& t : b.triplets()) out.add(t.row, t.col, scale * t.value);
    out.canonicalize();
    return out;
}

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b) {
    return add_scaled(multiply(a, b), multiply(b, a), Complex{-1.0, 0.0});
}

std::string ModelParams::bath_tag() const {
    return "bath:N=" + std::to_string(bosons) + ",L=" + std::to_string(sites);
}

std::string ModelParams::composite_tag() const {
    return "composite:N=" + std::to_string(bosons) + ",L=" + std::to_string(sites);
}

Eigen::Matrix2cd sigma_z() {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

Eigen::Matrix2cd sigma_plus() {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 1) = 1.0;
    return m;
}

Eigen::Matrix2cd sigma_minus() {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(1, 0) = 1.0;
    return m;
}

namespace {

void check_basis(const ModelParams& params, const fock::FockBasis& basis, const char* where) {
    if (basis.bosons() != params.bosons || basis.sites() != params.sites) {
        throw std::invalid_argument(std::string(where) + ": basis does not match model parameters");
    }
}

// Emit the hopping pair a_to^dag a_from + a_from^dag a_to scaled by
// `amplitude` into `op` (bath space). Bosonic rule: the matrix element of
// a_to^dag a_from between |n> and the shifted state is
// sqrt(n_from * (n_to + 1)).
void add_hopping(SparseOperator& op, const fock::FockBasis& basis, int from, int to,
                 double amplitude) {
    fock::FockState target;
    for (std::size_t col = 0; col < basis.size(); ++col) {
        const auto& occ = basis.state(col);
        if (occ[static_cast<std::size_t>(from)] == 0) continue;
        target = occ;
        target[static_cast<std::size_t>(from)] -= 1;
        target[static_cast<std::size_t>(to)] += 1;
        const std::size_t row = basis.index_of(target);
        const double value = amplitude * std::sqrt(static_cast<double>(occ[static_cast<std::size_t>(from)]) *
                                                   (occ[static_cast<std::size_t>(to)] + 1.0));
        op.add(static_cast<int>(row), static_cast<int>(col), value);
        op.add(static_cast<int>(col), static_cast<int>(row), value);
    }
}

}  // namespace

SparseOperator build_bath_hamiltonian(const ModelParams& params, const fock::FockBasis& basis) {
    check_basis(params, basis, "build_bath_hamiltonian");
    SparseOperator h(static_cast<int>(basis.size()), basis.tag());

    for (int l = 0; l + 1 < params.sites; ++l) {
        add_hopping(h, basis, l, l + 1, -params.hopping / 2.0);
    }
    for (std::size_t k = 0; k < basis.size(); ++k) {
        double diag = 0.0;
        for (int n : basis.state(k)) diag += 0.5 * params.interaction * n * (n - 1.0);
        if (diag != 0.0) h.add(static_cast<int>(k), static_cast<int>(k), diag);
    }
    h.canonicalize();
    return h;
}

SparseOperator build_system_hamiltonian(double splitting) {
    SparseOperator h(2, "system");
    h.add(0, 0, splitting);
    h.add(1, 1, -splitting);
    h.canonicalize();
    return h;
}

SparseOperator build_interaction(const ModelParams& params, const fock::FockBasis& basis) {
    check_basis(params, basis, "build_interaction");
    if (params.sites < 2) {
        throw std::invalid_argument("build_interaction: coupling needs at least two sites");
    }
    const int dim_bath = static_cast<int>(basis.size());
    SparseOperator h(2 * dim_bath, params.composite_tag());

    // a1^dag a2 (x) sigma_plus: bath moves a boson from site 2 to site 1
    // while the spin flips down -> up; plus the Hermitian conjugate.
    fock::FockState target;
    for (std::size_t col = 0; col < basis.size(); ++col) {
        const auto& occ = basis.state(col);
        if (occ[1] == 0) continue;
        target = occ;
        target[1] -= 1;
        target[0] += 1;
        const std::size_t row = basis.index_of(target);
        const double value = params.coupling * std::sqrt(occ[1] * (occ[0] + 1.0));
        const int up_row = static_cast<int>(row);
        const int down_col = dim_bath + static_cast<int>(col);
        h.add(up_row, down_col, value);
        h.add(down_col, up_row, value);
    }
    h.canonicalize();
    return h;
}

SparseOperator build_total_hamiltonian(const ModelParams& params, const fock::FockBasis& basis) {
    check_basis(params, basis, "build_total_hamiltonian");
    const int dim_bath = static_cast<int>(basis.size());
    SparseOperator h(2 * dim_bath, params.composite_tag());

    // H_S (x) 1_B
    for (int b = 0; b < dim_bath; ++b) {
        h.add(b, b, params.splitting);
        h.add(dim_bath + b, dim_bath + b, -params.splitting);
    }
    // 1_S (x) H_B
    const SparseOperator bath = build_bath_hamiltonian(params, basis);
    for (const auto& t : bath.triplets()) {
        h.add(t.row, t.col, t.value);
        h.add(dim_bath + t.row, dim_bath + t.col, t.value);
    }
    // H_int
    const SparseOperator inter = build_interaction(params, basis);
    for (const auto& t : inter.triplets()) h.add(t.row, t.col, t.value);

    h.canonicalize();
    return h;
}

SparseOperator build_bath_observable(BathObservable kind, const fock::FockBasis& basis) {
    if (basis.sites() < 2) {
        throw std::invalid_argument("build_bath_observable: needs at least two sites");
    }
    const int dim = static_cast<int>(basis.size());
    auto hop = [&](int from, int to) {
        SparseOperator op(dim, basis.tag());
        fock::FockState target;
        for (std::size_t col = 0; col < basis.size(); ++col) {
            const auto& occ = basis.state(col);
            if (occ[static_cast<std::size_t>(from)] == 0) continue;
            target = occ;
            target[static_cast<std::size_t>(from)] -= 1;
            target[static_cast<std::size_t>(to)] += 1;
            const std::size_t row = basis.index_of(target);
            const double value = std::sqrt(static_cast<double>(occ[static_cast<std::size_t>(from)]) *
                                           (occ[static_cast<std::size_t>(to)] + 1.0));
            op.add(static_cast<int>(row), static_cast<int>(col), value);
        }
        op.canonicalize();
        return op;
    };

    switch (kind) {
        case BathObservable::a1dag_a2:
            return hop(1, 0);
        case BathObservable::a2dag_a1:
            return hop(0, 1);
        case BathObservable::a1dag_a2_a2dag_a1:
            return multiply(hop(1, 0), hop(0, 1));
    }
    throw std::invalid_argument("build_bath_observable: unknown kind");
}

SparseOperator build_bath_number(const fock::FockBasis& basis) {
    SparseOperator op(static_cast<int>(basis.size()), basis.tag());
    for (std::size_t k = 0; k < basis.size(); ++k) {
        int total = 0;
        for (int n : basis.state(k)) total += n;
        op.add(static_cast<int>(k), static_cast<int>(k), static_cast<double>(total));
    }
    op.canonicalize();
    return op;
}

SparseOperator embed_bath(const SparseOperator& bath_op, const fock::FockBasis& basis) {
    if (bath_op.dim() != static_cast<int>(basis.size())) {
        throw std::invalid_argument("embed_bath: operator does not act on the given basis");
    }
    const int dim_bath = bath_op.dim();
    SparseOperator out(2 * dim_bath, "composite:N=" + std::to_string(basis.bosons()) +
                                         ",L=" + std::to_string(basis.sites()));
    for (const auto& t : bath_op.triplets()) {
        out.add(t.row, t.col, t.value);
        out.add(dim_bath + t.row, dim_bath + t.col, t.value);
    }
    out.canonicalize();
    return out;
}

SparseOperator embed_system(const Eigen::Matrix2cd& system_op, const fock::FockBasis& basis) {
    const int dim_bath = static_cast<int>(basis.size());
    SparseOperator out(2 * dim_bath, "composite:N=" + std::to_string(basis.bosons()) +
                                         ",L=" + std::to_string(basis.sites()));
    for (int s = 0; s < 2; ++s) {
        for (int sp = 0; sp < 2; ++sp) {
            const Complex v = system_op(s, sp);
            if (v == Complex{0.0, 0.0}) continue;
            for (int b = 0; b < dim_bath; ++b) out.add(s * dim_bath + b, sp * dim_bath + b, v);
        }
    }
    out.canonicalize();
    return out;
}

}  // namespace lab::ops
