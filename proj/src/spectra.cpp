#include "lab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace lab::spectra {

namespace {

Eigen::MatrixXd densify_checked(const ops::SparseOperator& op, int dim_cap) {
    if (op.dim() > dim_cap) {
        throw std::invalid_argument(
            "diagonalize: dimension " + std::to_string(op.dim()) + " exceeds cap " +
            std::to_string(dim_cap) +
            "; iterative eigensolvers are out of scope, raise the cap only if memory allows");
    }
    if (!op.is_hermitian(0.0)) {
        throw std::invalid_argument("diagonalize: operator is not Hermitian");
    }
    return op.to_dense_real();
}

void verify_eigensystem(const ops::SparseOperator& op, const EigenSystem& es) {
    const int n = es.dim();
    const double h_max = op.max_abs();

    const Eigen::MatrixXd gram = es.vectors.transpose() * es.vectors;
    const double ortho_err = (gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (ortho_err > 1e-10) {
        throw std::runtime_error("diagonalize: eigenvector orthonormality violated (" +
                                 std::to_string(ortho_err) + ")");
    }
    double residual = 0.0;
    for (int k = 0; k < n; ++k) {
        const Eigen::VectorXd r =
            op.apply(Eigen::VectorXd(es.vectors.col(k))) - es.energies(k) * es.vectors.col(k);
        residual = std::max(residual, r.cwiseAbs().maxCoeff());
    }
    if (residual > 1e-8 * std::max(h_max, 1.0)) {
        throw std::runtime_error("diagonalize: eigenpair residual too large (" +
                                 std::to_string(residual) + ")");
    }
}

}  // namespace

EigenSystem diagonalize(const ops::SparseOperator& op, int dim_cap, bool verify) {
    const Eigen::MatrixXd dense = densify_checked(op, dim_cap);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("diagonalize: eigendecomposition failed");
    }
    EigenSystem es{solver.eigenvalues(), solver.eigenvectors(), op.basis_tag()};
    if (verify) verify_eigensystem(op, es);
    return es;
}

EigenSystem eigenvalues_only(const ops::SparseOperator& op, int dim_cap) {
    const Eigen::MatrixXd dense = densify_checked(op, dim_cap);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigenvalues_only: eigendecomposition failed");
    }
    return EigenSystem{solver.eigenvalues(), Eigen::MatrixXd(), op.basis_tag()};
}

int select_by_energy(const EigenSystem& es, double target) {
    if (es.dim() == 0) throw std::invalid_argument("select_by_energy: empty spectrum");
    int best = 0;
    double best_dist = std::abs(es.energies(0) - target);
    for (int k = 1; k < es.dim(); ++k) {
        const double d = std::abs(es.energies(k) - target);
        if (d < best_dist) {
            best = k;
            best_dist = d;
        }
    }
    return best;
}

std::vector<int> select_window(const EigenSystem& es, double emin, double emax) {
    if (emin > emax) throw std::invalid_argument("select_window: emin > emax");
    std::vector<int> out;
    for (int k = 0; k < es.dim(); ++k) {
        if (es.energies(k) >= emin && es.energies(k) <= emax) out.push_back(k);
    }
    return out;
}

Histogram density_of_states(const EigenSystem& es, int bins) {
    if (bins < 1) throw std::invalid_argument("density_of_states: bins must be >= 1");
    if (es.dim() == 0) throw std::invalid_argument("density_of_states: empty spectrum");

    Histogram h;
    h.lo = es.energies(0);
    h.hi = es.energies(es.dim() - 1);
    const double width = (h.hi > h.lo) ? (h.hi - h.lo) : 1.0;
    h.centers.resize(static_cast<std::size_t>(bins));
    h.weights.assign(static_cast<std::size_t>(bins), 0.0);
    for (int b = 0; b < bins; ++b) {
        h.centers[static_cast<std::size_t>(b)] = h.lo + width * (b + 0.5) / bins;
    }
    const double per_level = 1.0 / es.dim();
    for (int k = 0; k < es.dim(); ++k) {
        int b = static_cast<int>((es.energies(k) - h.lo) / width * bins);
        b = std::clamp(b, 0, bins - 1);
        h.weights[static_cast<std::size_t>(b)] += per_level;
    }
    return h;
}

namespace {

constexpr char kMagic[8] = {'L', 'A', 'B', 'E', 'I', 'G', '1', '\n'};

std::uint64_t fnv64(const char* data, std::size_t n, std::uint64_t h = 1469598103934665603ull) {
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 1099511628211ull;
    }
    return h;
}

template <typename T>
void write_pod(std::ostream& out, const T& v, std::uint64_t& hash) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
    hash = fnv64(reinterpret_cast<const char*>(&v), sizeof(T), hash);
}

template <typename T>
void read_pod(std::istream& in, T& v, std::uint64_t& hash) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("load_eigensystem: truncated stream");
    hash = fnv64(reinterpret_cast<const char*>(&v), sizeof(T), hash);
}

}  // namespace

void save_eigensystem(const EigenSystem& es, std::ostream& out) {
    out.write(kMagic, sizeof(kMagic));
    std::uint64_t hash = 1469598103934665603ull;

    const std::uint64_t dim = static_cast<std::uint64_t>(es.dim());
    const std::uint8_t has_vec = es.has_vectors() ? 1 : 0;
    const std::uint64_t tag_len = es.operator_tag.size();
    write_pod(out, dim, hash);
    write_pod(out, has_vec, hash);
    write_pod(out, tag_len, hash);
    out.write(es.operator_tag.data(), static_cast<std::streamsize>(tag_len));
    hash = fnv64(es.operator_tag.data(), tag_len, hash);

    const auto write_doubles = [&](const double* p, std::size_t n) {
        out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
        hash = fnv64(reinterpret_cast<const char*>(p), n * sizeof(double), hash);
    };
    write_doubles(es.energies.data(), static_cast<std::size_t>(es.dim()));
    if (has_vec) {
        write_doubles(es.vectors.data(),
                      static_cast<std::size_t>(es.dim()) * static_cast<std::size_t>(es.dim()));
    }
    out.write(reinterpret_cast<const char*>(&hash), sizeof(hash));
    if (!out) throw std::runtime_error("save_eigensystem: write failed");
}

EigenSystem load_eigensystem(std::istream& in) {
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("load_eigensystem: bad magic / version");
    }
    std::uint64_t hash = 1469598103934665603ull;
    std::uint64_t dim = 0;
    std::uint8_t has_vec = 0;
    std::uint64_t tag_len = 0;
    read_pod(in, dim, hash);
    read_pod(in, has_vec, hash);
    read_pod(in, tag_len, hash);
    if (dim > (1ull << 20) || tag_len > (1ull << 16)) {
        throw std::runtime_error("load_eigensystem: implausible header");
    }
    std::string tag(tag_len, '\0');
    in.read(tag.data(), static_cast<std::streamsize>(tag_len));
    if (!in) throw std::runtime_error("load_eigensystem: truncated stream");
    hash = fnv64(tag.data(), tag_len, hash);

    EigenSystem es;
    es.operator_tag = std::move(tag);
    es.energies.resize(static_cast<Eigen::Index>(dim));
    const auto read_doubles = [&](double* p, std::size_t n) {
        in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
        if (!in) throw std::runtime_error("load_eigensystem: truncated stream");
        hash = fnv64(reinterpret_cast<const char*>(p), n * sizeof(double), hash);
    };
    read_doubles(es.energies.data(), static_cast<std::size_t>(dim));
    if (has_vec) {
        es.vectors.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        read_doubles(es.vectors.data(), static_cast<std::size_t>(dim * dim));
    }
    std::uint64_t stored = 0;
    in.read(reinterpret_cast<char*>(&stored), sizeof(stored));
    if (!in || stored != hash) {
        throw std::runtime_error("load_eigensystem: checksum mismatch");
    }
    return es;
}

}  // namespace lab::spectra
