#include "lab/fock_basis.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>

namespace lab::fock {

std::uint64_t dimension(int bosons, int sites) {
    if (bosons < 0) throw std::invalid_argument("dimension: bosons must be >= 0");
    if (sites < 1) throw std::invalid_argument("dimension: sites must be >= 1");

    // C(n, k) with n = bosons + sites - 1, k = bosons. The running value
    // after step i equals C(n - k + i, i), which never exceeds the final
    // result, so a 128-bit intermediate cannot wrap and an early overflow
    // check is sound.
    const std::uint64_t n = static_cast<std::uint64_t>(bosons) + static_cast<std::uint64_t>(sites) - 1;
    std::uint64_t k = static_cast<std::uint64_t>(bosons);
    if (k > n - k) k = n - k;

    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        acc = acc * (n - k + i) / i;
        if (acc > std::numeric_limits<std::uint64_t>::max()) {
            throw std::overflow_error("dimension: binomial coefficient exceeds 64 bits");
        }
    }
    return static_cast<std::uint64_t>(acc);
}

std::size_t FockStateHash::operator()(const FockState& s) const noexcept {
    // FNV-1a over the occupation bytes
    std::uint64_t h = 1469598103934665603ull;
    for (int v : s) {
        h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
        h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
}

namespace {

// Descending-lexicographic successor; returns false once the last state
// (0, ..., 0, N) has been emitted.
bool next_state(FockState& occ) {
    const int sites = static_cast<int>(occ.size());
    int k = -1;
    for (int l = sites - 2; l >= 0; --l) {
        if (occ[l] > 0) { k = l; break; }
    }
    if (k < 0) return false;
    int moved = 0;
    for (int l = k + 1; l < sites; ++l) moved += occ[l];
    occ[k] -= 1;
    occ[k + 1] = moved + 1;
    for (int l = k + 2; l < sites; ++l) occ[l] = 0;
    return true;
}

}  // namespace

FockBasis::FockBasis(int bosons, int sites) : bosons_(bosons), sites_(sites) {
    const std::uint64_t dim = dimension(bosons, sites);
    if (dim > std::numeric_limits<std::uint32_t>::max()) {
        throw std::overflow_error("FockBasis: sector too large to index");
    }
    states_.reserve(static_cast<std::size_t>(dim));
    index_.reserve(static_cast<std::size_t>(dim));

    FockState occ(static_cast<std::size_t>(sites), 0);
    occ[0] = bosons;
    do {
        index_.emplace(occ, static_cast<std::uint32_t>(states_.size()));
        states_.push_back(occ);
    } while (next_state(occ));

    if (states_.size() != dim) {
        throw std::logic_error("FockBasis: enumeration does not match dimension");
    }
}

std::size_t FockBasis::index_of(const FockState& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) {
        throw std::invalid_argument("FockBasis::index_of: state is not a member of this basis");
    }
    return it->second;
}

bool FockBasis::contains(const FockState& s) const noexcept {
    return index_.find(s) != index_.end();
}

std::string FockBasis::tag() const {
    return "bath:N=" + std::to_string(bosons_) + ",L=" + std::to_string(sites_);
}

}  // namespace lab::fock
