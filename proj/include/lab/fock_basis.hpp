// fock_basis.hpp — occupation-number basis for N bosons on an L-site chain

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace lab::fock {

// Per-site occupation numbers; entries are non-negative and sum to the
// particle count of the basis the state belongs to.
using FockState = std::vector<int>;

// Number of Fock states for `bosons` particles on `sites` sites,
// C(bosons + sites - 1, bosons). Throws std::overflow_error if the result
// does not fit in 64 bits; exact for all bosons + sites <= 64.
std::uint64_t dimension(int bosons, int sites);

struct FockStateHash {
    std::size_t operator()(const FockState& s) const noexcept;
};

// Enumerated basis of a fixed (N, L) sector. States are stored in strict
// descending lexicographic order, so state 0 is (N, 0, ..., 0). Immutable
// after construction; safe for concurrent reads.
class FockBasis {
public:
    FockBasis(int bosons, int sites);

    int bosons() const noexcept { return bosons_; }
    int sites() const noexcept { return sites_; }
    std::size_t size() const noexcept { return states_.size(); }

    const FockState& state(std::size_t k) const { return states_.at(k); }
    const std::vector<FockState>& states() const noexcept { return states_; }

    // Ordinal of `s`; throws std::invalid_argument if `s` is not a member
    // (wrong length, negative entry, or wrong particle count).
    std::size_t index_of(const FockState& s) const;

    bool contains(const FockState& s) const noexcept;

    // Identifier used by operators to detect basis mismatches.
    std::string tag() const;

private:
    int bosons_{0};
    int sites_{1};
    std::vector<FockState> states_;
    std::unordered_map<FockState, std::uint32_t, FockStateHash> index_;
};

}  // namespace lab::fock
