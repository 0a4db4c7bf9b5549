// cache.hpp — on-disk reuse of eigendecompositions across runs

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lab/operators.hpp"
#include "lab/spectra.hpp"

namespace lab::cache {

// Canonical cache keys; any parameter change produces a different key.
std::string key_for_bath(const ops::ModelParams& params);
std::string key_for_composite(const ops::ModelParams& params);

// Stores full eigensystems keyed by a parameter string. A hit is trusted
// only after a residual spot-check on five seeded eigenpairs against the
// freshly built operator; corrupt or stale entries are discarded with a
// warning and recomputed. An empty directory path disables the cache.
class EigenCache {
public:
    EigenCache() = default;
    explicit EigenCache(std::filesystem::path dir);

    bool enabled() const noexcept { return !dir_.empty(); }
    const std::filesystem::path& dir() const noexcept { return dir_; }

    spectra::EigenSystem full(const ops::SparseOperator& op, const std::string& key,
                              int dim_cap = 8192);

    struct Entry {
        std::string file;
        std::string key;
        std::uintmax_t bytes{0};
    };
    std::vector<Entry> list() const;
    std::size_t clear();

    int hits() const noexcept { return hits_; }
    int misses() const noexcept { return misses_; }

private:
    std::filesystem::path dir_;
    int hits_{0};
    int misses_{0};

    std::filesystem::path entry_path(const std::string& key) const;
};

}  // namespace lab::cache
