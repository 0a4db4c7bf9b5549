#include "lab/cache.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

namespace lab::cache {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// True when the stored decomposition still matches the operator: five
// seeded eigenpairs must satisfy the residual bound.
bool spot_check(const ops::SparseOperator& op, const spectra::EigenSystem& es,
                const std::string& key) {
    if (!es.has_vectors() || es.dim() != op.dim()) return false;
    std::mt19937_64 rng(fnv64(key) ^ 0x9e3779b97f4a7c15ull);
    std::uniform_int_distribution<int> pick(0, es.dim() - 1);
    const double scale = std::max(op.max_abs(), 1.0);
    for (int i = 0; i < 5; ++i) {
        const int k = pick(rng);
        const Eigen::VectorXd r =
            op.apply(Eigen::VectorXd(es.vectors.col(k))) - es.energies(k) * es.vectors.col(k);
        if (r.cwiseAbs().maxCoeff() > 1e-7 * scale) return false;
    }
    return true;
}

}  // namespace

std::string key_for_bath(const ops::ModelParams& p) {
    return "bath|order=desc-lex|J=" + fmt(p.hopping) + "|U=" + fmt(p.interaction) +
           "|L=" + std::to_string(p.sites) + "|N=" + std::to_string(p.bosons);
}

std::string key_for_composite(const ops::ModelParams& p) {
    return "composite|order=desc-lex|J=" + fmt(p.hopping) + "|U=" + fmt(p.interaction) +
           "|L=" + std::to_string(p.sites) + "|N=" + std::to_string(p.bosons) +
           "|delta=" + fmt(p.splitting) + "|eps=" + fmt(p.coupling);
}

EigenCache::EigenCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::filesystem::path EigenCache::entry_path(const std::string& key) const {
    return dir_ / (hex64(fnv64(key)) + ".eig");
}

spectra::EigenSystem EigenCache::full(const ops::SparseOperator& op, const std::string& key,
                                      int dim_cap) {
    if (!enabled()) {
        ++misses_;
        return spectra::diagonalize(op, dim_cap);
    }
    const auto path = entry_path(key);
    if (std::filesystem::exists(path)) {
        try {
            std::ifstream in(path, std::ios::binary);
            spectra::EigenSystem es = spectra::load_eigensystem(in);
            if (spot_check(op, es, key)) {
                ++hits_;
                return es;
            }
            std::cerr << "lab: cache entry " << path.filename().string()
                      << " failed the eigenpair spot-check; recomputing\n";
        } catch (const std::exception& e) {
            std::cerr << "lab: discarding corrupt cache entry " << path.filename().string() << " ("
                      << e.what() << ")\n";
        }
        std::filesystem::remove(path);
    }
    ++misses_;
    spectra::EigenSystem es = spectra::diagonalize(op, dim_cap);
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        spectra::save_eigensystem(es, out);
        std::ofstream keyfile(entry_path(key).replace_extension(".key"), std::ios::trunc);
        keyfile << key << "\n";
    }
    return es;
}

std::vector<EigenCache::Entry> EigenCache::list() const {
    std::vector<Entry> entries;
    if (!enabled() || !std::filesystem::exists(dir_)) return entries;
    for (const auto& item : std::filesystem::directory_iterator(dir_)) {
        if (item.path().extension() != ".eig") continue;
        Entry e;
        e.file = item.path().filename().string();
        e.bytes = item.file_size();
        std::ifstream keyfile(std::filesystem::path(item.path()).replace_extension(".key"));
        std::getline(keyfile, e.key);
        entries.push_back(std::move(e));
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.file < b.file;
    });
    return entries;
}

std::size_t EigenCache::clear() {
    std::size_t removed = 0;
    if (!enabled() || !std::filesystem::exists(dir_)) return removed;
    for (const auto& item : std::filesystem::directory_iterator(dir_)) {
        const auto ext = item.path().extension();
        if (ext == ".eig" || ext == ".key" || ext == ".tbl") {
            std::filesystem::remove(item.path());
            ++removed;
        }
    }
    return removed;
}

}  // namespace lab::cache
