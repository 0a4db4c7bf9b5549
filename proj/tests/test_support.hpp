// test_support.hpp — independent oracles and helpers shared by the test
// suites; everything here is deliberately implemented without reusing the
// library's computational paths

#pragma once

#include <algorithm>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace test_support {

// Matrix exponential by scaling-and-squaring with a Taylor series; accurate
// to machine precision for the small matrices used in the tests.
inline Eigen::MatrixXcd expm_taylor(const Eigen::MatrixXcd& a) {
    const Eigen::Index n = a.rows();
    double norm = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) norm = std::max(norm, a.row(r).cwiseAbs().sum());
    int squarings = 0;
    while (norm > 0.5) {
        norm /= 2.0;
        ++squarings;
    }
    const Eigen::MatrixXcd x = a / std::pow(2.0, squarings);
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd sum = term;
    for (int k = 1; k <= 40; ++k) {
        term = term * x / static_cast<double>(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum;
}

// All occupation vectors of `sites` entries summing to `bosons`, in
// descending lexicographic order, generated recursively.
inline std::vector<std::vector<int>> enumerate_occupations(int bosons, int sites) {
    std::vector<std::vector<int>> out;
    std::vector<int> partial;
    const auto recurse = [&](auto&& self, int remaining, int slots) -> void {
        if (slots == 1) {
            partial.push_back(remaining);
            out.push_back(partial);
            partial.pop_back();
            return;
        }
        for (int n = remaining; n >= 0; --n) {
            partial.push_back(n);
            self(self, remaining - n, slots - 1);
            partial.pop_back();
        }
    };
    recurse(recurse, bosons, sites);
    return out;
}

inline Eigen::VectorXcd random_state(int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = std::complex<double>(g(rng), g(rng));
    v.normalize();
    return v;
}

// Real symmetric GOE sample: (M + M^T) / 2 with iid standard normals.
inline Eigen::MatrixXd goe_sample(int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXd m(dim, dim);
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) m(r, c) = g(rng);
    }
    return 0.5 * (m + m.transpose());
}

}  // namespace test_support
