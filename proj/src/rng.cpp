// SPDX-License-Identifier: Apache-2.0
#include "cad/rng.hpp"

#include <cmath>

namespace cad {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(master);
    for (auto p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    return h;
}

cplx Stream::cnormal() {
    static const double k = std::sqrt(0.5);
    double re = normal();
    double im = normal();
    return {k * re, k * im};
}

std::size_t Stream::index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_);
}

CMat Stream::cnormal_matrix(Eigen::Index rows, Eigen::Index cols) {
    CMat m(rows, cols);
    // column-major fill order is part of the reproducibility contract
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cnormal();
    return m;
}

}  // namespace cad
