// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "cad/common.hpp"

namespace cad {

// Purpose tags for sub-streams. Keeping them fixed keeps old records reproducible.
enum class Purpose : std::uint64_t {
    Topology = 1,
    Activity = 2,
    Signatures = 3,
    Channel = 4,
    Solver = 5,
    Messages = 6,
    Parity = 7,
    Test = 99,
};

// splitmix64 finalizer; used to derive independent seeds from a master seed.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

class Stream {
public:
    explicit Stream(std::uint64_t seed) : eng_(seed) {}
    Stream(std::uint64_t master, Purpose p, std::uint64_t index = 0)
        : eng_(derive_seed(master, {static_cast<std::uint64_t>(p), index})) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
    // Circularly symmetric CN(0, 1).
    cplx cnormal();
    bool bernoulli(double p) { return uniform() < p; }
    // Uniform integer in [0, n).
    std::size_t index(std::size_t n);
    std::uint64_t bits() { return eng_(); }

    CMat cnormal_matrix(Eigen::Index rows, Eigen::Index cols);

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

}  // namespace cad
