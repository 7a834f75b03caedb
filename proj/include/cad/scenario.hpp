// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "cad/codec.hpp"
#include "cad/network.hpp"
#include "cad/solver.hpp"

namespace cad {

struct SignalConfig {
    int K = 20;
    std::string activity = "fixed";  // fixed | bernoulli
    double activity_prob = 0.1;
    int L = 40;
    int M = 16;
    double snr_db = 10;
    double sigma2 = 1.0;

    void validate(int N) const;
};

// One sourced Monte-Carlo instance: everything the solver and the metrics need.
struct SourcedInstance {
    Topology topology;
    Mat gains;  // SNR-normalized, B x N
    ActivityPattern activity;
    std::shared_ptr<const CMat> S;
    std::vector<CMat> sample_cov;
    double sigma2 = 1.0;

    CadProblem problem() const;
    CadProblem problem(const NeighborSets& nb) const;
};

SourcedInstance make_sourced_instance(const TopologyConfig& topo, const SignalConfig& sig,
                                      std::uint64_t trial_seed);

struct CodecConfig {
    int J = 8;
    int Z = 4;
    int parity_bits = 5;
    std::vector<int> data_bits;  // explicit q_1..q_Z; overrides parity_bits when set
    std::uint64_t parity_seed = 1;
    double nu = 0.02;  // slot threshold is nu * sigma2

    TreeCodeConfig tree() const;
    void validate() const;
};

struct UnsourcedTrial {
    UnsourcedMetrics metrics;
    long grad_evals = 0;
    std::vector<Bits> sent;
    std::vector<std::vector<Bits>> lists;
};

// K = sig.K devices each send one random message; topo.N is ignored.
UnsourcedTrial run_unsourced_trial(const TopologyConfig& topo, const SignalConfig& sig,
                                   const CodecConfig& codec, const SolverConfig& solver,
                                   const NeighborSets* neighbors, std::uint64_t trial_seed);

}  // namespace cad
