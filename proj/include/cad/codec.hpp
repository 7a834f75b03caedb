// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "cad/network.hpp"
#include "cad/solver.hpp"

namespace cad {

using Bits = std::vector<std::uint8_t>;  // one bit per entry
using SlotSet = std::vector<std::uint32_t>;

struct TreeCodeConfig {
    int J = 8;
    int Z = 4;
    std::vector<int> data_bits;  // q_1..q_Z
    std::uint64_t parity_seed = 1;

    int total_bits() const;
    int parity_bits(int i) const { return J - data_bits[static_cast<std::size_t>(i)]; }
    void validate() const;

    // q_1 = J, q_i = J - p for i >= 2.
    static TreeCodeConfig uniform(int J, int Z, int parity, std::uint64_t seed);
    // Spread total - J data bits over slots 2..Z evenly, remainder to the last slot.
    static TreeCodeConfig from_total(int J, int Z, int total, std::uint64_t seed);
};

class TreeCode {
public:
    explicit TreeCode(TreeCodeConfig cfg);

    const TreeCodeConfig& config() const { return cfg_; }

    // Slot index per subblock; data bits high, parity bits low.
    std::vector<std::uint32_t> encode(const Bits& message) const;
    // Depth-first stitching over the candidate sets with parity pruning.
    std::vector<Bits> decode(const std::vector<SlotSet>& slot_sets) const;
    // True when every slot's parity bits match its data prefix.
    bool consistent(const std::vector<std::uint32_t>& slots) const;
    Bits data_bits(const std::vector<std::uint32_t>& slots) const;

    // Parity bits of slot i given all data bits of slots before it.
    std::uint32_t parity(int i, const Bits& prefix) const;

private:
    TreeCodeConfig cfg_;
    std::vector<int> offset_;                          // first data bit of each slot
    std::vector<std::vector<std::vector<std::uint8_t>>> G_;  // [slot][parity row][prefix bit]
};

Bits random_message(int bits, Stream& rng);
std::string to_string(const Bits& m);

struct SubblockSignal {
    ReceivedSignal received;
    Vec truth;  // codeword state vector, length 2^J
};

// Y = S diag(gamma)^{1/2} H + W with gamma_r = sum of gains of devices on slot r.
SubblockSignal synthesize_subblock(const CMat& codebook, const std::vector<std::uint32_t>& slots,
                                   const std::vector<double>& gains, int M, double sigma2,
                                   Stream& rng);

SlotSet select_active_slots(const Vec& gamma_hat, double sigma2, double nu);

// Runs the CAD solver on one subblock across all APs.
std::vector<Vec> inner_decode(std::shared_ptr<const CMat> codebook,
                              const std::vector<CMat>& sample_cov, double sigma2,
                              const NeighborSets& neighbors, const SolverConfig& cfg,
                              std::uint64_t seed, long* grad_evals = nullptr);

struct UnsourcedMetrics {
    std::vector<double> p_md;  // per AP
    std::vector<double> p_fa;  // per AP
    double p_e = 0;
};

UnsourcedMetrics unsourced_metrics(const std::vector<Bits>& sent,
                                   const std::vector<std::vector<Bits>>& lists);

}  // namespace cad
