// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "cad/common.hpp"
#include "cad/rng.hpp"

namespace cad {

struct TopologyConfig {
    int B = 5;
    int N = 200;
    double coverage_radius_km = 1.0;
    double ap_spacing_km = 0.5;
    double cooperation_radius_km = 1.0;
    // When >= 0, overrides the radius: k-nearest APs, symmetrized. 0 is the
    // non-cooperative graph, >= B-1 the complete one.
    int cooperation_degree = -1;
    // g[dB] = intercept - slope * log10(d_km)
    double pathloss_intercept_db = -128.1;
    double pathloss_slope = 36.7;
    // Devices closer than this to any AP are redrawn. 0 disables the rule.
    double min_distance_km = 0.0;

    void validate() const;
};

using NeighborSets = std::vector<std::vector<int>>;

struct Topology {
    Eigen::MatrixX2d ap_positions;
    Eigen::MatrixX2d device_positions;
    NeighborSets neighbors;  // sorted, each contains b itself
    Mat gains;               // B x N linear power

    int num_aps() const { return static_cast<int>(ap_positions.rows()); }
    int num_devices() const { return static_cast<int>(device_positions.rows()); }
};

// Linear-power gain for an AP-device distance. Distances are floored at 1 m.
double pathloss_gain(double d_km, double intercept_db, double slope);

// Grid points (spacing) inside the disc, B nearest to the centre.
Eigen::MatrixX2d ap_grid(int B, double spacing_km, double radius_km);

NeighborSets neighbors_by_radius(const Eigen::MatrixX2d& aps, double radius_km);
// Each AP links to its `degree` nearest APs; the relation is then symmetrized.
NeighborSets neighbors_by_degree(const Eigen::MatrixX2d& aps, int degree);

Topology build_topology(const TopologyConfig& cfg, Stream& rng);

// Scale each device's gains so that its strongest AP sees SNR = snr_db at noise sigma2.
Mat normalize_gains(const Mat& gains, double snr_db, double sigma2);

struct ActivityPattern {
    std::vector<std::uint8_t> indicators;
    std::vector<int> active_set;  // ascending
};

ActivityPattern sample_activity(int N, int K, Stream& rng);
ActivityPattern sample_activity_bernoulli(int N, double prob, Stream& rng);
ActivityPattern activity_from_indicators(std::vector<std::uint8_t> chi);

// i.i.d. CN(0,1) entries; with unit_norm each column is rescaled to squared norm L.
CMat generate_signatures(int L, int N, Stream& rng, bool normalize_columns = false);

Vec true_state_vector(const Mat& gains, const ActivityPattern& act, int b);

struct ReceivedSignal {
    CMat samples;  // L x M
    double noise_power = 1.0;
    int antennas = 0;
};

ReceivedSignal synthesize_received(const CMat& S, const Vec& gamma, int M, double sigma2,
                                   Stream& rng);

CMat sample_covariance(const CMat& Y);

}  // namespace cad
