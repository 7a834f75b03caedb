// SPDX-License-Identifier: Apache-2.0
#include "cad/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cad {

void TopologyConfig::validate() const {
    if (B < 1) throw ConfigError("topology.B must be >= 1");
    if (N < 1) throw ConfigError("topology.N must be >= 1");
    if (!(coverage_radius_km > 0)) throw ConfigError("topology.coverage_radius_km must be > 0");
    if (!(ap_spacing_km > 0)) throw ConfigError("topology.ap_spacing_km must be > 0");
    if (!(cooperation_radius_km >= 0)) throw ConfigError("topology.cooperation_radius_km must be >= 0");
    if (!(pathloss_slope > 0)) throw ConfigError("topology.pathloss_slope must be > 0");
    if (!(min_distance_km >= 0) || min_distance_km >= coverage_radius_km)
        throw ConfigError("topology.min_distance_km must lie in [0, coverage_radius_km)");
}

double pathloss_gain(double d_km, double intercept_db, double slope) {
    const double d = std::max(d_km, 1e-3);
    return std::pow(10.0, (intercept_db - slope * std::log10(d)) / 10.0);
}

Eigen::MatrixX2d ap_grid(int B, double spacing_km, double radius_km) {
    struct P { double x, y, r; };
    std::vector<P> pts;
    const int k = static_cast<int>(std::ceil(radius_km / spacing_km)) + 1;
    for (int i = -k; i <= k; ++i)
        for (int j = -k; j <= k; ++j) {
            double x = i * spacing_km, y = j * spacing_km, r = std::hypot(x, y);
            if (r <= radius_km + 1e-9) pts.push_back({x, y, r});
        }
    if (static_cast<int>(pts.size()) < B)
        throw ConfigError("coverage disc holds only " + std::to_string(pts.size()) +
                          " grid points, B = " + std::to_string(B));
    std::sort(pts.begin(), pts.end(), [](const P& a, const P& b) {
        if (a.r != b.r) return a.r < b.r;
        if (a.x != b.x) return a.x < b.x;
        return a.y < b.y;
    });
    Eigen::MatrixX2d out(B, 2);
    for (int b = 0; b < B; ++b) out.row(b) << pts[b].x, pts[b].y;
    return out;
}

NeighborSets neighbors_by_radius(const Eigen::MatrixX2d& aps, double radius_km) {
    const int B = static_cast<int>(aps.rows());
    NeighborSets nb(B);
    for (int b = 0; b < B; ++b)
        for (int l = 0; l < B; ++l)
            if (l == b || (aps.row(b) - aps.row(l)).norm() <= radius_km + 1e-9) nb[b].push_back(l);
    return nb;
}

NeighborSets neighbors_by_degree(const Eigen::MatrixX2d& aps, int degree) {
    const int B = static_cast<int>(aps.rows());
    if (degree < 0) throw ConfigError("cooperation degree must be >= 0");
    std::vector<std::vector<char>> adj(B, std::vector<char>(B, 0));
    for (int b = 0; b < B; ++b) {
        adj[b][b] = 1;
        std::vector<int> order;
        for (int l = 0; l < B; ++l)
            if (l != b) order.push_back(l);
        std::stable_sort(order.begin(), order.end(), [&](int a, int c) {
            return (aps.row(b) - aps.row(a)).norm() < (aps.row(b) - aps.row(c)).norm();
        });
        for (int i = 0; i < std::min<int>(degree, static_cast<int>(order.size())); ++i)
            adj[b][order[i]] = adj[order[i]][b] = 1;
    }
    NeighborSets nb(B);
    for (int b = 0; b < B; ++b)
        for (int l = 0; l < B; ++l)
            if (adj[b][l]) nb[b].push_back(l);
    return nb;
}

Topology build_topology(const TopologyConfig& cfg, Stream& rng) {
    cfg.validate();
    Topology t;
    t.ap_positions = ap_grid(cfg.B, cfg.ap_spacing_km, cfg.coverage_radius_km);
    t.neighbors = cfg.cooperation_degree >= 0
                      ? neighbors_by_degree(t.ap_positions, cfg.cooperation_degree)
                      : neighbors_by_radius(t.ap_positions, cfg.cooperation_radius_km);
    t.device_positions.resize(cfg.N, 2);
    t.gains.resize(cfg.B, cfg.N);
    const double pi = std::acos(-1.0);
    for (int n = 0; n < cfg.N; ++n) {
        Eigen::RowVector2d p;
        for (;;) {
            const double r = cfg.coverage_radius_km * std::sqrt(rng.uniform());
            const double th = 2 * pi * rng.uniform();
            p << r * std::cos(th), r * std::sin(th);
            if (cfg.min_distance_km <= 0) break;
            const double dmin = (t.ap_positions.rowwise() - p).rowwise().norm().minCoeff();
            if (dmin >= cfg.min_distance_km) break;
        }
        t.device_positions.row(n) = p;
        for (int b = 0; b < cfg.B; ++b)
            t.gains(b, n) = pathloss_gain((t.ap_positions.row(b) - p).norm(),
                                          cfg.pathloss_intercept_db, cfg.pathloss_slope);
    }
    return t;
}

Mat normalize_gains(const Mat& gains, double snr_db, double sigma2) {
    if (!(sigma2 > 0)) throw ConfigError("sigma2 must be > 0");
    const double target = std::pow(10.0, snr_db / 10.0) * sigma2;
    Mat out = gains;
    for (Eigen::Index n = 0; n < gains.cols(); ++n) out.col(n) *= target / gains.col(n).maxCoeff();
    return out;
}

ActivityPattern activity_from_indicators(std::vector<std::uint8_t> chi) {
    ActivityPattern a;
    a.indicators = std::move(chi);
    for (std::size_t n = 0; n < a.indicators.size(); ++n)
        if (a.indicators[n]) a.active_set.push_back(static_cast<int>(n));
    return a;
}

ActivityPattern sample_activity(int N, int K, Stream& rng) {
    if (N < 0 || K < 0 || K > N) throw DomainError("sample_activity needs 0 <= K <= N");
    // partial Fisher-Yates
    std::vector<int> idx(N);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < K; ++i) {
        const auto j = i + static_cast<int>(rng.index(static_cast<std::size_t>(N - i)));
        std::swap(idx[i], idx[j]);
    }
    std::vector<std::uint8_t> chi(N, 0);
    for (int i = 0; i < K; ++i) chi[idx[i]] = 1;
    return activity_from_indicators(std::move(chi));
}

ActivityPattern sample_activity_bernoulli(int N, double prob, Stream& rng) {
    if (N < 0 || !(prob >= 0 && prob <= 1)) throw DomainError("activity probability outside [0,1]");
    std::vector<std::uint8_t> chi(N, 0);
    for (auto& c : chi) c = rng.bernoulli(prob) ? 1 : 0;
    return activity_from_indicators(std::move(chi));
}

CMat generate_signatures(int L, int N, Stream& rng, bool normalize_columns) {
    if (L < 1 || N < 1) throw DomainError("signature dimensions must be positive");
    CMat S = rng.cnormal_matrix(L, N);
    if (normalize_columns)
        for (int n = 0; n < N; ++n) S.col(n) *= std::sqrt(static_cast<double>(L)) / S.col(n).norm();
    return S;
}

Vec true_state_vector(const Mat& gains, const ActivityPattern& act, int b) {
    if (b < 0 || b >= gains.rows()) throw DomainError("AP index out of range");
    if (static_cast<Eigen::Index>(act.indicators.size()) != gains.cols())
        throw DomainError("activity length does not match device count");
    Vec g = Vec::Zero(gains.cols());
    for (int n : act.active_set) g(n) = gains(b, n);
    return g;
}

ReceivedSignal synthesize_received(const CMat& S, const Vec& gamma, int M, double sigma2,
                                   Stream& rng) {
    if (S.cols() != gamma.size()) throw DomainError("gamma length does not match S");
    if ((gamma.array() < 0).any()) throw DomainError("negative entry in gamma");
    if (!(sigma2 > 0)) throw DomainError("sigma2 must be > 0");
    if (M < 1) throw DomainError("M must be >= 1");
    const Eigen::Index L = S.rows(), N = S.cols();
    // only active columns contribute; H is still drawn for all of them so the
    // stream position does not depend on the support
    CMat H = rng.cnormal_matrix(N, M);
    CMat W = rng.cnormal_matrix(L, M);
    ReceivedSignal r;
    r.noise_power = sigma2;
    r.antennas = M;
    r.samples = std::sqrt(sigma2) * W;
    for (Eigen::Index n = 0; n < N; ++n)
        if (gamma(n) > 0) r.samples.noalias() += std::sqrt(gamma(n)) * S.col(n) * H.row(n);
    return r;
}

CMat sample_covariance(const CMat& Y) {
    if (Y.cols() < 1) throw DomainError("sample covariance needs M >= 1");
    CMat C = Y * Y.adjoint() / static_cast<double>(Y.cols());
    // exact Hermitian symmetry
    return (C + C.adjoint()) * 0.5;
}

}  // namespace cad
