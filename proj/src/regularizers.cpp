// SPDX-License-Identifier: Apache-2.0
#include "cad/regularizers.hpp"

#include <cmath>

namespace cad {

double phi(double r, double theta) {
    if (!(theta > 0)) throw ConfigError("theta must be > 0");
    // log1p keeps the small-r branch accurate, where Phi ~ theta r^2 / 2
    return r - std::log1p(theta * r) / theta;
}

Vec row_norms(const Mat& R) { return R.rowwise().norm(); }

double sparsity_value(const Mat& R, double theta) {
    if (!(theta > 0)) throw ConfigError("theta must be > 0");
    const Vec n = row_norms(R);
    double s = 0;
    for (Eigen::Index i = 0; i < n.size(); ++i) s += phi(n(i), theta);
    return s;
}

Vec sparsity_prox_step_norms(const Vec& varsigma, const Vec& norms, double eta, double beta) {
    Vec z(varsigma.size());
    for (Eigen::Index n = 0; n < varsigma.size(); ++n) {
        const double f = 1.0 - eta * beta / std::max(norms(n), kZeroRowGuard);
        z(n) = f > 0 ? varsigma(n) * f : 0.0;
    }
    return z;
}

Vec sparsity_prox_step(const Vec& varsigma, const Mat& R, double eta, double beta) {
    if (R.rows() != varsigma.size()) throw DomainError("R rows do not match varsigma");
    if (beta == 0) return varsigma;
    return sparsity_prox_step_norms(varsigma, row_norms(R), eta, beta);
}

double similarity_value(const Vec& gamma_b, const std::vector<Vec>& neighbors,
                        const std::vector<double>& weights) {
    if (neighbors.size() != weights.size()) throw DomainError("one weight per neighbor");
    double s = 0;
    for (std::size_t i = 0; i < neighbors.size(); ++i)
        s += weights[i] * (gamma_b - neighbors[i]).lpNorm<1>();
    return s;
}

Vec l1_prox(const Vec& v, const Vec& gamma_l, double lambda) {
    Vec u(v.size());
    for (Eigen::Index n = 0; n < v.size(); ++n)
        u(n) = gamma_l(n) + soft_threshold(v(n) - gamma_l(n), lambda);
    return u;
}

Vec similarity_prox(const Vec& v, const Vec& gamma_l, double tau_eta) {
    if (!(tau_eta >= 0)) throw DomainError("tau_eta must be >= 0");
    // the objective is convex in u, so clipping the unconstrained minimizer is exact
    return l1_prox(v, gamma_l, tau_eta).cwiseMax(0.0);
}

Vec update_neighbor_subgradient(const Vec& x_prev, const Vec& z, const Vec& u, double tau_eta) {
    if (!(tau_eta > 0)) throw ConfigError("tau_eta must be > 0");
    if (tau_eta < kStepUnderflow) return x_prev;
    return x_prev + (z - u) / tau_eta;
}

SubgradientBank::SubgradientBank(const std::vector<int>& neighbors, Eigen::Index N)
    : aggregate_(Vec::Zero(N)) {
    for (int l : neighbors) per_neighbor_.emplace(l, Vec::Zero(N));
}

const Vec& SubgradientBank::entry(int l) const {
    auto it = per_neighbor_.find(l);
    if (it == per_neighbor_.end()) throw DomainError("unknown neighbor index");
    return it->second;
}

void SubgradientBank::update(int l, double c_lb, const Vec& x_new) {
    auto it = per_neighbor_.find(l);
    if (it == per_neighbor_.end()) throw DomainError("unknown neighbor index");
    if (c_lb != 0) aggregate_ += c_lb * (x_new - it->second);
    it->second = x_new;
}

}  // namespace cad
