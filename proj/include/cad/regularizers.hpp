// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <vector>

#include "cad/common.hpp"

namespace cad {

// Phi(r) = r - ln(1 + theta r) / theta, applied to row norms.
double phi(double r, double theta);
Vec row_norms(const Mat& R);
double sparsity_value(const Mat& R, double theta);

// Group shrink z_n = varsigma_n (1 - eta beta / ||R(n,:)||)_+ with row norms floored at delta.
inline constexpr double kZeroRowGuard = 1e-12;
Vec sparsity_prox_step(const Vec& varsigma, const Mat& R, double eta, double beta);
Vec sparsity_prox_step_norms(const Vec& varsigma, const Vec& norms, double eta, double beta);

double similarity_value(const Vec& gamma_b, const std::vector<Vec>& neighbors,
                        const std::vector<double>& weights);

inline double soft_threshold(double d, double lambda) {
    const double m = std::abs(d) - lambda;
    return m > 0 ? (d > 0 ? m : -m) : 0.0;
}

// argmin_u lambda |u - g| + (u - v)^2 / 2, componentwise, no sign constraint.
Vec l1_prox(const Vec& v, const Vec& gamma_l, double lambda);
// Same objective restricted to u >= 0.
Vec similarity_prox(const Vec& v, const Vec& gamma_l, double tau_eta);

// x + (z - u) / tau_eta; x unchanged once tau_eta underflows.
inline constexpr double kStepUnderflow = 1e-12;
Vec update_neighbor_subgradient(const Vec& x_prev, const Vec& z, const Vec& u, double tau_eta);

class SubgradientBank {
public:
    SubgradientBank() = default;
    SubgradientBank(const std::vector<int>& neighbors, Eigen::Index N);

    const Vec& aggregate() const { return aggregate_; }
    const Vec& entry(int l) const;
    const std::map<int, Vec>& entries() const { return per_neighbor_; }

    // Replaces entry l and moves the aggregate by c_lb (x_new - x_old).
    void update(int l, double c_lb, const Vec& x_new);
    void set(int l, const Vec& x) { per_neighbor_.at(l) = x; }
    void set_aggregate(const Vec& a) { aggregate_ = a; }

private:
    std::map<int, Vec> per_neighbor_;
    Vec aggregate_;
};

}  // namespace cad
