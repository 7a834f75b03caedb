// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>

#include "cad/common.hpp"
#include "cad/rng.hpp"

namespace cad {

// Tracks Sigma = S diag(gamma) S^H + sigma2 I together with its inverse.
// The inverse is maintained by Sherman-Morrison and re-derived densely every
// `refactor_every` updates or when the probed drift exceeds `drift_tol`.
class CovarianceModel {
public:
    static constexpr int refactor_every = 500;
    static constexpr int drift_probe_every = 100;
    static constexpr double drift_tol = 1e-9;

    CovarianceModel(std::shared_ptr<const CMat> S, double sigma2);
    CovarianceModel(std::shared_ptr<const CMat> S, const Vec& gamma, double sigma2);

    const CMat& sigma() const { return sigma_; }
    const CMat& sigma_inv() const { return sigma_inv_; }
    const Vec& gamma() const { return gamma_; }
    double noise_power() const { return sigma2_; }
    const CMat& signatures() const { return *S_; }
    Eigen::Index L() const { return S_->rows(); }
    Eigen::Index N() const { return S_->cols(); }

    // (Sigma - gamma_n s_n s_n^H)^{-1} by the rank-1 identity.
    CMat downdate(Eigen::Index n, double gamma_n) const;

    // gamma_n <- new_gamma; Sigma and Sigma^{-1} follow. A no-op when unchanged.
    void rank1_update(Eigen::Index n, double new_gamma);

    // || Sigma Sigma^{-1} - I ||_F
    double inverse_drift() const;
    // Rebuild Sigma from gamma and invert by Cholesky.
    void refactorize();
    long refactor_count() const { return refactors_; }

    // ln det Sigma from a Cholesky factor.
    double log_det() const;

private:
    std::shared_ptr<const CMat> S_;
    Vec gamma_;
    double sigma2_;
    CMat sigma_;
    CMat sigma_inv_;
    int since_refactor_ = 0;
    long refactors_ = 0;
};

CMat build_sigma(const CMat& S, const Vec& gamma, double sigma2);

// f(gamma) = ln det Sigma + tr(Sigma^{-1} Sh)
double ml_cost(const CMat& S, const Vec& gamma, double sigma2, const CMat& Sh);
double ml_cost(const CovarianceModel& model, const CMat& Sh);

// Derivative of f in gamma_n from the downdated inverse.
double coordinate_gradient(const CovarianceModel& model, const CMat& Sh, Eigen::Index n,
                           double gamma_n);

// All coordinates against the same base Sigma. Batched: with U = Sigma^{-1} S,
// grad_n = Re(s_n^H u_n) - Re(u_n^H Sh u_n), which equals the downdate form.
Vec full_gradient(const CovarianceModel& model, const CMat& Sh);

struct GradientSample {
    Vec vector;
    bool was_computed = false;
};

GradientSample probabilistic_gradient(const CovarianceModel& model, const CMat& Sh, double p_bar,
                                      Stream& rng);

}  // namespace cad
