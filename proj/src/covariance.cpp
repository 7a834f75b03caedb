// SPDX-License-Identifier: Apache-2.0
#include "cad/covariance.hpp"

#include <cmath>

namespace cad {

namespace {

CMat chol_inverse(const CMat& A) {
    Eigen::LLT<CMat> llt(A);
    if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
    CMat inv = llt.solve(CMat::Identity(A.rows(), A.cols()));
    return (inv + inv.adjoint()) * 0.5;
}

double chol_logdet(const CMat& A) {
    Eigen::LLT<CMat> llt(A);
    if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
    const CMat& Lf = llt.matrixLLT();
    double s = 0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) s += std::log(Lf(i, i).real());
    return 2 * s;
}

}  // namespace

CMat build_sigma(const CMat& S, const Vec& gamma, double sigma2) {
    if (S.cols() != gamma.size()) throw DomainError("gamma length does not match S");
    CMat sig = S * gamma.cast<cplx>().asDiagonal() * S.adjoint();
    sig.diagonal().array() += sigma2;
    return (sig + sig.adjoint()) * 0.5;
}

CovarianceModel::CovarianceModel(std::shared_ptr<const CMat> S, double sigma2)
    : CovarianceModel(S, Vec::Zero(S->cols()), sigma2) {}

CovarianceModel::CovarianceModel(std::shared_ptr<const CMat> S, const Vec& gamma, double sigma2)
    : S_(std::move(S)), gamma_(gamma), sigma2_(sigma2) {
    if (!(sigma2 > 0)) throw DomainError("noise power must be > 0");
    if (gamma_.size() != S_->cols()) throw DomainError("gamma length does not match S");
    if ((gamma_.array() < 0).any()) throw DomainError("negative entry in gamma");
    sigma_ = build_sigma(*S_, gamma_, sigma2_);
    sigma_inv_ = chol_inverse(sigma_);
}

CMat CovarianceModel::downdate(Eigen::Index n, double gamma_n) const {
    if (gamma_n == 0) return sigma_inv_;
    const auto s = S_->col(n);
    const CVec u = sigma_inv_ * s;
    const double q = s.dot(u).real();
    const double den = 1.0 - gamma_n * q;
    if (std::abs(den) < 1e-12) throw NumericalError("downdate denominator vanished");
    return sigma_inv_ + (gamma_n / den) * u * u.adjoint();
}

void CovarianceModel::rank1_update(Eigen::Index n, double new_gamma) {
    const double d = new_gamma - gamma_(n);
    if (d == 0) return;
    const auto s = S_->col(n);
    const CVec u = sigma_inv_ * s;
    const double q = s.dot(u).real();
    const double den = 1.0 + d * q;
    if (std::abs(den) < 1e-12) throw NumericalError("rank-1 update denominator vanished");
    sigma_.noalias() += d * s * s.adjoint();
    sigma_inv_.noalias() -= (d / den) * u * u.adjoint();
    gamma_(n) = new_gamma;
    ++since_refactor_;
    if (since_refactor_ >= refactor_every) {
        refactorize();
    } else if (since_refactor_ % drift_probe_every == 0 && inverse_drift() > drift_tol) {
        refactorize();
    }
}

double CovarianceModel::inverse_drift() const {
    return (sigma_ * sigma_inv_ - CMat::Identity(L(), L())).norm();
}

void CovarianceModel::refactorize() {
    sigma_ = build_sigma(*S_, gamma_, sigma2_);
    sigma_inv_ = chol_inverse(sigma_);
    since_refactor_ = 0;
    ++refactors_;
}

double CovarianceModel::log_det() const { return chol_logdet(sigma_); }

double ml_cost(const CMat& S, const Vec& gamma, double sigma2, const CMat& Sh) {
    const CMat sig = build_sigma(S, gamma, sigma2);
    Eigen::LLT<CMat> llt(sig);
    if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
    double ld = 0;
    for (Eigen::Index i = 0; i < sig.rows(); ++i) ld += std::log(llt.matrixLLT()(i, i).real());
    return 2 * ld + llt.solve(Sh).trace().real();
}

double ml_cost(const CovarianceModel& model, const CMat& Sh) {
    return model.log_det() + (model.sigma_inv() * Sh).trace().real();
}

double coordinate_gradient(const CovarianceModel& model, const CMat& Sh, Eigen::Index n,
                           double gamma_n) {
    if (n < 0 || n >= model.N()) throw DomainError("coordinate index out of range");
    const CMat Sbn = model.downdate(n, gamma_n);
    const auto s = model.signatures().col(n);
    const CVec v = Sbn * s;
    const double q = s.dot(v).real();
    const double r = v.dot(Sh * v).real();
    const double a = 1.0 + gamma_n * q;
    return q / a - r / (a * a);
}

Vec full_gradient(const CovarianceModel& model, const CMat& Sh) {
    const CMat& S = model.signatures();
    const CMat U = model.sigma_inv() * S;
    const CMat V = Sh * U;
    Vec g(S.cols());
    for (Eigen::Index n = 0; n < S.cols(); ++n)
        g(n) = S.col(n).dot(U.col(n)).real() - U.col(n).dot(V.col(n)).real();
    return g;
}

GradientSample probabilistic_gradient(const CovarianceModel& model, const CMat& Sh, double p_bar,
                                      Stream& rng) {
    if (!(p_bar > 0 && p_bar <= 1)) throw ConfigError("p_bar must lie in (0, 1]");
    GradientSample out;
    // the draw is consumed even at p_bar = 1 so streams line up across p_bar values
    const bool hit = rng.uniform() < p_bar;
    if (hit) {
        out.vector = full_gradient(model, Sh);
        out.was_computed = true;
    } else {
        out.vector = Vec::Zero(model.N());
    }
    return out;
}

}  // namespace cad
