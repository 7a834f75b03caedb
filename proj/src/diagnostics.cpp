// SPDX-License-Identifier: Apache-2.0
#include "cad/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace cad {

double bregman_divergence(const ScalarFn& f, const GradFn& grad, const Vec& x, const Vec& y) {
    return f(x) - f(y) - grad(y).dot(x - y);
}

ScalarFn ml_cost_fn(std::shared_ptr<const CMat> S, double sigma2, CMat Sh) {
    return [S, sigma2, Sh = std::move(Sh)](const Vec& g) { return ml_cost(*S, g, sigma2, Sh); };
}

GradFn ml_grad_fn(std::shared_ptr<const CMat> S, double sigma2, CMat Sh) {
    return [S, sigma2, Sh = std::move(Sh)](const Vec& g) {
        return full_gradient(CovarianceModel(S, g, sigma2), Sh);
    };
}

double bregman_divergence(const CMat& S, double sigma2, const CMat& Sh, const Vec& x, const Vec& y) {
    auto sp = std::make_shared<const CMat>(S);
    return bregman_divergence(ml_cost_fn(sp, sigma2, Sh), ml_grad_fn(sp, sigma2, Sh), x, y);
}

double lyapunov(const Vec& gamma, const Vec& gamma_ref, const std::map<int, Vec>& bank,
                const std::map<int, Vec>& bank_ref, double tau, const std::map<int, double>& steps) {
    double w = (gamma - gamma_ref).squaredNorm();
    if (tau == 0) return w;
    for (const auto& [l, x] : bank) {
        auto r = bank_ref.find(l);
        auto s = steps.find(l);
        if (r == bank_ref.end() || s == steps.end()) throw DomainError("bank entry without reference");
        const double te = tau * s->second;
        w += te * te * (x - r->second).squaredNorm();
    }
    return w;
}

double lyapunov(const ApSolverState& st, const Vec& gamma_ref, const std::map<int, Vec>& bank_ref,
                double tau) {
    // eta^l = c_lb eta / p_l with the current combiners and uniform p_l
    std::map<int, double> steps;
    const double inv_p = static_cast<double>(st.neighbors.size());
    for (int l : st.neighbors) steps[l] = st.combiners.at(l) * st.step * inv_p;
    return lyapunov(st.gamma, gamma_ref, st.bank.entries(), bank_ref, tau, steps);
}

double estimate_lipschitz(const GradFn& grad, Eigen::Index n, double lo, double hi, int probes,
                          Stream& rng) {
    if (probes < 2) throw DomainError("estimate_lipschitz needs at least 2 probes");
    auto draw = [&] {
        Vec v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = lo + (hi - lo) * rng.uniform();
        return v;
    };
    // probes points, consecutive pairs; more probes only add pairs
    double best = 0;
    Vec prev = draw();
    Vec gprev = grad(prev);
    for (int k = 1; k < probes; ++k) {
        Vec x = draw();
        Vec gx = grad(x);
        const double dx = (x - prev).norm();
        if (dx > 0) best = std::max(best, (gx - gprev).norm() / dx);
        prev = std::move(x);
        gprev = std::move(gx);
    }
    return best;
}

double StepBandReport::violation_rate() const {
    return total ? static_cast<double>(violations.size()) / static_cast<double>(total) : 0.0;
}

StepBandReport check_step_band(const std::vector<double>& eta, double L_f, double epsilon) {
    if (!(epsilon > 0)) throw DomainError("check_step_band needs epsilon > 0");
    StepBandReport r;
    r.lower = 1.0 / (L_f + epsilon);
    r.upper = L_f > 0 ? std::min(2.0 / L_f, 1.0 / epsilon) : 1.0 / epsilon;
    r.total = eta.size();
    for (std::size_t i = 0; i < eta.size(); ++i)
        if (!(eta[i] >= r.lower && eta[i] < r.upper)) r.violations.push_back(static_cast<int>(i));
    return r;
}

RateReport rate_check(const std::vector<double>& d, int first) {
    const int T = static_cast<int>(d.size());
    if (T < 30) throw DomainError("rate_check needs at least 30 recorded iterations");
    RateReport r;
    r.first = first > 0 ? first : std::max(1, T / 10);
    r.last = T;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int t = r.first; t <= T; ++t) {
        const double v = d[static_cast<std::size_t>(t - 1)];
        r.sup_t_d = std::max(r.sup_t_d, t * v);
        if (!(v > 0)) continue;
        const double x = std::log(static_cast<double>(t)), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) throw DomainError("rate_check has fewer than two positive samples");
    r.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    r.decaying = r.slope <= -0.5;
    return r;
}

void RunningAverage::push(const Vec& g) {
    if (count_ == 0) sum_ = Vec::Zero(g.size());
    sum_ += g;
    ++count_;
}

}  // namespace cad
