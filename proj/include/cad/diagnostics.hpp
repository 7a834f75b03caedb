// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <vector>

#include "cad/covariance.hpp"
#include "cad/rng.hpp"
#include "cad/solver.hpp"

namespace cad {

using ScalarFn = std::function<double(const Vec&)>;
using GradFn = std::function<Vec(const Vec&)>;

// d(x, y) = f(x) - f(y) - <grad f(y), x - y>; nonnegative for convex f.
double bregman_divergence(const ScalarFn& f, const GradFn& grad, const Vec& x, const Vec& y);
// Same, with f the local ML cost of (S, sigma2, Sh).
double bregman_divergence(const CMat& S, double sigma2, const CMat& Sh, const Vec& x, const Vec& y);

// Cost and gradient closures over a fixed ML instance.
ScalarFn ml_cost_fn(std::shared_ptr<const CMat> S, double sigma2, CMat Sh);
GradFn ml_grad_fn(std::shared_ptr<const CMat> S, double sigma2, CMat Sh);

// W = ||gamma - gamma*||^2 + sum_l (tau eta^l)^2 ||x^l - x^{l*}||^2
double lyapunov(const Vec& gamma, const Vec& gamma_ref, const std::map<int, Vec>& bank,
                const std::map<int, Vec>& bank_ref, double tau, const std::map<int, double>& steps);
double lyapunov(const ApSolverState& st, const Vec& gamma_ref, const std::map<int, Vec>& bank_ref,
                double tau);

// Max of ||grad(x) - grad(y)|| / ||x - y|| over random pairs in [lo, hi]^n.
double estimate_lipschitz(const GradFn& grad, Eigen::Index n, double lo, double hi, int probes,
                          Stream& rng);

struct StepBandReport {
    double lower = 0;  // 1/(L_f + eps)
    double upper = 0;  // min(2/L_f, 1/eps), open
    std::vector<int> violations;
    double violation_rate() const;
    std::size_t total = 0;
};

StepBandReport check_step_band(const std::vector<double>& eta, double L_f, double epsilon);

struct RateReport {
    double slope = 0;         // least-squares slope of log d against log t
    double sup_t_d = 0;       // sup over the fitted window of t d_t
    int first = 0, last = 0;  // fitted window, 1-based iteration numbers
    bool decaying = false;    // slope <= -0.5
};

// d[t-1] holds the divergence after iteration t. The fit covers t >= first
// (default: the last 90% of the trace); nonpositive values are skipped.
RateReport rate_check(const std::vector<double>& d, int first = 0);

// Running average of iterates 0..t-1.
class RunningAverage {
public:
    void push(const Vec& g);
    Vec mean() const { return sum_ / static_cast<double>(count_); }
    long count() const { return count_; }

private:
    Vec sum_;
    long count_ = 0;
};

struct ConvergenceTrace {
    std::vector<double> bregman;   // d_f(gamma-bar^t, gamma*)
    std::vector<double> lyapunov;  // W^t
    std::vector<double> step;
};

}  // namespace cad
