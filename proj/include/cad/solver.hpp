// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "cad/covariance.hpp"
#include "cad/network.hpp"
#include "cad/regularizers.hpp"
#include "cad/rng.hpp"

namespace cad {

struct SolverConfig {
    double theta = 1.0 / 0.039;
    double beta = 2.0;
    double tau = 0.03;
    double rho = 500;
    double epsilon = 90;
    double p_bar = 1.0;
    double eta0 = 1e-5;
    double omega = 0.02;  // activity threshold is omega * sigma2
    int max_iters = 150;

    void validate() const;
};

struct ApSolverState {
    int id = 0;
    std::vector<int> neighbors;  // N_b, sorted, includes id
    Vec gamma;
    Vec gamma_prev;
    CovarianceModel model;
    SubgradientBank bank;
    Vec z;
    double step = 0;
    bool has_prev = false;
    GradientSample grad_prev;  // last emitted sample, possibly the zero vector
    // Last iterate at which the gradient was actually computed, with that gradient.
    // The adaptive step differences only computed pairs.
    bool has_pair = false;
    Vec pair_gamma;
    Vec pair_grad;
    std::map<int, double> combiners;
    std::map<int, Vec> inbox;  // neighbor estimates from the last exchange
    // last iteration
    int selected = -1;
    double step_selected = 0;  // eta^{l} = c_lb eta / p_l
    long grad_evals = 0;

    ApSolverState(int b, std::vector<int> nb, std::shared_ptr<const CMat> S, double sigma2,
                  double eta0);
    std::vector<int> others() const;
};

struct RoundTrace {
    std::vector<std::vector<double>> ml_cost;    // [t][b], f(gamma_b^t)
    std::vector<std::vector<double>> objective;  // [t][b], f + beta g + tau Psi
    std::vector<std::vector<double>> step;       // [t][b]
    std::vector<std::vector<int>> selected;      // [t][b]
    std::vector<long> messages;                  // [t]
    long grad_evals = 0;
};

struct CadProblem {
    std::shared_ptr<const CMat> S;
    std::vector<CMat> sample_cov;  // one per AP
    double sigma2 = 1.0;
    NeighborSets neighbors;

    int num_aps() const { return static_cast<int>(sample_cov.size()); }
};

// eta = |dg|^2 / (|dg . dgrad| + eps |dg|^2); `previous` when dg = 0.
double adaptive_step(const Vec& gamma_t, const Vec& gamma_prev, const Vec& grad_t,
                     const Vec& grad_prev, double epsilon, double previous);

// Logistic-of-distance weights over N_b^-, the self weight closes the simplex.
std::map<int, double> adaptive_combiners(int self, const Vec& own, const std::map<int, Vec>& inbox,
                                         double rho);

// One local update of AP b (gradient, z-step, sampled prox, rank-1 refresh, bank).
void ap_iteration(ApSolverState& st, const CMat& Sh, const SolverConfig& cfg, Stream& rng);

// Pushes every gamma_b to its one-hop neighbors; returns the vector count.
long exchange_round(std::vector<ApSolverState>& states);

double local_objective(const ApSolverState& st, const CMat& Sh, const SolverConfig& cfg,
                       double* ml_part = nullptr);

struct SolverResult {
    std::vector<Vec> gamma;
    RoundTrace trace;
};

class CadSolver {
public:
    using Observer = std::function<void(int t, const std::vector<ApSolverState>&)>;

    CadSolver(CadProblem problem, SolverConfig cfg, std::uint64_t seed);

    // One synchronous round over all APs followed by the exchange.
    void step();
    SolverResult run(const Observer& obs = {});

    int iteration() const { return t_; }
    const std::vector<ApSolverState>& states() const { return states_; }
    std::vector<ApSolverState>& states() { return states_; }
    const CadProblem& problem() const { return problem_; }
    const SolverConfig& config() const { return cfg_; }
    const RoundTrace& trace() const { return trace_; }

private:
    void record();

    CadProblem problem_;
    SolverConfig cfg_;
    std::vector<ApSolverState> states_;
    std::vector<Stream> rngs_;
    RoundTrace trace_;
    int t_ = 0;
};

SolverResult run_cad(const CadProblem& problem, const SolverConfig& cfg, std::uint64_t seed);

ActivityPattern threshold_activity(const Vec& gamma_hat, double sigma2, double omega);

}  // namespace cad
