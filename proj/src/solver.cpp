// SPDX-License-Identifier: Apache-2.0
#include "cad/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cad {

void SolverConfig::validate() const {
    if (!(theta > 0)) throw ConfigError("solver.theta must be > 0");
    if (!(beta >= 0)) throw ConfigError("solver.beta must be >= 0");
    if (!(tau >= 0)) throw ConfigError("solver.tau must be >= 0");
    if (!(rho > 0)) throw ConfigError("solver.rho must be > 0");
    if (!(epsilon > 0)) throw ConfigError("solver.epsilon must be > 0");
    if (!(p_bar > 0 && p_bar <= 1)) throw ConfigError("solver.p_bar must lie in (0, 1]");
    if (!(eta0 > 0 && eta0 <= 1.0 / epsilon))
        throw ConfigError("solver.eta0 must lie in (0, 1/epsilon]");
    if (!(omega > 0)) throw ConfigError("solver.omega must be > 0");
    if (max_iters < 0) throw ConfigError("solver.max_iters must be >= 0");
}

ApSolverState::ApSolverState(int b, std::vector<int> nb, std::shared_ptr<const CMat> S,
                             double sigma2, double eta0)
    : id(b),
      neighbors(std::move(nb)),
      gamma(Vec::Zero(S->cols())),
      gamma_prev(Vec::Zero(S->cols())),
      model(S, sigma2),
      bank(neighbors, S->cols()),
      z(Vec::Zero(S->cols())),
      step(eta0) {
    std::sort(neighbors.begin(), neighbors.end());
    if (!std::binary_search(neighbors.begin(), neighbors.end(), b))
        throw DomainError("neighbor set must contain the AP itself");
    grad_prev.vector = Vec::Zero(S->cols());
    for (int l : neighbors) combiners[l] = 1.0 / static_cast<double>(neighbors.size());
    for (int l : others()) inbox[l] = Vec::Zero(S->cols());
}

std::vector<int> ApSolverState::others() const {
    std::vector<int> o;
    for (int l : neighbors)
        if (l != id) o.push_back(l);
    return o;
}

double adaptive_step(const Vec& gamma_t, const Vec& gamma_prev, const Vec& grad_t,
                     const Vec& grad_prev, double epsilon, double previous) {
    const Vec dg = gamma_t - gamma_prev;
    const double nn = dg.squaredNorm();
    if (nn == 0) return previous;
    return nn / (std::abs(dg.dot(grad_t - grad_prev)) + epsilon * nn);
}

std::map<int, double> adaptive_combiners(int self, const Vec& own, const std::map<int, Vec>& inbox,
                                         double rho) {
    std::map<int, double> c;
    if (inbox.empty()) {
        c[self] = 1.0;
        return c;
    }
    const double k = 2.0 / static_cast<double>(inbox.size());
    double sum = 0;
    for (const auto& [l, g] : inbox) {
        // 1/(1+e^x) written to stay finite for large x
        const double x = rho * (own - g).norm();
        const double w = k * std::exp(-x) / (1.0 + std::exp(-x));
        c[l] = w;
        sum += w;
    }
    c[self] = std::max(0.0, 1.0 - sum);
    return c;
}

void ap_iteration(ApSolverState& st, const CMat& Sh, const SolverConfig& cfg, Stream& rng) {
    const Eigen::Index N = st.gamma.size();

    GradientSample g = probabilistic_gradient(st.model, Sh, cfg.p_bar, rng);
    if (g.was_computed) ++st.grad_evals;

    // The step from the two most recent gradient pairs drives both the z-step and eta^l.
    // A skipped gradient is not a gradient of anything, so it keeps the current step.
    if (g.was_computed) {
        if (st.has_pair)
            st.step = adaptive_step(st.gamma, st.pair_gamma, g.vector, st.pair_grad, cfg.epsilon,
                                    st.step);
        st.pair_gamma = st.gamma;
        st.pair_grad = g.vector;
        st.has_pair = true;
    }
    const double eta = st.step;

    const Vec varsigma = st.gamma - eta * g.vector - cfg.tau * eta * st.bank.aggregate();

    // Row norms of R_b: neighbor columns from the inbox, own column is varsigma, so
    // the shrink acts as the group soft-threshold and a zero start is not absorbing.
    Vec sq = varsigma.cwiseAbs2();
    for (const auto& [l, v] : st.inbox) sq += v.cwiseAbs2();
    st.z = sparsity_prox_step_norms(varsigma, sq.cwiseSqrt(), eta, cfg.beta);

    st.combiners = adaptive_combiners(st.id, st.gamma, st.inbox, cfg.rho);

    const double p_l = 1.0 / static_cast<double>(st.neighbors.size());
    const int l = st.neighbors[rng.index(st.neighbors.size())];
    const double c_l = st.combiners.at(l);
    const double lambda = cfg.tau * c_l * eta / p_l;
    st.selected = l;
    st.step_selected = c_l * eta / p_l;

    const Vec& x_l = st.bank.entry(l);
    const Vec v = st.z + lambda * x_l;
    // own term Psi_b(0) is constant, so its prox is the identity
    const Vec u = (l == st.id) ? v : l1_prox(v, st.inbox.at(l), lambda);
    const Vec next = u.cwiseMax(0.0);

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(N));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    for (Eigen::Index n : perm) st.model.rank1_update(n, next(n));

    // The bank tracks the similarity subgradient only; positivity is applied after.
    if (lambda >= kStepUnderflow)
        st.bank.update(l, c_l, update_neighbor_subgradient(x_l, st.z, u, lambda));

    st.gamma_prev = st.gamma;
    st.gamma = next;
    st.grad_prev = std::move(g);
    st.has_prev = true;
}

long exchange_round(std::vector<ApSolverState>& states) {
    long count = 0;
    for (auto& st : states)
        for (auto& [l, v] : st.inbox) {
            v = states[static_cast<std::size_t>(l)].gamma;
            ++count;
        }
    return count;
}

double local_objective(const ApSolverState& st, const CMat& Sh, const SolverConfig& cfg,
                       double* ml_part) {
    const double f = ml_cost(st.model, Sh);
    if (ml_part) *ml_part = f;
    Mat R(st.gamma.size(), static_cast<Eigen::Index>(st.inbox.size()) + 1);
    Eigen::Index j = 0;
    std::vector<Vec> nbs;
    std::vector<double> w;
    for (const auto& [l, v] : st.inbox) {
        R.col(j++) = v;
        nbs.push_back(v);
        w.push_back(st.combiners.count(l) ? st.combiners.at(l) : 0.0);
    }
    R.col(j) = st.gamma;
    return f + cfg.beta * sparsity_value(R, cfg.theta) +
           cfg.tau * similarity_value(st.gamma, nbs, w);
}

CadSolver::CadSolver(CadProblem problem, SolverConfig cfg, std::uint64_t seed)
    : problem_(std::move(problem)), cfg_(cfg) {
    cfg_.validate();
    const int B = problem_.num_aps();
    if (!problem_.S) throw DomainError("problem has no signature matrix");
    if (static_cast<int>(problem_.neighbors.size()) != B)
        throw DomainError("one neighbor set per AP is required");
    const Eigen::Index L = problem_.S->rows();
    for (const auto& Sh : problem_.sample_cov)
        if (Sh.rows() != L || Sh.cols() != L) throw DomainError("sample covariance must be L x L");
    states_.reserve(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        for (int l : problem_.neighbors[b])
            if (l < 0 || l >= B) throw DomainError("neighbor index out of range");
        states_.emplace_back(b, problem_.neighbors[b], problem_.S, problem_.sigma2, cfg_.eta0);
        rngs_.emplace_back(seed, Purpose::Solver, static_cast<std::uint64_t>(b));
    }
    exchange_round(states_);
}

void CadSolver::record() {
    const auto B = states_.size();
    std::vector<double> f(B), F(B), eta(B);
    std::vector<int> sel(B);
    for (std::size_t b = 0; b < B; ++b) {
        F[b] = local_objective(states_[b], problem_.sample_cov[b], cfg_, &f[b]);
        eta[b] = states_[b].step;
        sel[b] = states_[b].selected;
    }
    trace_.ml_cost.push_back(std::move(f));
    trace_.objective.push_back(std::move(F));
    trace_.step.push_back(std::move(eta));
    trace_.selected.push_back(std::move(sel));
}

void CadSolver::step() {
    for (std::size_t b = 0; b < states_.size(); ++b)
        ap_iteration(states_[b], problem_.sample_cov[b], cfg_, rngs_[b]);
    trace_.messages.push_back(exchange_round(states_));
    trace_.grad_evals = 0;
    for (const auto& st : states_) trace_.grad_evals += st.grad_evals;
    ++t_;
    record();
}

SolverResult CadSolver::run(const Observer& obs) {
    if (t_ == 0) {
        record();
        if (obs) obs(0, states_);
    }
    while (t_ < cfg_.max_iters) {
        step();
        if (obs) obs(t_, states_);
    }
    SolverResult r;
    for (const auto& st : states_) r.gamma.push_back(st.gamma);
    r.trace = trace_;
    return r;
}

SolverResult run_cad(const CadProblem& problem, const SolverConfig& cfg, std::uint64_t seed) {
    CadSolver s(problem, cfg, seed);
    return s.run();
}

ActivityPattern threshold_activity(const Vec& gamma_hat, double sigma2, double omega) {
    if (!(omega > 0)) throw ConfigError("omega must be > 0");
    std::vector<std::uint8_t> chi(static_cast<std::size_t>(gamma_hat.size()), 0);
    const double thr = omega * sigma2;
    for (Eigen::Index n = 0; n < gamma_hat.size(); ++n) chi[n] = gamma_hat(n) > thr ? 1 : 0;
    return activity_from_indicators(std::move(chi));
}

}  // namespace cad
