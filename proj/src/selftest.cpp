// SPDX-License-Identifier: Apache-2.0
#include "cad/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cad/codec.hpp"
#include "cad/covariance.hpp"
#include "cad/experiments.hpp"
#include "cad/metrics.hpp"
#include "cad/regularizers.hpp"
#include "cad/rng.hpp"

namespace cad {

namespace {

std::string fmt(const char* label, double v) {
    std::ostringstream ss;
    ss << label << " " << v;
    return ss.str();
}

Vec random_gamma(Eigen::Index N, Stream& rng) {
    Vec g(N);
    for (Eigen::Index n = 0; n < N; ++n) g(n) = rng.bernoulli(0.3) ? 0.0 : 3 * rng.uniform();
    return g;
}

CMat random_cov(Eigen::Index L, Stream& rng) {
    const CMat Y = rng.cnormal_matrix(L, 2 * L);
    return sample_covariance(Y);
}

SelftestCase downdate_case(Stream& rng) {
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
        const auto S = std::make_shared<const CMat>(rng.cnormal_matrix(8, 16));
        const Vec g = random_gamma(16, rng);
        CovarianceModel m(S, g, 0.7);
        const auto n = static_cast<Eigen::Index>(rng.index(16));
        Vec g2 = g;
        g2(n) = 0;
        const CMat dense = build_sigma(*S, g2, 0.7).inverse();
        worst = std::max(worst, (m.downdate(n, g(n)) - dense).norm() / dense.norm());
    }
    return {"sherman-morrison downdate", worst < 1e-10, fmt("max rel err", worst)};
}

SelftestCase determinant_case(Stream& rng) {
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
        const auto S = std::make_shared<const CMat>(rng.cnormal_matrix(8, 16));
        CovarianceModel m(S, random_gamma(16, rng), 1.0);
        const auto n = static_cast<Eigen::Index>(rng.index(16));
        const double d = rng.uniform();
        const cplx q = S->col(n).dot(m.sigma_inv() * S->col(n));
        const double predicted = m.log_det() + std::log(1 + d * q.real());
        Vec g = m.gamma();
        g(n) += d;
        const double dense = std::log(build_sigma(*S, g, 1.0).determinant().real());
        worst = std::max(worst, std::abs(predicted - dense) / std::abs(dense));
    }
    return {"rank-1 determinant identity", worst < 1e-10, fmt("max rel err", worst)};
}

SelftestCase gradient_case(Stream& rng) {
    double worst = 0;
    for (int k = 0; k < 5; ++k) {
        const auto S = std::make_shared<const CMat>(rng.cnormal_matrix(6, 12));
        const CMat Sh = random_cov(6, rng);
        Vec g = random_gamma(12, rng).array() + 0.5;
        const CovarianceModel m(S, g, 1.0);
        const Vec grad = full_gradient(m, Sh);
        for (Eigen::Index n = 0; n < 12; ++n) {
            const double h = 1e-5;
            Vec a = g, b = g;
            a(n) += h;
            b(n) -= h;
            const double fd = (ml_cost(*S, a, 1.0, Sh) - ml_cost(*S, b, 1.0, Sh)) / (2 * h);
            worst = std::max(worst, std::abs(fd - grad(n)) / std::max(std::abs(fd), 1e-8));
        }
    }
    return {"gradient vs finite differences", worst < 1e-5, fmt("max rel err", worst)};
}

SelftestCase prox_case(Stream& rng) {
    double gap = 0, expand = 0;
    for (int k = 0; k < 200; ++k) {
        Vec v(1), gl(1);
        v(0) = 4 * rng.uniform() - 2;
        gl(0) = 2 * rng.uniform();
        const double lam = rng.uniform();
        const double u = similarity_prox(v, gl, lam)(0);
        auto obj = [&](double x) { return lam * std::abs(x - gl(0)) + 0.5 * (x - v(0)) * (x - v(0)); };
        double best = obj(0);
        for (double x = 0; x <= 4; x += 1e-3) best = std::min(best, obj(x));
        gap = std::max(gap, obj(u) - best);

        Vec a = Vec::Random(5), b = Vec::Random(5), g5 = Vec::Random(5).cwiseAbs();
        const double d = (similarity_prox(a, g5, lam) - similarity_prox(b, g5, lam)).norm() - (a - b).norm();
        expand = std::max(expand, d);
    }
    return {"similarity prox oracle", gap <= 1e-12 && expand <= 1e-12,
            fmt("objective gap", gap) + ", " + fmt("expansion", expand)};
}

SelftestCase codec_case(Stream& rng) {
    int bad = 0;
    for (auto [J, Z] : {std::pair{8, 4}, std::pair{12, 4}}) {
        const TreeCode code(TreeCodeConfig::uniform(J, Z, J / 2, 3));
        for (int k = 0; k < 100; ++k) {
            const Bits m = random_message(code.config().total_bits(), rng);
            std::vector<SlotSet> sets;
            for (auto s : code.encode(m)) sets.push_back({s});
            const auto out = code.decode(sets);
            if (out.size() != 1 || out[0] != m) ++bad;
        }
    }
    return {"tree code roundtrip", bad == 0, std::to_string(bad) + " failures"};
}

SelftestCase aer_case(Stream& rng) {
    std::vector<std::uint8_t> chi(50), flip(50);
    for (int n = 0; n < 50; ++n) {
        chi[n] = rng.bernoulli(0.2);
        flip[n] = !chi[n];
    }
    const auto t = activity_from_indicators(chi);
    const double same = compute_aer(t, t);
    const double comp = compute_aer(t, activity_from_indicators(flip));
    return {"activity error rate extremes", same == 0 && comp == 2, fmt("complement", comp)};
}

SelftestCase determinism_case() {
    ExperimentConfig c;
    c.topology.N = 30;
    c.signal.K = 3;
    c.signal.L = 12;
    c.signal.M = 4;
    c.solver.max_iters = 10;
    const auto a = run_trial(c, 11, true);
    const auto b = run_trial(c, 11, true);
    const bool same = a.metric == b.metric && a.trace == b.trace && a.grad_evals == b.grad_evals;
    return {"seeded trial determinism", same, same ? "identical" : "differs"};
}

}  // namespace

std::vector<SelftestCase> run_selftest(std::uint64_t seed) {
    Stream rng(seed, Purpose::Test);
    std::vector<SelftestCase> out;
    out.push_back(downdate_case(rng));
    out.push_back(determinant_case(rng));
    out.push_back(gradient_case(rng));
    out.push_back(prox_case(rng));
    out.push_back(codec_case(rng));
    out.push_back(aer_case(rng));
    out.push_back(determinism_case());
    return out;
}

}  // namespace cad
