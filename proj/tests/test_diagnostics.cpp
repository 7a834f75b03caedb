#include <doctest.h>

#include "cad/diagnostics.hpp"
#include "cad/network.hpp"

using namespace cad;

namespace {

struct MlInstance {
    std::shared_ptr<const CMat> S;
    Vec truth;
    CMat Sh;
};

// Sample covariance drawn from the model at `truth`; the ML cost is convex
// on the region where Sigma stays below twice the sample covariance.
MlInstance ml_instance(Eigen::Index L, Eigen::Index N, int M, Stream& rng) {
    MlInstance in;
    in.S = std::make_shared<const CMat>(rng.cnormal_matrix(L, N));
    in.truth = Vec::Zero(N);
    for (Eigen::Index n = 0; n < N; n += 2) in.truth(n) = 1 + rng.uniform();
    in.Sh = sample_covariance(synthesize_received(*in.S, in.truth, M, 1.0, rng).samples);
    return in;
}

Vec box(Eigen::Index n, double lo, double hi, Stream& rng) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = lo + (hi - lo) * rng.uniform();
    return v;
}

// Sigma(gamma) <= 2 Sh. The set is convex in gamma since Sigma is affine.
bool in_convex_region(const MlInstance& in, const Vec& g) {
    const CMat D = 2.0 * in.Sh - build_sigma(*in.S, g, 1.0);
    return Eigen::SelfAdjointEigenSolver<CMat>(D, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() >= 0;
}

// H_nm = 2 Re[(s_n^H A Sh A s_m)(s_m^H A s_n)] - |s_n^H A s_m|^2, A = Sigma^-1
Mat ml_hessian(const MlInstance& in, const Vec& g) {
    const CMat A = build_sigma(*in.S, g, 1.0).inverse();
    const CMat P = in.S->adjoint() * A * *in.S;
    const CMat Q = in.S->adjoint() * A * in.Sh * A * *in.S;
    return (2.0 * Q.cwiseProduct(P.transpose())).real() - P.cwiseAbs2();
}

// Mean Hessian on the segment [a, b] by Simpson's rule.
Mat segment_hessian(const MlInstance& in, const Vec& a, const Vec& b) {
    const int n = 40;
    Mat H = Mat::Zero(a.size(), a.size());
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
        H += w * ml_hessian(in, a + (b - a) * (double(i) / n));
    }
    return H / (3.0 * n);
}

}  // namespace

TEST_CASE("Bregman divergence") {
    Stream rng(1, Purpose::Test);
    const auto in = ml_instance(6, 8, 500, rng);
    const Vec x = box(8, 0, 2, rng);
    CHECK(bregman_divergence(*in.S, 1.0, in.Sh, x, x) == 0);

    const double a = 2.5;
    ScalarFn f = [a](const Vec& v) { return a * v(0) * v(0); };
    GradFn g = [a](const Vec& v) { return Vec::Constant(1, 2 * a * v(0)); };
    Vec p(1), q(1);
    p << 1.3;
    q << -0.4;
    CHECK(bregman_divergence(f, g, p, q) == doctest::Approx(a * (1.3 + 0.4) * (1.3 + 0.4)));

    for (int k = 0; k < 20; ++k) {
        const Vec u = box(8, 0, 2, rng), w = box(8, 0, 2, rng);
        const CovarianceModel mw(in.S, w, 1.0);
        const double direct = ml_cost(*in.S, u, 1.0, in.Sh) - ml_cost(*in.S, w, 1.0, in.Sh) -
                              full_gradient(mw, in.Sh).dot(u - w);
        CHECK(std::abs(bregman_divergence(*in.S, 1.0, in.Sh, u, w) - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("Bregman divergence is nonnegative in the convex region") {
    Stream rng(2, Purpose::Test);
    int tested = 0;
    for (int r = 0; r < 10; ++r) {
        const auto in = ml_instance(8, 10, 4000, rng);
        for (int k = 0; k < 100; ++k) {
            const Vec u = (in.truth + box(10, -0.3, 0.3, rng)).cwiseMax(0.0);
            const Vec w = (in.truth + box(10, -0.3, 0.3, rng)).cwiseMax(0.0);
            if (!in_convex_region(in, u) || !in_convex_region(in, w)) continue;
            ++tested;
            CHECK(bregman_divergence(*in.S, 1.0, in.Sh, u, w) >= -1e-10);
        }
    }
    CHECK(tested >= 100);
}

TEST_CASE("Lyapunov function") {
    Stream rng(3, Purpose::Test);
    const Vec g = box(5, 0, 1, rng), r = box(5, 0, 1, rng);
    std::map<int, Vec> bank = {{0, box(5, -1, 1, rng)}, {2, box(5, -1, 1, rng)}};
    const std::map<int, double> steps = {{0, 0.1}, {2, 0.3}};
    CHECK(lyapunov(g, g, bank, bank, 0.5, steps) == 0);
    CHECK(lyapunov(g, r, bank, {}, 0.0, steps) == doctest::Approx((g - r).squaredNorm()));
    std::map<int, Vec> ref = {{0, Vec::Zero(5)}, {2, Vec::Zero(5)}};
    const double want = (g - r).squaredNorm() + 0.05 * 0.05 * bank[0].squaredNorm() + 0.15 * 0.15 * bank[2].squaredNorm();
    CHECK(lyapunov(g, r, bank, ref, 0.5, steps) == doctest::Approx(want));
}

TEST_CASE("Lipschitz estimate") {
    Stream rng(4, Purpose::Test);
    GradFn lin = [](const Vec& v) { return Vec::Constant(v.size(), 3.0); };
    CHECK(estimate_lipschitz(lin, 4, 0, 1, 50, rng) < 1e-12);

    const double a = 1.7;
    GradFn quad = [a](const Vec& v) { return Vec(2 * a * v); };
    CHECK(estimate_lipschitz(quad, 1, -1, 1, 20, rng) == doctest::Approx(2 * a).epsilon(0.01));

    const auto in = ml_instance(6, 8, 200, rng);
    const GradFn g = ml_grad_fn(in.S, 1.0, in.Sh);
    double prev = 0;
    for (int probes : {2, 5, 10, 20, 40}) {
        Stream r2(5, Purpose::Test);  // same stream: the probe set only grows
        const double e = estimate_lipschitz(g, 8, 0, 2, probes, r2);
        CHECK(e >= prev);
        prev = e;
    }
    CHECK_THROWS_AS(estimate_lipschitz(g, 8, 0, 2, 1, rng), DomainError);
}

TEST_CASE("step band") {
    const double L = 40, eps = 90;
    auto r = check_step_band(std::vector<double>(10, 1 / (L + eps)), L, eps);
    CHECK(r.violations.empty());
    r = check_step_band({1 / eps}, 10, eps);
    CHECK(r.violations.size() == 1);
    r = check_step_band({1e-9, 1 / (L + eps), 1}, L, eps);
    CHECK(r.violations == std::vector<int>{0, 2});
    CHECK(r.violation_rate() == doctest::Approx(2.0 / 3));
}

TEST_CASE("rate check on planted sequences") {
    std::vector<double> d;
    for (int t = 1; t <= 200; ++t) d.push_back(3.0 / t);
    auto r = rate_check(d);
    CHECK(r.slope == doctest::Approx(-1.0).epsilon(0.01));
    CHECK(r.decaying);
    CHECK(r.sup_t_d == doctest::Approx(3.0));

    const std::vector<double> flat(200, 0.7);
    r = rate_check(flat);
    CHECK(std::abs(r.slope) < 1e-9);
    CHECK_FALSE(r.decaying);
    CHECK_THROWS_AS(rate_check(std::vector<double>(29, 1.0)), DomainError);
}

TEST_CASE("running average") {
    Stream rng(6, Purpose::Test);
    RunningAverage avg;
    Vec sum = Vec::Zero(4);
    for (int t = 1; t <= 50; ++t) {
        const Vec g = box(4, 0, 1, rng);
        avg.push(g);
        sum += g;
        CHECK((avg.mean() - sum / t).norm() < 1e-14);
    }
    CHECK(avg.count() == 50);
}

TEST_CASE("test Hessian matches gradient differences") {
    Stream rng(8, Purpose::Test);
    const auto in = ml_instance(6, 5, 300, rng);
    const GradFn grad = ml_grad_fn(in.S, 1.0, in.Sh);
    const Vec g = box(5, 0.2, 1.5, rng);
    const Mat H = ml_hessian(in, g);
    for (Eigen::Index n = 0; n < 5; ++n) {
        Vec a = g, b = g;
        a(n) += 1e-5;
        b(n) -= 1e-5;
        const Vec col = (grad(a) - grad(b)) / 2e-5;
        CHECK((col - H.col(n)).norm() <= 1e-6 * std::max(1.0, col.norm()));
    }
}

TEST_CASE("forward step is non-expansive inside the step band") {
    Stream rng(7, Purpose::Test);
    const auto in = ml_instance(8, 6, 4000, rng);
    const GradFn grad = ml_grad_fn(in.S, 1.0, in.Sh);
    // zeta - zeta* = (I - eta Hbar)(g - g*) with Hbar the mean Hessian on the segment,
    // so L_f is the largest curvature over the segments we test.
    std::vector<Vec> points;
    double Lf = 0;
    while (points.size() < 200) {
        const Vec g = (in.truth + box(6, -0.2, 0.2, rng)).cwiseMax(0.0);
        if (!in_convex_region(in, g)) continue;
        const Eigen::SelfAdjointEigenSolver<Mat> es(segment_hessian(in, g, in.truth), Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        Lf = std::max(Lf, es.eigenvalues().maxCoeff());
        points.push_back(g);
    }
    REQUIRE(in_convex_region(in, in.truth));
    const double eps = Lf / 4;
    const double lo = 1 / (Lf + eps), hi = std::min(2 / Lf, 1 / eps);
    for (const Vec& g : points) {
        const double eta = lo + (hi - lo) * rng.uniform() * 0.999;
        const Vec& gs = in.truth;
        const Vec zeta = g - eta * grad(g), zeta_s = gs - eta * grad(gs);
        CHECK((zeta - zeta_s).squaredNorm() <= (g - gs).squaredNorm() + 1e-8);
    }
}
