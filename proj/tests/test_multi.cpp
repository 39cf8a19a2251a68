#include <doctest.h>

#include <cmath>

#include "ebmix/em.hpp"
#include "ebmix/inference.hpp"
#include "ebmix/multi.hpp"
#include "ebmix/rng.hpp"
#include "ebmix/summarize.hpp"
#include "ebmix/variance_prior.hpp"
#include "oracles.hpp"

using namespace ebmix;

namespace {

// t-group matrix with a two-sided mixture in contrast space.
ExpressionMatrix sim_multi(std::size_t G, int t, int n_per, double p1,
                           const Eigen::VectorXd& psi, double s2psi, double alpha,
                           double beta, Rng& rng, std::vector<int>* truth = nullptr) {
    ExpressionMatrix m;
    for (int i = 0; i < t; ++i)
        for (int j = 0; j < n_per; ++j) m.group_of_sample.push_back(i + 1);
    const std::size_t k1 = static_cast<std::size_t>(std::lround(p1 * G));
    std::vector<int> lab(G, 0);
    for (std::size_t g = 0; g < k1; ++g) lab[g] = 1;
    rng.shuffle(lab);
    for (std::size_t g = 0; g < G; ++g) {
        m.gene_ids.push_back("g" + std::to_string(g));
        const double sd = std::sqrt(1.0 / rng.gamma(alpha, beta));
        Eigen::VectorXd psi_g = Eigen::VectorXd::Zero(t);
        if (lab[g]) {
            // psi_g ~ N_t(psi, s2psi (I - Jbar)): center iid draws.
            Eigen::VectorXd z(t);
            for (int i = 0; i < t; ++i) z(i) = rng.normal();
            z.array() -= z.mean();
            psi_g = psi + std::sqrt(s2psi) * z;
        }
        std::vector<double> row;
        for (int i = 0; i < t; ++i)
            for (int j = 0; j < n_per; ++j) row.push_back(psi_g(i) + sd * rng.normal());
        m.values.push_back(row);
    }
    if (truth) *truth = lab;
    return m;
}

}  // namespace

TEST_CASE("helmert contrasts") {
    const ContrastMatrix h2 = helmert(2);
    CHECK(h2.h(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(h2.h(0, 1) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));

    const ContrastMatrix h3 = helmert(3);
    CHECK(h3.h(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(h3.h(0, 2) == 0.0);
    CHECK(h3.h(1, 0) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
    CHECK(h3.h(1, 2) == doctest::Approx(-2.0 / std::sqrt(6.0)).epsilon(1e-15));

    for (int t = 2; t <= 10; ++t) {
        const ContrastMatrix h = helmert(t);
        h.validate(1e-12);  // orthonormal rows summing to zero
    }
    CHECK_THROWS_AS(helmert(1), std::domain_error);
}

TEST_CASE("summarize_multi: scale bridge, equal means, hand example") {
    Rng rng(5);
    // t=2: d_vec equals the scalar d / sqrt(2) exactly.
    ExpressionMatrix m2 =
        sim_multi(30, 2, 5, 0.3, Eigen::Vector2d(1.0, -1.0), 0.5, 4.0, 0.2, rng);
    const VectorSummaries vs = summarize_multi(m2, helmert(2));
    const GeneSummaries s = summarize(m2).summaries;
    REQUIRE(vs.size() == s.size());
    for (std::size_t g = 0; g < s.size(); ++g) {
        CHECK(vs.d(static_cast<Eigen::Index>(g), 0) ==
              doctest::Approx(s.d[g] / std::sqrt(2.0)).epsilon(1e-12));
        CHECK(vs.m[g] == s.m[g]);
        CHECK(vs.f[g] == s.f[g]);
    }

    // Equal group means -> zero contrasts; means (2,0,1) -> (sqrt(2), 0).
    ExpressionMatrix flat;
    flat.gene_ids = {"a", "b"};
    flat.group_of_sample = {1, 1, 2, 2, 3, 3};
    flat.values = {{1, 1, 1, 1, 1, 1}, {2, 2, 0, 0, 1, 1}};
    const VectorSummaries v3 = summarize_multi(flat, helmert(3));
    CHECK(v3.d(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(v3.d(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(v3.d(1, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(v3.d(1, 1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(v3.f[0] == 3);
}

TEST_CASE("t=2 multivariate fit reduces to the scalar fit") {
    Rng rng(77);
    ExpressionMatrix mat =
        sim_multi(600, 2, 6, 0.2, Eigen::Vector2d(1.5, -1.5), 0.25, 5.0, 1.0 / 12.0, rng);
    const GeneSummaries s = summarize(mat).summaries;
    const VectorSummaries vs = summarize_multi(mat, helmert(2));
    const VariancePrior prior = fit_variance_prior(s);

    EmConfig cfg;
    cfg.tol = 1e-12;
    cfg.max_iters = 20000;
    const FitResult scalar = fit(s, prior, ModelKind::RR, cfg);
    const MultiFitResult multi = fit_multi(vs, prior, cfg);
    REQUIRE(scalar.converged);
    REQUIRE(multi.converged);

    // Bridge: tau and psi scale by 1/sqrt(2), sigma_psi2 by 1/2.
    CHECK(multi.p1 == doctest::Approx(scalar.params.p1).epsilon(1e-8));
    CHECK(multi.h_tau(0) ==
          doctest::Approx(scalar.params.tau / std::sqrt(2.0)).epsilon(1e-7));
    CHECK(multi.h_psi(0) ==
          doctest::Approx(scalar.params.psi / std::sqrt(2.0)).epsilon(1e-7));
    CHECK(multi.sigma_psi2 == doctest::Approx(scalar.params.sigma_psi2 / 2.0).epsilon(1e-7));
    for (std::size_t g = 0; g < s.size(); ++g)
        CHECK(multi.posterior_p1[g] ==
              doctest::Approx(scalar.posterior_p1[g]).epsilon(1e-6));

    // LR agreement with the scalar inference path.
    const MultiLrt mlrt = lrt_multi(vs, multi);
    FitResult sfix = scalar;
    const LikelihoodRatios slr = likelihood_ratio(s, sfix);
    for (std::size_t g = 0; g < s.size(); ++g)
        CHECK(mlrt.lr[g] == doctest::Approx(slr.lr[g]).epsilon(1e-6));
}

TEST_CASE("fit_multi: all-null posterior guard") {
    Rng rng(13);
    ExpressionMatrix mat =
        sim_multi(120, 3, 4, 0.0, Eigen::Vector3d(0, 0, 0), 0.0, 4.0, 0.2, rng);
    const VectorSummaries vs = summarize_multi(mat, helmert(3));
    const VariancePrior prior = fit_variance_prior(vs.scalar_view());
    const MultiFitResult fr = fit_multi(vs, prior);
    // With no real signal the variance component should collapse (or nearly).
    CHECK(fr.sigma_psi2 < 0.5);
    CHECK(fr.p1 < 0.25);
}

TEST_CASE("t=3 recovery of contrast effects") {
    Rng rng(2001);
    Eigen::Vector3d psi(2.0, -1.0, -1.0);  // sums to zero
    std::vector<int> truth;
    ExpressionMatrix mat = sim_multi(2000, 3, 6, 0.1, psi, 0.4, 5.0, 1.0 / 12.0, rng, &truth);
    const ContrastMatrix h = helmert(3);
    const VectorSummaries vs = summarize_multi(mat, h);
    const VariancePrior prior = fit_variance_prior(vs.scalar_view());
    const MultiFitResult fr = fit_multi(vs, prior);
    REQUIRE(fr.converged);
    const Eigen::VectorXd h_psi_true = h.h * psi;
    CHECK(fr.p1 == doctest::Approx(0.1).epsilon(0.35));
    for (int j = 0; j < 2; ++j)
        CHECK(fr.h_psi(j) == doctest::Approx(h_psi_true(j)).epsilon(0.10));
    CHECK(fr.sigma_psi2 == doctest::Approx(0.4).epsilon(0.35));
    CHECK(fr.h_tau.norm() < 0.05);
}

TEST_CASE("lrt_multi identities") {
    Rng rng(303);
    ExpressionMatrix mat =
        sim_multi(300, 4, 5, 0.15, Eigen::Vector4d(1.5, 0.5, -1.0, -1.0), 0.3, 4.0, 0.2,
                  rng);
    const VectorSummaries vs = summarize_multi(mat, helmert(4));
    const VariancePrior prior = fit_variance_prior(vs.scalar_view());
    const MultiFitResult fr = fit_multi(vs, prior);

    // Closed-form LR posterior equals the E-step posterior (identity).
    const MultiLrt lrt = lrt_multi(vs, fr);
    for (std::size_t g = 0; g < vs.size(); ++g)
        CHECK(lrt.posterior_p1[g] == doctest::Approx(fr.posterior_p1[g]).epsilon(1e-8));

    // Lambda_g + (I - Lambda_g) = I for the fitted covariances.
    const int k = vs.t - 1;
    for (std::size_t g = 0; g < 10; ++g) {
        Eigen::VectorXd inv_n(vs.t);
        for (int i = 0; i < vs.t; ++i) inv_n(i) = 1.0 / vs.n[g][static_cast<std::size_t>(i)];
        const Eigen::MatrixXd l0 =
            fr.sigma2_eps[g] * (vs.contrast.h * inv_n.asDiagonal() * vs.contrast.h.transpose());
        const Eigen::MatrixXd la = fr.sigma_psi2 * Eigen::MatrixXd::Identity(k, k);
        const Eigen::MatrixXd sum_inv = (la + l0).inverse();
        const Eigen::MatrixXd lam = sum_inv * la;
        const Eigen::MatrixXd ilam = sum_inv * l0;
        CHECK((lam + ilam - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-12);
    }

    // sigma_psi2 -> 0 limit: LR reduces to the mean-shift density ratio.
    MultiFitResult degen = fr;
    degen.sigma_psi2 = 0.0;
    const MultiLrt dl = lrt_multi(vs, degen);
    for (std::size_t g = 0; g < 5; ++g) CHECK(std::isfinite(dl.lr[g]));
}

TEST_CASE("orthonormal-contrast invariance (Q rotation)") {
    Rng rng(404);
    ExpressionMatrix mat =
        sim_multi(400, 3, 5, 0.15, Eigen::Vector3d(1.5, -0.5, -1.0), 0.3, 4.0, 0.2, rng);
    const ContrastMatrix h = helmert(3);
    // A fixed 2x2 rotation of the contrast basis.
    const double th = 0.7;
    Eigen::Matrix2d q;
    q << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    ContrastMatrix hq;
    hq.t = 3;
    hq.h = q * h.h;
    hq.validate(1e-12);

    const VectorSummaries vs = summarize_multi(mat, h);
    const VectorSummaries vq = summarize_multi(mat, hq);
    const VariancePrior prior = fit_variance_prior(vs.scalar_view());
    EmConfig cfg;
    cfg.tol = 1e-14;
    cfg.posterior_tol = 1e-12;
    cfg.max_iters = 50000;
    const MultiFitResult f1 = fit_multi(vs, prior, cfg);
    const MultiFitResult f2 = fit_multi(vq, prior, cfg);
    CHECK(f1.p1 == doctest::Approx(f2.p1).epsilon(1e-8));
    CHECK(f1.sigma_psi2 == doctest::Approx(f2.sigma_psi2).epsilon(1e-8));
    CHECK((q * f1.h_psi - f2.h_psi).norm() < 1e-8);
    const MultiLrt l1 = lrt_multi(vs, f1);
    const MultiLrt l2 = lrt_multi(vq, f2);
    for (std::size_t g = 0; g < vs.size(); ++g) {
        CHECK(l1.lr[g] == doctest::Approx(l2.lr[g]).epsilon(1e-8));
        CHECK(l1.posterior_p1[g] == doctest::Approx(l2.posterior_p1[g]).epsilon(1e-8));
    }
}

TEST_CASE("non-orthonormal contrasts are rejected") {
    ContrastMatrix bad;
    bad.t = 3;
    bad.h.resize(2, 3);
    bad.h << 1, -1, 0, 1, 1, -2;  // rows sum to zero but are not orthonormal
    CHECK_THROWS_AS(bad.validate(1e-12), std::domain_error);
}
