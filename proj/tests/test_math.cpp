#include <doctest.h>

#include "ebmix/math.hpp"
#include "ebmix/brent.hpp"
#include "ebmix/optim.hpp"
#include "ebmix/rng.hpp"
#include "oracles.hpp"

using namespace ebmix;

TEST_CASE("normal cdf/quantile round trip") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-9));
    for (double p : {1e-10, 1e-4, 0.3, 0.5, 0.9, 1 - 1e-8})
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("digamma against lgamma finite differences") {
    for (double x : {0.3, 1.0, 2.5, 7.0, 40.0}) {
        const double h = 1e-6 * std::max(1.0, x);
        const double fd = (std::lgamma(x + h) - std::lgamma(x - h)) / (2 * h);
        CHECK(digamma(x) == doctest::Approx(fd).epsilon(1e-7));
    }
    CHECK(digamma(1.0) == doctest::Approx(-0.57721566490153286).epsilon(1e-12));
}

TEST_CASE("quadrature oracle integrates a normal density to 1") {
    const double v = oracles::integrate([](double x) { return normal_pdf(x, 1.0, 2.0); },
                                        -40.0, 40.0, 1e-13);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("brent finds cos root") {
    const double r = brent_root([](double x) { return std::cos(x); }, 1.0, 2.0, 1e-14);
    CHECK(r == doctest::Approx(1.5707963267948966).epsilon(1e-12));
}

TEST_CASE("bfgs minimizes rosenbrock") {
    auto rosen = [](const std::vector<double>& x, std::vector<double>& g) {
        const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
        g[0] = -2 * a - 400 * x[0] * b;
        g[1] = 200 * b;
        return a * a + 100 * b * b;
    };
    auto res = bfgs_minimize(rosen, {-1.2, 1.0}, 500, 1e-14);
    CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("rng moments and determinism") {
    Rng a(42), b(42), c(43);
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() != c.next_u64());

    Rng r(7);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s += x;
        s2 += x * x;
    }
    CHECK(s / n == doctest::Approx(0.0).epsilon(0.02));
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));

    // Gamma(shape, scale): mean = shape*scale, var = shape*scale^2.
    double gs = 0.0, gs2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = r.gamma(5.0, 1.0 / 12.0);
        gs += x;
        gs2 += x * x;
    }
    const double gmean = gs / n, gvar = gs2 / n - gmean * gmean;
    CHECK(gmean == doctest::Approx(5.0 / 12.0).epsilon(0.02));
    CHECK(gvar == doctest::Approx(5.0 / 144.0).epsilon(0.05));
}

TEST_CASE("empirical quantile nearest rank") {
    std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(empirical_quantile(v, 0.95) == 10.0);
    CHECK(empirical_quantile(v, 0.90) == 9.0);
    CHECK(empirical_quantile(v, 1.0) == 10.0);
}
