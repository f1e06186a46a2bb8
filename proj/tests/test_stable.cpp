#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <complex>

#include "helpers.hpp"
#include "stablevar/detail/quadrature.hpp"
#include "stablevar/stable.hpp"

using namespace stablevar;

namespace {
constexpr double kPi = 3.14159265358979323846;

double empirical_cdf(const std::vector<double>& sorted, double x) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) -
                               sorted.begin()) /
           static_cast<double>(sorted.size());
}

// direct inversion of the characteristic function, independent of the
// Nolan-integral code path; works on the standardized law so the domain and
// tolerance are scale-free
double pdf_by_inversion(const StableParams& p, double x) {
    const StableParams std1{p.alpha, 1.0, p.beta, 0.0};
    const double z = (x - p.mu) / p.sigma;
    auto f = [&](double t) {
        const auto c = char_fn(std1, t);
        return c.real() * std::cos(t * z) + c.imag() * std::sin(t * z);
    };
    const double tmax = std::pow(45.0, 1.0 / p.alpha);
    return detail::integrate_adaptive(f, 0.0, tmax, 1e-10) / (kPi * p.sigma);
}
} // namespace

TEST_CASE("characteristic function closed forms") {
    const StableParams g{2.0, 1.0, 0.0, 0.0};
    CHECK(char_fn(g, 1.0).real() == Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(char_fn(g, 1.0).imag() == Approx(0.0).margin(1e-15));
    // theta = 0 gives exactly 1 for any parameters
    const StableParams p{1.3, 0.4, -0.7, 2.0};
    CHECK(char_fn(p, 0.0) == std::complex<double>(1.0, 0.0));
    // |phi| <= 1 and conjugate symmetry
    for (double th : {-3.0, -0.7, 0.2, 1.5, 8.0}) {
        const auto c = char_fn(p, th);
        CHECK(std::abs(c) <= 1.0 + 1e-15);
        const auto cm = char_fn(p, -th);
        CHECK(cm.real() == Approx(c.real()).margin(1e-15));
        CHECK(cm.imag() == Approx(-c.imag()).margin(1e-15));
    }
    // alpha = 1 branch engages within the documented tolerance window
    const StableParams a1{1.0 + 1e-12, 1.0, 0.5, 0.0};
    const StableParams a1x{1.0, 1.0, 0.5, 0.0};
    CHECK(std::abs(char_fn(a1, 2.0) - char_fn(a1x, 2.0)) < 1e-10);
}

TEST_CASE("characteristic function matches the empirical one") {
    const StableParams p{1.5, 0.8, 0.5, 0.2};
    const auto draws = sample(p, 1000000, 2024);
    const double theta = 2.0;
    const auto e = testutil::ecf(draws, theta);
    const auto c = char_fn(p, theta);
    CHECK(std::abs(e.re - c.real()) < 3.0 * e.se_re);
    CHECK(std::abs(e.im - c.imag()) < 3.0 * e.se_im);
}

TEST_CASE("pdf closed forms") {
    const StableParams g{2.0, 1.0, 0.0, 0.0};
    CHECK(pdf(g, 0.0) == Approx(1.0 / std::sqrt(4.0 * kPi)).epsilon(1e-10));
    const StableParams c{1.0, 1.0, 0.0, 0.0};
    CHECK(pdf(c, 0.0) == Approx(1.0 / kPi).epsilon(1e-12));
    // Gaussian with scale/shift at a grid
    const StableParams g2{2.0, 0.7, 0.0, -1.3};
    const double sd = 0.7 * std::sqrt(2.0);
    for (double x = -4.0; x <= 4.0; x += 0.5) {
        const double want =
            std::exp(-0.5 * (x + 1.3) * (x + 1.3) / (sd * sd)) / (sd * std::sqrt(2 * kPi));
        CHECK(pdf(g2, x) == Approx(want).margin(1e-10));
    }
}

TEST_CASE("pdf agrees with characteristic-function inversion") {
    for (const StableParams p : {StableParams{1.5, 1.0, 0.5, 0.0},
                                 StableParams{1.8243, 0.0119, -0.3416, -0.0004},
                                 StableParams{1.2, 2.0, -0.9, 1.0},
                                 StableParams{1.95, 1.0, 1.0, 0.0}}) {
        for (double q : {0.05, 0.2, 0.4, 0.5, 0.6, 0.8, 0.95}) {
            const double x = quantile(p, q);
            CHECK(pdf(p, x) == Approx(pdf_by_inversion(p, x)).margin(1e-5));
        }
    }
}

TEST_CASE("pdf matches a sampling histogram at the center") {
    const StableParams p{1.8243, 0.0119, -0.3416, -0.0004};
    const std::size_t n = 10000000;
    const auto draws = sample(p, n, 77);
    const double h = 0.002 * p.sigma;
    std::size_t cnt = 0;
    for (double v : draws)
        if (v >= -0.5 * h && v < 0.5 * h) ++cnt;
    const double dens = static_cast<double>(cnt) / (n * h);
    const double se = std::sqrt(dens / (n * h));
    CHECK(std::abs(pdf(p, 0.0) - dens) < 4.0 * se + 1e-3);
}

TEST_CASE("pdf integrates to one") {
    for (const StableParams p : {StableParams{1.5, 1.0, 0.5, 0.0},
                                 StableParams{1.9219, 0.0236, -0.5714, 0.0007},
                                 StableParams{1.1, 1.0, -1.0, 0.0}}) {
        const double s = p.sigma;
        double total = 0.0;
        const double breaks[] = {-3e6, -3e4, -300.0, -30.0, -3.0, 0.0,
                                 3.0,  30.0, 300.0,  3e4,  3e6};
        for (std::size_t i = 0; i + 1 < std::size(breaks); ++i)
            total += detail::integrate_adaptive(
                [&](double z) { return pdf(p, p.mu + z * s); }, breaks[i],
                breaks[i + 1], 1e-9) * s;
        CHECK(total == Approx(1.0).margin(1e-6));
    }
}

TEST_CASE("cdf closed forms and shape") {
    const StableParams g{2.0, 1.0, 0.0, 0.0};
    CHECK(cdf(g, 2.0) == Approx(0.5 * std::erfc(-2.0 / 2.0)).epsilon(1e-10));
    const StableParams s{1.5, 1.0, 0.0, 0.0};
    CHECK(cdf(s, 0.0) == Approx(0.5).margin(1e-10));
    // monotone with correct limits
    double prev = 0.0;
    for (double x = -50.0; x <= 50.0; x += 1.0) {
        const double c = cdf(s, x);
        CHECK(c >= prev - 1e-12);
        prev = c;
    }
    CHECK(cdf(s, -1e9) < 1e-8);
    CHECK(cdf(s, 1e9) > 1.0 - 1e-8);
}

TEST_CASE("cdf matches the empirical distribution of samples") {
    const StableParams p{1.7229, 0.0114, 1.0, 0.0016};
    const std::size_t n = 10000000;
    auto draws = sample(p, n, 4242);
    std::sort(draws.begin(), draws.end());
    const double x = 0.05;
    const double emp = empirical_cdf(draws, x);
    const double th = cdf(p, x);
    const double se = std::sqrt(th * (1.0 - th) / n);
    CHECK(std::abs(emp - th) < 3.0 * se + 1e-7);
}

TEST_CASE("quantile round trips through the cdf") {
    for (const StableParams p : {StableParams{1.5, 1.0, 0.5, 0.0},
                                 StableParams{1.9219, 0.0236, -0.5714, 0.0007},
                                 StableParams{1.15, 3.0, -1.0, -2.0}}) {
        double prev = -1e300;
        for (double lvl : {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99}) {
            const double q = quantile(p, lvl);
            CHECK(q > prev);
            prev = q;
            CHECK(cdf(p, q) == Approx(lvl).margin(1e-8));
        }
    }
    const StableParams g{2.0, 1.0, 0.0, 0.0};
    CHECK(quantile(g, 0.975) == Approx(std::sqrt(2.0) * 1.9599639845400545).epsilon(1e-8));
    const StableParams sym{1.6, 2.0, 0.0, 1.25};
    CHECK(quantile(sym, 0.5) == Approx(1.25).margin(1e-9));
}

TEST_CASE("quantile agrees with the sampling oracle") {
    const StableParams p{1.9219, 0.0236, -0.5714, 0.0007};
    const std::size_t n = 10000000;
    auto draws = sample(p, n, 31);
    std::sort(draws.begin(), draws.end());
    const double lvl = 0.05;
    const double emp = draws[static_cast<std::size_t>(lvl * n)];
    const double q = quantile(p, lvl);
    const double se = std::sqrt(lvl * (1 - lvl) / n) / pdf(p, q);
    CHECK(std::abs(q - emp) < 4.0 * se);
}

TEST_CASE("scaling maps the law as S(alpha, |c| sigma, sign(c) beta, 0)") {
    const StableParams p{1.5, 2.0, 0.3, 0.0};
    for (double c : {2.5, -1.7}) {
        const StableParams scaled{p.alpha, std::abs(c) * p.sigma,
                                  (c > 0 ? 1.0 : -1.0) * p.beta, 0.0};
        for (double x = -20.0; x <= 20.0; x += 2.5) {
            const double direct = cdf(scaled, x);
            const double via = c > 0 ? cdf(p, x / c) : 1.0 - cdf(p, x / c);
            CHECK(direct == Approx(via).margin(1e-6));
        }
    }
}

TEST_CASE("sampler determinism and distributional checks") {
    const StableParams p{1.5, 2.0, 0.3, 1.0};
    const auto a = sample(p, 1000, 555);
    const auto b = sample(p, 1000, 555);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]); // bit-for-bit
    const auto c = sample(p, 1000, 556);
    CHECK(a != c);

    // Gaussian reduction: KS against Normal(0, 2)
    const auto gz = sample({2.0, 1.0, 0.0, 0.0}, 100000, 7);
    const auto ks_g = testutil::ks_test(
        gz, [](double x) { return 0.5 * std::erfc(-x / 2.0); });
    CHECK(ks_g.p_value > 0.01);

    // Cauchy reduction
    const auto cz = sample({1.0, 1.0, 0.0, 0.0}, 100000, 8);
    const auto ks_c = testutil::ks_test(
        cz, [](double x) { return 0.5 + std::atan(x) / kPi; });
    CHECK(ks_c.p_value > 0.01);

    // skewed case: empirical characteristic function against char_fn
    const auto sz = sample(p, 100000, 9);
    for (double th : {0.5, 1.0, 2.0}) {
        const auto e = testutil::ecf(sz, th);
        const auto want = char_fn(p, th);
        CHECK(std::abs(e.re - want.real()) < 3.0 * e.se_re);
        CHECK(std::abs(e.im - want.imag()) < 3.0 * e.se_im);
    }
}

TEST_CASE("fit_quantile recovers parameters loosely") {
    {
        const auto d = sample({2.0, 1.0, 0.0, 0.0}, 5000, 11);
        const auto f = fit_quantile(d);
        CHECK(f.alpha >= 1.8);
        CHECK(f.alpha <= 2.0);
        CHECK(std::abs(f.mu) < 0.1);
    }
    {
        const auto d = sample({1.5, 1.0, 0.0, 0.0}, 5000, 12);
        const auto f = fit_quantile(d);
        CHECK(f.alpha >= 1.3);
        CHECK(f.alpha <= 1.7);
    }
    const std::vector<double> flat(200, 3.5);
    CHECK_THROWS_WITH(fit_quantile(flat), Catch::Contains("degenerate"));
    const std::vector<double> tiny(50, 0.0);
    CHECK_THROWS_AS(fit_quantile(tiny), input_error);
}

TEST_CASE("fit_regression recovers the published residual laws") {
    {
        const StableParams truth{1.9219, 0.0236, -0.5714, 0.0007};
        const auto d = sample(truth, 5000, 101);
        const auto f = fit_regression(d);
        CHECK(std::abs(f.params.alpha - truth.alpha) <= 0.08);
        CHECK(std::abs(f.params.sigma - truth.sigma) <= 0.08 * truth.sigma);
    }
    {
        const auto d = sample({2.0, 1.0, 0.0, 0.0}, 5000, 102);
        const auto f = fit_regression(d);
        CHECK(f.params.alpha >= 1.9);
    }
    {
        const StableParams truth{1.8424, 0.0074, -0.0160, 0.0};
        const auto d = sample(truth, 5000, 103);
        const auto f = fit_regression(d);
        CHECK(std::abs(f.params.beta - truth.beta) <= 0.25);
    }
    const std::vector<double> tiny(150, 0.0);
    CHECK_THROWS_AS(fit_regression(tiny), input_error);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(pdf({2.5, 1.0, 0.0, 0.0}, 0.0), input_error);
    CHECK_THROWS_AS(pdf({1.5, -1.0, 0.0, 0.0}, 0.0), input_error);
    CHECK_THROWS_AS(pdf({1.5, 1.0, 1.5, 0.0}, 0.0), input_error);
    CHECK_THROWS_AS(quantile({1.5, 1.0, 0.0, 0.0}, 0.0), input_error);
    CHECK_THROWS_AS(quantile({1.5, 1.0, 0.0, 0.0}, 1.0), input_error);
    // canonical form at alpha = 2 drops beta
    CHECK(StableParams{2.0, 1.0, 0.7, 0.0}.canonical().beta == 0.0);
}
