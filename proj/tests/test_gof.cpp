#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "stablevar/gof.hpp"

using namespace stablevar;
using namespace stablevar::gof;

namespace {
// asymptotic 99% critical values for the five statistics
constexpr double kCrit99[5] = {1.628, 2.001, 0.268, 0.743, 3.857};
// KS and Kuiper scale with sqrt(n); the quadratic statistics do not
double scaled_stat(const EcdfStatistics& s, int t, double n) {
    const double v = s.get(static_cast<TestId>(t));
    return t <= 1 ? v * std::sqrt(n) : v;
}
} // namespace

TEST_CASE("statistics on the perfectly spaced probability grid") {
    const std::size_t n = 10;
    std::vector<double> sample(n);
    for (std::size_t i = 0; i < n; ++i)
        sample[i] = (2.0 * (i + 1) - 1.0) / (2.0 * n); // null quantiles under U(0,1)
    const auto s = ecdf_statistics(sample, [](double x) { return x; });
    CHECK(s.ks == Approx(0.05).margin(1e-14));
    CHECK(s.kuiper == Approx(0.10).margin(1e-14));
    CHECK(s.cvm == Approx(1.0 / 120.0).margin(1e-14));
    CHECK(s.watson == Approx(1.0 / 120.0).margin(1e-14)); // ubar is exactly 1/2
    CHECK(!s.clamped);
}

TEST_CASE("statistics under a true uniform null stay below critical values") {
    stablevar::detail::Rng rng(2718);
    int good = 0;
    const std::size_t n = 500;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> u(n);
        for (auto& v : u) v = rng.uniform01();
        const auto s = ecdf_statistics(u, [](double x) { return x; });
        bool all = true;
        for (int t = 0; t < 5; ++t)
            all = all && scaled_stat(s, t, static_cast<double>(n)) < kCrit99[t];
        good += all;
    }
    CHECK(good >= 95);
}

TEST_CASE("statistic inequalities hold on arbitrary samples") {
    stablevar::detail::Rng rng(31415);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(80);
        for (auto& v : x) v = 3.0 * rng.uniform01() - 1.0 + 0.2 * rep;
        const auto s = ecdf_statistics(
            x, [&](double v) { return 0.5 * std::erfc(-(v - 0.2 * rep) / 2.0); });
        CHECK(s.ks <= s.kuiper + 1e-15);
        CHECK(s.kuiper <= 2.0 * s.ks + 1e-15);
        CHECK(s.watson <= s.cvm + 1e-15);
        CHECK(s.ad >= 0.0);
    }
}

TEST_CASE("statistics are invariant under joint affine maps") {
    const auto x = stablevar::sample({1.8, 0.01, -0.3, 0.0}, 300, 161);
    const StableParams null0{1.8, 0.01, -0.3, 0.0};
    const auto s0 = ecdf_statistics(x, [&](double v) { return cdf(null0, v); });
    const double a = 37.0, b = -2.5;
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + b;
    const StableParams null1{1.8, 0.01 * a, -0.3, b};
    const auto s1 = ecdf_statistics(y, [&](double v) { return cdf(null1, v); });
    CHECK(s0.ks == Approx(s1.ks).margin(1e-9));
    CHECK(s0.kuiper == Approx(s1.kuiper).margin(1e-9));
    CHECK(s0.watson == Approx(s1.watson).margin(1e-9));
    CHECK(s0.cvm == Approx(s1.cvm).margin(1e-9));
    CHECK(s0.ad == Approx(s1.ad).margin(1e-8));
}

TEST_CASE("u values at the boundary are clamped with a flag") {
    std::vector<double> x(30);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
    const auto s = ecdf_statistics(x, [](double v) { return v < 5 ? 0.0 : 1.0; });
    CHECK(s.clamped);
    CHECK(std::isfinite(s.ad));
}

TEST_CASE("mc_pvalue hits the formula floor when the observed fit is hopeless") {
    // sample wildly incompatible with a Gaussian fit of itself: huge outlier mass
    std::vector<double> x;
    for (int i = 0; i < 60; ++i) x.push_back(i % 2 == 0 ? -1.0 : 1.0);
    for (int i = 0; i < 6; ++i) x.push_back(500.0 * (i + 1));
    const auto reps = mc_pvalue(x, NullFamily::gaussian, 999, 5);
    for (const auto& r : reps) {
        CHECK(r.p_value == Approx(1.0 / 1000.0).margin(1e-12));
        CHECK(r.n_boot == 999);
    }
}

TEST_CASE("mc_pvalue is reproducible for a fixed seed") {
    const auto x = stablevar::sample({1.9, 0.01, 0.0, 0.0}, 120, 808);
    const auto a = mc_pvalue(x, NullFamily::gaussian, 199, 42);
    const auto b = mc_pvalue(x, NullFamily::gaussian, 199, 42);
    for (int t = 0; t < 5; ++t) {
        CHECK(a[t].p_value == b[t].p_value);
        CHECK(a[t].statistic == b[t].statistic);
    }
    const auto c = mc_pvalue(x, NullFamily::gaussian, 199, 43);
    bool any_diff = false;
    for (int t = 0; t < 5; ++t) any_diff = any_diff || a[t].p_value != c[t].p_value;
    CHECK(any_diff);
}

TEST_CASE("heavy-tailed samples reject the Gaussian null") {
    const auto x = stablevar::sample({1.8, 0.01, 0.0, 0.0}, 1000, 271);
    const auto reps = mc_pvalue(x, NullFamily::gaussian, 199, 7);
    CHECK(reps[0].p_value < 0.05); // KS
    CHECK(reps[4].p_value < 0.05); // AD
    CHECK(reps[0].null_family == NullFamily::gaussian);
    CHECK(reps[0].fitted_null_params.alpha == 2.0);
}

TEST_CASE("stable null accepts its own draws") {
    const auto x = stablevar::sample({1.8243, 0.0119, -0.3416, -0.0004}, 400, 272);
    const auto reps = mc_pvalue(x, NullFamily::stable, 199, 8);
    for (const auto& r : reps) CHECK(r.p_value > 0.01);
}

TEST_CASE("coverage rates") {
    const StableParams p{1.9, 0.02, -0.4, 0.001};
    // sample placed exactly at the model's own quantile grid
    std::vector<double> grid;
    const std::size_t n = 200;
    for (std::size_t i = 0; i < n; ++i)
        grid.push_back(quantile(p, (2.0 * (i + 1) - 1.0) / (2.0 * n)));
    const auto rep = coverage_rates(grid, p, gof::default_levels);
    REQUIRE(rep.levels.size() == 6);
    CHECK(rep.levels[0] == 0.05);
    CHECK(rep.levels[5] == 0.95);
    for (std::size_t i = 0; i < rep.levels.size(); ++i)
        CHECK(std::abs(rep.rates[i] - rep.levels[i]) <= 1.0 / n + 1e-12);
    for (std::size_t i = 1; i < rep.rates.size(); ++i)
        CHECK(rep.rates[i] >= rep.rates[i - 1]);

    // binomial accuracy on real draws
    const auto draws = stablevar::sample(p, 10000, 273);
    const auto rep2 = coverage_rates(draws, p, gof::default_levels);
    for (std::size_t i = 0; i < rep2.levels.size(); ++i)
        CHECK(std::abs(rep2.rates[i] - rep2.levels[i]) < 0.015);
}

TEST_CASE("gof input validation") {
    std::vector<double> tiny(1, 0.5);
    CHECK_THROWS_AS(ecdf_statistics(tiny, [](double v) { return v; }), input_error);
    std::vector<double> small(40, 0.5);
    CHECK_THROWS_AS(mc_pvalue(small, NullFamily::gaussian, 999, 1), input_error);
    const auto x = stablevar::sample({1.9, 1.0, 0.0, 0.0}, 100, 274);
    CHECK_THROWS_AS(mc_pvalue(x, NullFamily::gaussian, 50, 1), input_error);
    CHECK_THROWS_AS(coverage_rates(x, {1.9, 1.0, 0.0, 0.0}, std::vector<double>{1.5}),
                    input_error);
}
