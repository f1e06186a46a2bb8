#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "stablevar/dependence.hpp"
#include "stablevar/stable.hpp"

using namespace stablevar;
using namespace stablevar::dependence;

TEST_CASE("pearson hand values and errors") {
    const std::vector<double> x{1, 2, 3, 4};
    CHECK(pearson(x, x) == Approx(1.0).margin(1e-14));
    std::vector<double> nx{-1, -2, -3, -4};
    CHECK(pearson(x, nx) == Approx(-1.0).margin(1e-14));
    const std::vector<double> y{2, 1, 4, 3};
    CHECK(pearson(x, y) == Approx(0.6).margin(1e-14));
    CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2, 3}), input_error);
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                    input_error);
}

TEST_CASE("spearman hand values and rank identity") {
    CHECK(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{3, 1, 2}) ==
          Approx(-0.5).margin(1e-14));
    CHECK(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}) ==
          Approx(0.8).margin(1e-14));
    // invariance under strictly monotone transforms
    const auto x = sample({1.8, 1.0, 0.0, 0.0}, 200, 3);
    std::vector<double> ex(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) ex[i] = std::exp(x[i]);
    CHECK(spearman(x, ex) == Approx(1.0).margin(1e-14));
    // equals pearson on independently computed mid-ranks
    const auto y = sample({1.5, 1.0, 0.3, 0.0}, 200, 4);
    const auto rx = testutil::midranks(x);
    const auto ry = testutil::midranks(y);
    CHECK(spearman(x, y) == Approx(pearson(rx, ry)).margin(1e-13));
}

TEST_CASE("kendall hand values and brute-force oracle") {
    CHECK(kendall(std::vector<double>{1, 2, 3}, std::vector<double>{2, 5, 9}) == 1.0);
    CHECK(kendall(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) == -1.0);
    CHECK(kendall(std::vector<double>{1, 2, 3, 4}, std::vector<double>{2, 1, 4, 3}) ==
          Approx(1.0 / 3.0).margin(1e-14));
    // exact agreement with pair enumeration on random vectors
    stablevar::detail::Rng rng(17);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t n = 5 + static_cast<std::size_t>(rng.uniform01() * 195);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.uniform01();
            y[i] = 0.3 * x[i] + rng.uniform01();
        }
        CHECK(kendall(x, y) == testutil::kendall_bruteforce(x, y));
    }
}

TEST_CASE("rank measures are invariant under increasing maps") {
    const auto x = sample({1.7, 1.0, 0.2, 0.0}, 150, 5);
    const auto y = sample({1.9, 2.0, -0.5, 1.0}, 150, 6);
    auto cube = [](double v) { return v * v * v + 2.0 * v; };
    std::vector<double> xc(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xc[i] = cube(x[i]);
    CHECK(spearman(xc, y) == Approx(spearman(x, y)).margin(1e-13));
    CHECK(kendall(xc, y) == Approx(kendall(x, y)).margin(1e-14));
    // pearson under increasing affine maps only
    std::vector<double> xa(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xa[i] = 3.0 * x[i] - 7.0;
    CHECK(pearson(xa, y) == Approx(pearson(x, y)).margin(1e-12));
}

TEST_CASE("rolling dependence windows") {
    // comonotone pair: every window reports all three coefficients = 1
    std::vector<double> x(60), y(60);
    stablevar::detail::Rng rng(8);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.uniform01();
        y[i] = 2.0 * x[i] + 1.0;
    }
    const auto reps = rolling_dependence(x, y, {}, 20, false);
    REQUIRE(reps.size() == 41);
    for (const auto& r : reps) {
        CHECK(r.pearson == Approx(1.0).margin(1e-12));
        CHECK(r.spearman == Approx(1.0).margin(1e-12));
        CHECK(r.kendall == 1.0);
        CHECK(r.window_len == 20);
    }

    // a label change at t* leaves a gap: no window covers t*
    std::vector<int> mask(60, 1);
    for (std::size_t i = 30; i < 60; ++i) mask[i] = 2;
    const auto masked = rolling_dependence(x, y, {}, 20, false, &mask);
    CHECK(masked.size() == 2 * (30 - 20 + 1));
    for (const auto& r : masked) {
        const std::size_t end = std::stoul(r.window_end);
        CHECK((end <= 29 || end >= 49)); // windows covering index 30 are gone
    }

    // symmetric windows anchor at the center
    const auto sym = rolling_dependence(x, y, {}, 20, true);
    CHECK(sym.front().date == "10");

    CHECK_THROWS_AS(rolling_dependence(x, y, {}, 4, false), input_error);
    CHECK_THROWS_AS(rolling_dependence(x, y, {}, 100, false), input_error);
}

TEST_CASE("rolling dependence under independence stays near zero") {
    const auto x = sample({1.8, 1.0, 0.0, 0.0}, 3000, 31);
    const auto y = sample({1.8, 1.0, 0.0, 0.0}, 3000, 32);
    const auto reps = rolling_dependence(x, y, {}, 104, false);
    std::size_t small = 0;
    for (const auto& r : reps) {
        small += std::abs(r.pearson) < 0.2;
        small += std::abs(r.spearman) < 0.2;
        small += std::abs(r.kendall) < 0.2;
    }
    CHECK(static_cast<double>(small) / (3.0 * reps.size()) >= 0.95);
}

TEST_CASE("normalized covariation") {
    const auto y = sample({1.8, 1.0, 0.0, 0.0}, 200, 41);
    CHECK(covariation_norm(y, y, 1.0) == 1.0);
    CHECK(covariation_norm(y, y, 1.5) == 1.0);
    std::vector<double> y2(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) y2[i] = 2.0 * y[i];
    CHECK(covariation_norm(y2, y, 1.0) == Approx(2.0).margin(1e-12));
    CHECK(covariation_norm(y2, y, 1.3) == Approx(2.0).margin(1e-12));

    // additivity in the first argument (exact ratio linearity)
    const auto x1 = sample({1.9, 1.0, 0.0, 0.0}, 200, 42);
    const auto x2 = sample({1.7, 1.0, 0.0, 0.0}, 200, 43);
    std::vector<double> xs(x1.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = x1[i] + x2[i];
    CHECK(covariation_norm(xs, y, 1.2) ==
          Approx(covariation_norm(x1, y, 1.2) + covariation_norm(x2, y, 1.2))
              .margin(1e-12));

    // Gaussian closed form: cov-norm -> rho sigma_x / sigma_y for p = 1
    const double rho = 0.65, sx = 2.0, sy = 0.5;
    const auto za = sample({2.0, 1.0 / std::sqrt(2.0), 0.0, 0.0}, 100000, 44);
    const auto zb = sample({2.0, 1.0 / std::sqrt(2.0), 0.0, 0.0}, 100000, 45);
    std::vector<double> gx(za.size()), gy(za.size());
    for (std::size_t i = 0; i < za.size(); ++i) {
        gy[i] = sy * zb[i];
        gx[i] = sx * (rho * zb[i] + std::sqrt(1 - rho * rho) * za[i]);
    }
    const double want = rho * sx / sy;
    CHECK(covariation_norm(gx, gy, 1.0) == Approx(want).margin(3.0 * 0.02 * want));

    CHECK_THROWS_AS(covariation_norm(std::vector<double>(40, 1.0),
                                     std::vector<double>(40, 0.0), 1.0),
                    input_error);
    CHECK_THROWS_AS(covariation_norm(gx, gy, 0.5), input_error);
    CHECK_THROWS_AS(covariation_norm(gx, gy, 2.0), input_error);
}

TEST_CASE("auto-covariation") {
    const auto z = sample({1.8, 1.0, 0.0, 0.0}, 5000, 51);
    const auto ac = auto_covariation(z, 20, 1.0);
    REQUIRE(ac.size() == 21);
    CHECK(ac[0] == 1.0);
    for (std::size_t h = 1; h <= 20; ++h) CHECK(std::abs(ac[h]) < 0.08);

    // Gaussian AR(1) with coefficient 0.5: lag-1 value near 0.5
    const auto eps = sample({2.0, 1.0 / std::sqrt(2.0), 0.0, 0.0}, 10000, 52);
    std::vector<double> ar(eps.size());
    double prev = 0.0;
    for (std::size_t t = 0; t < eps.size(); ++t) {
        prev = 0.5 * prev + eps[t];
        ar[t] = prev;
    }
    const auto ac_ar = auto_covariation(ar, 2, 1.0);
    CHECK(ac_ar[1] == Approx(0.5).margin(0.05));

    CHECK_THROWS_AS(auto_covariation(z, 2000, 1.0), input_error);
}
