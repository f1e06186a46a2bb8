#pragma once

// Independent oracles used across the test suites.  These deliberately avoid
// the library's own code paths wherever they are meant to cross-check one.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "stablevar/detail/rng.hpp"

namespace testutil {

// empirical characteristic function with standard errors of both parts
struct EcfValue {
    double re = 0, im = 0, se_re = 0, se_im = 0;
};

inline EcfValue ecf(std::span<const double> x, double theta) {
    const double n = static_cast<double>(x.size());
    double sr = 0, si = 0, srr = 0, sii = 0;
    for (double v : x) {
        const double c = std::cos(theta * v), s = std::sin(theta * v);
        sr += c;
        si += s;
        srr += c * c;
        sii += s * s;
    }
    EcfValue e;
    e.re = sr / n;
    e.im = si / n;
    e.se_re = std::sqrt(std::max(srr / n - e.re * e.re, 0.0) / n);
    e.se_im = std::sqrt(std::max(sii / n - e.im * e.im, 0.0) / n);
    return e;
}

// asymptotic Kolmogorov distribution: P(sqrt(n) D > lambda)
inline double kolmogorov_sf(double lambda) {
    if (lambda < 1e-8) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double t = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1 ? t : -t);
        if (t < 1e-16) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0;
    double p_value = 0;
};

inline KsResult ks_test(std::vector<double> sample,
                        const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double u = cdf(sample[i]);
        d = std::max(d, std::abs((i + 1) / n - u));
        d = std::max(d, std::abs(u - i / n));
    }
    return {d, kolmogorov_sf(std::sqrt(n) * d)};
}

// classical covariance-based Yule-Walker estimate for a 2-D VAR(1),
// returned row-major
inline std::array<double, 4> covariance_yule_walker(std::span<const double> x1,
                                                    std::span<const double> x2) {
    const std::size_t n = x1.size();
    double m1 = 0, m2 = 0;
    for (std::size_t t = 0; t < n; ++t) {
        m1 += x1[t];
        m2 += x2[t];
    }
    m1 /= n;
    m2 /= n;
    auto gamma = [&](int i, int j, int h) {
        const auto& a = i == 0 ? x1 : x2;
        const auto& b = j == 0 ? x1 : x2;
        double s = 0;
        for (std::size_t t = h; t < n; ++t)
            s += (a[t] - (i == 0 ? m1 : m2)) * (b[t - h] - (j == 0 ? m1 : m2));
        return s / (n - h);
    };
    const double g0_00 = gamma(0, 0, 0), g0_01 = gamma(0, 1, 0);
    const double g0_10 = gamma(1, 0, 0), g0_11 = gamma(1, 1, 0);
    const double g1_00 = gamma(0, 0, 1), g1_01 = gamma(0, 1, 1);
    const double g1_10 = gamma(1, 0, 1), g1_11 = gamma(1, 1, 1);
    const double det = g0_00 * g0_11 - g0_01 * g0_10;
    // Theta = Gamma(1) Gamma(0)^{-1}
    return {(g1_00 * g0_11 - g1_01 * g0_10) / det,
            (g1_01 * g0_00 - g1_00 * g0_01) / det,
            (g1_10 * g0_11 - g1_11 * g0_10) / det,
            (g1_11 * g0_00 - g1_10 * g0_01) / det};
}

// mid-ranks with averaged ties (independent of the library implementation)
inline std::vector<double> midranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        while (j + 1 < v.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k)
            r[idx[k]] = 0.5 * (static_cast<double>(i + j)) + 1.0;
        i = j + 1;
    }
    return r;
}

// pair-enumeration Kendall tau-a
inline double kendall_bruteforce(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double s = 0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = (x[i] - x[j]) * (y[i] - y[j]);
            s += p > 0 ? 1.0 : (p < 0 ? -1.0 : 0.0);
        }
    return 2.0 * s / (static_cast<double>(n) * (n - 1));
}

// two-state Gaussian HMM fitted by EM with closed-form M-steps; emissions
// are N(0, v_k).  Reference for the alpha = 2 cross-check.
struct GaussianHmm {
    std::array<double, 2> var{1.0, 1.0};
    std::array<std::array<double, 2>, 2> trans{{{0.95, 0.05}, {0.05, 0.95}}};
    std::array<double, 2> init{0.5, 0.5};
    double loglik = 0;
};

inline GaussianHmm gaussian_hmm_fit(std::span<const double> x, GaussianHmm m,
                                    int max_iter = 200, double tol = 1e-8) {
    const std::size_t n = x.size();
    std::vector<std::array<double, 2>> b(n), a(n), be(n), g(n);
    std::vector<double> sc(n);
    double prev = -1e300;
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t t = 0; t < n; ++t)
            for (int k = 0; k < 2; ++k)
                b[t][k] = std::exp(-0.5 * x[t] * x[t] / m.var[k]) /
                          std::sqrt(2.0 * 3.14159265358979323846 * m.var[k]);
        a[0] = {m.init[0] * b[0][0], m.init[1] * b[0][1]};
        sc[0] = a[0][0] + a[0][1];
        a[0] = {a[0][0] / sc[0], a[0][1] / sc[0]};
        for (std::size_t t = 1; t < n; ++t) {
            for (int j = 0; j < 2; ++j)
                a[t][j] = (a[t - 1][0] * m.trans[0][j] + a[t - 1][1] * m.trans[1][j]) *
                          b[t][j];
            sc[t] = a[t][0] + a[t][1];
            a[t] = {a[t][0] / sc[t], a[t][1] / sc[t]};
        }
        double ll = 0;
        for (std::size_t t = 0; t < n; ++t) ll += std::log(sc[t]);
        be[n - 1] = {1, 1};
        for (std::size_t t = n - 1; t-- > 0;)
            for (int i = 0; i < 2; ++i)
                be[t][i] = (m.trans[i][0] * b[t + 1][0] * be[t + 1][0] +
                            m.trans[i][1] * b[t + 1][1] * be[t + 1][1]) /
                           sc[t + 1];
        for (std::size_t t = 0; t < n; ++t) {
            const double s = a[t][0] * be[t][0] + a[t][1] * be[t][1];
            g[t] = {a[t][0] * be[t][0] / s, a[t][1] * be[t][1] / s};
        }
        std::array<std::array<double, 2>, 2> xi{};
        for (std::size_t t = 0; t + 1 < n; ++t) {
            double tot = 0;
            double v[2][2];
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    v[i][j] = a[t][i] * m.trans[i][j] * b[t + 1][j] * be[t + 1][j];
                    tot += v[i][j];
                }
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) xi[i][j] += v[i][j] / tot;
        }
        for (int i = 0; i < 2; ++i) {
            const double row = xi[i][0] + xi[i][1];
            m.trans[i] = {xi[i][0] / row, xi[i][1] / row};
        }
        m.init = g[0];
        for (int k = 0; k < 2; ++k) {
            double sw = 0, sxx = 0;
            for (std::size_t t = 0; t < n; ++t) {
                sw += g[t][k];
                sxx += g[t][k] * x[t] * x[t];
            }
            m.var[k] = sxx / sw;
        }
        m.loglik = ll;
        if (ll - prev < tol && it > 0) break;
        prev = ll;
    }
    return m;
}

} // namespace testutil
