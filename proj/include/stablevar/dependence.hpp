#pragma once

// Dependence measures for heavy-tailed series: Pearson / Spearman / Kendall
// coefficients, rolling-window tracking, and the normalized (auto-)covariation
// used by the VAR estimator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stablevar/common.hpp"

namespace stablevar::dependence {

namespace detail {

inline void check_pair(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw input_error("correlation: length mismatch");
    if (x.size() < 3) throw input_error("correlation: need at least 3 points");
}

inline bool is_constant(std::span<const double> v) {
    for (double a : v)
        if (a != v.front()) return false;
    return true;
}

// mid-ranks, ties averaged
inline std::vector<double> ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

} // namespace detail

inline double pearson(std::span<const double> x, std::span<const double> y) {
    detail::check_pair(x, y);
    if (detail::is_constant(x) || detail::is_constant(y))
        throw input_error("pearson: constant input");
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
    detail::check_pair(x, y);
    if (detail::is_constant(x) || detail::is_constant(y))
        throw input_error("spearman: constant input");
    const auto rx = detail::ranks(x);
    const auto ry = detail::ranks(y);
    return pearson(rx, ry);
}

// tau-a: (concordant - discordant) / (n(n-1)/2); ties contribute zero
inline double kendall(std::span<const double> x, std::span<const double> y) {
    detail::check_pair(x, y);
    if (detail::is_constant(x) || detail::is_constant(y))
        throw input_error("kendall: constant input");
    const std::size_t n = x.size();
    long long s = 0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double prod = (x[i] - x[j]) * (y[i] - y[j]);
            if (prod > 0) ++s;
            else if (prod < 0) --s;
        }
    return 2.0 * static_cast<double>(s) /
           (static_cast<double>(n) * static_cast<double>(n - 1));
}

struct DependenceReport {
    std::string date;       // anchor: window end (trailing) or center (symmetric)
    std::string window_end; // last date covered by the window
    double pearson = 0, spearman = 0, kendall = 0;
    std::size_t window_len = 0;
};

// One report per admissible window position.  Trailing windows anchor at the
// window end; symmetric windows anchor at the center.  When a label mask is
// supplied, windows containing more than one distinct label are omitted,
// leaving gaps around regime changes.
inline std::vector<DependenceReport> rolling_dependence(
    std::span<const double> x, std::span<const double> y,
    std::span<const std::string> dates, std::size_t window, bool symmetric,
    const std::vector<int>* exclude_mask = nullptr) {
    if (x.size() != y.size() || (!dates.empty() && dates.size() != x.size()))
        throw input_error("rolling_dependence: length mismatch");
    if (window < 8) throw input_error("rolling_dependence: window too small (min 8)");
    if (window > x.size()) throw input_error("rolling_dependence: window exceeds series length");
    if (exclude_mask && exclude_mask->size() != x.size())
        throw input_error("rolling_dependence: mask length mismatch");

    auto date_at = [&](std::size_t i) {
        return dates.empty() ? std::to_string(i) : dates[i];
    };
    std::vector<DependenceReport> out;
    const std::size_t n = x.size();
    for (std::size_t start = 0; start + window <= n; ++start) {
        const std::size_t end = start + window - 1;
        if (exclude_mask) {
            bool mixed = false;
            const int first = (*exclude_mask)[start];
            for (std::size_t i = start + 1; i <= end; ++i)
                if ((*exclude_mask)[i] != first) {
                    mixed = true;
                    break;
                }
            if (mixed) continue;
        }
        auto xs = x.subspan(start, window);
        auto ys = y.subspan(start, window);
        DependenceReport rep;
        rep.window_len = window;
        rep.window_end = date_at(end);
        rep.date = symmetric ? date_at(start + window / 2) : date_at(end);
        rep.pearson = pearson(xs, ys);
        rep.spearman = spearman(xs, ys);
        rep.kendall = kendall(xs, ys);
        out.push_back(std::move(rep));
    }
    return out;
}

// Normalized covariation estimator:
//   sum_i x_i sign(y_i) |y_i|^{p-1}  /  sum_i |y_i|^p.
inline double covariation_norm(std::span<const double> x,
                               std::span<const double> y, double p) {
    if (x.size() != y.size()) throw input_error("covariation_norm: length mismatch");
    if (x.size() < 30) throw input_error("covariation_norm: need at least 30 points");
    if (!(p >= 1.0 && p < 2.0)) throw input_error("covariation_norm: p must be in [1, 2)");
    double num = 0.0, den = 0.0;
    const bool p_one = p == 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double ay = std::abs(y[i]);
        if (ay == 0.0) continue;
        const double w = p_one ? 1.0 : std::pow(ay, p - 1.0);
        num += x[i] * (y[i] > 0 ? w : -w);
        den += p_one ? ay : w * ay;
    }
    if (den == 0.0) throw input_error("covariation_norm: second argument is all zeros");
    return num / den;
}

// Normalized auto-covariation at lags 0..max_lag; lag 0 equals 1 by
// construction of the normalized form.
inline std::vector<double> auto_covariation(std::span<const double> x,
                                            std::size_t max_lag, double p) {
    if (x.size() < 30) throw input_error("auto_covariation: need at least 30 points");
    if (max_lag >= x.size() / 4)
        throw input_error("auto_covariation: max_lag must be < length/4");
    std::vector<double> out(max_lag + 1);
    for (std::size_t h = 0; h <= max_lag; ++h) {
        auto lead = x.subspan(h, x.size() - h);
        auto lag = x.subspan(0, x.size() - h);
        out[h] = covariation_norm(lead, lag, p);
    }
    return out;
}

} // namespace stablevar::dependence
