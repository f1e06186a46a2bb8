#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include "stablevar/common.hpp"

namespace stablevar::detail {

// Brent root finder on [a, b] with f(a), f(b) of opposite sign.
template <typename F>
double brent_root(const F& f, double a, double b, double fa, double fb,
                  double xtol, double ftol, int max_iter = 200) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw numeric_error("root not bracketed");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * 2.220446049250313e-16 * std::abs(b) + 0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || std::abs(fb) <= ftol) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0) == (fc > 0)) {
            c = a; fc = fa; d = b - a; e = d;
        }
    }
    return b;
}

// Nelder-Mead in 2 dimensions.  Returns the best vertex; the start point is
// always a vertex, so the result never scores worse than the start.
template <typename F>
std::array<double, 2> nelder_mead2(const F& f, std::array<double, 2> x0,
                                   std::array<double, 2> step, int max_eval,
                                   double ftol) {
    struct Vertex {
        std::array<double, 2> x;
        double fx;
    };
    std::array<Vertex, 3> s;
    int evals = 0;
    auto eval = [&](std::array<double, 2> x) {
        ++evals;
        return f(x);
    };
    s[0] = {x0, eval(x0)};
    s[1] = {{x0[0] + step[0], x0[1]}, 0.0};
    s[1].fx = eval(s[1].x);
    s[2] = {{x0[0], x0[1] + step[1]}, 0.0};
    s[2].fx = eval(s[2].x);

    auto order = [&]() {
        std::sort(s.begin(), s.end(),
                  [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; });
    };
    order();
    while (evals < max_eval) {
        if (std::abs(s[2].fx - s[0].fx) <= ftol * (std::abs(s[0].fx) + 1e-12)) break;
        const std::array<double, 2> cen = {0.5 * (s[0].x[0] + s[1].x[0]),
                                           0.5 * (s[0].x[1] + s[1].x[1])};
        auto at = [&](double t) {
            return std::array<double, 2>{cen[0] + t * (cen[0] - s[2].x[0]),
                                         cen[1] + t * (cen[1] - s[2].x[1])};
        };
        const auto xr = at(1.0);
        const double fr = eval(xr);
        if (fr < s[0].fx) {
            const auto xe = at(2.0);
            const double fe = eval(xe);
            if (fe < fr) s[2] = {xe, fe}; else s[2] = {xr, fr};
        } else if (fr < s[1].fx) {
            s[2] = {xr, fr};
        } else {
            const auto xc = at(fr < s[2].fx ? 0.5 : -0.5);
            const double fc = eval(xc);
            if (fc < std::min(fr, s[2].fx)) {
                s[2] = {xc, fc};
            } else {
                // shrink toward best
                for (int i = 1; i < 3; ++i) {
                    s[i].x = {0.5 * (s[i].x[0] + s[0].x[0]),
                              0.5 * (s[i].x[1] + s[0].x[1])};
                    s[i].fx = eval(s[i].x);
                }
            }
        }
        order();
    }
    return s[0].x;
}

} // namespace stablevar::detail
