#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "stablevar/common.hpp"

namespace stablevar::detail {

// 15-point Kronrod rule with embedded 7-point Gauss rule (QUADPACK dqk15).
struct GaussKronrod15 {
    static constexpr std::array<double, 8> xgk = {
        0.991455371120813, 0.949107912342759, 0.864864423359769,
        0.741531185599394, 0.586087235467691, 0.405845151377397,
        0.207784955007898, 0.0};
    static constexpr std::array<double, 8> wgk = {
        0.022935322010529, 0.063092092629979, 0.104790010322250,
        0.140653259715525, 0.169004726639267, 0.190350578064785,
        0.204432940075298, 0.209482141084728};
    static constexpr std::array<double, 4> wg = {
        0.129484966168870, 0.279705391489277, 0.381830050505119,
        0.417959183673469};

    template <typename F>
    static void apply(const F& f, double a, double b, double& kronrod, double& err) {
        const double c = 0.5 * (a + b);
        const double h = 0.5 * (b - a);
        double fv[15];
        fv[7] = f(c);
        double resk = wgk[7] * fv[7];
        double resg = wg[3] * fv[7];
        for (int j = 0; j < 7; ++j) {
            const double dx = h * xgk[j];
            fv[j] = f(c - dx);
            fv[14 - j] = f(c + dx);
            resk += wgk[j] * (fv[j] + fv[14 - j]);
            if (j % 2 == 1) resg += wg[j / 2] * (fv[j] + fv[14 - j]);
        }
        kronrod = resk * h;
        // QUADPACK-style error model: the raw |GK - G| difference badly
        // overestimates the true error for smooth integrands
        const double mean = resk * 0.5;
        double resasc = wgk[7] * std::abs(fv[7] - mean);
        for (int j = 0; j < 7; ++j)
            resasc += wgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
        resasc *= std::abs(h);
        err = std::abs((resk - resg) * h);
        if (resasc != 0.0 && err != 0.0) {
            const double scaled = 200.0 * err / resasc;
            err = scaled < 1.0 ? resasc * scaled * std::sqrt(scaled) : resasc;
        }
    }
};

// Adaptive bisection driven by the embedded error estimate.  Absolute
// tolerance; throws numeric_error if the refinement budget is exhausted
// while the estimated error is still far above tolerance.
template <typename F>
double integrate_adaptive(const F& f, double a, double b, double abs_tol,
                          int max_depth = 60) {
    struct Frame {
        double a, b, tol;
        int depth;
    };
    double total = 0.0;
    double err_total = 0.0;
    Frame stack[2048];
    int top = 0;
    stack[top++] = {a, b, abs_tol, 0};
    while (top > 0) {
        Frame fr = stack[--top];
        double val, err;
        GaussKronrod15::apply(f, fr.a, fr.b, val, err);
        if (err <= fr.tol || fr.depth >= max_depth || top >= 2045) {
            total += val;
            err_total += err;
            continue;
        }
        const double mid = 0.5 * (fr.a + fr.b);
        stack[top++] = {fr.a, mid, 0.5 * fr.tol, fr.depth + 1};
        stack[top++] = {mid, fr.b, 0.5 * fr.tol, fr.depth + 1};
    }
    if (!(err_total < 1e4 * abs_tol + 1e-30))
        throw numeric_error("quadrature did not converge");
    return total;
}

} // namespace stablevar::detail
