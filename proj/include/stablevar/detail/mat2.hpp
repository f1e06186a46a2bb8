#pragma once

#include <array>
#include <cmath>

#include "stablevar/common.hpp"

namespace stablevar::detail {

// Row-major 2x2 matrix; enough linear algebra for the VAR(1) estimator.
struct Mat2 {
    std::array<double, 4> m{0, 0, 0, 0};

    double& operator()(int r, int c) { return m[2 * r + c]; }
    double operator()(int r, int c) const { return m[2 * r + c]; }

    static Mat2 identity() { return Mat2{{1, 0, 0, 1}}; }

    Mat2 operator*(const Mat2& o) const {
        Mat2 r;
        r.m = {m[0] * o.m[0] + m[1] * o.m[2], m[0] * o.m[1] + m[1] * o.m[3],
               m[2] * o.m[0] + m[3] * o.m[2], m[2] * o.m[1] + m[3] * o.m[3]};
        return r;
    }

    std::array<double, 2> operator*(const std::array<double, 2>& v) const {
        return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
    }

    double det() const { return m[0] * m[3] - m[1] * m[2]; }

    Mat2 inverse() const {
        const double d = det();
        if (std::abs(d) < 1e-300) throw numeric_error("singular 2x2 matrix");
        return Mat2{{m[3] / d, -m[1] / d, -m[2] / d, m[0] / d}};
    }

    double spectral_radius() const {
        const double tr = m[0] + m[3];
        const double disc = tr * tr - 4.0 * det();
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            return std::max(std::abs(0.5 * (tr + s)), std::abs(0.5 * (tr - s)));
        }
        return std::sqrt(det()); // complex pair, |lambda| = sqrt(det)
    }
};

} // namespace stablevar::detail
