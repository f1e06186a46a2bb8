#pragma once

// Monte Carlo scenario machinery: log returns -> price paths, the product
// series (asset price in local currency), pointwise quantile fans, and a
// small text-only SVG chart writer.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "stablevar/common.hpp"

namespace stablevar::scenario {

struct PricePath {
    std::vector<double> values;
    std::size_t clamped = 0; // returns clipped at |r| <= 5
};

// P(t) = base * exp(sum of returns up to t); the base itself is not emitted.
inline PricePath returns_to_prices(std::span<const double> returns, double base_price) {
    if (!(base_price > 0.0)) throw input_error("returns_to_prices: base price must be > 0");
    PricePath out;
    out.values.reserve(returns.size());
    double p = base_price;
    for (double r : returns) {
        if (!std::isfinite(r)) throw input_error("returns_to_prices: non-finite return");
        if (r > 5.0) {
            r = 5.0;
            ++out.clamped;
        } else if (r < -5.0) {
            r = -5.0;
            ++out.clamped;
        }
        p *= std::exp(r);
        out.values.push_back(p);
    }
    return out;
}

// elementwise product per path and step (e.g. Cu in USD x USDPLN = Cu in PLN)
inline std::vector<std::vector<double>> product_paths(
    const std::vector<std::vector<double>>& a,
    const std::vector<std::vector<double>>& b) {
    if (a.size() != b.size()) throw input_error("product_paths: path count mismatch");
    std::vector<std::vector<double>> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].size() != b[k].size())
            throw input_error("product_paths: path length mismatch");
        out[k].resize(a[k].size());
        for (std::size_t t = 0; t < a[k].size(); ++t) out[k][t] = a[k][t] * b[k][t];
    }
    return out;
}

struct QuantileFan {
    std::vector<double> levels;
    std::size_t horizon = 0;
    std::vector<std::vector<double>> values; // [level][step]
    std::size_t n_paths = 0;
    double base_price = 0.0;
};

inline const std::array<double, 9> default_fan_levels = {0.1, 0.2, 0.3, 0.4, 0.5,
                                                         0.6, 0.7, 0.8, 0.9};

// Pointwise empirical quantiles: at each step, values interpolate linearly
// between adjacent order statistics at rank (n-1) l + 1.  Monotone in the
// level by construction (one sorted array per step).
inline QuantileFan quantile_fan(const std::vector<std::vector<double>>& paths,
                                std::span<const double> levels,
                                double base_price = 0.0) {
    if (paths.size() < 100) throw input_error("quantile_fan: need at least 100 paths");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (!(levels[i] > levels[i - 1]))
            throw input_error("quantile_fan: levels must be strictly increasing");
    for (double l : levels)
        if (!(l > 0 && l < 1)) throw input_error("quantile_fan: levels must be in (0,1)");

    const std::size_t horizon = paths.front().size();
    for (const auto& p : paths)
        if (p.size() != horizon) throw input_error("quantile_fan: ragged path array");

    QuantileFan fan;
    fan.levels.assign(levels.begin(), levels.end());
    fan.horizon = horizon;
    fan.n_paths = paths.size();
    fan.base_price = base_price;
    fan.values.assign(levels.size(), std::vector<double>(horizon));

    std::vector<double> col(paths.size());
    for (std::size_t t = 0; t < horizon; ++t) {
        for (std::size_t k = 0; k < paths.size(); ++k) col[k] = paths[k][t];
        std::sort(col.begin(), col.end());
        for (std::size_t li = 0; li < levels.size(); ++li) {
            const double h = (static_cast<double>(col.size()) - 1.0) * levels[li];
            const std::size_t lo = static_cast<std::size_t>(h);
            const double frac = h - static_cast<double>(lo);
            fan.values[li][t] = lo + 1 < col.size()
                                    ? col[lo] * (1.0 - frac) + col[lo + 1] * frac
                                    : col.back();
        }
    }
    return fan;
}

// Line chart as SVG text; no rendering dependency.  Fans are drawn as grey
// polylines (extra fans in green), an optional realized series in blue.
inline std::string fan_svg(const QuantileFan& fan, std::span<const double> realized,
                           const std::string& title,
                           const QuantileFan* second_fan = nullptr) {
    const double width = 900, height = 500, ml = 70, mr = 20, mt = 40, mb = 30;
    double ymin = 1e300, ymax = -1e300;
    auto scan = [&](const QuantileFan& f) {
        for (const auto& row : f.values)
            for (double v : row) {
                ymin = std::min(ymin, v);
                ymax = std::max(ymax, v);
            }
    };
    scan(fan);
    if (second_fan) scan(*second_fan);
    for (double v : realized) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    }
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    const double xmax = static_cast<double>(fan.horizon - 1);

    auto px = [&](double t) { return ml + (width - ml - mr) * (xmax > 0 ? t / xmax : 0.5); };
    auto py = [&](double v) {
        return height - mb - (height - mt - mb) * (v - ymin) / (ymax - ymin);
    };
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"500\" "
           "viewBox=\"0 0 900 500\">\n";
    svg += "<rect width=\"900\" height=\"500\" fill=\"white\"/>\n";
    svg += "<text x=\"450\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + title +
           "</text>\n";
    auto polyline = [&](std::span<const double> ys, const std::string& style) {
        std::string pts;
        for (std::size_t t = 0; t < ys.size(); ++t)
            pts += fmt(px(static_cast<double>(t))) + "," + fmt(py(ys[t])) + " ";
        svg += "<polyline fill=\"none\" " + style + " points=\"" + pts + "\"/>\n";
    };
    for (const auto& row : fan.values)
        polyline(row, "stroke=\"#555555\" stroke-width=\"1\" stroke-dasharray=\"4,3\"");
    if (second_fan)
        for (const auto& row : second_fan->values)
            polyline(row, "stroke=\"#2ca02c\" stroke-width=\"1\"");
    if (!realized.empty())
        polyline(realized, "stroke=\"#1f77b4\" stroke-width=\"1.5\"");
    // y-axis labels
    for (int i = 0; i <= 4; ++i) {
        const double v = ymin + (ymax - ymin) * i / 4.0;
        svg += "<text x=\"8\" y=\"" + fmt(py(v) + 4) + "\" font-size=\"11\">" + fmt(v) +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace stablevar::scenario
