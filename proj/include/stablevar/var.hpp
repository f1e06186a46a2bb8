#pragma once

// Two-dimensional VAR(1) with alpha-stable innovations: modified Yule-Walker
// estimation (covariation matrices in place of autocovariances), residual
// extraction, seeded Monte Carlo simulation, and JSON (de)serialization.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stablevar/common.hpp"
#include "stablevar/dependence.hpp"
#include "stablevar/detail/mat2.hpp"
#include "stablevar/detail/rng.hpp"
#include "stablevar/stable.hpp"

namespace stablevar::var {

enum class Constraint { full, diagonal };

inline std::string to_string(Constraint c) {
    return c == Constraint::full ? "full" : "diagonal";
}

inline Constraint constraint_from_string(const std::string& s) {
    if (s == "full") return Constraint::full;
    if (s == "diagonal") return Constraint::diagonal;
    throw input_error("unknown VAR constraint: " + s);
}

struct FitMeta {
    std::size_t n = 0;
    std::string date_from, date_to;
    std::array<std::string, 2> columns{"x1", "x2"};
};

struct VarModel {
    detail::Mat2 theta;
    std::array<StableParams, 2> residual_params;
    Constraint constraint = Constraint::full;
    double p_covariation = 1.0;
    std::string regime_tag;
    FitMeta meta;

    double spectral_radius() const { return theta.spectral_radius(); }
};

// Pair of equally long columns; the unit the estimator works on.  A fit may
// pool several segments (e.g. the two stretches of the calm regime), pairing
// X(t) with X(t-1) only within a segment.
struct Segment {
    std::span<const double> x1, x2;
};

namespace detail {

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// lag-h normalized covariation matrix over pooled within-segment pairs:
// Lambda(h)_{ij} = covnorm(X_i(t), X_j(t-h))
inline stablevar::detail::Mat2 lag_covariation(
    const std::vector<std::array<std::vector<double>, 2>>& segs, int h, double p) {
    stablevar::detail::Mat2 m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double num = 0.0, den = 0.0;
            const bool p_one = p == 1.0;
            for (const auto& s : segs) {
                const auto& xi = s[i];
                const auto& xj = s[j];
                for (std::size_t t = h; t < xi.size(); ++t) {
                    const double y = xj[t - h];
                    const double ay = std::abs(y);
                    if (ay == 0.0) continue;
                    const double w = p_one ? 1.0 : std::pow(ay, p - 1.0);
                    num += xi[t] * (y > 0 ? w : -w);
                    den += p_one ? ay : w * ay;
                }
            }
            if (den == 0.0) throw numeric_error("VAR fit: degenerate covariation");
            m(i, j) = num / den;
        }
    return m;
}

} // namespace detail

// Modified Yule-Walker fit.  Components are median-centered before the
// coefficient estimation (no intercept in the model; the residual location
// is absorbed by the fitted innovation mu).  full: Theta = Lambda(1)
// Lambda(0)^{-1}; diagonal: each theta_ii is the lag-1 normalized
// auto-covariation of component i alone.
inline VarModel fit_segments(std::span<const Segment> segments, Constraint constraint,
                             double p = 1.5, const std::string& regime_tag = "") {
    if (segments.empty()) throw input_error("VAR fit: no data segments");
    if (!(p >= 1.0 && p < 2.0)) throw input_error("VAR fit: p must be in [1, 2)");
    std::size_t total = 0;
    for (const auto& s : segments) {
        if (s.x1.size() != s.x2.size())
            throw input_error("VAR fit: column length mismatch");
        if (s.x1.size() < 2) throw input_error("VAR fit: segment too short");
        total += s.x1.size();
    }
    if (total < 100) throw input_error("VAR fit: need at least 100 observations");

    // median-center each component over the pooled sample
    std::vector<double> all1, all2;
    all1.reserve(total);
    all2.reserve(total);
    for (const auto& s : segments) {
        all1.insert(all1.end(), s.x1.begin(), s.x1.end());
        all2.insert(all2.end(), s.x2.begin(), s.x2.end());
    }
    const double med1 = detail::median(all1);
    const double med2 = detail::median(all2);

    std::vector<std::array<std::vector<double>, 2>> centered;
    centered.reserve(segments.size());
    for (const auto& s : segments) {
        std::array<std::vector<double>, 2> seg;
        seg[0].reserve(s.x1.size());
        seg[1].reserve(s.x2.size());
        for (double v : s.x1) seg[0].push_back(v - med1);
        for (double v : s.x2) seg[1].push_back(v - med2);
        centered.push_back(std::move(seg));
    }

    VarModel model;
    model.constraint = constraint;
    model.p_covariation = p;
    model.regime_tag = regime_tag;
    model.meta.n = total;

    if (constraint == Constraint::full) {
        const auto l1 = detail::lag_covariation(centered, 1, p);
        const auto l0 = detail::lag_covariation(centered, 0, p);
        model.theta = l1 * l0.inverse();
    } else {
        // each diagonal entry sees its own component only
        for (int i = 0; i < 2; ++i) {
            double num = 0.0, den = 0.0;
            const bool p_one = p == 1.0;
            for (const auto& s : centered) {
                for (std::size_t t = 1; t < s[i].size(); ++t) {
                    const double y = s[i][t - 1];
                    const double ay = std::abs(y);
                    if (ay == 0.0) continue;
                    const double w = p_one ? 1.0 : std::pow(ay, p - 1.0);
                    num += s[i][t] * (y > 0 ? w : -w);
                    den += p_one ? ay : w * ay;
                }
            }
            if (den == 0.0) throw numeric_error("VAR fit: degenerate covariation");
            model.theta(i, i) = num / den;
            model.theta(i, 1 - i) = 0.0;
        }
    }

    if (!(model.spectral_radius() < 1.0))
        throw numeric_error("VAR fit: nonstationary estimate (spectral radius >= 1)");

    // residuals on the raw (uncentered) data; mu soaks up the location
    std::array<std::vector<double>, 2> resid;
    for (const auto& s : segments) {
        for (std::size_t t = 1; t < s.x1.size(); ++t) {
            const std::array<double, 2> prev{s.x1[t - 1], s.x2[t - 1]};
            const auto pred = model.theta * prev;
            resid[0].push_back(s.x1[t] - pred[0]);
            resid[1].push_back(s.x2[t] - pred[1]);
        }
    }
    for (int i = 0; i < 2; ++i)
        model.residual_params[i] = fit_regression(resid[i]).params;
    return model;
}

inline VarModel fit(std::span<const double> x1, std::span<const double> x2,
                    Constraint constraint, double p = 1.5,
                    const std::string& regime_tag = "") {
    const Segment seg{x1, x2};
    return fit_segments(std::span<const Segment>(&seg, 1), constraint, p, regime_tag);
}

// Z(t) = X(t) - Theta X(t-1); one fewer row than the input.
inline std::array<std::vector<double>, 2> residuals(const VarModel& model,
                                                    std::span<const double> x1,
                                                    std::span<const double> x2) {
    if (x1.size() != x2.size()) throw input_error("residuals: column length mismatch");
    if (x1.size() < 2) throw input_error("residuals: need at least 2 rows");
    std::array<std::vector<double>, 2> out;
    out[0].reserve(x1.size() - 1);
    out[1].reserve(x1.size() - 1);
    for (std::size_t t = 1; t < x1.size(); ++t) {
        const auto pred = model.theta * std::array<double, 2>{x1[t - 1], x2[t - 1]};
        out[0].push_back(x1[t] - pred[0]);
        out[1].push_back(x2[t] - pred[1]);
    }
    return out;
}

// One simulated path: X(t) = Theta X(t-1) + Z(t), t = 1..horizon, from x0.
// Innovations come from the path's own substream, so any subset of paths can
// be generated in any order with identical results.
template <typename Visitor>
void simulate_visit(const VarModel& model, std::size_t horizon, std::size_t n_paths,
                    std::array<double, 2> x0, std::uint64_t seed, Visitor&& visit) {
    if (!(model.spectral_radius() < 1.0))
        throw input_error("simulate: model is not stationary");
    if (horizon < 1) throw input_error("simulate: horizon must be >= 1");
    if (n_paths < 1) throw input_error("simulate: n_paths must be >= 1");
    for (const auto& rp : model.residual_params) rp.validate();

    const auto& rp1 = model.residual_params[0];
    const auto& rp2 = model.residual_params[1];
    std::vector<std::array<double, 2>> path(horizon);
    for (std::size_t k = 0; k < n_paths; ++k) {
        stablevar::detail::Rng rng(stablevar::detail::substream_seed(seed, k));
        std::array<double, 2> x = x0;
        for (std::size_t t = 0; t < horizon; ++t) {
            const double u1 = rng.uniform_angle();
            const double w1 = rng.exponential();
            const double u2 = rng.uniform_angle();
            const double w2 = rng.exponential();
            const double z1 =
                rp1.sigma * stablevar::detail::cms_standard(rp1.alpha, rp1.beta, u1, w1) +
                rp1.mu;
            const double z2 =
                rp2.sigma * stablevar::detail::cms_standard(rp2.alpha, rp2.beta, u2, w2) +
                rp2.mu;
            const auto pred = model.theta * x;
            x = {pred[0] + z1, pred[1] + z2};
            path[t] = x;
        }
        visit(k, path);
    }
}

// Full path array (n_paths x horizon x 2); prefer simulate_visit for large runs.
inline std::vector<std::vector<std::array<double, 2>>> simulate(
    const VarModel& model, std::size_t horizon, std::size_t n_paths,
    std::array<double, 2> x0, std::uint64_t seed) {
    std::vector<std::vector<std::array<double, 2>>> out(n_paths);
    simulate_visit(model, horizon, n_paths, x0, seed,
                   [&](std::size_t k, const std::vector<std::array<double, 2>>& p) {
                       out[k] = p;
                   });
    return out;
}

// --- serialization ---------------------------------------------------------

inline nlohmann::json to_json(const VarModel& m) {
    nlohmann::json j;
    j["theta"] = {m.theta(0, 0), m.theta(0, 1), m.theta(1, 0), m.theta(1, 1)};
    j["residual_params"] = nlohmann::json::array();
    for (const auto& rp : m.residual_params)
        j["residual_params"].push_back(
            {{"alpha", rp.alpha}, {"sigma", rp.sigma}, {"beta", rp.beta}, {"mu", rp.mu}});
    j["constraint"] = to_string(m.constraint);
    j["p_covariation"] = m.p_covariation;
    j["regime_tag"] = m.regime_tag;
    j["fit"] = {{"n", m.meta.n},
                {"date_from", m.meta.date_from},
                {"date_to", m.meta.date_to},
                {"columns", m.meta.columns}};
    return j;
}

inline VarModel from_json(const nlohmann::json& j) {
    VarModel m;
    const auto th = j.at("theta");
    if (!th.is_array() || th.size() != 4)
        throw input_error("model json: theta must be 4 numbers (row-major)");
    for (int i = 0; i < 4; ++i) m.theta.m[i] = th[i].get<double>();
    const auto rps = j.at("residual_params");
    if (!rps.is_array() || rps.size() != 2)
        throw input_error("model json: residual_params must have 2 entries");
    for (int i = 0; i < 2; ++i) {
        m.residual_params[i] = {rps[i].at("alpha").get<double>(),
                                rps[i].at("sigma").get<double>(),
                                rps[i].at("beta").get<double>(),
                                rps[i].at("mu").get<double>()};
        m.residual_params[i].validate();
    }
    m.constraint = constraint_from_string(j.at("constraint").get<std::string>());
    m.p_covariation = j.at("p_covariation").get<double>();
    m.regime_tag = j.value("regime_tag", "");
    if (j.contains("fit")) {
        const auto& f = j["fit"];
        m.meta.n = f.value("n", std::size_t{0});
        m.meta.date_from = f.value("date_from", "");
        m.meta.date_to = f.value("date_to", "");
        if (f.contains("columns") && f["columns"].size() == 2) {
            m.meta.columns[0] = f["columns"][0].get<std::string>();
            m.meta.columns[1] = f["columns"][1].get<std::string>();
        }
    }
    return m;
}

} // namespace stablevar::var
