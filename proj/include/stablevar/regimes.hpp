#pragma once

// Two-state hidden Markov segmentation with symmetric alpha-stable emissions.
// E-step: scaled forward-backward.  M-step: closed-form transition/initial
// updates; per-state (alpha, sigma) by Nelder-Mead on the posterior-weighted
// log-density.  Emission densities are memoized on a grid of standardized
// points (spacing 1e-3 sigma) to bound quadrature cost; the same memoized
// density is used in the E-step, the M-step and the reported log-likelihood,
// which keeps the EM ascent property exact for the working objective.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "stablevar/common.hpp"
#include "stablevar/detail/optim.hpp"
#include "stablevar/stable.hpp"

namespace stablevar::regimes {

inline constexpr double alpha_lo = 1.05;
inline constexpr double alpha_hi = 2.0;

struct HmmModel {
    // state 0 is the high-variation regime (sigma[0] >= sigma[1]);
    // it is reported as "state 1" in labels and output files
    std::array<StableParams, 2> emission; // beta = mu = 0
    std::array<std::array<double, 2>, 2> transition{{{0.95, 0.05}, {0.05, 0.95}}};
    std::array<double, 2> initial{0.5, 0.5};
    double loglik = 0.0;
    std::vector<double> loglik_trace;
    int iterations = 0;
    bool converged = false;

    void normalize_state_order() {
        if (emission[0].sigma >= emission[1].sigma) return;
        std::swap(emission[0], emission[1]);
        std::swap(initial[0], initial[1]);
        std::swap(transition[0][1], transition[1][0]);
        std::swap(transition[0][0], transition[1][1]);
    }
};

struct StatePath {
    std::vector<double> posterior; // P(state 1 | data), state 1 = high variation
    std::vector<int> labels;       // 1 or 2; posterior >= 0.5 -> 1
};

struct EmOptions {
    int max_iter = 200;
    double tol = 1e-6;
    bool fix_gaussian = false; // pin alpha = 2 in both states (testing hook)
};

namespace detail {

using stablevar::detail::nelder_mead2;

// Per-(alpha, sigma) memoized symmetric stable density.
class EmissionDensity {
public:
    EmissionDensity(double alpha, double sigma) : alpha_(alpha), sigma_(sigma) {}

    double log_density(double x) {
        const double z = x / sigma_;
        const long long q = std::llround(std::abs(z) * 1000.0);
        auto it = cache_.find(q);
        double fstd;
        if (it != cache_.end()) {
            fstd = it->second;
        } else {
            const double zq = static_cast<double>(q) / 1000.0;
            fstd = stablevar::pdf({alpha_, 1.0, 0.0, 0.0}, zq);
            cache_.emplace(q, fstd);
        }
        return std::log(std::max(fstd / sigma_, 1e-300));
    }

private:
    double alpha_, sigma_;
    std::unordered_map<long long, double> cache_;
};

struct ForwardBackward {
    std::vector<std::array<double, 2>> gamma; // state posteriors
    std::array<std::array<double, 2>, 2> xi_sum{}; // expected transition counts
    double loglik = 0.0;
};

inline ForwardBackward forward_backward(const HmmModel& m,
                                        const std::vector<std::array<double, 2>>& logb) {
    const std::size_t n = logb.size();
    std::vector<std::array<double, 2>> alpha(n), beta(n), b(n);
    std::vector<double> scale(n);

    // emission likelihoods rescaled per time point to dodge underflow
    std::vector<double> bmax(n);
    for (std::size_t t = 0; t < n; ++t) {
        bmax[t] = std::max(logb[t][0], logb[t][1]);
        b[t] = {std::exp(logb[t][0] - bmax[t]), std::exp(logb[t][1] - bmax[t])};
    }

    double ll = 0.0;
    alpha[0] = {m.initial[0] * b[0][0], m.initial[1] * b[0][1]};
    scale[0] = alpha[0][0] + alpha[0][1];
    alpha[0][0] /= scale[0];
    alpha[0][1] /= scale[0];
    for (std::size_t t = 1; t < n; ++t) {
        for (int j = 0; j < 2; ++j)
            alpha[t][j] = (alpha[t - 1][0] * m.transition[0][j] +
                           alpha[t - 1][1] * m.transition[1][j]) * b[t][j];
        scale[t] = alpha[t][0] + alpha[t][1];
        if (!(scale[t] > 0.0)) throw numeric_error("em_fit: forward recursion underflow");
        alpha[t][0] /= scale[t];
        alpha[t][1] /= scale[t];
    }
    for (std::size_t t = 0; t < n; ++t) ll += std::log(scale[t]) + bmax[t];

    beta[n - 1] = {1.0, 1.0};
    for (std::size_t t = n - 1; t-- > 0;) {
        for (int i = 0; i < 2; ++i)
            beta[t][i] = (m.transition[i][0] * b[t + 1][0] * beta[t + 1][0] +
                          m.transition[i][1] * b[t + 1][1] * beta[t + 1][1]) /
                         scale[t + 1];
    }

    ForwardBackward fb;
    fb.loglik = ll;
    fb.gamma.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double g0 = alpha[t][0] * beta[t][0];
        const double g1 = alpha[t][1] * beta[t][1];
        const double s = g0 + g1;
        fb.gamma[t] = {g0 / s, g1 / s};
    }
    for (std::size_t t = 0; t + 1 < n; ++t) {
        double xi[2][2], tot = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                xi[i][j] = alpha[t][i] * m.transition[i][j] * b[t + 1][j] *
                           beta[t + 1][j];
                tot += xi[i][j];
            }
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) fb.xi_sum[i][j] += xi[i][j] / tot;
    }
    return fb;
}

// weighted log-likelihood of one state's emission parameters
inline double weighted_emission_ll(std::span<const double> x,
                                   const std::vector<double>& w, double alpha,
                                   double sigma) {
    EmissionDensity dens(alpha, sigma);
    double s = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t)
        if (w[t] > 0.0) s += w[t] * dens.log_density(x[t]);
    return s;
}

// deterministic seeding: rolling median absolute deviation split
inline std::vector<int> mad_split(std::span<const double> x, std::size_t window) {
    const std::size_t n = x.size();
    std::vector<double> dev(n);
    std::vector<double> buf;
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t lo = t + 1 >= window ? t + 1 - window : 0;
        buf.assign(x.begin() + lo, x.begin() + t + 1);
        std::sort(buf.begin(), buf.end());
        const double med = buf[buf.size() / 2];
        for (double& v : buf) v = std::abs(v - med);
        std::sort(buf.begin(), buf.end());
        dev[t] = buf[buf.size() / 2];
    }
    std::vector<double> sorted(dev);
    std::sort(sorted.begin(), sorted.end());
    const double thr = sorted[sorted.size() / 2];
    std::vector<int> hi(n);
    for (std::size_t t = 0; t < n; ++t) hi[t] = dev[t] >= thr ? 1 : 0;
    return hi;
}

inline StableParams seed_emission(const std::vector<double>& grp) {
    StableParams p{1.8, 1.0, 0.0, 0.0};
    if (grp.size() >= 100) {
        try {
            const StableParams q = fit_quantile(grp);
            p.alpha = std::clamp(q.alpha, alpha_lo, alpha_hi);
            p.sigma = q.sigma;
            return p;
        } catch (const error&) {
            // fall through to the MAD-scale fallback
        }
    }
    std::vector<double> buf(grp);
    std::sort(buf.begin(), buf.end());
    const double med = buf[buf.size() / 2];
    for (double& v : buf) v = std::abs(v - med);
    std::sort(buf.begin(), buf.end());
    p.sigma = std::max(buf[buf.size() / 2] / 0.6745 / std::sqrt(2.0), 1e-8);
    return p;
}

} // namespace detail

inline std::vector<std::array<double, 2>> emission_log_densities(
    const HmmModel& m, std::span<const double> x) {
    std::vector<std::array<double, 2>> logb(x.size());
    for (int k = 0; k < 2; ++k) {
        detail::EmissionDensity dens(m.emission[k].alpha, m.emission[k].sigma);
        for (std::size_t t = 0; t < x.size(); ++t)
            logb[t][k] = dens.log_density(x[t]);
    }
    return logb;
}

inline HmmModel em_fit(std::span<const double> returns,
                       const HmmModel* init = nullptr,
                       const EmOptions& opt = {}) {
    const std::size_t n = returns.size();
    if (n < 200) throw input_error("em_fit: need at least 200 observations");
    for (double v : returns)
        if (!std::isfinite(v)) throw input_error("em_fit: non-finite input");

    HmmModel m;
    if (init) {
        m = *init;
        m.loglik_trace.clear();
    } else {
        const auto hi = detail::mad_split(returns, 26);
        std::vector<double> g0, g1;
        for (std::size_t t = 0; t < n; ++t)
            (hi[t] ? g0 : g1).push_back(returns[t]);
        if (g0.empty() || g1.empty())
            throw numeric_error("em_fit: degenerate initial split");
        m.emission[0] = detail::seed_emission(g0);
        m.emission[1] = detail::seed_emission(g1);
        m.transition = {{{0.95, 0.05}, {0.05, 0.95}}};
        m.initial = {0.5, 0.5};
    }
    if (opt.fix_gaussian) {
        m.emission[0].alpha = 2.0;
        m.emission[1].alpha = 2.0;
    }

    double prev_ll = -std::numeric_limits<double>::infinity();
    std::vector<double> w(n);
    for (int it = 0; it < opt.max_iter; ++it) {
        const auto logb = emission_log_densities(m, returns);
        const auto fb = detail::forward_backward(m, logb);
        m.loglik = fb.loglik;
        m.loglik_trace.push_back(fb.loglik);
        m.iterations = it + 1;
        if (fb.loglik - prev_ll < opt.tol && it > 0) {
            m.converged = true;
            break;
        }
        prev_ll = fb.loglik;

        // M-step: transitions and initial distribution
        for (int i = 0; i < 2; ++i) {
            const double row = fb.xi_sum[i][0] + fb.xi_sum[i][1];
            if (row > 0.0) {
                m.transition[i][0] = fb.xi_sum[i][0] / row;
                m.transition[i][1] = fb.xi_sum[i][1] / row;
            }
        }
        m.initial = {fb.gamma[0][0], fb.gamma[0][1]};

        // M-step: emission parameters by bounded simplex search
        for (int k = 0; k < 2; ++k) {
            for (std::size_t t = 0; t < n; ++t) w[t] = fb.gamma[t][k];
            const double a0 = m.emission[k].alpha;
            const double ls0 = std::log(m.emission[k].sigma);
            if (opt.fix_gaussian) {
                // closed form: weighted second moment, alpha pinned at 2
                double sw = 0, sxx = 0;
                for (std::size_t t = 0; t < n; ++t) {
                    sw += w[t];
                    sxx += w[t] * returns[t] * returns[t];
                }
                const double var = sxx / sw;
                m.emission[k].sigma = std::sqrt(0.5 * var);
            } else {
                auto neg = [&](std::array<double, 2> p) {
                    if (p[0] < alpha_lo || p[0] > alpha_hi) return 1e100;
                    return -detail::weighted_emission_ll(returns, w, p[0],
                                                         std::exp(p[1]));
                };
                const auto best = stablevar::detail::nelder_mead2(
                    neg, {a0, ls0}, {0.05, 0.1}, 45, 1e-9);
                m.emission[k].alpha = std::clamp(best[0], alpha_lo, alpha_hi);
                m.emission[k].sigma = std::exp(best[1]);
            }
            if (m.emission[k].sigma < 1e-10)
                throw numeric_error("em_fit: likelihood degeneracy (sigma collapsed)");
        }
    }
    m.normalize_state_order();
    return m;
}

inline StatePath classify(const HmmModel& model, std::span<const double> returns) {
    if (returns.empty()) throw input_error("classify: empty input");
    for (double v : returns)
        if (!std::isfinite(v)) throw input_error("classify: non-finite input");
    const auto logb = emission_log_densities(model, returns);
    const auto fb = detail::forward_backward(model, logb);
    StatePath sp;
    sp.posterior.resize(returns.size());
    sp.labels.resize(returns.size());
    for (std::size_t t = 0; t < returns.size(); ++t) {
        sp.posterior[t] = fb.gamma[t][0];
        sp.labels[t] = sp.posterior[t] >= 0.5 ? 1 : 2;
    }
    return sp;
}

struct Interval {
    std::size_t start = 0, end = 0; // inclusive indices
};

namespace detail {

inline std::vector<Interval> state1_runs(const std::vector<int>& labels,
                                         std::size_t min_len) {
    std::vector<Interval> runs;
    std::size_t i = 0;
    const std::size_t n = labels.size();
    while (i < n) {
        if (labels[i] == 1) {
            std::size_t j = i;
            while (j + 1 < n && labels[j + 1] == 1) ++j;
            if (j - i + 1 >= min_len) runs.push_back({i, j});
            i = j + 1;
        } else {
            ++i;
        }
    }
    return runs;
}

} // namespace detail

// regime-1 intervals -> the complementary regime-2 intervals over [0, n)
inline std::vector<Interval> complement_intervals(const std::vector<Interval>& r1,
                                                  std::size_t n) {
    std::vector<Interval> out;
    std::size_t pos = 0;
    for (const auto& iv : r1) {
        if (iv.start > pos) out.push_back({pos, iv.start - 1});
        pos = iv.end + 1;
    }
    if (pos < n) out.push_back({pos, n - 1});
    return out;
}

// Joint high-variation intervals across two assets.  Runs shorter than
// min_len are dropped per path; remaining runs pair up when their entries
// lie within max_lag of each other.  A matched pair becomes one interval
// [earlier entry, later exit]; unmatched runs are discarded.
inline std::vector<Interval> align_regimes(const StatePath& path_a,
                                           const StatePath& path_b,
                                           std::size_t min_len = 26,
                                           std::size_t max_lag = 52) {
    if (path_a.labels.size() != path_b.labels.size())
        throw input_error("align_regimes: length mismatch");
    const auto ra = detail::state1_runs(path_a.labels, min_len);
    const auto rb = detail::state1_runs(path_b.labels, min_len);
    std::vector<Interval> out;
    std::size_t i = 0, j = 0;
    while (i < ra.size() && j < rb.size()) {
        const auto& a = ra[i];
        const auto& b = rb[j];
        const std::size_t lag = a.start > b.start ? a.start - b.start : b.start - a.start;
        if (lag <= max_lag) {
            out.push_back({std::min(a.start, b.start), std::max(a.end, b.end)});
            ++i;
            ++j;
        } else if (a.start < b.start) {
            ++i;
        } else {
            ++j;
        }
    }
    return out;
}

} // namespace stablevar::regimes
