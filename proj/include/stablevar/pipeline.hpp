#pragma once

// End-to-end batch pipeline: ingest -> log returns -> rolling dependence ->
// per-asset regime segmentation -> joint regime alignment -> per-regime VAR
// fits (full and diagonal) -> residual diagnostics (five GoF tests, coverage
// rates, auto-covariation) -> Monte Carlo product-series quantile fans.
// Every intermediate is written as CSV next to a run manifest; the whole run
// is a pure function of (input files, config, seed).

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stablevar/common.hpp"
#include "stablevar/dependence.hpp"
#include "stablevar/gof.hpp"
#include "stablevar/regimes.hpp"
#include "stablevar/scenario.hpp"
#include "stablevar/series.hpp"
#include "stablevar/stable.hpp"
#include "stablevar/var.hpp"

namespace stablevar::pipeline {

struct PipelineConfig {
    std::string csv_a, csv_b;
    std::string name_a = "cu_usd";
    std::string name_b = "usdpln";
    std::string outdir = "out";

    std::size_t corr_window = 104;        // trailing window (weeks)
    std::size_t corr_window_regime = 208; // symmetric, regime-masked window
    double p_covariation = 1.5;

    double hmm_tol = 1e-6;
    int hmm_max_iter = 200;
    std::size_t min_len = 26;
    std::size_t max_lag = 52;

    std::size_t n_boot = 999;
    std::size_t n_paths = 100000;
    std::size_t horizon = 0; // 0: simulate over the regime window
    std::uint64_t seed = 12345;
    std::vector<double> levels{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    bool emit_svg = true;

    void validate() const {
        if (csv_a.empty() || csv_b.empty())
            throw config_error("config: csv_a and csv_b are required");
        if (outdir.empty()) throw config_error("config: outdir is required");
        if (corr_window < 8 || corr_window_regime < 8)
            throw config_error("config: correlation windows must be >= 8");
        if (!(p_covariation >= 1.0 && p_covariation < 2.0))
            throw config_error("config: p_covariation must be in [1, 2)");
        if (!(hmm_tol > 0)) throw config_error("config: hmm_tol must be > 0");
        if (hmm_max_iter < 1) throw config_error("config: hmm_max_iter must be >= 1");
        if (n_boot < 100) throw config_error("config: n_boot must be >= 100");
        if (n_paths < 1000) throw config_error("config: n_paths must be >= 1000");
        if (levels.empty()) throw config_error("config: levels must be nonempty");
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (!(levels[i] > 0 && levels[i] < 1))
                throw config_error("config: levels must lie in (0, 1)");
            if (i > 0 && !(levels[i] > levels[i - 1]))
                throw config_error("config: levels must be strictly increasing");
        }
    }
};

struct RunSummary {
    std::size_t n_rows = 0;
    std::size_t n_regime1_intervals = 0;
    std::size_t var_fits = 0;
    std::size_t gof_groups = 0;
    std::vector<std::string> files;
};

namespace detail {

struct Manifest {
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::vector<std::pair<std::string, std::size_t>> files; // name -> data rows
    std::map<std::string, std::size_t> counts;
    std::string status = "OK";

    void write(const std::string& path) const {
        std::ofstream out(path);
        out << "stablevar run manifest\n";
        out << "status: " << status << "\n";
        out << "version: " << version << "\n\n";
        out << "config:\n";
        for (const auto& [k, v] : config_echo) out << "  " << k << " = " << v << "\n";
        out << "\ncounts:\n";
        for (const auto& [k, v] : counts) out << "  " << k << ": " << v << "\n";
        out << "\nfiles:\n";
        for (const auto& [k, v] : files) out << "  " << k << ": " << v << "\n";
    }
};

inline std::string fmt(double v) { return io::format_value(v); }

} // namespace detail

inline RunSummary run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(cfg.outdir);
    const auto path_of = [&](const std::string& name) {
        return (fs::path(cfg.outdir) / name).string();
    };

    detail::Manifest man;
    RunSummary summary;
    {
        std::ostringstream lv;
        for (std::size_t i = 0; i < cfg.levels.size(); ++i)
            lv << (i ? "," : "") << detail::fmt(cfg.levels[i]);
        // outdir is deliberately not echoed: a run is a pure function of the
        // inputs, parameters and seed, not of where its files land
        man.config_echo = {{"csv_a", cfg.csv_a},
                           {"csv_b", cfg.csv_b},
                           {"name_a", cfg.name_a},
                           {"name_b", cfg.name_b},
                           {"corr_window", std::to_string(cfg.corr_window)},
                           {"corr_window_regime", std::to_string(cfg.corr_window_regime)},
                           {"p_covariation", detail::fmt(cfg.p_covariation)},
                           {"hmm_tol", detail::fmt(cfg.hmm_tol)},
                           {"hmm_max_iter", std::to_string(cfg.hmm_max_iter)},
                           {"min_len", std::to_string(cfg.min_len)},
                           {"max_lag", std::to_string(cfg.max_lag)},
                           {"n_boot", std::to_string(cfg.n_boot)},
                           {"n_paths", std::to_string(cfg.n_paths)},
                           {"horizon", std::to_string(cfg.horizon)},
                           {"seed", std::to_string(cfg.seed)},
                           {"levels", lv.str()},
                           {"emit_svg", cfg.emit_svg ? "true" : "false"}};
    }

    std::string stage = "ingest";
    const auto fail = [&](const std::string& what) {
        man.status = "FAILED " + stage + ": " + what;
        man.write(path_of("manifest.txt"));
    };

    try {
        // -- ingest ----------------------------------------------------------
        const auto ra = io::read_series_csv(cfg.csv_a, cfg.name_a);
        const auto rb = io::read_series_csv(cfg.csv_b, cfg.name_b);
        const auto joined = io::inner_join(ra.frame, rb.frame);
        const io::SeriesFrame& prices = joined.frame;
        summary.n_rows = prices.rows();
        man.counts["dropped_dates_a"] = joined.dropped_left;
        man.counts["dropped_dates_b"] = joined.dropped_right;
        io::write_frame_csv(prices, path_of("frame.csv"));
        man.files.emplace_back("frame.csv", prices.rows());

        // -- log returns -----------------------------------------------------
        stage = "log_returns";
        const io::SeriesFrame rets = io::log_returns(prices);
        io::write_frame_csv(rets, path_of("returns.csv"));
        man.files.emplace_back("returns.csv", rets.rows());
        const auto& xa = rets.col(cfg.name_a);
        const auto& xb = rets.col(cfg.name_b);

        // -- rolling dependence (trailing) ------------------------------------
        stage = "rolling_dependence";
        const auto corr = dependence::rolling_dependence(xa, xb, rets.dates,
                                                         cfg.corr_window, false);
        {
            std::ofstream out(path_of("corr.csv"));
            out << "date,pearson,spearman,kendall\n";
            for (const auto& r : corr)
                out << r.date << "," << detail::fmt(r.pearson) << ","
                    << detail::fmt(r.spearman) << "," << detail::fmt(r.kendall) << "\n";
            man.files.emplace_back("corr.csv", corr.size());
        }

        // -- regime segmentation ----------------------------------------------
        stage = "regimes";
        regimes::EmOptions em_opt;
        em_opt.tol = cfg.hmm_tol;
        em_opt.max_iter = cfg.hmm_max_iter;
        const auto hmm_a = regimes::em_fit(xa, nullptr, em_opt);
        const auto hmm_b = regimes::em_fit(xb, nullptr, em_opt);
        const auto path_a = regimes::classify(hmm_a, xa);
        const auto path_b = regimes::classify(hmm_b, xb);
        const auto write_states = [&](const std::string& name,
                                      const regimes::StatePath& sp) {
            const std::string file = "states_" + name + ".csv";
            std::ofstream out(path_of(file));
            out << "date,posterior,label\n";
            for (std::size_t i = 0; i < sp.labels.size(); ++i)
                out << rets.dates[i] << "," << detail::fmt(sp.posterior[i]) << ","
                    << sp.labels[i] << "\n";
            man.files.emplace_back(file, sp.labels.size());
        };
        write_states(cfg.name_a, path_a);
        write_states(cfg.name_b, path_b);

        stage = "align_regimes";
        const auto r1 = regimes::align_regimes(path_a, path_b, cfg.min_len, cfg.max_lag);
        if (r1.empty())
            throw numeric_error("no joint high-variation regime found");
        const auto r2 = regimes::complement_intervals(r1, rets.rows());
        summary.n_regime1_intervals = r1.size();
        man.counts["regimes"] = 2;
        {
            std::ofstream out(path_of("regimes.csv"));
            out << "start_date,end_date\n";
            for (const auto& iv : r1)
                out << rets.dates[iv.start] << "," << rets.dates[iv.end] << "\n";
            man.files.emplace_back("regimes.csv", r1.size());
        }
        std::vector<int> joint_labels(rets.rows(), 2);
        for (const auto& iv : r1)
            for (std::size_t i = iv.start; i <= iv.end; ++i) joint_labels[i] = 1;
        {
            std::ofstream out(path_of("joint_regimes.csv"));
            out << "date,label\n";
            for (std::size_t i = 0; i < joint_labels.size(); ++i)
                out << rets.dates[i] << "," << joint_labels[i] << "\n";
            man.files.emplace_back("joint_regimes.csv", joint_labels.size());
        }

        // -- regime-masked symmetric dependence --------------------------------
        stage = "rolling_dependence_by_regime";
        if (cfg.corr_window_regime <= rets.rows()) {
            const auto corr2 = dependence::rolling_dependence(
                xa, xb, rets.dates, cfg.corr_window_regime, true, &joint_labels);
            std::ofstream out(path_of("corr_by_regime.csv"));
            out << "date,pearson,spearman,kendall\n";
            for (const auto& r : corr2)
                out << r.date << "," << detail::fmt(r.pearson) << ","
                    << detail::fmt(r.spearman) << "," << detail::fmt(r.kendall) << "\n";
            man.files.emplace_back("corr_by_regime.csv", corr2.size());
        }

        // -- per-regime VAR fits ------------------------------------------------
        stage = "var_fit";
        struct RegimeData {
            std::string tag;
            std::vector<regimes::Interval> intervals;
        };
        const std::array<RegimeData, 2> regime_data{
            RegimeData{"regime1", r1}, RegimeData{"regime2", r2}};
        const std::array<var::Constraint, 2> variants{var::Constraint::full,
                                                      var::Constraint::diagonal};

        struct FitRec {
            var::VarModel model;
            std::array<std::vector<double>, 2> resid;
            std::vector<std::string> resid_dates;
        };
        std::map<std::string, FitRec> fits; // key: tag_constraint

        for (const auto& rd : regime_data) {
            std::vector<var::Segment> segs;
            for (const auto& iv : rd.intervals) {
                if (iv.end - iv.start + 1 < 2) continue;
                segs.push_back(var::Segment{
                    std::span<const double>(xa).subspan(iv.start, iv.end - iv.start + 1),
                    std::span<const double>(xb).subspan(iv.start, iv.end - iv.start + 1)});
            }
            for (const auto v : variants) {
                var::VarModel m = var::fit_segments(segs, v, cfg.p_covariation, rd.tag);
                m.meta.columns = {cfg.name_a, cfg.name_b};
                m.meta.date_from = rets.dates[rd.intervals.front().start];
                m.meta.date_to = rets.dates[rd.intervals.back().end];

                FitRec rec;
                for (const auto& iv : rd.intervals) {
                    if (iv.end - iv.start + 1 < 2) continue;
                    auto rr = var::residuals(
                        m, std::span<const double>(xa).subspan(iv.start, iv.end - iv.start + 1),
                        std::span<const double>(xb).subspan(iv.start, iv.end - iv.start + 1));
                    rec.resid[0].insert(rec.resid[0].end(), rr[0].begin(), rr[0].end());
                    rec.resid[1].insert(rec.resid[1].end(), rr[1].begin(), rr[1].end());
                    for (std::size_t i = iv.start + 1; i <= iv.end; ++i)
                        rec.resid_dates.push_back(rets.dates[i]);
                }
                rec.model = m;

                const std::string key = rd.tag + "_" + var::to_string(v);
                const std::string model_file = "model_" + key + ".json";
                std::ofstream out(path_of(model_file));
                out << var::to_json(m).dump(2) << "\n";
                man.files.emplace_back(model_file, 1);

                const std::string resid_file = "residuals_" + key + ".csv";
                std::ofstream rout(path_of(resid_file));
                rout << "date," << cfg.name_a << "," << cfg.name_b << "\n";
                for (std::size_t i = 0; i < rec.resid_dates.size(); ++i)
                    rout << rec.resid_dates[i] << "," << detail::fmt(rec.resid[0][i])
                         << "," << detail::fmt(rec.resid[1][i]) << "\n";
                man.files.emplace_back(resid_file, rec.resid_dates.size());

                fits.emplace(key, std::move(rec));
                ++summary.var_fits;
            }
        }
        man.counts["var_fits"] = summary.var_fits;

        // -- GoF + coverage -----------------------------------------------------
        stage = "gof";
        {
            std::ofstream out(path_of("gof.csv"));
            out << "regime,constraint,series,model,T1,T2,T3,T4,T5";
            for (double l : gof::default_levels) {
                char buf[16];
                std::snprintf(buf, sizeof buf, ",c%02d", static_cast<int>(l * 100 + 0.5));
                out << buf;
            }
            out << "\n";
            std::size_t rows = 0;
            std::size_t gof_id = 0;
            for (const auto& rd : regime_data)
                for (const auto v : variants) {
                    const std::string key = rd.tag + "_" + var::to_string(v);
                    const auto& rec = fits.at(key);
                    for (int comp = 0; comp < 2; ++comp) {
                        const auto& series = rec.resid[comp];
                        const std::string series_name =
                            comp == 0 ? cfg.name_a : cfg.name_b;
                        for (const auto fam :
                             {gof::NullFamily::gaussian, gof::NullFamily::stable}) {
                            const auto reports = gof::mc_pvalue(
                                series, fam, cfg.n_boot,
                                stablevar::detail::substream_seed(cfg.seed,
                                                                  1000 + gof_id));
                            const auto cov = gof::coverage_rates(
                                series, reports[0].fitted_null_params,
                                gof::default_levels);
                            out << rd.tag << "," << var::to_string(v) << ","
                                << series_name << "," << gof::to_string(fam);
                            for (const auto& rep : reports)
                                out << "," << detail::fmt(rep.p_value);
                            for (double rate : cov.rates)
                                out << "," << detail::fmt(rate);
                            out << "\n";
                            ++rows;
                            ++gof_id;
                        }
                        ++summary.gof_groups;
                    }
                }
            man.files.emplace_back("gof.csv", rows);
        }
        man.counts["gof_groups"] = summary.gof_groups;

        // -- residual auto-covariation diagnostics --------------------------------
        stage = "auto_covariation";
        for (const auto& rd : regime_data)
            for (const auto v : variants) {
                const std::string key = rd.tag + "_" + var::to_string(v);
                const auto& rec = fits.at(key);
                const std::size_t max_lag =
                    std::min<std::size_t>(20, rec.resid[0].size() / 4 - 1);
                const auto ac1 =
                    dependence::auto_covariation(rec.resid[0], max_lag, cfg.p_covariation);
                const auto ac2 =
                    dependence::auto_covariation(rec.resid[1], max_lag, cfg.p_covariation);
                const std::string file = "autocov_" + key + ".csv";
                std::ofstream out(path_of(file));
                out << "lag," << cfg.name_a << "," << cfg.name_b << "\n";
                for (std::size_t h = 0; h <= max_lag; ++h)
                    out << h << "," << detail::fmt(ac1[h]) << "," << detail::fmt(ac2[h])
                        << "\n";
                man.files.emplace_back(file, max_lag + 1);
            }

        // -- Monte Carlo fans ------------------------------------------------------
        stage = "simulate";
        std::size_t fan_id = 0;
        for (std::size_t ri = 0; ri < 2; ++ri) {
            const auto& rd = regime_data[ri];
            // representative window: the longest interval of the regime
            regimes::Interval win = rd.intervals.front();
            for (const auto& iv : rd.intervals)
                if (iv.end - iv.start > win.end - win.start) win = iv;
            const std::size_t steps =
                cfg.horizon > 0 ? cfg.horizon
                                : (win.end > win.start ? win.end - win.start : 1);
            // price index i+1 carries the date of return index i
            const double base_a = prices.columns[0][win.start + 1];
            const double base_b = prices.columns[1][win.start + 1];
            const std::array<double, 2> x0{xa[win.start], xb[win.start]};

            scenario::QuantileFan fan_prod_full, fan_prod_diag;
            for (const auto v : variants) {
                const std::string key = rd.tag + "_" + var::to_string(v);
                const auto& model = fits.at(key).model;
                std::vector<std::vector<double>> pa(cfg.n_paths), pb(cfg.n_paths),
                    pp(cfg.n_paths);
                var::simulate_visit(
                    model, steps, cfg.n_paths, x0,
                    stablevar::detail::substream_seed(cfg.seed, 2000 + fan_id),
                    [&](std::size_t k, const std::vector<std::array<double, 2>>& path) {
                        std::vector<double> r1(path.size()), r2(path.size());
                        for (std::size_t t = 0; t < path.size(); ++t) {
                            r1[t] = path[t][0];
                            r2[t] = path[t][1];
                        }
                        pa[k] = scenario::returns_to_prices(r1, base_a).values;
                        pb[k] = scenario::returns_to_prices(r2, base_b).values;
                        pp[k].resize(path.size());
                        for (std::size_t t = 0; t < path.size(); ++t)
                            pp[k][t] = pa[k][t] * pb[k][t];
                    });
                const auto write_fan = [&](const std::string& series,
                                           const std::vector<std::vector<double>>& paths,
                                           double base) {
                    const auto fan = scenario::quantile_fan(paths, cfg.levels, base);
                    const std::string file = "fan_" + key + "_" + series + ".csv";
                    std::ofstream out(path_of(file));
                    out << "date";
                    for (double l : cfg.levels) {
                        char buf[16];
                        std::snprintf(buf, sizeof buf, ",q%02d",
                                      static_cast<int>(l * 100 + 0.5));
                        out << buf;
                    }
                    out << "\n";
                    for (std::size_t t = 0; t < fan.horizon; ++t) {
                        const std::size_t ridx = win.start + 1 + t;
                        out << (ridx < rets.rows() ? rets.dates[ridx]
                                                   : "step" + std::to_string(t + 1));
                        for (std::size_t li = 0; li < fan.levels.size(); ++li)
                            out << "," << detail::fmt(fan.values[li][t]);
                        out << "\n";
                    }
                    man.files.emplace_back(file, fan.horizon);
                    return fan;
                };
                write_fan(cfg.name_a, pa, base_a);
                write_fan(cfg.name_b, pb, base_b);
                const auto fp = write_fan("product", pp, base_a * base_b);
                if (v == var::Constraint::full) fan_prod_full = fp;
                else fan_prod_diag = fp;
                ++fan_id;
            }

            if (cfg.emit_svg) {
                std::vector<double> realized;
                for (std::size_t t = 0; t < fan_prod_full.horizon; ++t) {
                    const std::size_t pidx = win.start + 2 + t;
                    if (pidx < prices.rows())
                        realized.push_back(prices.columns[0][pidx] *
                                           prices.columns[1][pidx]);
                }
                const std::string file = "fan_" + rd.tag + ".svg";
                std::ofstream out(path_of(file));
                out << scenario::fan_svg(fan_prod_full, realized,
                                         "product price fan, " + rd.tag,
                                         &fan_prod_diag);
                man.files.emplace_back(file, 1);
            }
        }

        stage = "manifest";
        man.write(path_of("manifest.txt"));
        for (const auto& entry : man.files) summary.files.push_back(entry.first);
    } catch (const input_error& e) {
        fail(e.what());
        throw input_error("stage " + stage + ": " + e.what());
    } catch (const config_error& e) {
        fail(e.what());
        throw config_error("stage " + stage + ": " + e.what());
    } catch (const stablevar::error& e) {
        fail(e.what());
        throw numeric_error("stage " + stage + ": " + e.what());
    } catch (const std::exception& e) {
        fail(e.what());
        throw numeric_error("stage " + stage + ": " + e.what());
    }
    return summary;
}

} // namespace stablevar::pipeline
