// stablevar: batch CLI for regime-switching alpha-stable VAR market risk
// analysis.  Subcommands mirror the pipeline stages; `run` executes the whole
// chain from two price CSVs to quantile fans and a manifest.

#include <array>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stablevar/pipeline.hpp"

namespace sv = stablevar;

namespace {

std::vector<double> parse_levels(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

struct IntervalFile {
    std::vector<std::pair<std::string, std::string>> spans; // start,end dates
};

IntervalFile read_intervals(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sv::input_error("cannot open intervals file: " + path);
    std::string line;
    std::getline(in, line); // header
    IntervalFile f;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = line.find(',');
        if (c == std::string::npos)
            throw sv::input_error(path + ": expected start_date,end_date rows");
        f.spans.emplace_back(line.substr(0, c), line.substr(c + 1));
    }
    return f;
}

// rows of `rets` selected by regime intervals (regime 2 = complement)
std::vector<sv::regimes::Interval> select_intervals(const sv::io::SeriesFrame& rets,
                                                    const IntervalFile& iv, int regime) {
    auto index_of = [&](const std::string& d, bool lower) {
        const auto& ds = rets.dates;
        auto it = lower ? std::lower_bound(ds.begin(), ds.end(), d)
                        : std::upper_bound(ds.begin(), ds.end(), d);
        if (!lower && it != ds.begin()) --it;
        if (it == ds.end()) throw sv::input_error("date out of range: " + d);
        return static_cast<std::size_t>(it - ds.begin());
    };
    std::vector<sv::regimes::Interval> r1;
    for (const auto& [s, e] : iv.spans)
        r1.push_back({index_of(s, true), index_of(e, false)});
    if (regime == 1) return r1;
    return sv::regimes::complement_intervals(r1, rets.rows());
}

std::vector<sv::var::Segment> to_segments(const sv::io::SeriesFrame& rets,
                                          const std::string& col_a,
                                          const std::string& col_b,
                                          const std::vector<sv::regimes::Interval>& ivs) {
    std::vector<sv::var::Segment> segs;
    const auto& xa = rets.col(col_a);
    const auto& xb = rets.col(col_b);
    for (const auto& iv : ivs) {
        const std::size_t len = iv.end - iv.start + 1;
        if (len < 2) continue;
        segs.push_back({std::span<const double>(xa).subspan(iv.start, len),
                        std::span<const double>(xb).subspan(iv.start, len)});
    }
    if (segs.empty()) throw sv::input_error("no usable data in the selected window");
    return segs;
}

int guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const sv::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 4;
    } catch (const sv::input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const sv::error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

sv::var::VarModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sv::input_error("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw sv::input_error(path + ": bad model JSON: " + e.what());
    }
    return sv::var::from_json(j);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"regime-switching alpha-stable VAR toolkit"};
    app.require_subcommand(1);

    // ---- ingest -------------------------------------------------------------
    std::string in_a, in_b, name_a = "cu_usd", name_b = "usdpln", out_path;
    auto* ing = app.add_subcommand("ingest", "join two date,value price CSVs");
    ing->add_option("--a", in_a, "first asset CSV")->required();
    ing->add_option("--b", in_b, "second asset CSV")->required();
    ing->add_option("--name-a", name_a, "first column name");
    ing->add_option("--name-b", name_b, "second column name");
    ing->add_option("--out", out_path, "output frame CSV")->required();

    // ---- returns ------------------------------------------------------------
    std::string ret_in, ret_out;
    auto* ret = app.add_subcommand("returns", "log returns of a price frame");
    ret->add_option("--in", ret_in, "price frame CSV")->required();
    ret->add_option("--out", ret_out, "output returns CSV")->required();

    // ---- corr ---------------------------------------------------------------
    std::string corr_in, corr_out, corr_mask;
    std::size_t corr_window = 104;
    bool corr_symmetric = false;
    auto* corr = app.add_subcommand("corr", "rolling correlation coefficients");
    corr->add_option("--in", corr_in, "returns frame CSV (2 columns)")->required();
    corr->add_option("--window", corr_window, "window length in observations");
    corr->add_flag("--symmetric", corr_symmetric, "center windows instead of trailing");
    corr->add_option("--mask", corr_mask,
                     "date,label CSV; windows spanning two labels are omitted");
    corr->add_option("--out", corr_out, "output CSV")->required();

    // ---- regimes ------------------------------------------------------------
    std::string reg_in, reg_outdir;
    double reg_tol = 1e-6;
    int reg_max_iter = 200;
    std::size_t reg_min_len = 26, reg_max_lag = 52;
    auto* reg = app.add_subcommand("regimes",
                                   "two-state stable HMM segmentation and alignment");
    reg->add_option("--in", reg_in, "returns frame CSV (2 columns)")->required();
    reg->add_option("--outdir", reg_outdir, "output directory")->required();
    reg->add_option("--tol", reg_tol, "EM stopping tolerance");
    reg->add_option("--max-iter", reg_max_iter, "EM iteration cap");
    reg->add_option("--min-len", reg_min_len, "minimum regime run length");
    reg->add_option("--max-lag", reg_max_lag, "maximum cross-asset entry lag");

    // ---- fit ----------------------------------------------------------------
    std::string fit_in, fit_out, fit_constraint = "full", fit_tag, fit_from, fit_to,
                fit_segments_path;
    int fit_regime = 1;
    double fit_p = 1.5;
    auto* fit = app.add_subcommand("fit", "fit the VAR(1) model on a window");
    fit->add_option("--returns", fit_in, "returns frame CSV (2 columns)")->required();
    fit->add_option("--constraint", fit_constraint, "full or diagonal");
    fit->add_option("--p", fit_p, "covariation exponent, [1, 2)");
    fit->add_option("--tag", fit_tag, "regime tag stored in the model");
    fit->add_option("--from", fit_from, "window start date");
    fit->add_option("--to", fit_to, "window end date");
    fit->add_option("--segments", fit_segments_path,
                    "regimes.csv with regime-1 intervals");
    fit->add_option("--regime", fit_regime, "1 = intervals, 2 = complement");
    fit->add_option("--out", fit_out, "output model JSON")->required();

    // ---- gof ----------------------------------------------------------------
    std::string gof_model, gof_in, gof_out, gof_segments_path, gof_from, gof_to;
    int gof_regime = 1;
    std::size_t gof_nboot = 999;
    std::uint64_t gof_seed = 12345;
    auto* gofc = app.add_subcommand("gof",
                                    "goodness-of-fit tests on model residuals");
    gofc->add_option("--model", gof_model, "model JSON")->required();
    gofc->add_option("--returns", gof_in, "returns frame CSV")->required();
    gofc->add_option("--from", gof_from, "window start date");
    gofc->add_option("--to", gof_to, "window end date");
    gofc->add_option("--segments", gof_segments_path, "regimes.csv intervals");
    gofc->add_option("--regime", gof_regime, "1 = intervals, 2 = complement");
    gofc->add_option("--nboot", gof_nboot, "bootstrap replicates");
    gofc->add_option("--seed", gof_seed, "bootstrap seed");
    gofc->add_option("--out", gof_out, "output CSV")->required();

    // ---- simulate -------------------------------------------------------------
    std::string sim_model, sim_out, sim_x0 = "0,0";
    std::size_t sim_h = 52, sim_paths = 1000;
    std::uint64_t sim_seed = 12345;
    auto* sim = app.add_subcommand("simulate", "simulate VAR(1) return paths");
    sim->add_option("--model", sim_model, "model JSON")->required();
    sim->add_option("--horizon", sim_h, "steps per path");
    sim->add_option("--paths", sim_paths, "number of paths");
    sim->add_option("--seed", sim_seed, "simulation seed");
    sim->add_option("--x0", sim_x0, "initial return vector 'r1,r2'");
    sim->add_option("--out", sim_out, "output CSV (path,step,x1,x2)")->required();

    // ---- fan ------------------------------------------------------------------
    std::string fan_model, fan_prefix, fan_levels_str = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9",
                fan_svg_path, fan_realized;
    double fan_base_a = 0, fan_base_b = 0;
    std::size_t fan_h = 52, fan_paths = 100000;
    std::uint64_t fan_seed = 12345;
    std::string fan_x0 = "0,0";
    auto* fan = app.add_subcommand(
        "fan", "Monte Carlo quantile fans for both assets and their product");
    fan->add_option("--model", fan_model, "model JSON")->required();
    fan->add_option("--base-a", fan_base_a, "starting price, first asset")->required();
    fan->add_option("--base-b", fan_base_b, "starting price, second asset")->required();
    fan->add_option("--horizon", fan_h, "steps");
    fan->add_option("--paths", fan_paths, "number of paths");
    fan->add_option("--seed", fan_seed, "simulation seed");
    fan->add_option("--x0", fan_x0, "initial return vector 'r1,r2'");
    fan->add_option("--levels", fan_levels_str, "comma-separated quantile levels");
    fan->add_option("--out-prefix", fan_prefix, "output prefix for fan CSVs")->required();
    fan->add_option("--svg", fan_svg_path, "also write an SVG chart of the product fan");
    fan->add_option("--realized", fan_realized,
                    "price frame CSV to overlay in the SVG");

    // ---- run --------------------------------------------------------------------
    sv::pipeline::PipelineConfig cfg;
    std::string run_levels_str;
    auto* run = app.add_subcommand("run", "full pipeline");
    run->set_config("--config", "", "flat key=value config file");
    run->add_option("--csv-a", cfg.csv_a, "first asset date,value CSV");
    run->add_option("--csv-b", cfg.csv_b, "second asset date,value CSV");
    run->add_option("--name-a", cfg.name_a, "first column name");
    run->add_option("--name-b", cfg.name_b, "second column name");
    run->add_option("--outdir", cfg.outdir, "output directory");
    run->add_option("--corr-window", cfg.corr_window, "trailing correlation window");
    run->add_option("--corr-window-regime", cfg.corr_window_regime,
                    "symmetric regime-masked correlation window");
    run->add_option("--p", cfg.p_covariation, "covariation exponent");
    run->add_option("--hmm-tol", cfg.hmm_tol, "EM stopping tolerance");
    run->add_option("--hmm-max-iter", cfg.hmm_max_iter, "EM iteration cap");
    run->add_option("--min-len", cfg.min_len, "minimum regime run length");
    run->add_option("--max-lag", cfg.max_lag, "maximum cross-asset entry lag");
    run->add_option("--nboot", cfg.n_boot, "bootstrap replicates");
    run->add_option("--paths", cfg.n_paths, "Monte Carlo paths");
    run->add_option("--horizon", cfg.horizon, "simulation steps (0 = regime window)");
    run->add_option("--seed", cfg.seed, "master seed");
    run->add_option("--levels", run_levels_str, "comma-separated quantile levels");
    run->add_flag("--svg,!--no-svg", cfg.emit_svg, "emit SVG fan charts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 4;
    }

    if (ing->parsed())
        return guarded([&] {
            const auto a = sv::io::read_series_csv(in_a, name_a);
            const auto b = sv::io::read_series_csv(in_b, name_b);
            if (a.was_unsorted || b.was_unsorted)
                std::cerr << "warning: input was unsorted; rows were reordered\n";
            const auto j = sv::io::inner_join(a.frame, b.frame);
            sv::io::write_frame_csv(j.frame, out_path);
            std::cout << "rows: " << j.frame.rows() << "  dropped: " << j.dropped_left
                      << " (" << name_a << "), " << j.dropped_right << " (" << name_b
                      << ")\n";
        });

    if (ret->parsed())
        return guarded([&] {
            const auto f = sv::io::read_frame_csv(ret_in, sv::io::Kind::prices);
            sv::io::write_frame_csv(sv::io::log_returns(f), ret_out);
        });

    if (corr->parsed())
        return guarded([&] {
            const auto f = sv::io::read_frame_csv(corr_in, sv::io::Kind::log_returns);
            if (f.columns.size() != 2)
                throw sv::input_error("corr: need exactly 2 columns");
            std::vector<int> mask;
            if (!corr_mask.empty()) {
                const auto mf = sv::io::read_frame_csv(corr_mask, sv::io::Kind::log_returns);
                if (mf.rows() != f.rows())
                    throw sv::input_error("corr: mask length mismatch");
                for (double v : mf.columns[0]) mask.push_back(static_cast<int>(v));
            }
            const auto reps = sv::dependence::rolling_dependence(
                f.columns[0], f.columns[1], f.dates, corr_window, corr_symmetric,
                mask.empty() ? nullptr : &mask);
            std::ofstream out(corr_out);
            if (!out) throw sv::input_error("cannot write " + corr_out);
            out << "date,pearson,spearman,kendall\n";
            for (const auto& r : reps)
                out << r.date << "," << sv::io::format_value(r.pearson) << ","
                    << sv::io::format_value(r.spearman) << ","
                    << sv::io::format_value(r.kendall) << "\n";
        });

    if (reg->parsed())
        return guarded([&] {
            const auto f = sv::io::read_frame_csv(reg_in, sv::io::Kind::log_returns);
            if (f.columns.size() != 2)
                throw sv::input_error("regimes: need exactly 2 columns");
            std::filesystem::create_directories(reg_outdir);
            sv::regimes::EmOptions opt;
            opt.tol = reg_tol;
            opt.max_iter = reg_max_iter;
            std::array<sv::regimes::StatePath, 2> paths;
            for (int c = 0; c < 2; ++c) {
                const auto m = sv::regimes::em_fit(f.columns[c], nullptr, opt);
                paths[c] = sv::regimes::classify(m, f.columns[c]);
                nlohmann::json j;
                j["loglik"] = m.loglik;
                j["iterations"] = m.iterations;
                j["converged"] = m.converged;
                j["transition"] = {{m.transition[0][0], m.transition[0][1]},
                                   {m.transition[1][0], m.transition[1][1]}};
                j["emission"] = nlohmann::json::array();
                for (const auto& e : m.emission)
                    j["emission"].push_back({{"alpha", e.alpha}, {"sigma", e.sigma}});
                std::ofstream jo(reg_outdir + "/hmm_" + f.names[c] + ".json");
                jo << j.dump(2) << "\n";
                std::ofstream so(reg_outdir + "/states_" + f.names[c] + ".csv");
                so << "date,posterior,label\n";
                for (std::size_t i = 0; i < f.rows(); ++i)
                    so << f.dates[i] << ","
                       << sv::io::format_value(paths[c].posterior[i]) << ","
                       << paths[c].labels[i] << "\n";
            }
            const auto ivs =
                sv::regimes::align_regimes(paths[0], paths[1], reg_min_len, reg_max_lag);
            std::ofstream ro(reg_outdir + "/regimes.csv");
            ro << "start_date,end_date\n";
            for (const auto& iv : ivs)
                ro << f.dates[iv.start] << "," << f.dates[iv.end] << "\n";
            std::vector<int> joint(f.rows(), 2);
            for (const auto& iv : ivs)
                for (std::size_t i = iv.start; i <= iv.end; ++i) joint[i] = 1;
            std::ofstream jo(reg_outdir + "/joint_regimes.csv");
            jo << "date,label\n";
            for (std::size_t i = 0; i < f.rows(); ++i)
                jo << f.dates[i] << "," << joint[i] << "\n";
            std::cout << "joint regime-1 intervals: " << ivs.size() << "\n";
        });

    auto window_intervals = [](const sv::io::SeriesFrame& f, const std::string& from,
                               const std::string& to, const std::string& segments,
                               int regime) {
        std::vector<sv::regimes::Interval> ivs;
        if (!segments.empty()) {
            ivs = select_intervals(f, read_intervals(segments), regime);
        } else {
            std::size_t s = 0, e = f.rows() - 1;
            if (!from.empty())
                s = std::lower_bound(f.dates.begin(), f.dates.end(), from) -
                    f.dates.begin();
            if (!to.empty())
                e = std::upper_bound(f.dates.begin(), f.dates.end(), to) -
                    f.dates.begin() - 1;
            if (s >= f.rows() || e >= f.rows() || e < s)
                throw sv::input_error("empty date window");
            ivs.push_back({s, e});
        }
        return ivs;
    };

    if (fit->parsed())
        return guarded([&] {
            const auto f = sv::io::read_frame_csv(fit_in, sv::io::Kind::log_returns);
            if (f.columns.size() != 2)
                throw sv::input_error("fit: need exactly 2 columns");
            const auto ivs =
                window_intervals(f, fit_from, fit_to, fit_segments_path, fit_regime);
            const auto segs = to_segments(f, f.names[0], f.names[1], ivs);
            auto m = sv::var::fit_segments(
                segs, sv::var::constraint_from_string(fit_constraint), fit_p, fit_tag);
            m.meta.columns = {f.names[0], f.names[1]};
            m.meta.date_from = f.dates[ivs.front().start];
            m.meta.date_to = f.dates[ivs.back().end];
            std::ofstream out(fit_out);
            if (!out) throw sv::input_error("cannot write " + fit_out);
            out << sv::var::to_json(m).dump(2) << "\n";
            std::cout << "theta: [" << m.theta(0, 0) << ", " << m.theta(0, 1) << "; "
                      << m.theta(1, 0) << ", " << m.theta(1, 1) << "]\n";
        });

    if (gofc->parsed())
        return guarded([&] {
            const auto f = sv::io::read_frame_csv(gof_in, sv::io::Kind::log_returns);
            const auto model = load_model(gof_model);
            const auto ivs =
                window_intervals(f, gof_from, gof_to, gof_segments_path, gof_regime);
            std::array<std::vector<double>, 2> resid;
            for (const auto& iv : ivs) {
                const std::size_t len = iv.end - iv.start + 1;
                if (len < 2) continue;
                auto rr = sv::var::residuals(
                    model,
                    std::span<const double>(f.columns[0]).subspan(iv.start, len),
                    std::span<const double>(f.columns[1]).subspan(iv.start, len));
                resid[0].insert(resid[0].end(), rr[0].begin(), rr[0].end());
                resid[1].insert(resid[1].end(), rr[1].begin(), rr[1].end());
            }
            std::ofstream out(gof_out);
            if (!out) throw sv::input_error("cannot write " + gof_out);
            out << "series,model,T1,T2,T3,T4,T5,c05,c10,c25,c75,c90,c95\n";
            for (int c = 0; c < 2; ++c) {
                std::size_t id = 0;
                for (const auto fam :
                     {sv::gof::NullFamily::gaussian, sv::gof::NullFamily::stable}) {
                    const auto reps = sv::gof::mc_pvalue(
                        resid[c], fam, gof_nboot,
                        sv::detail::substream_seed(gof_seed, 10 * c + id++));
                    const auto cov = sv::gof::coverage_rates(
                        resid[c], reps[0].fitted_null_params, sv::gof::default_levels);
                    out << f.names[c] << "," << sv::gof::to_string(fam);
                    for (const auto& r : reps)
                        out << "," << sv::io::format_value(r.p_value);
                    for (double r : cov.rates) out << "," << sv::io::format_value(r);
                    out << "\n";
                }
            }
        });

    auto parse_x0 = [](const std::string& s) {
        const auto c = s.find(',');
        if (c == std::string::npos)
            throw sv::input_error("x0 must be 'r1,r2'");
        return std::array<double, 2>{std::stod(s.substr(0, c)),
                                     std::stod(s.substr(c + 1))};
    };

    if (sim->parsed())
        return guarded([&] {
            const auto model = load_model(sim_model);
            const auto x0 = parse_x0(sim_x0);
            std::ofstream out(sim_out);
            if (!out) throw sv::input_error("cannot write " + sim_out);
            out << "path,step," << model.meta.columns[0] << ","
                << model.meta.columns[1] << "\n";
            sv::var::simulate_visit(
                model, sim_h, sim_paths, x0, sim_seed,
                [&](std::size_t k, const std::vector<std::array<double, 2>>& path) {
                    for (std::size_t t = 0; t < path.size(); ++t)
                        out << k << "," << (t + 1) << ","
                            << sv::io::format_value(path[t][0]) << ","
                            << sv::io::format_value(path[t][1]) << "\n";
                });
        });

    if (fan->parsed())
        return guarded([&] {
            const auto model = load_model(fan_model);
            const auto x0 = parse_x0(fan_x0);
            const auto levels = parse_levels(fan_levels_str);
            if (!(fan_base_a > 0) || !(fan_base_b > 0))
                throw sv::input_error("fan: base prices must be > 0");
            std::vector<std::vector<double>> pa(fan_paths), pb(fan_paths), pp(fan_paths);
            sv::var::simulate_visit(
                model, fan_h, fan_paths, x0, fan_seed,
                [&](std::size_t k, const std::vector<std::array<double, 2>>& path) {
                    std::vector<double> r1(path.size()), r2(path.size());
                    for (std::size_t t = 0; t < path.size(); ++t) {
                        r1[t] = path[t][0];
                        r2[t] = path[t][1];
                    }
                    pa[k] = sv::scenario::returns_to_prices(r1, fan_base_a).values;
                    pb[k] = sv::scenario::returns_to_prices(r2, fan_base_b).values;
                    pp[k].resize(path.size());
                    for (std::size_t t = 0; t < path.size(); ++t)
                        pp[k][t] = pa[k][t] * pb[k][t];
                });
            const auto emit = [&](const std::string& name,
                                  const std::vector<std::vector<double>>& paths,
                                  double base) {
                const auto qf = sv::scenario::quantile_fan(paths, levels, base);
                std::ofstream out(fan_prefix + "_" + name + ".csv");
                if (!out) throw sv::input_error("cannot write fan CSV");
                out << "step";
                for (double l : levels) {
                    char buf[16];
                    std::snprintf(buf, sizeof buf, ",q%02d",
                                  static_cast<int>(l * 100 + 0.5));
                    out << buf;
                }
                out << "\n";
                for (std::size_t t = 0; t < qf.horizon; ++t) {
                    out << (t + 1);
                    for (std::size_t li = 0; li < levels.size(); ++li)
                        out << "," << sv::io::format_value(qf.values[li][t]);
                    out << "\n";
                }
                return qf;
            };
            emit(model.meta.columns[0], pa, fan_base_a);
            emit(model.meta.columns[1], pb, fan_base_b);
            const auto qf = emit("product", pp, fan_base_a * fan_base_b);
            if (!fan_svg_path.empty()) {
                std::vector<double> realized;
                if (!fan_realized.empty()) {
                    const auto rf =
                        sv::io::read_frame_csv(fan_realized, sv::io::Kind::prices);
                    if (rf.columns.size() < 2)
                        throw sv::input_error("fan: realized frame needs 2 columns");
                    for (std::size_t i = 1;
                         i < rf.rows() && realized.size() < qf.horizon; ++i)
                        realized.push_back(rf.columns[0][i] * rf.columns[1][i]);
                }
                std::ofstream out(fan_svg_path);
                if (!out) throw sv::input_error("cannot write " + fan_svg_path);
                out << sv::scenario::fan_svg(qf, realized, "product price fan");
            }
        });

    if (run->parsed())
        return guarded([&] {
            if (!run_levels_str.empty()) cfg.levels = parse_levels(run_levels_str);
            const auto s = sv::pipeline::run_pipeline(cfg);
            std::cout << "rows: " << s.n_rows << "\nregime-1 intervals: "
                      << s.n_regime1_intervals << "\nvar fits: " << s.var_fits
                      << "\ngof groups: " << s.gof_groups
                      << "\nfiles written: " << s.files.size() + 1 << "\n";
        });

    return 0;
}
