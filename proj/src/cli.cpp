#include "locbeta/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "locbeta/bandwidth.hpp"
#include "locbeta/cohort.hpp"
#include "locbeta/error.hpp"
#include "locbeta/io.hpp"
#include "locbeta/moments_fpca.hpp"
#include "locbeta/simulation.hpp"

namespace locbeta {

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::ordered_json;

struct Common {
    int threads = 1;
    std::string time_unit = "unit";

    double scale() const { return time_unit == "hours24" ? 24.0 : 1.0; }
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--threads", c.threads, "Worker threads")->capture_default_str();
    cmd->add_option("--time-unit", c.time_unit, "Time axis of the files: unit ([0,1]) or hours24 ([0,24])")
        ->check(CLI::IsMember({"unit", "hours24"}))
        ->capture_default_str();
}

void require(bool ok, const std::string& message) {
    if (!ok) throw DataError(message);
}

void validate_common(const Common& c) {
    require(c.threads >= 1, "--threads must be at least 1");
}

std::string to_text(const CsvTable& t) {
    std::ostringstream s;
    write_csv(s, t);
    return s.str();
}

// Writes to the file when a path is given, else to `out`.
void emit(const std::string& path, const std::string& contents, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << contents;
    } else {
        write_text_file(path, contents);
    }
}

std::string dump(const ordered_json& j) {
    return j.dump(2) + "\n";
}

std::string fmt(double v) {
    return format_double(v);
}

// --- fit-time configuration shared by fit, select-bandwidth and bench ---

struct ModelFlags {
    std::string kernel = "gaussian";
    std::string degree = "linear";
    std::string optimizer = "newton";
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
    cmd->add_option("--kernel", f.kernel, "gaussian or epanechnikov")->capture_default_str();
    cmd->add_option("--degree", f.degree, "constant or linear")->capture_default_str();
    cmd->add_option("--optimizer", f.optimizer, "nelder_mead, quasi_newton or newton")->capture_default_str();
}

FitConfig make_config(const ModelFlags& f, double h) {
    FitConfig c;
    c.kernel.family = parse_kernel_family(f.kernel);
    c.kernel.bandwidth = h;
    c.degree = parse_degree(f.degree);
    c.optimizer = parse_optimizer(f.optimizer);
    return c;
}

Dataset load_dataset(const std::string& path, double scale) {
    return dataset_from_records(read_observations(read_csv_file(path), scale));
}

// --- simulate ---

struct SimulateArgs {
    Common common;
    bool toy = true;
    std::size_t m = 201;
    std::uint64_t seed = 1;
    std::size_t days = 0;
    std::size_t per_day = 97;
    std::size_t individuals = 1;
    std::size_t subsample = 0;
    std::string out;
};

std::uint64_t individual_seed(std::uint64_t seed, std::size_t i) {
    return CounterRng(seed).split(i).next();
}

int run_simulate(const SimulateArgs& a, std::ostream& out) {
    validate_common(a.common);
    const double scale = a.common.scale();
    if (a.days == 0) {
        require(a.m >= 2, "--m must be at least 2");
        const Dataset d = simulate_dataset(a.m, a.seed, toy_curve());
        emit(a.out, to_text(dataset_table(d, scale)), out);
        return exit_ok;
    }
    require(a.per_day >= 1, "--per-day must be at least 1");
    require(a.individuals >= 1, "--individuals must be at least 1");

    if (a.subsample > 0) {
        require(a.individuals == 1, "--subsample works on a single individual");
        const MultilevelData ml = simulate_multilevel({a.days, a.per_day, toy_curve(), a.seed});
        const Dataset d = subsample_independent(ml, a.subsample, a.seed);
        emit(a.out, to_text(dataset_table(d, scale)), out);
        return exit_ok;
    }

    CsvTable t;
    const bool cohort = a.individuals > 1;
    t.header = cohort ? std::vector<std::string>{"id", "day", "t", "y"} : std::vector<std::string>{"day", "t", "y"};
    for (std::size_t i = 0; i < a.individuals; ++i) {
        const ParamCurve curve = cohort ? individual_param_curve(i, a.seed) : toy_curve();
        const std::uint64_t seed = cohort ? individual_seed(a.seed, i) : a.seed;
        const MultilevelData ml = simulate_multilevel({a.days, a.per_day, curve, seed});
        for (Eigen::Index k = 0; k < ml.values.rows(); ++k) {
            for (Eigen::Index v = 0; v < ml.values.cols(); ++v) {
                std::vector<std::string> row;
                if (cohort) row.push_back(std::to_string(i));
                row.push_back(std::to_string(k));
                row.push_back(fmt(ml.grid[static_cast<std::size_t>(v)] * scale));
                row.push_back(fmt(ml.values(k, v)));
                t.rows.push_back(std::move(row));
            }
        }
    }
    emit(a.out, to_text(t), out);
    return exit_ok;
}

// --- fit ---

struct FitArgs {
    Common common;
    ModelFlags model;
    std::string in;
    std::string out;
    double h = 0.0;
    std::size_t grid_points = 101;
    std::string warm_start = "chained";
    std::string json;
    std::string summary;
    std::string svg;
};

std::string svg_plot(const CurveSummary& s, double scale) {
    const double width = 640.0, height = 400.0, pad = 40.0;
    const double t0 = s.grid.front() * scale;
    const double t1 = s.grid.size() > 1 ? s.grid.back() * scale : t0 + 1.0;
    auto px = [&](double t) { return pad + (t * scale - t0) / (t1 - t0) * (width - 2 * pad); };
    auto py = [&](double y) { return height - pad - y * (height - 2 * pad); };
    auto coord = [](double v) { return fmt(std::round(v * 100.0) / 100.0); };
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    o << "<line x1=\"" << pad << "\" y1=\"" << height - pad << "\" x2=\"" << width - pad << "\" y2=\"" << height - pad
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << height - pad
      << "\" stroke=\"black\"/>\n";
    auto line = [&](const std::vector<double>& ys, const char* colour, const char* dash) {
        o << "<polyline fill=\"none\" stroke=\"" << colour << "\"" << dash << " points=\"";
        for (std::size_t i = 0; i < ys.size(); ++i) {
            if (i) o << ' ';
            o << coord(px(s.grid[i])) << ',' << coord(py(ys[i]));
        }
        o << "\"/>\n";
    };
    line(s.q025, "gray", " stroke-dasharray=\"4 3\"");
    line(s.q975, "gray", " stroke-dasharray=\"4 3\"");
    line(s.median, "steelblue", "");
    line(s.mean, "black", "");
    o << "<text x=\"" << pad << "\" y=\"" << height - 10 << "\" font-size=\"12\">t " << fmt(t0) << " to " << fmt(t1)
      << "; y 0 to 1</text>\n";
    o << "</svg>\n";
    return o.str();
}

CsvTable summary_table(const CurveSummary& s, double scale) {
    CsvTable t;
    t.header = {"t", "mean", "median", "q025", "q975"};
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        t.rows.push_back({fmt(s.grid[i] * scale), fmt(s.mean[i]), fmt(s.median[i]), fmt(s.q025[i]), fmt(s.q975[i])});
    }
    return t;
}

int run_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
    validate_common(a.common);
    const double scale = a.common.scale();
    require(a.h > 0.0 && std::isfinite(a.h), "--h must be positive");
    require(a.grid_points >= 2, "--grid-points must be at least 2");
    const FitConfig config = make_config(a.model, a.h / scale);
    CurveOptions options;
    options.threads = a.common.threads;
    if (a.warm_start == "moments") {
        options.warm_start = WarmStartMode::moments;
    } else {
        require(a.warm_start == "chained", "--warm-start must be chained or moments");
    }
    const Dataset data = load_dataset(a.in, scale);
    const std::vector<double> grid = regular_grid(0.0, 1.0, a.grid_points);

    FittedCurve curve;
    try {
        curve = fit_curve(data, grid, config, options);
    } catch (const PartialCurveError& e) {
        err << e.what() << "\nfailed grid points:";
        for (const double t : e.failed_centers) err << ' ' << fmt(t * scale);
        err << '\n';
        return exit_numerical;
    }

    CsvTable t;
    t.header = {"t", "alpha", "beta", "delta", "eta", "converged"};
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        t.rows.push_back({fmt(curve.grid[i] * scale), fmt(curve.alpha[i]), fmt(curve.beta[i]), fmt(curve.delta[i]),
                          fmt(curve.eta[i]), curve.interpolated[i] ? "0" : "1"});
    }
    emit(a.out, to_text(t), out);

    if (!a.json.empty()) {
        ordered_json j;
        j["command"] = "fit";
        j["version"] = kVersion;
        j["config"] = {{"kernel", to_string(config.kernel.family)},
                       {"bandwidth", a.h},
                       {"degree", to_string(config.degree)},
                       {"optimizer", to_string(config.optimizer)},
                       {"grid_points", a.grid_points},
                       {"warm_start", a.warm_start},
                       {"time_unit", a.common.time_unit}};
        j["observations"] = data.size();
        j["interpolated_count"] = curve.interpolated_count();
        ordered_json points = ordered_json::array();
        for (std::size_t i = 0; i < curve.grid.size(); ++i) {
            points.push_back({{"t", curve.grid[i] * scale},
                              {"converged", curve.fits[i].converged},
                              {"interpolated", curve.interpolated[i] != 0},
                              {"iterations", curve.fits[i].iterations}});
        }
        j["points"] = points;
        write_text_file(a.json, dump(j));
    }
    if (!a.summary.empty() || !a.svg.empty()) {
        const CurveSummary s = summarize_curve(curve.as_curve());
        if (!a.summary.empty()) write_text_file(a.summary, to_text(summary_table(s, scale)));
        if (!a.svg.empty()) write_text_file(a.svg, svg_plot(s, scale));
    }
    if (curve.interpolated_count() > 0) {
        err << "warning: " << curve.interpolated_count() << " grid point(s) did not converge and were interpolated\n";
    }
    return exit_ok;
}

// --- select-bandwidth ---

struct SelectArgs {
    Common common;
    ModelFlags model;
    std::string in;
    std::string out;
    std::string method = "kfold";
    int k = 5;
    std::uint64_t seed = 1;
    std::string grid = "default";
    bool all_scores = false;
};

// Bandwidth grids in internal [0, 1] time. Explicit lists and ranges are
// given in file time units.
std::vector<double> parse_bandwidth_grid(const std::string& spec, double scale) {
    if (spec == "default") return default_bandwidth_grid();
    if (spec == "cgm") return cgm_bandwidth_grid();
    std::vector<double> g;
    if (spec.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(parse_double(item));
        require(parts.size() == 3, "range grids take the form lo:step:hi");
        const double lo = parts[0], step = parts[1], hi = parts[2];
        require(lo > 0.0 && step > 0.0 && hi >= lo, "range grid needs 0 < lo <= hi and step > 0");
        const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < n; ++i) g.push_back((lo + step * static_cast<double>(i)) / scale);
    } else {
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ',')) g.push_back(parse_double(item) / scale);
    }
    require(!g.empty(), "empty bandwidth grid");
    for (const double h : g) require(h > 0.0 && std::isfinite(h), "bandwidths must be positive");
    return g;
}

int run_select(const SelectArgs& a, std::ostream& out, std::ostream& err) {
    validate_common(a.common);
    const double scale = a.common.scale();
    const CvMethod method = parse_cv_method(a.method);
    const std::vector<double> grid = parse_bandwidth_grid(a.grid, scale);
    const Dataset data = load_dataset(a.in, scale);
    CvSettings settings;
    settings.fit = make_config(a.model, grid.front());
    settings.k = a.k;
    settings.seed = a.seed;
    settings.threads = a.common.threads;
    if (method == CvMethod::kfold || a.all_scores) {
        require(a.k >= 2 && static_cast<std::size_t>(a.k) <= data.size(), "--k must satisfy 2 <= k <= m");
    }

    SelectionResult sel;
    try {
        sel = select_bandwidth(data, grid, method, settings);
    } catch (const NumericalError& e) {
        err << e.what() << '\n';
        return exit_numerical;
    }
    if (a.all_scores) {
        for (auto& r : sel.candidates) {
            for (const CvMethod other : {CvMethod::loo, CvMethod::approx_loo, CvMethod::kfold}) {
                if (other == method) continue;
                const CvReport extra = cv_report(data, r.h, other, settings);
                if (extra.cv_naive) r.cv_naive = extra.cv_naive;
                if (extra.cv_approx) {
                    r.cv_approx = extra.cv_approx;
                    r.nu = extra.nu;
                    r.aic = extra.aic;
                    r.negative_nu = extra.negative_nu;
                }
                if (extra.cv_kfold) r.cv_kfold = extra.cv_kfold;
            }
        }
    }

    CsvTable t;
    t.header = {"h", "cv_naive", "cv_approx", "nu", "aic", "cv_kfold"};
    auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
    std::size_t negative = 0;
    for (const auto& r : sel.candidates) {
        t.rows.push_back({fmt(r.h * scale), opt(r.cv_naive), opt(r.cv_approx), opt(r.nu), opt(r.aic), opt(r.cv_kfold)});
        if (r.negative_nu) ++negative;
        if (r.infeasible) err << "note: h=" << fmt(r.h * scale) << " is infeasible (not enough local data)\n";
    }
    if (negative > 0) err << "note: " << negative << " bandwidth(s) gave negative effective degrees of freedom\n";
    emit(a.out, to_text(t), out);
    out << "chosen_h=" << fmt(sel.chosen_h * scale) << '\n';
    return exit_ok;
}

// --- baseline ---

struct BaselineArgs {
    Common common;
    std::string in;
    std::string out_dir;
    double pve = 0.9;
    bool no_rescale = false;
    bool interpolate = false;
};

// Day rows on the union grid of all observation times, optionally filling
// gaps by linear interpolation within each day.
std::map<std::int64_t, Eigen::MatrixXd> day_matrices(const std::vector<ObservationRecord>& recs,
                                                     std::vector<double>& grid, bool interpolate) {
    grid.clear();
    for (const auto& r : recs) grid.push_back(r.t);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::map<std::int64_t, std::map<std::int64_t, std::map<double, double>>> by_id;
    for (const auto& r : recs) {
        auto& day = by_id[r.id][r.day];
        if (!day.emplace(r.t, r.y).second) {
            throw DataError("duplicate observation for id " + std::to_string(r.id) + ", day " + std::to_string(r.day));
        }
    }
    std::map<std::int64_t, Eigen::MatrixXd> out;
    for (const auto& [id, days] : by_id) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(days.size()), static_cast<Eigen::Index>(grid.size()));
        Eigen::Index k = 0;
        for (const auto& [day, obs] : days) {
            for (std::size_t v = 0; v < grid.size(); ++v) {
                const double t = grid[v];
                auto it = obs.find(t);
                double y = 0.0;
                if (it != obs.end()) {
                    y = it->second;
                } else {
                    auto hi = obs.upper_bound(t);
                    if (!interpolate || hi == obs.begin() || hi == obs.end()) {
                        throw DataError("id " + std::to_string(id) + ", day " + std::to_string(day) +
                                        " has no value at t=" + fmt(t) +
                                        (interpolate ? " (outside the day's range)" : " (use --interpolate)"));
                    }
                    auto lo = std::prev(hi);
                    const double frac = (t - lo->first) / (hi->first - lo->first);
                    y = lo->second + frac * (hi->second - lo->second);
                }
                m(k, static_cast<Eigen::Index>(v)) = y;
            }
            ++k;
        }
        out.emplace(id, std::move(m));
    }
    return out;
}

int run_baseline(const BaselineArgs& a, std::ostream& out, std::ostream& err) {
    validate_common(a.common);
    require(a.pve > 0.0 && a.pve <= 1.0, "--pve must lie in (0, 1]");
    const double scale = a.common.scale();
    const CsvTable table = read_csv_file(a.in);
    require(table.column("day") >= 0, "baseline input needs a day column");
    std::vector<double> grid;
    const auto mats = day_matrices(read_observations(table, scale), grid, a.interpolate);

    std::vector<std::int64_t> ids;
    std::vector<Eigen::MatrixXd> individuals;
    for (const auto& [id, m] : mats) {
        ids.push_back(id);
        individuals.push_back(m);
    }
    MomentFpcaOptions opts;
    opts.pve = a.pve;
    opts.rescale = !a.no_rescale;
    opts.threads = a.common.threads;
    const MomentFpcaEstimate est = moment_fpca_estimate(individuals, grid, opts);

    std::filesystem::create_directories(a.out_dir);
    ordered_json j;
    j["command"] = "baseline";
    j["version"] = kVersion;
    j["pve"] = a.pve;
    j["rescale"] = !a.no_rescale;
    j["time_unit"] = a.common.time_unit;
    j["grid_points"] = grid.size();
    j["mean_components"] = est.mean_components;
    j["variance_components"] = est.variance_components;
    j["clamp_count"] = est.clamp_count;
    ordered_json list = ordered_json::array();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::string name = "individual_" + std::to_string(ids[i]) + ".csv";
        write_text_file((std::filesystem::path(a.out_dir) / name).string(), to_text(curve_table(est.curves[i], scale)));
        const auto clamps = std::count(est.clamped[i].begin(), est.clamped[i].end(), 1);
        list.push_back({{"id", ids[i]}, {"file", name}, {"lo", est.lo[i]}, {"hi", est.hi[i]}, {"clamped_points", clamps}});
    }
    j["individuals"] = list;
    write_text_file((std::filesystem::path(a.out_dir) / "baseline.json").string(), dump(j));
    if (est.clamp_count > 0) err << "note: " << est.clamp_count << " grid point(s) clamped before moment inversion\n";
    out << "individuals=" << ids.size() << '\n';
    return exit_ok;
}

// --- cohort ---

struct CohortArgs {
    Common common;
    std::vector<std::string> curves;
    std::string out_dir;
    std::string mode = "l2";
    double pve = 0.9;
    std::size_t dims = 3;
};

int run_cohort(const CohortArgs& a, std::ostream& out, std::ostream& err) {
    validate_common(a.common);
    require(a.pve > 0.0 && a.pve <= 1.0, "--pve must lie in (0, 1]");
    require(a.dims >= 1, "--dims must be at least 1");
    require(a.curves.size() >= 3, "cohort needs at least 3 curve files");
    const double scale = a.common.scale();
    const DistanceMode mode = parse_distance_mode(a.mode);

    std::vector<std::string> paths = a.curves;
    std::sort(paths.begin(), paths.end());
    std::vector<std::string> ids;
    std::vector<BetaCurve> curves;
    for (const auto& p : paths) {
        ids.push_back(std::filesystem::path(p).stem().string());
        curves.push_back(read_curve(read_csv_file(p), scale));
    }
    const Eigen::MatrixXd D = distance_matrix(curves, mode, a.common.threads);
    const DistanceMode other_mode = mode == DistanceMode::l2 ? DistanceMode::exact_gram : DistanceMode::l2;
    const Eigen::MatrixXd D_other = distance_matrix(curves, other_mode, a.common.threads);
    const MdsResult mds = classic_mds(D, a.dims);
    if (mds.truncated) {
        err << "warning: only " << mds.dims_used << " positive eigenvalue(s); MDS truncated from " << a.dims
            << " dimensions\n";
    }
    const CohortSummary summary = cohort_fpca_summary(curves, a.pve);
    const FpcaResult& f = summary.fpca;

    const std::filesystem::path dir(a.out_dir);
    std::filesystem::create_directories(dir);
    auto path = [&](const std::string& name) { return (dir / name).string(); };

    CsvTable dt;
    dt.header.push_back("id");
    for (const auto& id : ids) dt.header.push_back(id);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::vector<std::string> row{ids[i]};
        for (std::size_t k = 0; k < ids.size(); ++k) row.push_back(fmt(D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))));
        dt.rows.push_back(std::move(row));
    }
    write_text_file(path("distances.csv"), to_text(dt));

    CsvTable st;
    st.header.push_back("id");
    for (std::size_t d = 0; d < mds.dims_used; ++d) st.header.push_back("mds_" + std::to_string(d + 1));
    for (std::size_t h = 0; h < f.components(); ++h) st.header.push_back("fpca_" + std::to_string(h + 1));
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::vector<std::string> row{ids[i]};
        const auto ii = static_cast<Eigen::Index>(i);
        for (Eigen::Index d = 0; d < mds.configuration.cols(); ++d) row.push_back(fmt(mds.configuration(ii, d)));
        for (Eigen::Index h = 0; h < f.scores.cols(); ++h) row.push_back(fmt(f.scores(ii, h)));
        st.rows.push_back(std::move(row));
    }
    write_text_file(path("scores.csv"), to_text(st));

    CsvTable et;
    et.header = {"part", "t"};
    for (std::size_t h = 0; h < f.components(); ++h) et.header.push_back("phi_" + std::to_string(h + 1));
    const std::size_t r = curves.front().grid.size();
    for (std::size_t v = 0; v < 2 * r; ++v) {
        std::vector<std::string> row{v < r ? "alpha" : "beta", fmt(curves.front().grid[v % r] * scale)};
        for (Eigen::Index h = 0; h < f.eigenfunctions.cols(); ++h) {
            row.push_back(fmt(f.eigenfunctions(static_cast<Eigen::Index>(v), h)));
        }
        et.rows.push_back(std::move(row));
    }
    write_text_file(path("eigenfunctions.csv"), to_text(et));

    auto curve_summary_table = [&](const BetaCurve& c, const CurveSummary& s) {
        CsvTable t;
        t.header = {"t", "alpha", "beta", "mean", "median", "q025", "q975"};
        for (std::size_t v = 0; v < c.grid.size(); ++v) {
            t.rows.push_back({fmt(c.grid[v] * scale), fmt(c.alpha[v]), fmt(c.beta[v]), fmt(s.mean[v]),
                              fmt(s.median[v]), fmt(s.q025[v]), fmt(s.q975[v])});
        }
        return t;
    };
    write_text_file(path("summary_mean.csv"), to_text(curve_summary_table(summary.mean_curve, summary.mean_summary)));
    ordered_json extremes = ordered_json::array();
    for (const auto& e : summary.extremes) {
        const std::string name = "summary_c" + std::to_string(e.component + 1) + "_q" +
                                 std::to_string(static_cast<int>(std::lround(e.quantile_level * 100))) + ".csv";
        write_text_file(path(name), to_text(curve_summary_table(e.curve, e.summary)));
        extremes.push_back({{"component", e.component + 1},
                            {"quantile", e.quantile_level},
                            {"score", e.score},
                            {"clamped", e.clamped},
                            {"file", name}});
        if (e.clamped) err << "note: " << name << " has shapes clamped at 1e-6\n";
    }

    double max_gap = 0.0;
    for (Eigen::Index i = 0; i < D.rows(); ++i) {
        for (Eigen::Index k = 0; k < D.cols(); ++k) max_gap = std::max(max_gap, std::fabs(D(i, k) - D_other(i, k)));
    }
    ordered_json j;
    j["command"] = "cohort";
    j["version"] = kVersion;
    j["mode"] = to_string(mode);
    j["ids"] = ids;
    j["pve_target"] = a.pve;
    j["pve"] = f.pve;
    j["component_pve"] = summary.component_pve;
    j["mds_dims"] = mds.dims_used;
    j["mds_truncated"] = mds.truncated;
    j["max_distance_gap_between_modes"] = max_gap;
    j["extremes"] = extremes;
    write_text_file(path("cohort.json"), dump(j));
    out << "individuals=" << ids.size() << "\ncomponents=" << f.components() << '\n';
    return exit_ok;
}

// --- evaluate ---

struct EvaluateArgs {
    Common common;
    std::vector<std::string> models;
    std::vector<std::string> compare;
    std::vector<std::string> holdouts;
    std::string out;
};

int run_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream&) {
    validate_common(a.common);
    const double scale = a.common.scale();
    require(!a.models.empty(), "need at least one --model");
    require(a.holdouts.size() == a.models.size(), "need one --holdout per --model");
    require(a.compare.empty() || a.compare.size() == a.models.size(), "need one --compare per --model");

    std::vector<double> va, vb;
    for (std::size_t i = 0; i < a.models.size(); ++i) {
        const Dataset holdout = load_dataset(a.holdouts[i], scale);
        va.push_back(oos_mean_loglik(read_curve(read_csv_file(a.models[i]), scale), holdout));
        if (!a.compare.empty()) vb.push_back(oos_mean_loglik(read_curve(read_csv_file(a.compare[i]), scale), holdout));
    }
    CsvTable t;
    t.header = {"individual", "model"};
    if (!vb.empty()) t.header.push_back("compare");
    for (std::size_t i = 0; i < va.size(); ++i) {
        std::vector<std::string> row{std::to_string(i), fmt(va[i])};
        if (!vb.empty()) row.push_back(fmt(vb[i]));
        t.rows.push_back(std::move(row));
    }
    if (!a.out.empty()) write_text_file(a.out, to_text(t));

    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (const double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    out << "mean_oos_loglik=" << fmt(mean(va)) << '\n';
    if (!vb.empty()) {
        out << "mean_oos_loglik_compare=" << fmt(mean(vb)) << '\n';
        if (va.size() >= 2) {
            const TTestResult tt = paired_t_test(va, vb);
            out << "t=" << fmt(tt.t) << "\ndf=" << fmt(tt.df) << "\np=" << fmt(tt.p_value)
                << "\nmean_diff_sign=" << tt.mean_diff_sign << '\n';
        }
    }
    return exit_ok;
}

// --- bench ---

struct BenchArgs {
    Common common;
    std::size_t m = 201;
    std::uint64_t seed = 1;
    double h = 0.12;
    int repeats = 3;
    std::string out;
};

int run_bench(const BenchArgs& a, std::ostream& out, std::ostream&) {
    validate_common(a.common);
    require(a.m >= 5, "--m must be at least 5");
    require(a.repeats >= 1, "--repeats must be at least 1");
    require(a.h > 0.0, "--h must be positive");
    const Dataset data = simulate_dataset(a.m, a.seed, toy_curve());
    const std::vector<double> grid = regular_grid(0.0, 1.0, 101);

    auto median_seconds = [&](const std::function<void()>& task) {
        std::vector<double> times;
        for (int r = 0; r < a.repeats; ++r) {
            const auto start = std::chrono::steady_clock::now();
            task();
            times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        }
        std::sort(times.begin(), times.end());
        return times[times.size() / 2];
    };

    CsvTable t;
    t.header = {"task", "median_seconds"};
    for (const Degree d : {Degree::constant, Degree::linear}) {
        for (const Optimizer o : {Optimizer::nelder_mead, Optimizer::quasi_newton, Optimizer::newton}) {
            FitConfig c;
            c.kernel.bandwidth = a.h;
            c.degree = d;
            c.optimizer = o;
            const double s = median_seconds([&] { fit_curve(data, grid, c); });
            t.rows.push_back({"fit_" + std::string(to_string(d)) + "_" + std::string(to_string(o)), fmt(s)});
        }
    }
    for (const Degree d : {Degree::constant, Degree::linear}) {
        CvSettings cs;
        cs.fit.degree = d;
        cs.threads = a.common.threads;
        for (const CvMethod m : {CvMethod::loo, CvMethod::approx_loo, CvMethod::kfold}) {
            const double s = median_seconds([&] { cv_report(data, a.h, m, cs); });
            t.rows.push_back({"cv_" + std::string(to_string(m)) + "_" + std::string(to_string(d)), fmt(s)});
        }
    }
    emit(a.out, to_text(t), out);
    return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Local likelihood estimation of time-varying Beta distributions", "locbeta"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Simulate a toy dataset or multilevel day curves");
    add_common(c_sim, sim.common);
    c_sim->add_flag("--toy", sim.toy, "Use the toy shape functions (default)");
    c_sim->add_option("--m", sim.m, "Number of observations")->capture_default_str();
    c_sim->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    c_sim->add_option("--days", sim.days, "Days per individual; enables multilevel output");
    c_sim->add_option("--per-day", sim.per_day, "Grid points per day")->capture_default_str();
    c_sim->add_option("--individuals", sim.individuals, "Individuals with their own shape curves")->capture_default_str();
    c_sim->add_option("--subsample", sim.subsample, "Draw this many (day, time) pairs without replacement");
    c_sim->add_option("--out", sim.out, "Output CSV (default stdout)");

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "Fit shape curves by local likelihood");
    add_common(c_fit, fit.common);
    add_model_flags(c_fit, fit.model);
    c_fit->add_option("--in", fit.in, "Dataset CSV")->required();
    c_fit->add_option("--out", fit.out, "Curve CSV (default stdout)");
    c_fit->add_option("--h", fit.h, "Bandwidth")->required();
    c_fit->add_option("--grid-points", fit.grid_points, "Evaluation grid size")->capture_default_str();
    c_fit->add_option("--warm-start", fit.warm_start, "chained or moments")->capture_default_str();
    c_fit->add_option("--json", fit.json, "JSON sidecar path");
    c_fit->add_option("--summary", fit.summary, "Summary-curve CSV path");
    c_fit->add_option("--svg", fit.svg, "SVG plot path");

    SelectArgs sel;
    auto* c_sel = app.add_subcommand("select-bandwidth", "Score candidate bandwidths by cross-validation");
    add_common(c_sel, sel.common);
    add_model_flags(c_sel, sel.model);
    c_sel->add_option("--in", sel.in, "Dataset CSV")->required();
    c_sel->add_option("--out", sel.out, "Score table CSV (default stdout)");
    c_sel->add_option("--method", sel.method, "loo, approx_loo or kfold")->capture_default_str();
    c_sel->add_option("--k", sel.k, "Number of folds")->capture_default_str();
    c_sel->add_option("--seed", sel.seed, "Fold partition seed")->capture_default_str();
    c_sel->add_option("--grid", sel.grid, "default, cgm, a comma list, or lo:step:hi")->capture_default_str();
    c_sel->add_flag("--all-scores", sel.all_scores, "Also compute the other methods' scores");

    BaselineArgs base;
    auto* c_base = app.add_subcommand("baseline", "Pointwise-moments FPCA estimate per individual");
    add_common(c_base, base.common);
    c_base->add_option("--in", base.in, "Multilevel CSV (id,day,t,y)")->required();
    c_base->add_option("--out-dir", base.out_dir, "Output directory")->required();
    c_base->add_option("--pve", base.pve, "Proportion of variance explained")->capture_default_str();
    c_base->add_flag("--no-rescale", base.no_rescale, "Input is already in (0, 1)");
    c_base->add_flag("--interpolate", base.interpolate, "Fill missing grid points by linear interpolation");

    CohortArgs coh;
    auto* c_coh = app.add_subcommand("cohort", "Distances, metric scaling and FPCA of individual curves");
    add_common(c_coh, coh.common);
    c_coh->add_option("curves", coh.curves, "Curve CSVs (t,alpha,beta)")->required();
    c_coh->add_option("--out-dir", coh.out_dir, "Output directory")->required();
    c_coh->add_option("--mode", coh.mode, "l2 or exact_gram")->capture_default_str();
    c_coh->add_option("--pve", coh.pve, "Proportion of variance explained")->capture_default_str();
    c_coh->add_option("--dims", coh.dims, "Metric scaling dimensions")->capture_default_str();

    EvaluateArgs ev;
    auto* c_ev = app.add_subcommand("evaluate", "Out-of-sample mean log-likelihood and paired t-test");
    add_common(c_ev, ev.common);
    c_ev->add_option("--model", ev.models, "Curve CSV, one per individual")->required();
    c_ev->add_option("--compare", ev.compare, "Second model's curve CSVs");
    c_ev->add_option("--holdout", ev.holdouts, "Holdout dataset CSV, one per individual")->required();
    c_ev->add_option("--out", ev.out, "Per-individual values CSV");

    BenchArgs bench;
    auto* c_bench = app.add_subcommand("bench", "Wall-clock medians of fitting and CV (not deterministic)");
    add_common(c_bench, bench.common);
    c_bench->add_option("--m", bench.m, "Toy sample size")->capture_default_str();
    c_bench->add_option("--seed", bench.seed, "Random seed")->capture_default_str();
    c_bench->add_option("--h", bench.h, "Bandwidth")->capture_default_str();
    c_bench->add_option("--repeats", bench.repeats, "Timed repetitions")->capture_default_str();
    c_bench->add_option("--out", bench.out, "Output CSV (default stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (c_sim->parsed()) return run_simulate(sim, out);
        if (c_fit->parsed()) return run_fit(fit, out, err);
        if (c_sel->parsed()) return run_select(sel, out, err);
        if (c_base->parsed()) return run_baseline(base, out, err);
        if (c_coh->parsed()) return run_cohort(coh, out, err);
        if (c_ev->parsed()) return run_evaluate(ev, out, err);
        if (c_bench->parsed()) return run_bench(bench, out, err);
    } catch (const PartialCurveError& e) {
        err << "error: " << e.what() << "\nfailed grid points:";
        for (const double t : e.failed_centers) err << ' ' << fmt(t);
        err << '\n';
        return exit_numerical;
    } catch (const InsufficientLocalDataError& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_data;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_data;
    }
    return exit_usage;
}

}  // namespace locbeta
