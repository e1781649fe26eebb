#include "locbeta/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "locbeta/error.hpp"
#include "locbeta/parallel.hpp"
#include "locbeta/special.hpp"

namespace locbeta {

namespace {

constexpr double kCrossCov = 1.0 - std::numbers::pi * std::numbers::pi / 6.0;
constexpr double kShapeFloor = 1e-6;

void check_same_grid(const BetaCurve& c1, const BetaCurve& c2) {
    c1.validate();
    c2.validate();
    if (c1.grid != c2.grid) throw DataError("curves are not on a common grid");
}

// Signs each column so that its largest-magnitude entry is positive.
void fix_signs(Eigen::MatrixXd& cols) {
    for (Eigen::Index h = 0; h < cols.cols(); ++h) {
        Eigen::Index arg = 0;
        cols.col(h).cwiseAbs().maxCoeff(&arg);
        if (cols(arg, h) < 0.0) cols.col(h) = -cols.col(h);
    }
}

}  // namespace

double aitchison_sq(const ParamNat& p1, const ParamNat& p2) {
    p1.validate();
    p2.validate();
    const double da = p1.alpha - p2.alpha;
    const double db = p1.beta - p2.beta;
    return da * da + db * db + 2.0 * da * db * kCrossCov;
}

double aitchison_distance(const ParamNat& p1, const ParamNat& p2) {
    return std::sqrt(std::max(0.0, aitchison_sq(p1, p2)));
}

std::string_view to_string(DistanceMode m) {
    return m == DistanceMode::l2 ? "l2" : "exact_gram";
}

DistanceMode parse_distance_mode(std::string_view name) {
    if (name == "l2") return DistanceMode::l2;
    if (name == "exact_gram") return DistanceMode::exact_gram;
    throw DataError("unknown distance mode '" + std::string(name) + "'");
}

double integrated_aitchison_sq(const BetaCurve& c1, const BetaCurve& c2, DistanceMode mode) {
    check_same_grid(c1, c2);
    const Eigen::VectorXd w = trapezoid_weights(c1.grid);
    double total = 0.0;
    for (std::size_t v = 0; v < c1.grid.size(); ++v) {
        const double da = c1.alpha[v] - c2.alpha[v];
        const double db = c1.beta[v] - c2.beta[v];
        double d2 = da * da + db * db;
        if (mode == DistanceMode::exact_gram) d2 += 2.0 * da * db * kCrossCov;
        total += w(static_cast<Eigen::Index>(v)) * d2;
    }
    return total;
}

Eigen::MatrixXd distance_matrix(const std::vector<BetaCurve>& curves, DistanceMode mode, int threads) {
    const std::size_t n = curves.size();
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    parallel_for(n, threads, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = std::sqrt(std::max(0.0, integrated_aitchison_sq(curves[i], curves[j], mode)));
            D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
        }
    });
    for (Eigen::Index i = 0; i < D.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) D(i, j) = D(j, i);
    }
    return D;
}

MdsResult classic_mds(const Eigen::MatrixXd& D, std::size_t dims) {
    const Eigen::Index n = D.rows();
    if (n == 0 || D.cols() != n) throw DataError("classic_mds: distance matrix must be square and non-empty");
    if (!D.allFinite()) throw DataError("classic_mds: non-finite distances");
    const Eigen::MatrixXd D2 = D.array().square().matrix();
    const Eigen::MatrixXd H =
        Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    Eigen::MatrixXd B = -0.5 * H * D2 * H;
    B = 0.5 * (B + B.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    if (es.info() != Eigen::Success) throw NumericalError("classic_mds: eigendecomposition failed");
    MdsResult res;
    res.eigenvalues = es.eigenvalues().reverse();
    const Eigen::MatrixXd vecs = es.eigenvectors().rowwise().reverse();

    const double top = std::max(0.0, res.eigenvalues(0));
    std::size_t positive = 0;
    while (positive < static_cast<std::size_t>(n) && top > 0.0 &&
           res.eigenvalues(static_cast<Eigen::Index>(positive)) > 1e-12 * top) {
        ++positive;
    }
    res.dims_used = std::min(dims, positive);
    res.truncated = res.dims_used < dims;
    const auto k = static_cast<Eigen::Index>(res.dims_used);
    res.configuration = vecs.leftCols(k) * res.eigenvalues.head(k).cwiseSqrt().asDiagonal();
    fix_signs(res.configuration);
    return res;
}

GammaCurves gamma_curves(const std::vector<BetaCurve>& curves) {
    if (curves.empty()) throw DataError("gamma_curves: no curves");
    const std::size_t r = curves.front().grid.size();
    GammaCurves g;
    g.grid = curves.front().grid;
    const Eigen::VectorXd w = trapezoid_weights(g.grid);
    g.quad_weights.resize(static_cast<Eigen::Index>(2 * r));
    g.quad_weights << w, w;
    g.values.resize(static_cast<Eigen::Index>(curves.size()), static_cast<Eigen::Index>(2 * r));
    for (std::size_t i = 0; i < curves.size(); ++i) {
        check_same_grid(curves.front(), curves[i]);
        for (std::size_t v = 0; v < r; ++v) {
            g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v)) = curves[i].alpha[v];
            g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r + v)) = curves[i].beta[v];
        }
    }
    return g;
}

double quantile_type7(std::vector<double> values, double q) {
    if (values.empty()) throw DataError("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

CurveSummary summarize_curve(const BetaCurve& curve) {
    curve.validate();
    CurveSummary s;
    s.grid = curve.grid;
    for (std::size_t v = 0; v < curve.grid.size(); ++v) {
        const BetaDistribution dist({curve.alpha[v], curve.beta[v]});
        s.mean.push_back(dist.mean());
        s.median.push_back(dist.quantile(0.5));
        s.q025.push_back(dist.quantile(0.025));
        s.q975.push_back(dist.quantile(0.975));
    }
    return s;
}

namespace {

BetaCurve split_gamma(const std::vector<double>& grid, const Eigen::VectorXd& gamma, bool& clamped) {
    const std::size_t r = grid.size();
    BetaCurve c;
    c.grid = grid;
    c.alpha.resize(r);
    c.beta.resize(r);
    for (std::size_t v = 0; v < r; ++v) {
        double a = gamma(static_cast<Eigen::Index>(v));
        double b = gamma(static_cast<Eigen::Index>(r + v));
        if (a < kShapeFloor) {
            a = kShapeFloor;
            clamped = true;
        }
        if (b < kShapeFloor) {
            b = kShapeFloor;
            clamped = true;
        }
        c.alpha[v] = a;
        c.beta[v] = b;
    }
    return c;
}

}  // namespace

CohortSummary cohort_fpca_summary(const std::vector<BetaCurve>& curves, double pve, double q_low, double q_high,
                                  std::size_t max_components) {
    if (curves.size() < 3) throw DataError("cohort summary: need at least 3 individuals");
    const GammaCurves g = gamma_curves(curves);
    CohortSummary out;
    out.fpca = fpca(g.values, g.quad_weights, pve);
    const double total = out.fpca.spectrum.sum();
    for (Eigen::Index h = 0; h < out.fpca.eigenvalues.size(); ++h) {
        out.component_pve.push_back(out.fpca.eigenvalues(h) / total);
    }
    bool mean_clamped = false;
    out.mean_curve = split_gamma(g.grid, out.fpca.mean_curve, mean_clamped);
    out.mean_summary = summarize_curve(out.mean_curve);

    const std::size_t used = std::min(max_components, out.fpca.components());
    for (std::size_t h = 0; h < used; ++h) {
        const auto col = static_cast<Eigen::Index>(h);
        const Eigen::VectorXd sc = out.fpca.scores.col(col);
        const std::vector<double> scores(sc.data(), sc.data() + sc.size());
        for (const double level : {q_low, q_high}) {
            ComponentExtreme e;
            e.component = h;
            e.quantile_level = level;
            e.score = quantile_type7(scores, level);
            const Eigen::VectorXd gamma = out.fpca.mean_curve + e.score * out.fpca.eigenfunctions.col(col);
            e.curve = split_gamma(g.grid, gamma, e.clamped);
            e.summary = summarize_curve(e.curve);
            out.extremes.push_back(std::move(e));
        }
    }
    return out;
}

std::vector<double> holdout_logliks(const BetaCurve& model, const Dataset& holdout) {
    model.validate();
    if (holdout.empty()) throw DataError("empty holdout set");
    const auto t = holdout.times();
    const auto y = holdout.values();
    std::vector<double> out(holdout.size());
    for (std::size_t j = 0; j < holdout.size(); ++j) out[j] = beta_log_density(y[j], model.log_params_at(t[j]));
    return out;
}

double oos_mean_loglik(const BetaCurve& model, const Dataset& holdout) {
    const std::vector<double> ll = holdout_logliks(model, holdout);
    double sum = 0.0;
    for (const double v : ll) sum += v;
    return sum / static_cast<double>(ll.size());
}

TTestResult paired_t_test(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DataError("paired t-test: samples differ in length");
    if (x.size() < 2) throw DataError("paired t-test: need at least 2 pairs");
    const std::size_t n = x.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - y[i];
    double mean = 0.0;
    for (const double v : d) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const double v : d) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(n - 1);
    if (!(var > 0.0)) throw DataError("paired t-test: differences have zero variance");

    TTestResult r;
    r.df = static_cast<double>(n - 1);
    r.t = mean / std::sqrt(var / static_cast<double>(n));
    r.p_value = incomplete_beta(r.df / (r.df + r.t * r.t), 0.5 * r.df, 0.5);
    r.mean_diff_sign = mean > 0.0 ? 1 : (mean < 0.0 ? -1 : 0);
    return r;
}

}  // namespace locbeta
