#include "locbeta/loclik.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "locbeta/error.hpp"
#include "locbeta/parallel.hpp"

namespace locbeta {

Dataset::Dataset(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size()) throw DataError("Dataset: times and values differ in length");
    if (times.empty()) throw DataError("Dataset: no observations");
    std::vector<std::size_t> order(times.size());
    for (std::size_t j = 0; j < times.size(); ++j) {
        const double t = times[j];
        const double y = values[j];
        if (!std::isfinite(t) || t < 0.0 || t > 1.0) {
            throw DataError("Dataset: time " + std::to_string(t) + " outside [0, 1]");
        }
        if (!std::isfinite(y) || y < 0.0 || y > 1.0) {
            throw DataError("Dataset: value " + std::to_string(y) + " outside [0, 1]");
        }
        order[j] = j;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t k) {
        return times[i] < times[k] || (times[i] == times[k] && values[i] < values[k]);
    });
    times_.reserve(order.size());
    values_.reserve(order.size());
    for (auto j : order) {
        times_.push_back(times[j]);
        values_.push_back(clamp_unit(values[j]));
    }
    log_y_.resize(values_.size());
    log_1my_.resize(values_.size());
    for (std::size_t j = 0; j < values_.size(); ++j) {
        log_y_[j] = std::log(values_[j]);
        log_1my_[j] = std::log1p(-values_[j]);
    }
}

CoefVec CoefVec::zeros(Degree d) {
    const int p = coefficient_count(d);
    return {Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(p)};
}

Eigen::VectorXd CoefVec::stacked() const {
    Eigen::VectorXd theta(a.size() + b.size());
    theta << a, b;
    return theta;
}

CoefVec CoefVec::from_stacked(const Eigen::VectorXd& theta) {
    const Eigen::Index p = theta.size() / 2;
    return {theta.head(p), theta.tail(p)};
}

CoefVec CoefVec::recentered(double shift) const {
    CoefVec c = *this;
    if (a.size() == 2) {
        c.a(0) += a(1) * shift;
        c.b(0) += b(1) * shift;
    }
    return c;
}

namespace {

bool in_range(double delta, double eta) {
    return std::isfinite(delta) && std::isfinite(eta) && std::fabs(delta) <= kMaxLogParam &&
           std::fabs(eta) <= kMaxLogParam;
}

// Sums the weighted log-likelihood (order 0), its gradient (order 1) and
// the negative Hessian J (order 2). Returns false when some linear
// predictor is out of range.
bool accumulate(const Dataset& data, const LocalDesign& design, const Eigen::VectorXd& theta, int order,
                double& value, Eigen::VectorXd* grad, Eigen::MatrixXd* neg_hess) {
    const Eigen::Index p = theta.size() / 2;
    const bool linear = p == 2;
    const auto log_y = data.log_values();
    const auto log_1my = data.log_complements();

    value = 0.0;
    double g[4] = {0, 0, 0, 0};
    // J blocks, each symmetric 2x2 stored as (00, 01, 11).
    double jaa[3] = {0, 0, 0}, jab[3] = {0, 0, 0}, jbb[3] = {0, 0, 0};

    ShapeTerms shared;
    if (!linear) {
        if (!in_range(theta(0), theta(1))) return false;
        shared = ShapeTerms::at({theta(0), theta(1)}, order);
    }
    for (const std::size_t j : design.active) {
        const double w = design.w(static_cast<Eigen::Index>(j));
        double x = 0.0;
        ShapeTerms local;
        const ShapeTerms* st = &shared;
        if (linear) {
            x = design.X(static_cast<Eigen::Index>(j), 1);
            const double delta = theta(0) + theta(1) * x;
            const double eta = theta(2) + theta(3) * x;
            if (!in_range(delta, eta)) return false;
            local = ShapeTerms::at({delta, eta}, order);
            st = &local;
        }
        if (order == 0) {
            value += w * st->log_density(log_y[j], log_1my[j]);
            continue;
        }
        const LogLikDerivs d = st->derivs(log_y[j], log_1my[j]);
        value += w * d.ell;
        g[0] += w * d.d_delta;
        g[2] += w * d.d_eta;
        if (linear) {
            g[1] += w * d.d_delta * x;
            g[3] += w * d.d_eta * x;
        }
        if (order >= 2) {
            const double xx[3] = {1.0, x, x * x};
            for (int k = 0; k < 3; ++k) {
                jaa[k] -= w * d.dd_dd * xx[k];
                jab[k] -= w * d.dd_de * xx[k];
                jbb[k] -= w * d.dd_ee * xx[k];
            }
        }
    }
    if (!std::isfinite(value)) return false;

    if (grad != nullptr && order >= 1) {
        grad->resize(2 * p);
        if (linear) {
            *grad << g[0], g[1], g[2], g[3];
        } else {
            *grad << g[0], g[2];
        }
    }
    if (neg_hess != nullptr && order >= 2) {
        Eigen::MatrixXd& J = *neg_hess;
        J.resize(2 * p, 2 * p);
        if (linear) {
            J << jaa[0], jaa[1], jab[0], jab[1],
                 jaa[1], jaa[2], jab[1], jab[2],
                 jab[0], jab[1], jbb[0], jbb[1],
                 jab[1], jab[2], jbb[1], jbb[2];
        } else {
            J << jaa[0], jab[0],
                 jab[0], jbb[0];
        }
    }
    return true;
}

void check_coef(const LocalDesign& design, const CoefVec& coef) {
    const auto p = coefficient_count(design.degree);
    if (coef.a.size() != p || coef.b.size() != p) {
        throw DataError("coefficient vector does not match the local degree");
    }
}

void check_aligned(const Dataset& data, const LocalDesign& design) {
    if (static_cast<std::size_t>(design.w.size()) != data.size()) {
        throw DataError("local design and dataset have different lengths");
    }
}

}  // namespace

LocalObjective local_objective(const Dataset& data, const LocalDesign& design, const CoefVec& coef) {
    check_aligned(data, design);
    check_coef(design, coef);
    LocalObjective out;
    if (!accumulate(data, design, coef.stacked(), 2, out.value, &out.gradient, &out.neg_hessian)) {
        throw DomainError("local_objective: linear predictor outside the representable range");
    }
    return out;
}

double local_value(const Dataset& data, const LocalDesign& design, const CoefVec& coef) {
    check_aligned(data, design);
    check_coef(design, coef);
    double v = 0.0;
    if (!accumulate(data, design, coef.stacked(), 0, v, nullptr, nullptr)) {
        throw DomainError("local_value: linear predictor outside the representable range");
    }
    return v;
}

CoefVec warm_start(const Dataset& data, const LocalDesign& design) {
    check_aligned(data, design);
    CoefVec start = CoefVec::zeros(design.degree);
    const auto y = data.values();
    double sw = 0.0, swy = 0.0;
    for (const std::size_t j : design.active) {
        const double w = design.w(static_cast<Eigen::Index>(j));
        sw += w;
        swy += w * y[j];
    }
    if (!(sw > 0.0)) return start;
    const double mu = swy / sw;
    double ss = 0.0;
    for (const std::size_t j : design.active) {
        const double r = y[j] - mu;
        ss += design.w(static_cast<Eigen::Index>(j)) * r * r;
    }
    // Round-off leaves a tiny positive variance for identical values; that
    // would invert to absurd shapes, so treat it as zero.
    if (!(ss / sw > 1e-14 * mu * (1.0 - mu))) return start;
    try {
        const ParamNat nat = moments_invert({mu, ss / sw});
        start.a(0) = std::log(nat.alpha);
        start.b(0) = std::log(nat.beta);
        if (!in_range(start.a(0), start.b(0))) return CoefVec::zeros(design.degree);
    } catch (const Error&) {
        return CoefVec::zeros(design.degree);
    }
    return start;
}

std::string_view to_string(Optimizer o) {
    switch (o) {
        case Optimizer::nelder_mead: return "nelder_mead";
        case Optimizer::quasi_newton: return "quasi_newton";
        case Optimizer::newton: return "newton";
    }
    return "newton";
}

Optimizer parse_optimizer(std::string_view name) {
    if (name == "nelder_mead" || name == "nelder-mead") return Optimizer::nelder_mead;
    if (name == "quasi_newton" || name == "quasi-newton" || name == "bfgs") return Optimizer::quasi_newton;
    if (name == "newton") return Optimizer::newton;
    throw DataError("unknown optimizer '" + std::string(name) + "'");
}

LocalFit fit_local(const Dataset& data, const LocalDesign& design, const FitConfig& config,
                   const std::optional<CoefVec>& start) {
    check_aligned(data, design);
    const CoefVec init = start ? *start : warm_start(data, design);
    check_coef(design, init);
    const Eigen::VectorXd theta0 = init.stacked();
    constexpr double kInf = std::numeric_limits<double>::infinity();

    OptimResult res;
    switch (config.optimizer) {
        case Optimizer::newton:
            res = minimize_newton(
                [&](const Eigen::VectorXd& th, Eigen::VectorXd& g, Eigen::MatrixXd& H) {
                    double v = 0.0;
                    if (!accumulate(data, design, th, 2, v, &g, &H)) return kInf;
                    g = -g;
                    return -v;
                },
                theta0, config.optim);
            break;
        case Optimizer::quasi_newton:
            res = minimize_bfgs(
                [&](const Eigen::VectorXd& th, Eigen::VectorXd& g) {
                    double v = 0.0;
                    if (!accumulate(data, design, th, 1, v, &g, nullptr)) return kInf;
                    g = -g;
                    return -v;
                },
                theta0, config.optim);
            break;
        case Optimizer::nelder_mead:
            res = minimize_nelder_mead(
                [&](const Eigen::VectorXd& th) {
                    double v = 0.0;
                    if (!accumulate(data, design, th, 0, v, nullptr, nullptr)) return kInf;
                    return -v;
                },
                theta0, config.optim);
            break;
    }

    LocalFit fit;
    fit.center = design.center;
    fit.coef = CoefVec::from_stacked(res.x);
    fit.delta_hat = fit.coef.a(0);
    fit.eta_hat = fit.coef.b(0);
    fit.iterations = res.iterations;
    fit.converged = res.converged;

    double value = 0.0;
    Eigen::VectorXd grad;
    if (!accumulate(data, design, res.x, 2, value, &grad, &fit.J)) {
        fit.converged = false;
        fit.objective = -kInf;
        fit.gradient_norm = kInf;
        return fit;
    }
    fit.objective = value;
    fit.gradient_norm = grad.norm();
    Eigen::LLT<Eigen::MatrixXd> llt(fit.J);
    if (llt.info() != Eigen::Success) {
        fit.converged = false;
        return fit;
    }
    const Eigen::MatrixXd Jinv = llt.solve(Eigen::MatrixXd::Identity(fit.J.rows(), fit.J.cols()));
    const Eigen::Index p = res.x.size() / 2;
    const double k0 = config.kernel.at_zero();
    fit.influence << Jinv(0, 0), Jinv(0, p), Jinv(p, 0), Jinv(p, p);
    fit.influence *= k0;
    return fit;
}

LocalFit fit_at(const Dataset& data, double t0, const FitConfig& config, const std::optional<CoefVec>& start,
                std::span<const char> excluded) {
    if (data.size() < 4) throw DataError("fit_at: need at least 4 observations");
    const LocalDesign design = build_design(t0, data.times(), config.kernel, config.degree, excluded);
    return fit_local(data, design, config, start);
}

LocalFit fit_at(const Dataset& data, double t0, const KernelSpec& spec, Degree degree, Optimizer optimizer) {
    FitConfig config;
    config.kernel = spec;
    config.degree = degree;
    config.optimizer = optimizer;
    return fit_at(data, t0, config);
}

void BetaCurve::validate() const {
    if (grid.empty()) throw DataError("BetaCurve: empty grid");
    if (alpha.size() != grid.size() || beta.size() != grid.size()) {
        throw DataError("BetaCurve: alpha/beta lengths differ from the grid");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i > 0 && !(grid[i] > grid[i - 1])) throw DataError("BetaCurve: grid must be strictly increasing");
        ParamNat{alpha[i], beta[i]}.validate();
    }
}

ParamLog BetaCurve::log_params_at(double t) const {
    if (t < grid.front() || t > grid.back()) {
        throw DomainError("BetaCurve: t=" + std::to_string(t) + " outside the grid range");
    }
    if (grid.size() == 1) return {std::log(alpha[0]), std::log(beta[0])};
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    if (hi >= grid.size()) hi = grid.size() - 1;
    const std::size_t lo = hi - 1;
    const double frac = (t - grid[lo]) / (grid[hi] - grid[lo]);
    const double d = std::log(alpha[lo]) + frac * (std::log(alpha[hi]) - std::log(alpha[lo]));
    const double e = std::log(beta[lo]) + frac * (std::log(beta[hi]) - std::log(beta[lo]));
    return {d, e};
}

std::size_t FittedCurve::interpolated_count() const {
    return static_cast<std::size_t>(std::count(interpolated.begin(), interpolated.end(), char{1}));
}

std::vector<double> regular_grid(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    g.back() = hi;
    return g;
}

FittedCurve fit_curve(const Dataset& data, std::span<const double> grid, const FitConfig& config,
                      const CurveOptions& options) {
    if (grid.empty()) throw DataError("fit_curve: empty grid");
    if (data.size() < 4) throw DataError("fit_curve: need at least 4 observations");
    for (const double t : grid) {
        if (!std::isfinite(t) || t < 0.0 || t > 1.0) throw DataError("fit_curve: grid point outside [0, 1]");
    }
    const std::size_t n = grid.size();
    enum Status : char { ok, not_converged, insufficient };
    std::vector<LocalFit> fits(n);
    std::vector<char> status(n, ok);

    auto fit_point = [&](std::size_t i, const std::optional<CoefVec>& start) {
        try {
            const LocalDesign design = build_design(grid[i], data.times(), config.kernel, config.degree);
            LocalFit fit = fit_local(data, design, config, start);
            if (!fit.converged && start) {
                LocalFit fresh = fit_local(data, design, config, std::nullopt);
                if (fresh.converged || fresh.objective > fit.objective) fit = std::move(fresh);
            }
            status[i] = fit.converged ? ok : not_converged;
            fits[i] = std::move(fit);
        } catch (const InsufficientLocalDataError&) {
            status[i] = insufficient;
            fits[i].center = grid[i];
        }
    };

    if (options.warm_start == WarmStartMode::chained) {
        for (std::size_t i = 0; i < n; ++i) {
            std::optional<CoefVec> start;
            if (i > 0 && status[i - 1] == ok) start = fits[i - 1].coef.recentered(grid[i] - grid[i - 1]);
            fit_point(i, start);
        }
    } else {
        parallel_for(n, options.threads, [&](std::size_t i) { fit_point(i, std::nullopt); });
    }

    FittedCurve curve;
    curve.grid.assign(grid.begin(), grid.end());
    curve.config = config;
    curve.delta.resize(n);
    curve.eta.resize(n);
    curve.interpolated.assign(n, 0);
    std::vector<double> failed;
    for (std::size_t i = 0; i < n; ++i) {
        curve.delta[i] = fits[i].delta_hat;
        curve.eta[i] = fits[i].eta_hat;
        if (status[i] == ok) continue;
        if (status[i] == insufficient) {
            failed.push_back(grid[i]);
            continue;
        }
        std::optional<std::size_t> left, right;
        for (std::size_t k = i; k-- > 0;) {
            if (status[k] == ok) {
                left = k;
                break;
            }
        }
        for (std::size_t k = i + 1; k < n; ++k) {
            if (status[k] == ok) {
                right = k;
                break;
            }
        }
        if (!left || !right) {
            failed.push_back(grid[i]);
            continue;
        }
        const double frac = (grid[i] - grid[*left]) / (grid[*right] - grid[*left]);
        curve.delta[i] = fits[*left].delta_hat + frac * (fits[*right].delta_hat - fits[*left].delta_hat);
        curve.eta[i] = fits[*left].eta_hat + frac * (fits[*right].eta_hat - fits[*left].eta_hat);
        curve.interpolated[i] = 1;
    }
    if (!failed.empty()) {
        throw PartialCurveError("fit_curve: " + std::to_string(failed.size()) + " grid point(s) could not be fitted",
                                std::move(failed));
    }
    curve.alpha.resize(n);
    curve.beta.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        curve.alpha[i] = std::exp(curve.delta[i]);
        curve.beta[i] = std::exp(curve.eta[i]);
    }
    curve.fits = std::move(fits);
    return curve;
}

}  // namespace locbeta
