#pragma once

// Oracles shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "locbeta/beta.hpp"
#include "locbeta/loclik.hpp"
#include "locbeta/moments_fpca.hpp"
#include "locbeta/simulation.hpp"

namespace test {

inline double mixed_error(double analytic, double reference) {
    return std::fabs(analytic - reference) / std::max(1.0, std::fabs(reference));
}

/// Errors of the five analytic derivatives against central differences
/// with step 1e-6: first derivatives from the log-density, second
/// derivatives from the analytic first derivatives.
inline std::array<double, 5> derivative_errors(double y, const locbeta::ParamLog& p) {
    using namespace locbeta;
    const double h = 1e-6;
    const LogLikDerivs d = beta_loglik_derivs(y, p);
    auto f = [&](double de, double ee) { return beta_log_density(y, ParamLog{p.delta + de, p.eta + ee}); };
    auto g = [&](double de, double ee) { return beta_loglik_derivs(y, ParamLog{p.delta + de, p.eta + ee}); };
    const double fd_d = (f(h, 0) - f(-h, 0)) / (2 * h);
    const double fd_e = (f(0, h) - f(0, -h)) / (2 * h);
    const double fd_dd = (g(h, 0).d_delta - g(-h, 0).d_delta) / (2 * h);
    const double fd_ee = (g(0, h).d_eta - g(0, -h).d_eta) / (2 * h);
    const double fd_de = (g(0, h).d_delta - g(0, -h).d_delta) / (2 * h);
    return {mixed_error(d.d_delta, fd_d), mixed_error(d.d_eta, fd_e), mixed_error(d.dd_dd, fd_dd),
            mixed_error(d.dd_ee, fd_ee), mixed_error(d.dd_de, fd_de)};
}

/// One-sample Kolmogorov-Smirnov test against Uniform(0, 1); returns the p-value.
inline double ks_uniform_pvalue(std::vector<double> u) {
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        d = std::max(d, static_cast<double>(i + 1) / n - u[i]);
        d = std::max(d, u[i] - static_cast<double>(i) / n);
    }
    // Kolmogorov limiting series with Stephens' small-sample correction.
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

/// Integrated squared error of log-shapes between a fitted curve and the toy truth.
template <class Truth>
double log_shape_ise(const locbeta::FittedCurve& c, Truth truth) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < c.grid.size(); ++i) {
        auto term = [&](std::size_t k) {
            const auto tv = truth(c.grid[k]);
            return (c.delta[k] - tv.delta) * (c.delta[k] - tv.delta) + (c.eta[k] - tv.eta) * (c.eta[k] - tv.eta);
        };
        s += 0.5 * (c.grid[i + 1] - c.grid[i]) * (term(i) + term(i + 1));
    }
    return s;
}

/// Median relative error of the moments-baseline alpha estimates at
/// interior grid points, on n individuals with n_days days of r points
/// drawn from individual_param_curve.
inline double baseline_alpha_error(std::size_t n, std::size_t n_days, std::size_t r, std::uint64_t seed) {
    using namespace locbeta;
    std::vector<Eigen::MatrixXd> days;
    std::vector<ParamCurve> truth;
    std::vector<double> grid;
    for (std::size_t i = 0; i < n; ++i) {
        truth.push_back(individual_param_curve(i, seed));
        MultilevelData ml = simulate_multilevel({n_days, r, truth.back(), seed * 1000 + i});
        grid = ml.grid;
        days.push_back(std::move(ml.values));
    }
    MomentFpcaOptions opts;
    opts.rescale = false;
    const MomentFpcaEstimate est = moment_fpca_estimate(days, grid, opts);
    std::vector<double> err;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t v = 1; v + 1 < r; ++v) {
            const double a = truth[i](grid[v]).alpha;
            err.push_back(std::fabs(est.curves[i].alpha[v] - a) / a);
        }
    }
    std::nth_element(err.begin(), err.begin() + static_cast<std::ptrdiff_t>(err.size() / 2), err.end());
    return err[err.size() / 2];
}

/// Squared Aitchison distance between Beta(p1) and Beta(p2) straight from
/// its definition, (1 / 2) int int (log f1/f2 (x) - log f1/f2 (y))^2 dx dy
/// over the unit square, by nested tanh-sinh quadrature.
inline double aitchison_sq_quadrature(const locbeta::ParamNat& p1, const locbeta::ParamNat& p2) {
    using namespace locbeta;
    auto ratio = [&](double x) { return beta_log_density(x, p1) - beta_log_density(x, p2); };
    boost::math::quadrature::tanh_sinh<double> q;
    auto inner = [&](double x) {
        const double rx = ratio(x);
        return q.integrate([&](double y) {
            const double d = rx - ratio(y);
            return d * d;
        }, 0.0, 1.0, 1e-11);
    };
    return 0.5 * q.integrate(inner, 0.0, 1.0, 1e-10);
}

/// Residual of the best orthogonal map of B onto A (both n x k, centered
/// columns), max-norm of A - B Q.
inline double procrustes_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B.transpose() * A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd Q = svd.matrixU() * svd.matrixV().transpose();
    return (A - B * Q).cwiseAbs().maxCoeff();
}

}  // namespace test
