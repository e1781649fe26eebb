#include "locbeta/moments_fpca.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "locbeta/error.hpp"
#include "locbeta/parallel.hpp"

namespace locbeta {

namespace {

constexpr double kMeanClamp = 1e-6;
constexpr double kVarianceFloor = 1e-8;
// Eigenvalues below this fraction of the largest are round-off.
constexpr double kRankTolerance = 1e-13;

void check_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw DataError("empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i])) throw DataError("grid contains a non-finite value");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw DataError("grid must be strictly increasing");
    }
}

}  // namespace

Eigen::VectorXd trapezoid_weights(const std::vector<double>& grid) {
    check_grid(grid);
    const auto r = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(r);
    if (r == 1) {
        w(0) = 1.0;
        return w;
    }
    for (Eigen::Index i = 0; i + 1 < r; ++i) {
        const double half = 0.5 * (grid[i + 1] - grid[i]);
        w(i) += half;
        w(i + 1) += half;
    }
    return w;
}

CurveMatrix CurveMatrix::on_grid(std::vector<double> grid, Eigen::MatrixXd rows) {
    CurveMatrix c;
    c.quad_weights = trapezoid_weights(grid);
    c.grid = std::move(grid);
    c.rows = std::move(rows);
    c.validate();
    return c;
}

void CurveMatrix::validate() const {
    check_grid(grid);
    if (rows.cols() != static_cast<Eigen::Index>(grid.size())) {
        throw DataError("curve matrix has " + std::to_string(rows.cols()) + " columns for a grid of " +
                        std::to_string(grid.size()));
    }
    if (quad_weights.size() != rows.cols()) throw DataError("quadrature weights do not match the grid");
    if (!rows.allFinite()) throw DataError("curve matrix has missing or non-finite entries");
}

Eigen::VectorXd FpcaResult::reconstruct(std::size_t row) const {
    Eigen::VectorXd out = mean_curve;
    for (Eigen::Index h = 0; h < eigenfunctions.cols(); ++h) {
        out += scores(static_cast<Eigen::Index>(row), h) * eigenfunctions.col(h);
    }
    return out;
}

FpcaResult fpca(const Eigen::MatrixXd& rows, const Eigen::VectorXd& quad_weights, double pve_target) {
    const Eigen::Index n = rows.rows();
    const Eigen::Index r = rows.cols();
    if (n < 2) throw DataError("fpca: need at least 2 curves");
    if (!(pve_target > 0.0 && pve_target <= 1.0)) throw DomainError("fpca: pve target must lie in (0, 1]");
    if (quad_weights.size() != r || (quad_weights.array() <= 0.0).any()) {
        throw DataError("fpca: quadrature weights must be positive and match the grid");
    }
    if (!rows.allFinite()) throw DataError("fpca: non-finite curve values");

    FpcaResult res;
    res.mean_curve = rows.colwise().mean().transpose();
    const Eigen::MatrixXd centered = rows.rowwise() - res.mean_curve.transpose();
    const Eigen::VectorXd root_w = quad_weights.cwiseSqrt();
    const Eigen::MatrixXd scaled = centered * root_w.asDiagonal();
    const Eigen::MatrixXd M = (scaled.transpose() * scaled) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) throw NumericalError("fpca: eigendecomposition failed");
    const Eigen::VectorXd ev = es.eigenvalues().reverse();
    const Eigen::MatrixXd vecs = es.eigenvectors().rowwise().reverse();

    const double top = ev.size() > 0 ? ev(0) : 0.0;
    Eigen::Index positive = 0;
    while (positive < ev.size() && top > 0.0 && ev(positive) > kRankTolerance * top) ++positive;
    res.spectrum = ev.head(positive);
    const double total = res.spectrum.sum();

    Eigen::Index H = 0;
    double explained = 0.0;
    if (positive > 0) {
        while (H < positive) {
            explained += ev(H);
            ++H;
            if (explained >= pve_target * total * (1.0 - 1e-12)) break;
        }
        res.pve = explained / total;
    } else {
        res.pve = 1.0;
    }

    res.eigenvalues = ev.head(H);
    res.eigenfunctions.resize(r, H);
    for (Eigen::Index h = 0; h < H; ++h) {
        Eigen::VectorXd phi = vecs.col(h).cwiseQuotient(root_w);
        Eigen::Index arg = 0;
        phi.cwiseAbs().maxCoeff(&arg);
        if (phi(arg) < 0.0) phi = -phi;
        res.eigenfunctions.col(h) = phi;
    }
    res.scores = centered * quad_weights.asDiagonal() * res.eigenfunctions;
    return res;
}

FpcaResult fpca(const CurveMatrix& curves, double pve_target) {
    curves.validate();
    return fpca(curves.rows, curves.quad_weights, pve_target);
}

RescaledDays rescale_to_unit(const Eigen::MatrixXd& raw) {
    if (raw.size() == 0) throw DataError("rescale_to_unit: no values");
    if (!raw.allFinite()) throw DataError("rescale_to_unit: non-finite values");
    const double mn = raw.minCoeff();
    const double mx = raw.maxCoeff();
    if (!(mn > 0.0)) throw DataError("rescale_to_unit: values must be positive");
    if (mn == mx) throw DataError("rescale_to_unit: degenerate range (all values equal)");
    RescaledDays out;
    out.lo = 0.99 * mn;
    out.hi = 1.01 * mx;
    out.values = (raw.array() - out.lo) / (out.hi - out.lo);
    return out;
}

Eigen::VectorXd pointwise_mean(const Eigen::MatrixXd& days) {
    if (days.rows() < 1) throw DataError("pointwise_mean: no days");
    return days.colwise().mean().transpose();
}

Eigen::VectorXd pointwise_variance(const Eigen::MatrixXd& days, const Eigen::VectorXd& mean) {
    if (days.rows() < 2) throw DataError("pointwise_variance: need at least 2 days");
    if (mean.size() != days.cols()) throw DataError("pointwise_variance: mean has the wrong length");
    const Eigen::MatrixXd dev = days.rowwise() - mean.transpose();
    return dev.colwise().squaredNorm().transpose() / static_cast<double>(days.rows() - 1);
}

MomentFpcaEstimate moment_fpca_estimate(const std::vector<Eigen::MatrixXd>& individuals,
                                        const std::vector<double>& grid, const MomentFpcaOptions& options) {
    const std::size_t n = individuals.size();
    if (n < 2) throw DataError("moment_fpca_estimate: need at least 2 individuals");
    const Eigen::VectorXd w = trapezoid_weights(grid);
    const auto r = static_cast<Eigen::Index>(grid.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (individuals[i].cols() != r) {
            throw DataError("individual " + std::to_string(i) + " is not on the common grid");
        }
        if (individuals[i].rows() < 2) {
            throw DataError("individual " + std::to_string(i) + " has fewer than 2 days");
        }
    }

    MomentFpcaEstimate est;
    est.grid = grid;
    est.lo.assign(n, 0.0);
    est.hi.assign(n, 1.0);
    std::vector<Eigen::MatrixXd> scaled(n);
    parallel_for(n, options.threads, [&](std::size_t i) {
        if (options.rescale) {
            RescaledDays rd = rescale_to_unit(individuals[i]);
            est.lo[i] = rd.lo;
            est.hi[i] = rd.hi;
            scaled[i] = std::move(rd.values);
        } else {
            if (!individuals[i].allFinite() || (individuals[i].array() <= 0.0).any() ||
                (individuals[i].array() >= 1.0).any()) {
                throw DataError("individual " + std::to_string(i) + " has values outside (0, 1)");
            }
            scaled[i] = individuals[i];
        }
    });

    Eigen::MatrixXd means(static_cast<Eigen::Index>(n), r);
    for (std::size_t i = 0; i < n; ++i) means.row(static_cast<Eigen::Index>(i)) = pointwise_mean(scaled[i]).transpose();
    const FpcaResult mean_fpca = fpca(means, w, options.pve);
    est.mean_components = mean_fpca.components();

    est.clamped.assign(n, std::vector<char>(grid.size(), 0));
    Eigen::MatrixXd smooth_means(static_cast<Eigen::Index>(n), r);
    Eigen::MatrixXd variances(static_cast<Eigen::Index>(n), r);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd mu = mean_fpca.reconstruct(i);
        for (Eigen::Index v = 0; v < r; ++v) {
            if (mu(v) < kMeanClamp || mu(v) > 1.0 - kMeanClamp) {
                mu(v) = std::clamp(mu(v), kMeanClamp, 1.0 - kMeanClamp);
                est.clamped[i][static_cast<std::size_t>(v)] = 1;
            }
        }
        smooth_means.row(static_cast<Eigen::Index>(i)) = mu.transpose();
        variances.row(static_cast<Eigen::Index>(i)) = pointwise_variance(scaled[i], mu).transpose();
    }
    const FpcaResult var_fpca = fpca(variances, w, options.pve);
    est.variance_components = var_fpca.components();

    est.curves.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::VectorXd s2 = var_fpca.reconstruct(i);
        BetaCurve& c = est.curves[i];
        c.grid = grid;
        c.alpha.resize(grid.size());
        c.beta.resize(grid.size());
        for (Eigen::Index v = 0; v < r; ++v) {
            const double mu = smooth_means(static_cast<Eigen::Index>(i), v);
            const double upper = mu * (1.0 - mu) - kVarianceFloor;
            double sigma2 = s2(v);
            if (sigma2 < kVarianceFloor || sigma2 > upper) {
                sigma2 = std::clamp(sigma2, kVarianceFloor, upper);
                est.clamped[i][static_cast<std::size_t>(v)] = 1;
            }
            const ParamNat p = moments_invert({mu, sigma2});
            c.alpha[static_cast<std::size_t>(v)] = p.alpha;
            c.beta[static_cast<std::size_t>(v)] = p.beta;
        }
    }
    for (const auto& row : est.clamped) est.clamp_count += static_cast<std::size_t>(std::count(row.begin(), row.end(), 1));
    return est;
}

}  // namespace locbeta
