#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "locbeta/loclik.hpp"

namespace locbeta {

/// Trapezoid weights for a strictly increasing grid (a single point gets weight 1).
Eigen::VectorXd trapezoid_weights(const std::vector<double>& grid);

/// n curves sampled on a common grid, one per row.
struct CurveMatrix {
    std::vector<double> grid;
    Eigen::MatrixXd rows;  // n x r
    Eigen::VectorXd quad_weights;

    /// Computes trapezoid weights and validates shapes.
    static CurveMatrix on_grid(std::vector<double> grid, Eigen::MatrixXd rows);
    void validate() const;
    std::size_t count() const { return static_cast<std::size_t>(rows.rows()); }
};

struct FpcaResult {
    Eigen::VectorXd mean_curve;
    /// r x H, columns orthonormal under the quadrature weights.
    Eigen::MatrixXd eigenfunctions;
    /// H retained eigenvalues, non-increasing.
    Eigen::VectorXd eigenvalues;
    /// n x H.
    Eigen::MatrixXd scores;
    /// Variance share explained by the retained components.
    double pve = 1.0;
    /// Every positive eigenvalue, retained or not.
    Eigen::VectorXd spectrum;

    std::size_t components() const { return static_cast<std::size_t>(eigenvalues.size()); }
    /// mean + sum_h scores(i, h) phi_h.
    Eigen::VectorXd reconstruct(std::size_t row) const;
};

/// Discretized FPCA: eigendecomposition of the quadrature-weighted sample
/// covariance of the centered rows, keeping the fewest components whose
/// variance share reaches pve_target. Each eigenfunction is signed so that
/// its largest-magnitude entry is positive.
FpcaResult fpca(const Eigen::MatrixXd& rows, const Eigen::VectorXd& quad_weights, double pve_target);
FpcaResult fpca(const CurveMatrix& curves, double pve_target);

/// One individual's day curves mapped into (0, 1) with lo = 0.99 min and hi = 1.01 max.
struct RescaledDays {
    Eigen::MatrixXd values;  // days x r
    double lo = 0.0;
    double hi = 1.0;

    double to_raw(double y) const { return y * (hi - lo) + lo; }
};

/// Values must be positive and finite; constant input has no usable range.
RescaledDays rescale_to_unit(const Eigen::MatrixXd& raw);

/// Column means of a days x r matrix.
Eigen::VectorXd pointwise_mean(const Eigen::MatrixXd& days);

/// sum_k (Y_k(t) - mean(t))^2 / (n - 1) about the supplied (smoothed) mean.
Eigen::VectorXd pointwise_variance(const Eigen::MatrixXd& days, const Eigen::VectorXd& mean);

struct MomentFpcaOptions {
    double pve = 0.9;
    /// Map raw values into (0, 1) first; off when the input is already scaled.
    bool rescale = true;
    int threads = 1;
};

struct MomentFpcaEstimate {
    std::vector<double> grid;
    std::vector<BetaCurve> curves;
    /// Per-individual rescaling range (0 and 1 without rescaling).
    std::vector<double> lo;
    std::vector<double> hi;
    /// Per individual and grid point: 1 when the mean or variance was clamped.
    std::vector<std::vector<char>> clamped;
    std::size_t clamp_count = 0;
    std::size_t mean_components = 0;
    std::size_t variance_components = 0;
};

/// Pointwise-moments baseline: rescale, pointwise means, FPCA-smoothed
/// means, variances about the smoothed means, FPCA-smoothed variances, then
/// moment inversion at every grid point. Smoothed means are clamped into
/// [1e-6, 1 - 1e-6] and variances into [1e-8, mu (1 - mu) - 1e-8].
MomentFpcaEstimate moment_fpca_estimate(const std::vector<Eigen::MatrixXd>& individuals,
                                        const std::vector<double>& grid, const MomentFpcaOptions& options = {});

}  // namespace locbeta
