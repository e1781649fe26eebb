#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "locbeta/beta.hpp"
#include "locbeta/kernel.hpp"
#include "locbeta/optimize.hpp"

namespace locbeta {

/// Scattered observations (t_j, y_j), t in [0, 1], y in (0, 1).
///
/// Construction validates ranges, clamps y into [1e-6, 1 - 1e-6] and sorts
/// rows by (t, y). The sorted order is the canonical row order used by the
/// cross-validation partitions.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<double> times, std::vector<double> values);

    std::size_t size() const { return times_.size(); }
    bool empty() const { return times_.empty(); }
    std::span<const double> times() const { return times_; }
    std::span<const double> values() const { return values_; }
    std::span<const double> log_values() const { return log_y_; }
    std::span<const double> log_complements() const { return log_1my_; }

private:
    std::vector<double> times_;
    std::vector<double> values_;
    std::vector<double> log_y_;
    std::vector<double> log_1my_;
};

/// Local polynomial coefficients: delta(t) ~ <a, A(t - t0)>, eta(t) ~ <b, A(t - t0)>.
struct CoefVec {
    Eigen::VectorXd a;
    Eigen::VectorXd b;

    static CoefVec zeros(Degree d);
    Degree degree() const { return a.size() == 1 ? Degree::constant : Degree::linear; }
    /// (a, b) stacked into one vector of length 2p.
    Eigen::VectorXd stacked() const;
    static CoefVec from_stacked(const Eigen::VectorXd& theta);
    /// Re-expands the coefficients around a new center.
    CoefVec recentered(double shift) const;
};

struct LocalObjective {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd neg_hessian;
};

/// Kernel-weighted log-likelihood around the design center, its gradient
/// (a-block then b-block) and the negative Hessian J. Throws DomainError
/// when a local linear predictor leaves [-700, 700].
LocalObjective local_objective(const Dataset& data, const LocalDesign& design, const CoefVec& coef);

/// Value-only variant of local_objective.
double local_value(const Dataset& data, const LocalDesign& design, const CoefVec& coef);

/// Starting point from kernel-weighted moments of y; zeros when the local
/// moments are infeasible.
CoefVec warm_start(const Dataset& data, const LocalDesign& design);

enum class Optimizer { nelder_mead, quasi_newton, newton };

std::string_view to_string(Optimizer o);
Optimizer parse_optimizer(std::string_view name);

struct FitConfig {
    KernelSpec kernel;
    Degree degree = Degree::linear;
    Optimizer optimizer = Optimizer::newton;
    OptimOptions optim;
};

struct LocalFit {
    double center = 0.0;
    CoefVec coef;
    double delta_hat = 0.0;
    double eta_hat = 0.0;
    /// Negative Hessian of the local objective at the solution.
    Eigen::MatrixXd J;
    /// K(0) times the (delta, eta) corner of J^{-1}.
    Eigen::Matrix2d influence = Eigen::Matrix2d::Constant(std::numeric_limits<double>::quiet_NaN());
    bool converged = false;
    int iterations = 0;
    double objective = 0.0;
    double gradient_norm = 0.0;
};

/// Maximizes the local likelihood on a prepared design.
LocalFit fit_local(const Dataset& data, const LocalDesign& design, const FitConfig& config,
                   const std::optional<CoefVec>& start = std::nullopt);

/// Builds the design at t0 and fits. Observations flagged in `excluded`
/// are left out.
LocalFit fit_at(const Dataset& data, double t0, const FitConfig& config,
                const std::optional<CoefVec>& start = std::nullopt, std::span<const char> excluded = {});

LocalFit fit_at(const Dataset& data, double t0, const KernelSpec& spec, Degree degree, Optimizer optimizer);

enum class WarmStartMode {
    /// Each grid point starts from its left neighbour's solution; sequential.
    chained,
    /// Each grid point starts from local moments; grid points run concurrently.
    moments,
};

struct CurveOptions {
    WarmStartMode warm_start = WarmStartMode::chained;
    int threads = 1;
};

/// Piecewise-linear (log alpha, log beta) curve on a grid.
struct BetaCurve {
    std::vector<double> grid;
    std::vector<double> alpha;
    std::vector<double> beta;

    void validate() const;
    /// Linear interpolation of (log alpha, log beta); t must lie within the grid range.
    ParamLog log_params_at(double t) const;
};

struct FittedCurve {
    std::vector<double> grid;
    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> delta;
    std::vector<double> eta;
    std::vector<LocalFit> fits;
    /// Grid points whose optimizer did not converge and were interpolated.
    std::vector<char> interpolated;
    FitConfig config;

    BetaCurve as_curve() const { return {grid, alpha, beta}; }
    std::size_t interpolated_count() const;
};

/// Fits every grid point. Non-converged interior points are filled by
/// linear interpolation of (delta, eta) between converged neighbours;
/// anything else unrecoverable raises PartialCurveError.
FittedCurve fit_curve(const Dataset& data, std::span<const double> grid, const FitConfig& config,
                      const CurveOptions& options = {});

/// n equally spaced points on [lo, hi].
std::vector<double> regular_grid(double lo, double hi, std::size_t n);

}  // namespace locbeta
