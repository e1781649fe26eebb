#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "locbeta/beta.hpp"
#include "locbeta/loclik.hpp"
#include "locbeta/moments_fpca.hpp"

namespace locbeta {

/// Squared Aitchison distance between two Beta densities,
///   d^2 = da^2 + db^2 + 2 da db (1 - pi^2/6),
/// the quadratic form of the centered sufficient statistics (log u, log(1 - u))
/// under Uniform(0, 1).
double aitchison_sq(const ParamNat& p1, const ParamNat& p2);
double aitchison_distance(const ParamNat& p1, const ParamNat& p2);

enum class DistanceMode {
    /// Squared L2 distance of the concatenated (alpha, beta) curves.
    l2,
    /// Integral over t of the exact squared Aitchison distance.
    exact_gram,
};

std::string_view to_string(DistanceMode m);
DistanceMode parse_distance_mode(std::string_view name);

/// Trapezoid integral over the common grid of the pointwise squared distance.
double integrated_aitchison_sq(const BetaCurve& c1, const BetaCurve& c2, DistanceMode mode);

/// Pairwise sqrt(integrated_aitchison_sq); symmetric with a zero diagonal.
Eigen::MatrixXd distance_matrix(const std::vector<BetaCurve>& curves, DistanceMode mode, int threads = 1);

struct MdsResult {
    /// n x dims_used.
    Eigen::MatrixXd configuration;
    /// Eigenvalues of the double-centered matrix, non-increasing.
    Eigen::VectorXd eigenvalues;
    std::size_t dims_used = 0;
    /// Fewer positive eigenvalues than requested dimensions.
    bool truncated = false;
};

/// Classic metric scaling: B = -1/2 H D^2 H, coordinates from the leading
/// positive eigenpairs. Columns are signed like fpca's eigenfunctions.
MdsResult classic_mds(const Eigen::MatrixXd& D, std::size_t dims);

/// alpha_i(t) followed by beta_i(t) for each individual; the quadrature
/// weights are the trapezoid weights of each half.
struct GammaCurves {
    std::vector<double> grid;
    Eigen::MatrixXd values;  // n x 2r
    Eigen::VectorXd quad_weights;
};

GammaCurves gamma_curves(const std::vector<BetaCurve>& curves);

/// Empirical quantile with linear interpolation between order statistics
/// (the "type 7" rule).
double quantile_type7(std::vector<double> values, double q);

/// Pointwise mean, median and central 95% band of a Beta curve.
struct CurveSummary {
    std::vector<double> grid;
    std::vector<double> mean;
    std::vector<double> median;
    std::vector<double> q025;
    std::vector<double> q975;
};

CurveSummary summarize_curve(const BetaCurve& curve);

struct ComponentExtreme {
    std::size_t component = 0;
    double quantile_level = 0.0;
    double score = 0.0;
    BetaCurve curve;
    CurveSummary summary;
    /// Some reconstructed shape was non-positive and was clamped to 1e-6.
    bool clamped = false;
};

struct CohortSummary {
    FpcaResult fpca;
    /// Variance share of every retained component.
    std::vector<double> component_pve;
    BetaCurve mean_curve;
    CurveSummary mean_summary;
    std::vector<ComponentExtreme> extremes;
};

/// FPCA of the gamma curves; for each of the first `max_components`
/// components and each quantile level, reconstructs mean + q phi_h where q
/// is that empirical quantile of the component's scores.
CohortSummary cohort_fpca_summary(const std::vector<BetaCurve>& curves, double pve, double q_low = 0.10,
                                  double q_high = 0.90, std::size_t max_components = 3);

/// Per-observation log-likelihood of a holdout set under a curve, with
/// (log alpha, log beta) interpolated linearly on the curve grid.
std::vector<double> holdout_logliks(const BetaCurve& model, const Dataset& holdout);

double oos_mean_loglik(const BetaCurve& model, const Dataset& holdout);

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p_value = 1.0;
    /// Sign of mean(x - y): -1, 0 or 1.
    int mean_diff_sign = 0;
};

/// Two-sided paired t-test on x - y.
TTestResult paired_t_test(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace locbeta
