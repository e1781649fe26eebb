#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "locbeta/loclik.hpp"

namespace locbeta {

enum class CvMethod { loo, approx_loo, kfold };

std::string_view to_string(CvMethod m);
CvMethod parse_cv_method(std::string_view name);

/// Everything a cross-validation score needs besides the data and h. The
/// bandwidth stored in `fit.kernel` is ignored.
struct CvSettings {
    FitConfig fit;
    int k = 5;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct ApproxCv {
    double cv_approx = 0.0;
    double nu = 0.0;
    double aic = 0.0;
    /// Full-sample log-likelihood at the fitted parameters.
    double loglik = 0.0;
};

struct CvReport {
    double h = 0.0;
    std::optional<double> cv_naive;
    std::optional<double> cv_approx;
    std::optional<double> nu;
    std::optional<double> aic;
    std::optional<double> cv_kfold;
    std::optional<int> folds;
    std::optional<std::uint64_t> seed;
    bool infeasible = false;
    /// nu < 0 is reported as computed, never clamped.
    bool negative_nu = false;
};

struct SelectionResult {
    std::vector<CvReport> candidates;
    double chosen_h = 0.0;
    CvMethod method = CvMethod::kfold;
};

/// Sum over j of the log-likelihood of y_j under the fit at t_j that leaves
/// out observation j. nullopt when some leave-one-out fit lacks local data.
std::optional<double> cv_naive_loo(const Dataset& data, double h, const CvSettings& settings);

/// Influence-function approximation to leave-one-out CV, with effective
/// degrees of freedom nu and AIC = -2 loglik + 2 nu, so cv_approx = -aic / 2.
/// nullopt when some full-sample J is not positive definite.
std::optional<ApproxCv> cv_approx(const Dataset& data, double h, const CvSettings& settings);

/// Fold index of every canonical row: a seeded shuffle dealt round-robin
/// into k folds whose sizes differ by at most one.
std::vector<int> kfold_assignment(std::size_t m, int k, std::uint64_t seed);

/// Held-out log-likelihood summed over k folds (k and seed from settings).
std::optional<double> cv_kfold(const Dataset& data, double h, const CvSettings& settings);

/// Per-observation held-out log-likelihood terms for an arbitrary grouping
/// (group[j] = id of the block left out together with j).
std::optional<std::vector<double>> heldout_terms(const Dataset& data, double h, std::span<const int> group,
                                                 const CvSettings& settings);

/// Evaluates one method at one bandwidth.
CvReport cv_report(const Dataset& data, double h, CvMethod method, const CvSettings& settings);

/// Scores every candidate and picks the maximizer (ties go to the larger h).
/// Throws NumericalError when every candidate is infeasible.
SelectionResult select_bandwidth(const Dataset& data, std::span<const double> hgrid, CvMethod method,
                                 const CvSettings& settings);

/// 15 log-spaced bandwidths on [0.02, 0.5].
std::vector<double> default_bandwidth_grid();

/// One to two hours in 10-minute steps on a 24-hour day rescaled to [0, 1].
std::vector<double> cgm_bandwidth_grid();

}  // namespace locbeta
