#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "locbeta/beta.hpp"
#include "locbeta/loclik.hpp"
#include "locbeta/rng.hpp"

namespace locbeta {

/// Gamma(shape, 1) variate by Marsaglia-Tsang; shapes below one use the
/// U^(1/shape) boost.
double sample_gamma(double shape, CounterRng& rng);

/// Beta variate as G1 / (G1 + G2).
double sample_beta(const ParamNat& p, CounterRng& rng);

struct ToyValues {
    double delta;
    double eta;
    double alpha;
    double beta;
};

/// The synthetic parameter functions
///   delta(t) = 15/4 ((t - 1)^2 - 1/4),  eta(t) = -15/4 ((t - 1/2)^2 - 11/20).
ToyValues toy_param_functions(double t);

/// Time-varying Beta shapes on [0, 1].
using ParamCurve = std::function<ParamNat(double)>;

ParamCurve toy_curve();

/// m independent draws Y_j ~ Beta(alpha(t_j), beta(t_j)), t_j = j / (m - 1).
Dataset simulate_dataset(std::size_t m, std::uint64_t seed, const ParamCurve& params);

struct MultilevelSpec {
    std::size_t n_days = 1;
    std::size_t per_day = 2;
    ParamCurve curves;
    std::uint64_t seed = 0;
};

/// Day-by-grid matrix of observations, grid s_v = v / (r - 1) (or {0} when r = 1).
struct MultilevelData {
    std::vector<double> grid;
    Eigen::MatrixXd values;  // n_days x per_day

    std::size_t total() const { return static_cast<std::size_t>(values.size()); }
};

/// Independent Beta draws at every (day, grid point); each draw uses its own
/// index-keyed random stream.
MultilevelData simulate_multilevel(const MultilevelSpec& spec);

/// m distinct indices from [0, total), sorted; index = day * per_day + point.
std::vector<std::size_t> subsample_indices(std::size_t total, std::size_t m, std::uint64_t seed);

/// m (day, time) pairs drawn uniformly without replacement, flattened into a
/// Dataset.
Dataset subsample_independent(const MultilevelData& curves, std::size_t m, std::uint64_t seed);

/// Smooth individual-specific shape curves for cohort experiments: log
/// shapes built from a shared daily profile plus individual random offsets
/// and amplitudes.
ParamCurve individual_param_curve(std::size_t individual, std::uint64_t seed);

}  // namespace locbeta
