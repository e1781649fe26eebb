#include "locbeta/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "locbeta/error.hpp"

namespace locbeta {

double sample_gamma(double shape, CounterRng& rng) {
    if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("sample_gamma: shape must be positive");
    const bool boost = shape < 1.0;
    const double a = boost ? shape + 1.0 : shape;
    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    double x = 0.0;
    for (;;) {
        double z = 0.0;
        double v = 0.0;
        do {
            z = rng.normal();
            v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        const double z2 = z * z;
        if (u < 1.0 - 0.0331 * z2 * z2) {
            x = d * v;
            break;
        }
        if (std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v))) {
            x = d * v;
            break;
        }
    }
    if (boost) x *= std::pow(rng.uniform(), 1.0 / shape);
    return x;
}

double sample_beta(const ParamNat& p, CounterRng& rng) {
    p.validate();
    const double g1 = sample_gamma(p.alpha, rng);
    const double g2 = sample_gamma(p.beta, rng);
    const double s = g1 + g2;
    if (!(s > 0.0)) return 0.5;  // both underflowed; measure-zero in practice
    return g1 / s;
}

ToyValues toy_param_functions(double t) {
    const double delta = 15.0 / 4.0 * ((t - 1.0) * (t - 1.0) - 0.25);
    const double eta = -15.0 / 4.0 * ((t - 0.5) * (t - 0.5) - 11.0 / 20.0);
    return {delta, eta, std::exp(delta), std::exp(eta)};
}

ParamCurve toy_curve() {
    return [](double t) {
        const ToyValues v = toy_param_functions(t);
        return ParamNat{v.alpha, v.beta};
    };
}

Dataset simulate_dataset(std::size_t m, std::uint64_t seed, const ParamCurve& params) {
    if (m < 2) throw DataError("simulate_dataset: m must be at least 2");
    const CounterRng root(seed);
    std::vector<double> t(m), y(m);
    for (std::size_t j = 0; j < m; ++j) {
        t[j] = static_cast<double>(j) / static_cast<double>(m - 1);
        CounterRng rng = root.split(j);
        y[j] = sample_beta(params(t[j]), rng);
    }
    return Dataset(std::move(t), std::move(y));
}

MultilevelData simulate_multilevel(const MultilevelSpec& spec) {
    if (spec.n_days == 0 || spec.per_day == 0) throw DataError("simulate_multilevel: counts must be positive");
    if (!spec.curves) throw DataError("simulate_multilevel: missing parameter curves");
    MultilevelData out;
    out.grid = spec.per_day == 1 ? std::vector<double>{0.0} : regular_grid(0.0, 1.0, spec.per_day);
    std::vector<ParamNat> shapes;
    shapes.reserve(spec.per_day);
    for (const double s : out.grid) shapes.push_back(spec.curves(s));
    out.values.resize(static_cast<Eigen::Index>(spec.n_days), static_cast<Eigen::Index>(spec.per_day));
    const CounterRng root(spec.seed);
    for (std::size_t k = 0; k < spec.n_days; ++k) {
        const CounterRng day = root.split(k);
        for (std::size_t v = 0; v < spec.per_day; ++v) {
            CounterRng rng = day.split(v);
            out.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(v)) = sample_beta(shapes[v], rng);
        }
    }
    return out;
}

std::vector<std::size_t> subsample_indices(std::size_t total, std::size_t m, std::uint64_t seed) {
    if (m == 0) throw DataError("subsample: m must be positive");
    if (m > total) {
        throw DataError("subsample: m=" + std::to_string(m) + " exceeds the " + std::to_string(total) +
                        " available observations");
    }
    // Partial Fisher-Yates over flattened (day, point) indices.
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    CounterRng rng(seed);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t k = i + static_cast<std::size_t>(rng.below(total - i));
        std::swap(idx[i], idx[k]);
    }
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

Dataset subsample_independent(const MultilevelData& curves, std::size_t m, std::uint64_t seed) {
    const std::vector<std::size_t> idx = subsample_indices(curves.total(), m, seed);
    const std::size_t r = curves.grid.size();
    std::vector<double> t(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto day = static_cast<Eigen::Index>(idx[i] / r);
        const auto point = static_cast<Eigen::Index>(idx[i] % r);
        t[i] = curves.grid[static_cast<std::size_t>(point)];
        y[i] = curves.values(day, point);
    }
    return Dataset(std::move(t), std::move(y));
}

ParamCurve individual_param_curve(std::size_t individual, std::uint64_t seed) {
    CounterRng rng = CounterRng(seed).split(individual);
    const double level_a = 1.2 + 0.35 * rng.normal();
    const double level_b = 2.3 + 0.35 * rng.normal();
    const double amp1 = 0.35 + 0.15 * rng.normal();
    const double amp2 = 0.20 * rng.normal();
    const double phase = 0.15 * rng.normal();
    return [=](double t) {
        const double s1 = std::sin(2.0 * std::numbers::pi * (t + phase));
        const double s2 = std::cos(2.0 * std::numbers::pi * t);
        const double delta = level_a + amp1 * s1 + amp2 * s2;
        const double eta = level_b - 0.5 * amp1 * s1 + 0.5 * amp2 * s2;
        return ParamNat{std::exp(delta), std::exp(eta)};
    };
}

}  // namespace locbeta
