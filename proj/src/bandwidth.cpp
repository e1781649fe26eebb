#include "locbeta/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "locbeta/error.hpp"
#include "locbeta/parallel.hpp"
#include "locbeta/rng.hpp"

namespace locbeta {

std::string_view to_string(CvMethod m) {
    switch (m) {
        case CvMethod::loo: return "loo";
        case CvMethod::approx_loo: return "approx_loo";
        case CvMethod::kfold: return "kfold";
    }
    return "kfold";
}

CvMethod parse_cv_method(std::string_view name) {
    if (name == "loo") return CvMethod::loo;
    if (name == "approx_loo" || name == "approx-loo" || name == "approx") return CvMethod::approx_loo;
    if (name == "kfold") return CvMethod::kfold;
    throw DataError("unknown CV method '" + std::string(name) + "'");
}

namespace {

FitConfig with_bandwidth(const CvSettings& settings, double h) {
    FitConfig config = settings.fit;
    config.kernel.bandwidth = h;
    config.kernel.validate();
    return config;
}

}  // namespace

std::optional<std::vector<double>> heldout_terms(const Dataset& data, double h, std::span<const int> group,
                                                 const CvSettings& settings) {
    const std::size_t m = data.size();
    if (group.size() != m) throw DataError("heldout_terms: grouping has the wrong length");
    const FitConfig config = with_bandwidth(settings, h);
    const auto times = data.times();
    const auto log_y = data.log_values();
    const auto log_1my = data.log_complements();

    std::vector<double> terms(m, 0.0);
    std::vector<char> failed(m, 0);
    parallel_for(m, settings.threads, [&](std::size_t j) {
        std::vector<char> excluded(m, 0);
        for (std::size_t i = 0; i < m; ++i) excluded[i] = group[i] == group[j] ? 1 : 0;
        try {
            const LocalFit fit = fit_at(data, times[j], config, std::nullopt, excluded);
            const ParamLog p{fit.delta_hat, fit.eta_hat};
            if (!std::isfinite(p.delta) || !std::isfinite(p.eta) || std::fabs(p.delta) > kMaxLogParam ||
                std::fabs(p.eta) > kMaxLogParam) {
                failed[j] = 1;
                return;
            }
            terms[j] = ShapeTerms::at(p, 0).log_density(log_y[j], log_1my[j]);
        } catch (const InsufficientLocalDataError&) {
            failed[j] = 1;
        }
    });
    if (std::any_of(failed.begin(), failed.end(), [](char f) { return f != 0; })) return std::nullopt;
    return terms;
}

std::optional<double> cv_naive_loo(const Dataset& data, double h, const CvSettings& settings) {
    if (data.size() < 5) throw DataError("cv_naive_loo: need at least 5 observations");
    std::vector<int> group(data.size());
    std::iota(group.begin(), group.end(), 0);
    const auto terms = heldout_terms(data, h, group, settings);
    if (!terms) return std::nullopt;
    return std::accumulate(terms->begin(), terms->end(), 0.0);
}

std::vector<int> kfold_assignment(std::size_t m, int k, std::uint64_t seed) {
    if (k < 2 || static_cast<std::size_t>(k) > m) {
        throw DataError("kfold: k must satisfy 2 <= k <= m (k=" + std::to_string(k) + ", m=" + std::to_string(m) + ")");
    }
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    CounterRng rng(seed);
    for (std::size_t i = m; i > 1; --i) {
        const std::size_t r = static_cast<std::size_t>(rng.below(i));
        std::swap(perm[i - 1], perm[r]);
    }
    std::vector<int> fold(m);
    for (std::size_t pos = 0; pos < m; ++pos) fold[perm[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
    return fold;
}

std::optional<double> cv_kfold(const Dataset& data, double h, const CvSettings& settings) {
    const std::vector<int> fold = kfold_assignment(data.size(), settings.k, settings.seed);
    const auto terms = heldout_terms(data, h, fold, settings);
    if (!terms) return std::nullopt;
    return std::accumulate(terms->begin(), terms->end(), 0.0);
}

std::optional<ApproxCv> cv_approx(const Dataset& data, double h, const CvSettings& settings) {
    const std::size_t m = data.size();
    if (m < 4) throw DataError("cv_approx: need at least 4 observations");
    const FitConfig config = with_bandwidth(settings, h);
    const auto times = data.times();
    const auto log_y = data.log_values();
    const auto log_1my = data.log_complements();

    // Full-sample fits are shared by observations with the same time.
    std::vector<std::size_t> first_of;
    std::vector<std::size_t> slot(m);
    for (std::size_t j = 0; j < m; ++j) {
        if (j == 0 || times[j] != times[j - 1]) first_of.push_back(j);
        slot[j] = first_of.size() - 1;
    }
    std::vector<LocalFit> fits(first_of.size());
    std::vector<char> bad(first_of.size(), 0);
    parallel_for(first_of.size(), settings.threads, [&](std::size_t u) {
        try {
            fits[u] = fit_at(data, times[first_of[u]], config);
            if (!fits[u].influence.allFinite()) bad[u] = 1;
        } catch (const InsufficientLocalDataError&) {
            bad[u] = 1;
        }
    });
    if (std::any_of(bad.begin(), bad.end(), [](char b) { return b != 0; })) return std::nullopt;

    double loglik = 0.0;
    double nu = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const LocalFit& fit = fits[slot[j]];
        const ShapeTerms st = ShapeTerms::at({fit.delta_hat, fit.eta_hat}, 1);
        const LogLikDerivs d = st.derivs(log_y[j], log_1my[j]);
        const Eigen::Vector2d score(d.d_delta, d.d_eta);
        loglik += d.ell;
        nu += score.dot(fit.influence * score);
    }
    ApproxCv out;
    out.loglik = loglik;
    out.nu = nu;
    out.cv_approx = loglik - nu;
    out.aic = -2.0 * loglik + 2.0 * nu;
    return out;
}

CvReport cv_report(const Dataset& data, double h, CvMethod method, const CvSettings& settings) {
    CvReport r;
    r.h = h;
    switch (method) {
        case CvMethod::loo:
            r.cv_naive = cv_naive_loo(data, h, settings);
            r.infeasible = !r.cv_naive;
            break;
        case CvMethod::approx_loo: {
            const auto a = cv_approx(data, h, settings);
            r.infeasible = !a;
            if (a) {
                r.cv_approx = a->cv_approx;
                r.nu = a->nu;
                r.aic = a->aic;
                r.negative_nu = a->nu < 0.0;
            }
            break;
        }
        case CvMethod::kfold:
            r.cv_kfold = cv_kfold(data, h, settings);
            r.folds = settings.k;
            r.seed = settings.seed;
            r.infeasible = !r.cv_kfold;
            break;
    }
    return r;
}

namespace {

std::optional<double> score_of(const CvReport& r, CvMethod method) {
    switch (method) {
        case CvMethod::loo: return r.cv_naive;
        case CvMethod::approx_loo: return r.cv_approx;
        case CvMethod::kfold: return r.cv_kfold;
    }
    return std::nullopt;
}

}  // namespace

SelectionResult select_bandwidth(const Dataset& data, std::span<const double> hgrid, CvMethod method,
                                 const CvSettings& settings) {
    if (hgrid.empty()) throw DataError("select_bandwidth: empty bandwidth grid");
    SelectionResult out;
    out.method = method;
    std::optional<double> best;
    for (const double h : hgrid) {
        CvReport r = cv_report(data, h, method, settings);
        const auto s = score_of(r, method);
        if (s && (!best || *s > *best || (*s == *best && h > out.chosen_h))) {
            best = s;
            out.chosen_h = h;
        }
        out.candidates.push_back(std::move(r));
    }
    if (!best) throw NumericalError("select_bandwidth: every candidate bandwidth is infeasible");
    return out;
}

std::vector<double> default_bandwidth_grid() {
    std::vector<double> g(15);
    const double lo = std::log(0.02);
    const double hi = std::log(0.5);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / 14.0);
    g.front() = 0.02;
    g.back() = 0.5;
    return g;
}

std::vector<double> cgm_bandwidth_grid() {
    std::vector<double> g;
    for (int minutes = 60; minutes <= 120; minutes += 10) g.push_back(minutes / 1440.0);
    return g;
}

}  // namespace locbeta
