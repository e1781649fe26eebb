#include "locbeta/beta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "locbeta/error.hpp"
#include "locbeta/special.hpp"

namespace locbeta {

void ParamNat::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw DomainError("Beta shapes must be positive and finite (alpha=" + std::to_string(alpha) +
                          ", beta=" + std::to_string(beta) + ")");
    }
}

void ParamLog::validate() const {
    if (!std::isfinite(delta) || !std::isfinite(eta) || std::fabs(delta) > kMaxLogParam ||
        std::fabs(eta) > kMaxLogParam) {
        throw DomainError("log-shape parameters out of range (delta=" + std::to_string(delta) +
                          ", eta=" + std::to_string(eta) + ")");
    }
}

ParamNat ParamLog::natural() const {
    return {std::exp(delta), std::exp(eta)};
}

ParamLog ParamLog::from(const ParamNat& p) {
    p.validate();
    return {std::log(p.alpha), std::log(p.beta)};
}

double clamp_unit(double y) {
    return std::clamp(y, kUnitClamp, 1.0 - kUnitClamp);
}

namespace {

void require_open_unit(double y) {
    if (!(y > 0.0 && y < 1.0)) {
        throw DomainError("Beta observation must lie in (0, 1), got " + std::to_string(y));
    }
}

}  // namespace

double beta_log_density(double y, const ParamNat& p) {
    require_open_unit(y);
    p.validate();
    return -log_beta(p.alpha, p.beta) + (p.alpha - 1.0) * std::log(y) + (p.beta - 1.0) * std::log1p(-y);
}

double beta_log_density(double y, const ParamLog& p) {
    p.validate();
    return beta_log_density(y, p.natural());
}

ShapeTerms ShapeTerms::at(const ParamLog& p, int order) {
    ShapeTerms s;
    s.a = std::exp(p.delta);
    s.b = std::exp(p.eta);
    s.log_norm = log_beta(s.a, s.b);
    if (order >= 1) {
        s.dg_a = digamma(s.a);
        s.dg_b = digamma(s.b);
        s.dg_ab = digamma(s.a + s.b);
    }
    if (order >= 2) {
        s.tg_a = trigamma(s.a);
        s.tg_b = trigamma(s.b);
        s.tg_ab = trigamma(s.a + s.b);
    }
    return s;
}

LogLikDerivs ShapeTerms::derivs(double log_y, double log_1my) const {
    LogLikDerivs d{};
    d.ell = log_density(log_y, log_1my);
    d.d_delta = (dg_ab - dg_a + log_y) * a;
    d.d_eta = (dg_ab - dg_b + log_1my) * b;
    // d/d(eta) of d_eta brings back log(1 - y) through d_eta itself.
    d.dd_dd = (tg_ab - tg_a) * a * a + d.d_delta;
    d.dd_ee = (tg_ab - tg_b) * b * b + d.d_eta;
    d.dd_de = tg_ab * a * b;
    return d;
}

LogLikDerivs beta_loglik_derivs(double y, const ParamLog& p) {
    require_open_unit(y);
    p.validate();
    return ShapeTerms::at(p, 2).derivs(std::log(y), std::log1p(-y));
}

MomentPair moments_map(const ParamNat& p) {
    p.validate();
    const double s = p.alpha + p.beta;
    const double mu = p.alpha / s;
    return {mu, mu * (1.0 - mu) / (s + 1.0)};
}

ParamNat moments_invert(const MomentPair& m) {
    if (!(m.mu > 0.0 && m.mu < 1.0)) {
        throw DomainError("moments_invert: mean must lie in (0, 1), got " + std::to_string(m.mu));
    }
    if (!(m.sigma2 > 0.0)) {
        throw InfeasibleMomentsError("moments_invert: variance must be positive");
    }
    const double bound = m.mu * (1.0 - m.mu);
    if (!(m.sigma2 < bound)) {
        throw InfeasibleMomentsError("moments_invert: variance " + std::to_string(m.sigma2) +
                                     " is not below mu(1-mu) = " + std::to_string(bound));
    }
    const double common = bound / m.sigma2 - 1.0;
    return {m.mu * common, (1.0 - m.mu) * common};
}

BetaDistribution::BetaDistribution(const ParamNat& p) : p_(p) {
    p_.validate();
    log_norm_ = log_beta(p_.alpha, p_.beta);
}

double BetaDistribution::mean() const {
    return p_.alpha / (p_.alpha + p_.beta);
}

double BetaDistribution::variance() const {
    return moments_map(p_).sigma2;
}

double BetaDistribution::log_density(double y) const {
    require_open_unit(y);
    return -log_norm_ + (p_.alpha - 1.0) * std::log(y) + (p_.beta - 1.0) * std::log1p(-y);
}

double BetaDistribution::density(double y) const {
    return std::exp(log_density(y));
}

double BetaDistribution::cdf(double x) const {
    return incomplete_beta(x, p_.alpha, p_.beta);
}

double BetaDistribution::quantile(double q) const {
    if (!(q > 0.0 && q < 1.0)) {
        throw DomainError("quantile probability must lie in (0, 1), got " + std::to_string(q));
    }
    double lo = 0.0;
    double hi = 1.0;
    double f_lo = -q;
    double f_hi = 1.0 - q;
    double x = std::clamp(mean(), 1e-12, 1.0 - 1e-12);
    // Runs until the bracket holds adjacent doubles: near 0 or 1 a small
    // shape makes the cdf jump far between neighbouring values of x.
    for (int iter = 0; iter < 4000; ++iter) {
        const double f = cdf(x) - q;
        if (std::fabs(f) <= 1e-14) return x;
        if (f < 0.0) {
            lo = x;
            f_lo = f;
        } else {
            hi = x;
            f_hi = f;
        }
        if (std::nextafter(lo, 1.0) >= hi) break;
        // Newton step; bisection whenever it leaves the bracket, and every
        // fourth step so that a slow Newton sequence cannot stall.
        double next = 0.5 * (lo + hi);
        const double dens = density(x);
        if (iter % 4 != 3 && dens > 0.0 && std::isfinite(dens)) {
            const double newton = x - f / dens;
            if (newton > lo && newton < hi) next = newton;
        }
        if (next <= lo || next >= hi) next = lo + 0.5 * (hi - lo);
        if (next <= lo || next >= hi) break;
        x = next;
    }
    x = std::fabs(f_lo) <= std::fabs(f_hi) ? lo : hi;
    if (x <= 0.0) x = std::nextafter(0.0, 1.0);
    if (x >= 1.0) x = std::nextafter(1.0, 0.0);
    return x;
}

}  // namespace locbeta
