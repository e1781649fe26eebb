#pragma once

namespace locbeta {

/// Lower/upper clamp applied to every observation on ingestion.
inline constexpr double kUnitClamp = 1e-6;

/// Bound on |delta|, |eta| so that exp() stays representable.
inline constexpr double kMaxLogParam = 700.0;

/// Beta shape parameters on the natural scale.
struct ParamNat {
    double alpha;
    double beta;

    /// Throws DomainError unless both shapes are positive and finite.
    void validate() const;
};

/// Beta shape parameters on the log scale: delta = log alpha, eta = log beta.
struct ParamLog {
    double delta;
    double eta;

    void validate() const;
    ParamNat natural() const;
    static ParamLog from(const ParamNat& p);
};

struct MomentPair {
    double mu;
    double sigma2;
};

/// Log-density of one observation and its first two derivatives with
/// respect to (delta, eta).
struct LogLikDerivs {
    double ell;
    double d_delta;
    double d_eta;
    double dd_dd;
    double dd_ee;
    double dd_de;
};

/// Gamma-function terms that depend only on the shapes. Lets callers that
/// evaluate many observations at one (delta, eta) pay for them once.
struct ShapeTerms {
    double a = 0.0;
    double b = 0.0;
    double log_norm = 0.0;  // log B(a, b)
    double dg_a = 0.0, dg_b = 0.0, dg_ab = 0.0;
    double tg_a = 0.0, tg_b = 0.0, tg_ab = 0.0;

    /// order 0: log-density only; 1: adds digammas; 2: adds trigammas.
    static ShapeTerms at(const ParamLog& p, int order);

    double log_density(double log_y, double log_1my) const {
        return -log_norm + (a - 1.0) * log_y + (b - 1.0) * log_1my;
    }
    LogLikDerivs derivs(double log_y, double log_1my) const;
};

/// Clamps a value into [kUnitClamp, 1 - kUnitClamp].
double clamp_unit(double y);

double beta_log_density(double y, const ParamLog& p);
double beta_log_density(double y, const ParamNat& p);

LogLikDerivs beta_loglik_derivs(double y, const ParamLog& p);

MomentPair moments_map(const ParamNat& p);

/// Inverse of moments_map; throws InfeasibleMomentsError when
/// sigma2 >= mu (1 - mu) and DomainError when mu is outside (0, 1).
ParamNat moments_invert(const MomentPair& m);

/// Beta(alpha, beta) distribution function and quantiles.
class BetaDistribution {
public:
    explicit BetaDistribution(const ParamNat& p);

    const ParamNat& params() const { return p_; }
    double mean() const;
    double variance() const;
    double log_density(double y) const;
    double density(double y) const;
    /// Regularized incomplete beta; x in [0, 1].
    double cdf(double x) const;
    /// Bracketed Newton-bisection inversion of cdf; q in (0, 1).
    double quantile(double q) const;

private:
    ParamNat p_;
    double log_norm_;
};

}  // namespace locbeta
