#pragma once

namespace locbeta {

struct GammaValues {
    double log_gamma;
    double digamma;
    double trigamma;
};

/// log Gamma, psi and psi' at x > 0. Throws DomainError otherwise.
GammaValues gamma_functions(double x);

double log_gamma(double x);
double digamma(double x);
double trigamma(double x);

/// log B(a, b) = log Gamma(a) + log Gamma(b) - log Gamma(a + b).
double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b), evaluated with a Lentz continued
/// fraction on whichever side of the mode converges fastest.
double incomplete_beta(double x, double a, double b);

}  // namespace locbeta
