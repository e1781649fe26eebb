#pragma once

#include <functional>

#include <Eigen/Dense>

namespace locbeta {

// Unconstrained minimizers. Objectives may return +inf (or NaN) to signal
// an infeasible point; line searches and the simplex treat such points as
// worse than any finite value.

struct OptimOptions {
    /// Stop when ||grad|| <= gradient_tol * (1 + |f|).
    double gradient_tol = 1e-8;
    int max_iterations = 500;
    /// Nelder-Mead: stop when the simplex diameter (max-norm) drops below this.
    double simplex_tol = 1e-10;
    int max_evaluations = 2000;
};

struct OptimResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

using ValueFn = std::function<double(const Eigen::VectorXd&)>;
/// Returns f(x) and writes the gradient.
using ValueGradFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;
/// Returns f(x) and writes gradient and Hessian.
using ValueGradHessFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)>;

OptimResult minimize_nelder_mead(const ValueFn& f, const Eigen::VectorXd& x0, const OptimOptions& opts = {});

/// BFGS with analytic gradient and a backtracking Armijo line search.
OptimResult minimize_bfgs(const ValueGradFn& f, const Eigen::VectorXd& x0, const OptimOptions& opts = {});

/// Newton with analytic Hessian; adds Levenberg damping whenever the Hessian
/// is not positive definite.
OptimResult minimize_newton(const ValueGradHessFn& f, const Eigen::VectorXd& x0, const OptimOptions& opts = {});

}  // namespace locbeta
