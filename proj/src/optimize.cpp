#include "locbeta/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace locbeta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kArmijo = 1e-4;

double sanitize(double v) {
    return std::isnan(v) ? kInf : v;
}

bool gradient_small(const Eigen::VectorXd& g, double f, double tol) {
    return g.allFinite() && g.norm() <= tol * (1.0 + std::fabs(f));
}

// Accepts tiny, round-off sized increases so that the iteration can still
// drive the gradient down once f has flattened to machine precision.
bool armijo_ok(double f_new, double f, double step, double slope) {
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::fabs(f);
    return f_new <= f + kArmijo * step * slope + slack;
}

// Near the optimum the decrease predicted for a full step can be smaller
// than the round-off in f itself (f sums terms much larger than their
// total). There a step that shrinks the gradient is accepted.
bool accept_step(double f_new, double f, double step, double slope, const Eigen::VectorXd& g_new,
                 const Eigen::VectorXd& g) {
    if (armijo_ok(f_new, f, step, slope)) return true;
    return std::fabs(f_new - f) <= 1e-10 * (1.0 + std::fabs(f)) && g_new.norm() < 0.5 * g.norm();
}

}  // namespace

OptimResult minimize_nelder_mead(const ValueFn& f, const Eigen::VectorXd& x0, const OptimOptions& opts) {
    const Eigen::Index n = x0.size();
    OptimResult res;
    int evals = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evals;
        return sanitize(f(x));
    };

    std::vector<Eigen::VectorXd> simplex;
    std::vector<double> values;
    auto init_simplex = [&](const Eigen::VectorXd& base) {
        simplex.assign(1, base);
        values.assign(1, eval(base));
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::VectorXd v = base;
            v(i) += 0.1 + 0.05 * std::fabs(base(i));
            simplex.push_back(v);
            values.push_back(eval(v));
        }
    };

    std::vector<std::size_t> order(static_cast<std::size_t>(n) + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<Eigen::VectorXd> s2;
        std::vector<double> v2;
        for (auto k : order) {
            s2.push_back(simplex[k]);
            v2.push_back(values[k]);
        }
        simplex.swap(s2);
        values.swap(v2);
    };
    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t k = 1; k < simplex.size(); ++k) d = std::max(d, (simplex[k] - simplex[0]).lpNorm<Eigen::Infinity>());
        return d;
    };

    init_simplex(x0);
    int restarts = 0;
    int iterations = 0;
    bool converged = false;
    while (evals < opts.max_evaluations) {
        sort_simplex();
        if (diameter() <= opts.simplex_tol) {
            // One restart around the incumbent guards against a collapsed simplex.
            if (restarts == 0 && std::isfinite(values[0])) {
                ++restarts;
                init_simplex(simplex[0]);
                continue;
            }
            converged = std::isfinite(values[0]);
            break;
        }
        ++iterations;
        const std::size_t worst = simplex.size() - 1;
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t k = 0; k < worst; ++k) centroid += simplex[k];
        centroid /= static_cast<double>(worst);

        const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
        const double f_r = eval(reflected);
        if (f_r < values[0]) {
            const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
            const double f_e = eval(expanded);
            if (f_e < f_r) {
                simplex[worst] = expanded;
                values[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_r;
            }
            continue;
        }
        if (f_r < values[worst - 1]) {
            simplex[worst] = reflected;
            values[worst] = f_r;
            continue;
        }
        const bool outside = f_r < values[worst];
        const Eigen::VectorXd contracted =
            outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                    : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
        const double f_c = eval(contracted);
        if (f_c < (outside ? f_r : values[worst])) {
            simplex[worst] = contracted;
            values[worst] = f_c;
            continue;
        }
        for (std::size_t k = 1; k < simplex.size(); ++k) {
            simplex[k] = simplex[0] + 0.5 * (simplex[k] - simplex[0]);
            values[k] = eval(simplex[k]);
        }
    }
    sort_simplex();
    res.x = simplex[0];
    res.value = values[0];
    res.iterations = iterations;
    res.evaluations = evals;
    res.converged = converged;
    return res;
}

OptimResult minimize_bfgs(const ValueGradFn& f, const Eigen::VectorXd& x0, const OptimOptions& opts) {
    const Eigen::Index n = x0.size();
    OptimResult res;
    Eigen::VectorXd x = x0;
    Eigen::VectorXd g(n);
    double fx = sanitize(f(x, g));
    int evals = 1;
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    bool scaled = false;
    bool converged = false;
    int it = 0;

    if (!std::isfinite(fx) || !g.allFinite()) {
        res.x = x;
        res.value = fx;
        res.evaluations = evals;
        return res;
    }

    Eigen::VectorXd g_new(n);
    for (; it < opts.max_iterations; ++it) {
        if (gradient_small(g, fx, opts.gradient_tol)) {
            converged = true;
            break;
        }
        Eigen::VectorXd p = -H * g;
        double slope = g.dot(p);
        if (!(slope < 0.0)) {
            H.setIdentity();
            scaled = false;
            p = -g;
            slope = g.dot(p);
        }
        double step = 1.0;
        if (!scaled) step = std::min(1.0, 1.0 / p.lpNorm<Eigen::Infinity>());

        bool accepted = false;
        double f_new = kInf;
        Eigen::VectorXd x_new;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + step * p;
            f_new = sanitize(f(x_new, g_new));
            ++evals;
            if (std::isfinite(f_new) && g_new.allFinite() && accept_step(f_new, fx, step, slope, g_new, g)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (!H.isIdentity()) {
                H.setIdentity();
                scaled = false;
                continue;
            }
            break;
        }
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
            if (!scaled) {
                H = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        x = x_new;
        fx = f_new;
        g = g_new;
    }
    if (!converged) converged = gradient_small(g, fx, opts.gradient_tol);
    res.x = x;
    res.value = fx;
    res.iterations = it;
    res.evaluations = evals;
    res.converged = converged;
    return res;
}

OptimResult minimize_newton(const ValueGradHessFn& f, const Eigen::VectorXd& x0, const OptimOptions& opts) {
    const Eigen::Index n = x0.size();
    OptimResult res;
    Eigen::VectorXd x = x0;
    Eigen::VectorXd g(n);
    Eigen::MatrixXd Hs(n, n);
    double fx = sanitize(f(x, g, Hs));
    int evals = 1;
    bool converged = false;
    int it = 0;

    Eigen::VectorXd g_new(n);
    Eigen::MatrixXd H_new(n, n);
    for (; it < opts.max_iterations && std::isfinite(fx); ++it) {
        if (gradient_small(g, fx, opts.gradient_tol)) {
            converged = true;
            break;
        }
        if (!Hs.allFinite()) break;
        Eigen::VectorXd p;
        Eigen::LLT<Eigen::MatrixXd> llt(Hs);
        if (llt.info() == Eigen::Success) {
            p = -llt.solve(g);
        } else {
            double lambda = 1e-6 * (1.0 + Hs.diagonal().cwiseAbs().maxCoeff());
            for (int k = 0; k < 40; ++k, lambda *= 10.0) {
                Eigen::MatrixXd damped = Hs;
                damped.diagonal().array() += lambda;
                Eigen::LLT<Eigen::MatrixXd> dl(damped);
                if (dl.info() == Eigen::Success) {
                    p = -dl.solve(g);
                    break;
                }
            }
            if (p.size() == 0) break;
        }
        const double slope = g.dot(p);
        if (!(slope < 0.0)) {
            p = -g;
        }
        double step = 1.0;
        bool accepted = false;
        double f_new = kInf;
        Eigen::VectorXd x_new;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + step * p;
            f_new = sanitize(f(x_new, g_new, H_new));
            ++evals;
            if (std::isfinite(f_new) && g_new.allFinite() && accept_step(f_new, fx, step, g.dot(p), g_new, g)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        x = x_new;
        fx = f_new;
        g = g_new;
        Hs = H_new;
    }
    if (!converged) converged = std::isfinite(fx) && gradient_small(g, fx, opts.gradient_tol);
    res.x = x;
    res.value = fx;
    res.iterations = it;
    res.evaluations = evals;
    res.converged = converged;
    return res;
}

}  // namespace locbeta
