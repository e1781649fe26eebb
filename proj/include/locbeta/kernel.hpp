#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace locbeta {

enum class KernelFamily { gaussian, epanechnikov };

/// Local polynomial degree of the log-shape expansions.
enum class Degree { constant, linear };

inline int coefficient_count(Degree d) {
    return d == Degree::constant ? 1 : 2;
}

std::string_view to_string(KernelFamily f);
std::string_view to_string(Degree d);
KernelFamily parse_kernel_family(std::string_view name);
Degree parse_degree(std::string_view name);

struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian;
    double bandwidth = 0.1;

    /// Throws DomainError unless the bandwidth is positive and finite.
    void validate() const;
    /// K(u) for the standardized offset u = (t - t0) / h.
    double operator()(double u) const;
    double at_zero() const { return (*this)(0.0); }
};

double kernel_eval(const KernelSpec& spec, double u);

/// Design matrix X (rows A(t_j - t0)) and kernel weights around one center.
struct LocalDesign {
    double center = 0.0;
    Degree degree = Degree::linear;
    Eigen::MatrixXd X;
    Eigen::VectorXd w;
    /// Indices j with w_j > 0, in increasing order.
    std::vector<std::size_t> active;
    double weight_sum = 0.0;

    std::size_t positive_count() const { return active.size(); }
};

/// Builds the local design at t0. Observations flagged in `excluded` get
/// weight zero (used by the cross-validation routines). Throws
/// InsufficientLocalDataError when fewer than 2p observations carry
/// positive weight, or when the linear fit has total weight below 1e-8;
/// pass enforce_minimum = false to inspect a design without that check.
LocalDesign build_design(double t0, std::span<const double> times, const KernelSpec& spec, Degree degree,
                         std::span<const char> excluded = {}, bool enforce_minimum = true);

}  // namespace locbeta
