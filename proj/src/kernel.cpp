#include "locbeta/kernel.hpp"

#include <cmath>
#include <numbers>

#include "locbeta/error.hpp"

namespace locbeta {

std::string_view to_string(KernelFamily f) {
    return f == KernelFamily::gaussian ? "gaussian" : "epanechnikov";
}

std::string_view to_string(Degree d) {
    return d == Degree::constant ? "constant" : "linear";
}

KernelFamily parse_kernel_family(std::string_view name) {
    if (name == "gaussian") return KernelFamily::gaussian;
    if (name == "epanechnikov") return KernelFamily::epanechnikov;
    throw DataError("unknown kernel family '" + std::string(name) + "'");
}

Degree parse_degree(std::string_view name) {
    if (name == "constant") return Degree::constant;
    if (name == "linear") return Degree::linear;
    throw DataError("unknown degree '" + std::string(name) + "'");
}

void KernelSpec::validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw DomainError("bandwidth must be positive and finite, got " + std::to_string(bandwidth));
    }
}

double KernelSpec::operator()(double u) const {
    switch (family) {
        case KernelFamily::gaussian:
            return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
        case KernelFamily::epanechnikov:
            return std::fabs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    }
    return 0.0;
}

double kernel_eval(const KernelSpec& spec, double u) {
    return spec(u);
}

LocalDesign build_design(double t0, std::span<const double> times, const KernelSpec& spec, Degree degree,
                         std::span<const char> excluded, bool enforce_minimum) {
    spec.validate();
    if (times.empty()) throw DataError("build_design: no observation times");
    if (!excluded.empty() && excluded.size() != times.size()) {
        throw DataError("build_design: exclusion mask has the wrong length");
    }
    const auto m = static_cast<Eigen::Index>(times.size());
    const int p = coefficient_count(degree);

    LocalDesign d;
    d.center = t0;
    d.degree = degree;
    d.X.resize(m, p);
    d.w.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double offset = times[j] - t0;
        d.X(j, 0) = 1.0;
        if (p == 2) d.X(j, 1) = offset;
        const bool skip = !excluded.empty() && excluded[j];
        const double wj = skip ? 0.0 : spec(offset / spec.bandwidth);
        d.w(j) = wj;
        if (wj > 0.0) {
            d.active.push_back(static_cast<std::size_t>(j));
            d.weight_sum += wj;
        }
    }

    const std::size_t needed = 2 * static_cast<std::size_t>(p);
    if (!enforce_minimum) return d;
    if (d.active.size() < needed || (degree == Degree::linear && d.weight_sum < 1e-8)) {
        throw InsufficientLocalDataError("only " + std::to_string(d.active.size()) +
                                         " positively weighted observations around t0=" + std::to_string(t0) +
                                         " (need " + std::to_string(needed) + ")");
    }
    return d;
}

}  // namespace locbeta
