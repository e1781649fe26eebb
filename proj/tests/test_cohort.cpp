#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "locbeta/cohort.hpp"
#include "locbeta/error.hpp"
#include "locbeta/rng.hpp"
#include "locbeta/simulation.hpp"
#include "support.hpp"

using namespace locbeta;

namespace {

BetaCurve constant_curve(const std::vector<double>& grid, double a, double b) {
    return {grid, std::vector<double>(grid.size(), a), std::vector<double>(grid.size(), b)};
}

BetaCurve curve_from(const ParamCurve& pc, const std::vector<double>& grid) {
    BetaCurve c{grid, {}, {}};
    for (const double t : grid) {
        const ParamNat p = pc(t);
        c.alpha.push_back(p.alpha);
        c.beta.push_back(p.beta);
    }
    return c;
}

std::vector<BetaCurve> simulated_cohort(std::size_t n, std::size_t r, std::uint64_t seed) {
    const std::vector<double> grid = regular_grid(0.0, 1.0, r);
    std::vector<BetaCurve> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(curve_from(individual_param_curve(i, seed), grid));
    return out;
}

}  // namespace

TEST_CASE("aitchison distance closed form") {
    CHECK(aitchison_sq({2, 1}, {1, 1}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(aitchison_sq({2, 2}, {1, 1}) == doctest::Approx(4.0 - std::numbers::pi * std::numbers::pi / 3.0).epsilon(1e-15));
    CHECK(aitchison_sq({2, 2}, {1, 1}) == doctest::Approx(0.710).epsilon(1e-3));
    CHECK(aitchison_sq({3.3, 0.4}, {3.3, 0.4}) == 0.0);
    CHECK(aitchison_distance({1, 5}, {4, 2}) == doctest::Approx(aitchison_distance({4, 2}, {1, 5})));
    CHECK_THROWS_AS(aitchison_sq({-1, 1}, {1, 1}), DomainError);

    CHECK(test::aitchison_sq_quadrature({2, 1}, {1, 1}) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(test::aitchison_sq_quadrature({2, 2}, {1, 1}) == doctest::Approx(aitchison_sq({2, 2}, {1, 1})).epsilon(1e-6));
}

TEST_CASE("aitchison closed form against the double-integral definition") {
    CounterRng rng(2718);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const ParamNat p1{0.5 + 9.5 * rng.uniform(), 0.5 + 9.5 * rng.uniform()};
        const ParamNat p2{0.5 + 9.5 * rng.uniform(), 0.5 + 9.5 * rng.uniform()};
        worst = std::max(worst, std::fabs(aitchison_sq(p1, p2) - test::aitchison_sq_quadrature(p1, p2)));
    }
    MESSAGE("worst absolute gap: " << worst);
    CHECK(worst <= 1e-4);
}

TEST_CASE("integrated distances") {
    const std::vector<double> grid = regular_grid(0.0, 1.0, 21);
    const BetaCurve a = constant_curve(grid, 2, 2);
    const BetaCurve b = constant_curve(grid, 1, 1);
    CHECK(integrated_aitchison_sq(a, a, DistanceMode::l2) == 0.0);
    CHECK(integrated_aitchison_sq(a, a, DistanceMode::exact_gram) == 0.0);
    CHECK(integrated_aitchison_sq(a, b, DistanceMode::l2) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(integrated_aitchison_sq(a, b, DistanceMode::exact_gram) == doctest::Approx(aitchison_sq({2, 2}, {1, 1})).epsilon(1e-14));

    BetaCurve c = a;
    for (std::size_t v = 0; v < grid.size(); ++v) c.alpha[v] += std::sin(grid[v]);
    CHECK(integrated_aitchison_sq(a, c, DistanceMode::l2) ==
          doctest::Approx(integrated_aitchison_sq(a, c, DistanceMode::exact_gram)).epsilon(1e-14));

    BetaCurve other = constant_curve(regular_grid(0.0, 1.0, 11), 2, 2);
    CHECK_THROWS_AS(integrated_aitchison_sq(a, other, DistanceMode::l2), DataError);
    CHECK(parse_distance_mode("exact_gram") == DistanceMode::exact_gram);
    CHECK(to_string(DistanceMode::l2) == "l2");
    CHECK_THROWS_AS(parse_distance_mode("l1"), DataError);
}

TEST_CASE("distance matrices are metrics") {
    const std::vector<BetaCurve> cohort = simulated_cohort(20, 31, 6);
    for (const DistanceMode mode : {DistanceMode::l2, DistanceMode::exact_gram}) {
        const Eigen::MatrixXd D = distance_matrix(cohort, mode, 1);
        CHECK(D == distance_matrix(cohort, mode, 4));
        CHECK(D == D.transpose());
        CHECK(D.diagonal().cwiseAbs().maxCoeff() == 0.0);
        CHECK(D.minCoeff() >= 0.0);
        CounterRng rng(77);
        int violations = 0;
        for (int k = 0; k < 1000; ++k) {
            const auto i = static_cast<Eigen::Index>(rng.below(20));
            const auto j = static_cast<Eigen::Index>(rng.below(20));
            const auto l = static_cast<Eigen::Index>(rng.below(20));
            if (D(i, l) > D(i, j) + D(j, l) + 1e-12) ++violations;
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("classic scaling") {
    Eigen::Matrix3d D;
    D << 0, 1, 2, 1, 0, 1, 2, 1, 0;
    const MdsResult line = classic_mds(D, 1);
    CHECK(line.dims_used == 1);
    CHECK(!line.truncated);
    CHECK(line.configuration(1, 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(std::fabs(line.configuration(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(line.configuration(2, 0) == doctest::Approx(-line.configuration(0, 0)).epsilon(1e-12));

    const MdsResult two = classic_mds(D, 2);
    CHECK(two.truncated);
    CHECK(two.dims_used == 1);

    const MdsResult zero = classic_mds(Eigen::MatrixXd::Zero(4, 4), 2);
    CHECK(zero.dims_used == 0);
    CHECK(zero.configuration.size() == 0);

    // Euclidean points are reproduced exactly.
    CounterRng rng(3);
    Eigen::MatrixXd X(12, 3);
    for (Eigen::Index i = 0; i < 12; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = rng.normal();
    Eigen::MatrixXd E(12, 12);
    for (Eigen::Index i = 0; i < 12; ++i)
        for (Eigen::Index j = 0; j < 12; ++j) E(i, j) = (X.row(i) - X.row(j)).norm();
    const MdsResult m = classic_mds(E, 3);
    for (Eigen::Index i = 0; i < 12; ++i)
        for (Eigen::Index j = 0; j < 12; ++j)
            CHECK(std::fabs((m.configuration.row(i) - m.configuration.row(j)).norm() - E(i, j)) <= 1e-8);
    CHECK_THROWS_AS(classic_mds(Eigen::MatrixXd::Zero(2, 3), 1), DataError);
}

TEST_CASE("scaling from L2 distances matches FPCA of the concatenated curves") {
    for (const std::uint64_t seed : {1, 2, 3}) {
        const std::vector<BetaCurve> cohort = simulated_cohort(25, 41, seed);
        const GammaCurves g = gamma_curves(cohort);
        CHECK(g.values.cols() == 82);
        const FpcaResult f = fpca(g.values, g.quad_weights, 1.0);
        const Eigen::MatrixXd D = distance_matrix(cohort, DistanceMode::l2);
        const std::size_t k = std::min<std::size_t>(f.components(), 5);
        const MdsResult m = classic_mds(D, k);
        REQUIRE(m.dims_used == k);
        const Eigen::MatrixXd A = f.scores.leftCols(static_cast<Eigen::Index>(k));
        const double res = test::procrustes_residual(A, m.configuration);
        MESSAGE("procrustes residual: " << res);
        CHECK(res <= 1e-6);
        for (std::size_t h = 0; h < k; ++h)
            CHECK(m.eigenvalues(static_cast<Eigen::Index>(h)) ==
                  doctest::Approx(24.0 * f.eigenvalues(static_cast<Eigen::Index>(h))).epsilon(1e-8));
    }
}

TEST_CASE("quantiles and curve summaries") {
    CHECK(quantile_type7({4, 1, 3, 2}, 0.5) == 2.5);
    CHECK(quantile_type7({4, 1, 3, 2}, 0.0) == 1.0);
    CHECK(quantile_type7({4, 1, 3, 2}, 1.0) == 4.0);
    CHECK(quantile_type7({10, 20}, 0.1) == doctest::Approx(11.0));
    CHECK(quantile_type7({7}, 0.3) == 7.0);
    CHECK_THROWS_AS(quantile_type7({}, 0.5), DataError);

    const std::vector<double> grid{0.0, 1.0};
    const CurveSummary s = summarize_curve({grid, {1.0, 2.0}, {1.0, 2.0}});
    CHECK(s.mean[0] == doctest::Approx(0.5));
    CHECK(s.median[1] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(s.q025[0] == doctest::Approx(0.025).epsilon(1e-10));
    CHECK(s.q975[0] == doctest::Approx(0.975).epsilon(1e-10));
}

TEST_CASE("cohort summary") {
    SUBCASE("identical individuals") {
        const std::vector<double> grid = regular_grid(0.0, 1.0, 9);
        const BetaCurve c = curve_from(individual_param_curve(0, 1), grid);
        const CohortSummary s = cohort_fpca_summary({c, c, c, c}, 0.9);
        CHECK(s.fpca.components() == 0);
        CHECK(s.extremes.empty());
        for (std::size_t v = 0; v < grid.size(); ++v) {
            CHECK(s.mean_curve.alpha[v] == doctest::Approx(c.alpha[v]).epsilon(1e-14));
            CHECK(s.mean_curve.beta[v] == doctest::Approx(c.beta[v]).epsilon(1e-14));
        }
    }
    SUBCASE("planted two-component cohort") {
        const std::size_t r = 33;
        const std::vector<double> grid = regular_grid(0.0, 1.0, r);
        // Centered, exactly uncorrelated planted scores.
        CounterRng rng(12);
        Eigen::MatrixXd sc(40, 2);
        for (Eigen::Index i = 0; i < 40; ++i) sc.row(i) << 0.8 * rng.normal(), 0.3 * rng.normal();
        sc.rowwise() -= sc.colwise().mean();
        sc.col(1) -= sc.col(0) * (sc.col(0).dot(sc.col(1)) / sc.col(0).squaredNorm());
        std::vector<BetaCurve> cohort;
        for (Eigen::Index i = 0; i < 40; ++i) {
            BetaCurve c{grid, {}, {}};
            for (const double t : grid) {
                c.alpha.push_back(4.0 + sc(i, 0) * std::sqrt(2.0) * std::sin(2.0 * std::numbers::pi * t));
                c.beta.push_back(6.0 + sc(i, 1) * std::sqrt(2.0) * std::cos(2.0 * std::numbers::pi * t));
            }
            cohort.push_back(c);
        }
        const CohortSummary s = cohort_fpca_summary(cohort, 0.999);
        REQUIRE(s.fpca.components() == 2);
        CHECK(s.component_pve[0] + s.component_pve[1] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(s.component_pve[0] >= s.component_pve[1]);
        // First component lives in the alpha half, the second in the beta half.
        const Eigen::VectorXd phi1 = s.fpca.eigenfunctions.col(0);
        const Eigen::VectorXd phi2 = s.fpca.eigenfunctions.col(1);
        const auto ri = static_cast<Eigen::Index>(r);
        CHECK(phi1.tail(ri).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK(phi2.head(ri).cwiseAbs().maxCoeff() <= 1e-6);
        for (std::size_t v = 0; v < r; ++v) {
            const double t = grid[v];
            CHECK(std::fabs(phi1(static_cast<Eigen::Index>(v))) ==
                  doctest::Approx(std::sqrt(2.0) * std::fabs(std::sin(2.0 * std::numbers::pi * t))).scale(1.0).epsilon(1e-6));
        }
        CHECK(s.extremes.size() == 4);
        CHECK(s.extremes[0].quantile_level == 0.1);
        CHECK(s.extremes[1].quantile_level == 0.9);
        CHECK(s.extremes[0].score < s.extremes[1].score);
        CHECK(!s.extremes[0].clamped);
    }
    SUBCASE("heterogeneous cohort") {
        const CohortSummary s = cohort_fpca_summary(simulated_cohort(15, 21, 9), 0.9);
        double total = 0.0;
        for (std::size_t h = 0; h < s.component_pve.size(); ++h) {
            CHECK(s.component_pve[h] > 0.0);
            if (h > 0) CHECK(s.component_pve[h] <= s.component_pve[h - 1]);
            total += s.component_pve[h];
        }
        CHECK(total <= 1.0 + 1e-12);
        CHECK(total >= 0.9);
        CHECK(s.extremes.size() == 2 * std::min<std::size_t>(3, s.fpca.components()));
    }
    SUBCASE("reconstructions below zero are clamped") {
        // alpha = 5 + s1 (1, -1) + s2 (1, 1) with uncorrelated scores; the
        // first component alone at the lowest score reaches alpha = 0.
        const std::vector<double> grid{0.0, 1.0};
        const double s1[] = {-5, 5, -1, 1}, s2[] = {1, 1, -1, -1};
        std::vector<BetaCurve> cohort;
        for (int i = 0; i < 4; ++i) cohort.push_back({grid, {5 + s1[i] + s2[i], 5 - s1[i] + s2[i]}, {1, 1}});
        const CohortSummary s = cohort_fpca_summary(cohort, 0.9, 0.0, 1.0);
        REQUIRE(s.fpca.components() == 1);
        const ComponentExtreme& low = s.extremes[0].curve.alpha[0] < s.extremes[1].curve.alpha[0] ? s.extremes[0] : s.extremes[1];
        CHECK(low.clamped);
        CHECK(low.curve.alpha[0] == 1e-6);
    }
    CHECK_THROWS_AS(cohort_fpca_summary(simulated_cohort(2, 5, 1), 0.9), DataError);
}

TEST_CASE("out-of-sample log-likelihood") {
    const std::vector<double> grid = regular_grid(0.0, 1.0, 11);
    const Dataset holdout({0.1, 0.5, 0.77}, {0.3, 0.9, 0.01});
    CHECK(oos_mean_loglik(constant_curve(grid, 1, 1), holdout) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));

    const BetaCurve c = curve_from(toy_curve(), grid);
    const Dataset one({0.33}, {0.4});
    CHECK(oos_mean_loglik(c, one) == beta_log_density(0.4, c.log_params_at(0.33)));
    CHECK_THROWS_AS(oos_mean_loglik(c, Dataset()), DataError);

    // Truth on toy data against a Monte Carlo estimate of the expected log-likelihood.
    const BetaCurve fine = curve_from(toy_curve(), regular_grid(0.0, 1.0, 1001));
    const Dataset toy = simulate_dataset(201, 31, toy_curve());
    const double got = oos_mean_loglik(fine, toy);
    CounterRng rng(4242);
    const int draws = 1000000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < draws; ++k) {
        const double t = static_cast<double>(rng.below(201)) / 200.0;
        const ToyValues tv = toy_param_functions(t);
        const double y = clamp_unit(sample_beta({tv.alpha, tv.beta}, rng));
        const double l = beta_log_density(y, ParamLog{tv.delta, tv.eta});
        s += l;
        s2 += l * l;
    }
    const double mc = s / draws;
    const double sd = std::sqrt(s2 / draws - mc * mc);
    // Spread of a 201-point mean plus the Monte Carlo error.
    const double se = std::sqrt(sd * sd / 201.0 + sd * sd / draws);
    MESSAGE("oos " << got << " vs monte carlo " << mc << " (se " << se << ")");
    CHECK(std::fabs(got - mc) <= 3.0 * se);
}

TEST_CASE("paired t-test") {
    const TTestResult r = paired_t_test({1, 2, 3}, {1.1, 2.0, 3.2});
    CHECK(r.df == 2.0);
    CHECK(r.t == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-12));
    const boost::math::students_t dist(2.0);
    const double p = 2.0 * boost::math::cdf(dist, -std::fabs(r.t));
    CHECK(r.p_value == doctest::Approx(p).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(0.2254).epsilon(1e-3));
    CHECK(r.mean_diff_sign == -1);

    const TTestResult s = paired_t_test({1.1, 2.0, 3.2}, {1, 2, 3});
    CHECK(s.t == doctest::Approx(-r.t).epsilon(1e-14));
    CHECK(s.p_value == doctest::Approx(r.p_value).epsilon(1e-14));
    CHECK(s.mean_diff_sign == 1);

    CounterRng rng(8);
    for (int k = 0; k < 20; ++k) {
        std::vector<double> x, y;
        const int n = 2 + static_cast<int>(rng.below(30));
        for (int i = 0; i < n; ++i) {
            x.push_back(rng.normal());
            y.push_back(rng.normal() + 0.3);
        }
        const TTestResult t = paired_t_test(x, y);
        const double ref = 2.0 * boost::math::cdf(boost::math::students_t(n - 1.0), -std::fabs(t.t));
        CHECK(t.p_value == doctest::Approx(ref).epsilon(1e-10));
    }

    CHECK_THROWS_AS(paired_t_test({1, 2, 3}, {1, 2, 3}), DataError);
    CHECK_THROWS_AS(paired_t_test({1, 2}, {1, 2, 3}), DataError);
    CHECK_THROWS_AS(paired_t_test({1}, {2}), DataError);
}
