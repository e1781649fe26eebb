#include <doctest.h>

#include <cmath>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>

#include "locbeta/error.hpp"
#include "locbeta/simulation.hpp"
#include "support.hpp"

using namespace locbeta;

TEST_CASE("toy shape functions") {
    const ToyValues a = toy_param_functions(0.0);
    CHECK(a.delta == doctest::Approx(2.8125).epsilon(1e-15));
    CHECK(a.alpha == doctest::Approx(16.65).epsilon(1e-3));
    const ToyValues b = toy_param_functions(0.5);
    CHECK(b.delta == 0.0);
    CHECK(b.alpha == 1.0);
    CHECK(b.eta == doctest::Approx(2.0625).epsilon(1e-15));
    CHECK(b.beta == doctest::Approx(7.866).epsilon(1e-3));
    const ToyValues c = toy_param_functions(1.0);
    CHECK(c.delta == doctest::Approx(-0.9375).epsilon(1e-15));
    CHECK(c.alpha == doctest::Approx(0.3916).epsilon(1e-3));
    for (const double t : {0.1, 0.33, 0.9}) {
        const ToyValues v = toy_param_functions(t);
        CHECK(v.alpha == std::exp(v.delta));
        CHECK(v.beta == std::exp(v.eta));
    }
}

TEST_CASE("gamma and beta variates have the right moments") {
    for (const double shape : {0.3, 1.0, 4.5}) {
        CounterRng rng(shape * 1000);
        const int n = 200000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double g = sample_gamma(shape, rng);
            CHECK_MESSAGE(g > 0.0, "non-positive gamma draw");
            s += g;
            s2 += g * g;
        }
        const double mean = s / n, var = s2 / n - mean * mean;
        CHECK(std::fabs(mean - shape) < 4.0 * std::sqrt(shape / n));
        CHECK(var == doctest::Approx(shape).epsilon(0.05));
    }
    CounterRng rng(5);
    const ParamNat p{2.5, 0.7};
    const MomentPair m = moments_map(p);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double y = sample_beta(p, rng);
        s += y;
        s2 += y * y;
    }
    CHECK(std::fabs(s / n - m.mu) < 4.0 * std::sqrt(m.sigma2 / n));
    CHECK((s2 / n - (s / n) * (s / n)) == doctest::Approx(m.sigma2).epsilon(0.03));
}

TEST_CASE("simulate_dataset") {
    const Dataset a = simulate_dataset(201, 7, toy_curve());
    const Dataset b = simulate_dataset(201, 7, toy_curve());
    const Dataset c = simulate_dataset(201, 8, toy_curve());
    CHECK(a.size() == 201);
    for (std::size_t j = 0; j < 201; ++j) {
        CHECK(a.times()[j] == doctest::Approx(j / 200.0).epsilon(1e-15));
        CHECK(a.values()[j] == b.values()[j]);
    }
    CHECK(std::vector<double>(a.values().begin(), a.values().end()) !=
          std::vector<double>(c.values().begin(), c.values().end()));

    // Mean near t = 0.5 over many seeds against the Beta mean.
    double s = 0.0, s2 = 0.0;
    int n = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const Dataset d = simulate_dataset(201, seed, toy_curve());
        const double y = d.values()[100];
        s += y;
        s2 += y * y;
        ++n;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::fabs(mean - 1.0 / (1.0 + std::exp(2.0625))) < 3.0 * se);
}

TEST_CASE("probability integral transform is uniform") {
    int pass = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Dataset d = simulate_dataset(201, seed, toy_curve());
        std::vector<double> u;
        for (std::size_t j = 0; j < d.size(); ++j) {
            const ToyValues v = toy_param_functions(d.times()[j]);
            u.push_back(BetaDistribution({v.alpha, v.beta}).cdf(d.values()[j]));
        }
        if (test::ks_uniform_pvalue(u) > 0.01) ++pass;
    }
    CHECK(pass >= 95);
}

TEST_CASE("multilevel curves") {
    const MultilevelData one = simulate_multilevel({30, 1, toy_curve(), 3});
    CHECK(one.grid == std::vector<double>{0.0});
    CHECK(one.values.rows() == 30);
    CHECK(one.values.cols() == 1);

    const MultilevelData ml = simulate_multilevel({500, 11, toy_curve(), 4});
    const MultilevelData again = simulate_multilevel({500, 11, toy_curve(), 4});
    CHECK(ml.values == again.values);
    for (std::size_t v = 0; v < ml.grid.size(); ++v) {
        const ToyValues tv = toy_param_functions(ml.grid[v]);
        const MomentPair m = moments_map({tv.alpha, tv.beta});
        const double mean = ml.values.col(static_cast<Eigen::Index>(v)).mean();
        // 4 SE keeps the family of 11 checks at a ~0.07% false alarm rate.
        CHECK(std::fabs(mean - m.mu) < 4.0 * std::sqrt(m.sigma2 / 500.0));
    }
    CHECK_THROWS_AS(simulate_multilevel({0, 5, toy_curve(), 1}), DataError);
}

TEST_CASE("subsampling without replacement") {
    const MultilevelData ml = simulate_multilevel({4, 5, toy_curve(), 9});
    const Dataset all = subsample_independent(ml, 20, 1);
    std::multiset<double> got(all.values().begin(), all.values().end());
    std::multiset<double> want(ml.values.data(), ml.values.data() + ml.values.size());
    CHECK(got == want);
    const Dataset s1 = subsample_independent(ml, 7, 2);
    const Dataset s2 = subsample_independent(ml, 7, 2);
    CHECK(std::equal(s1.values().begin(), s1.values().end(), s2.values().begin()));
    CHECK_THROWS_AS(subsample_independent(ml, 21, 1), DataError);
    CHECK_THROWS_AS(subsample_independent(ml, 0, 1), DataError);
}

TEST_CASE("day multiplicities of a subsample follow the hypergeometric law") {
    const std::size_t days = 212, per_day = 270, m = 1000, total = days * per_day;
    const double expected = static_cast<double>(m) / days;
    const double fpc = static_cast<double>(total - m) / static_cast<double>(total - 1);
    const boost::math::chi_squared chi(static_cast<double>(days - 1));
    int pass = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto idx = subsample_indices(total, m, seed);
        CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == m);
        std::vector<int> count(days, 0);
        for (const auto i : idx) ++count[i / per_day];
        double stat = 0.0;
        for (const int c : count) stat += (c - expected) * (c - expected) / expected;
        stat /= fpc;
        if (boost::math::cdf(boost::math::complement(chi, stat)) > 0.01) ++pass;
    }
    CHECK(pass >= 95);
}

TEST_CASE("individual curves are smooth, positive and reproducible") {
    const ParamCurve a = individual_param_curve(3, 11);
    const ParamCurve b = individual_param_curve(3, 11);
    const ParamCurve c = individual_param_curve(4, 11);
    for (const double t : {0.0, 0.4, 1.0}) {
        CHECK(a(t).alpha == b(t).alpha);
        CHECK(a(t).alpha > 0.0);
        CHECK(a(t).beta > 0.0);
        CHECK(a(t).alpha != c(t).alpha);
    }
}
