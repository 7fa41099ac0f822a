#include "doctest.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <vector>

#include "rwald/detector.hpp"
#include "rwald/disturbance.hpp"
#include "rwald/geometry.hpp"
#include "rwald/random.hpp"
#include "rwald/theory.hpp"

using namespace rwald;

namespace {

constexpr Complex kJ{0.0, 1.0};

CVector vec(std::initializer_list<Complex> xs) {
    CVector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (const auto& x : xs) {
        v[i++] = x;
    }
    return v;
}

CVector random_vector(std::size_t n, RandomStream& rng) {
    return sample_innovations(InnovationSpec::gaussian(), n, rng);
}

// v^H G v with G the explicit banded matrix [G]_{ij} = c_i conj(c_j), |i - j| <= l.
double dense_band_form(const CVector& v, const CVector& c, std::size_t lag) {
    const Eigen::Index n = v.size();
    CMatrix g = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (static_cast<std::size_t>(std::abs(i - j)) <= lag) {
                g(i, j) = c[i] * std::conj(c[j]);
            }
        }
    }
    const Complex q = v.dot(g * v);
    REQUIRE(std::abs(q.imag()) <= 1e-10 * (std::abs(q) + 1.0));
    return q.real();
}

DetectorConfig with_lag(std::size_t lag) {
    DetectorConfig cfg;
    cfg.truncation_lag = lag;
    return cfg;
}

}  // namespace

TEST_SUITE("detector") {

TEST_CASE("least-squares estimate hand values") {
    const CVector v = vec({1.0, 1.0});
    CHECK(std::abs(ls_estimate(v, v) - 1.0) < 1e-15);
    CHECK(std::abs(ls_estimate(vec({1.0, -1.0}), v)) < 1e-15);
    CHECK(std::abs(ls_estimate(vec({3.0, 1.0}), v) - 2.0) < 1e-15);
    CHECK_THROWS_AS(ls_estimate(v, vec({0.0, 0.0})), std::invalid_argument);
    CHECK_THROWS_AS(ls_estimate(vec({1.0}), v), std::invalid_argument);
}

TEST_CASE("residuals") {
    const CVector v = vec({1.0, 1.0});
    CHECK(residuals(v, v, 1.0).cwiseAbs().maxCoeff() == 0.0);
    const CVector r = residuals(vec({1.0, -1.0}), v, 0.0);
    CHECK(r[0] == Complex(1.0));
    CHECK(r[1] == Complex(-1.0));
    CHECK_THROWS_AS(residuals(vec({1.0}), v, 0.0), std::invalid_argument);

    RandomStream rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 40;
        const CVector x = random_vector(n, rng);
        const CVector vv = random_vector(n, rng);
        const CVector c = residuals(x, vv, ls_estimate(x, vv));
        CHECK(std::abs(vv.dot(c)) <= 1e-10 * vv.norm() * x.norm());
    }
}

TEST_CASE("banded quadratic form hand values") {
    CHECK(hac_quadratic_form(vec({1.0, 1.0}), vec({1.0, -1.0}), 0) == doctest::Approx(2.0));
    CHECK(hac_quadratic_form(vec({1.0, 1.0, 1.0}), vec({1.0, kJ, -1.0}), 1) == doctest::Approx(3.0));
    CHECK_THROWS_AS(hac_quadratic_form(vec({1.0, 1.0}), vec({1.0, 1.0}), 2), std::invalid_argument);
}

TEST_CASE("banded quadratic form equals the dense band matrix") {
    RandomStream rng(2718);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 16;
        const std::size_t lag = rng() % n;
        const CVector v = random_vector(n, rng);
        const CVector c = random_vector(n, rng);
        const double dense = dense_band_form(v, c, lag);
        const double fast = hac_quadratic_form(v, c, lag);
        CHECK(std::abs(fast - dense) <= 1e-10 * std::abs(dense));
    }
}

TEST_CASE("full band collapses to the squared projection") {
    RandomStream rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + trial % 20;
        const CVector v = random_vector(n, rng);
        const CVector c = random_vector(n, rng);
        CHECK(hac_quadratic_form(v, c, n - 1) == doctest::Approx(std::norm(v.dot(c))).epsilon(1e-10));
    }
}

TEST_CASE("default truncation lag") {
    CHECK(default_truncation_lag(10000) == 10);
    CHECK(default_truncation_lag(16) == 2);
    CHECK(default_truncation_lag(2) == 1);
    CHECK(default_truncation_lag(1) == 0);
    CHECK(default_truncation_lag(15) == 1);
    CHECK(default_truncation_lag(81) == 3);
    CHECK(default_truncation_lag(8192) == 9);
    for (std::size_t n = 2; n < 5000; ++n) {
        const std::size_t l = default_truncation_lag(n);
        CHECK(l < n);
        CHECK(l * l * l * l <= n);
        CHECK((l + 1) * (l + 1) * (l + 1) * (l + 1) > n);
    }
    CHECK(lag_exceeds_consistency_bound(30, 10000));
    CHECK_FALSE(lag_exceeds_consistency_bound(10, 10000));
}

TEST_CASE("lag resolution") {
    DetectorConfig cfg;
    CHECK(cfg.resolve_lag(10000) == 10);
    cfg.truncation_lag = 4;
    CHECK(cfg.resolve_lag(100) == 4);
    CHECK_THROWS_AS(cfg.resolve_lag(4), std::invalid_argument);
    cfg.pfa_nominal = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.pfa_nominal = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("threshold") {
    CHECK(threshold_for_pfa(std::exp(-1.0)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(std::abs(threshold_for_pfa(1e-4) - 18.420680743952367) < 1e-12);
    for (double p : {1e-1, 1e-2, 1e-4}) {
        CHECK(std::abs(chi2_2_sf(threshold_for_pfa(p)) - p) <= 1e-12 * p);
    }
    CHECK_THROWS_AS(threshold_for_pfa(0.0), std::invalid_argument);
    CHECK_THROWS_AS(threshold_for_pfa(1.0), std::invalid_argument);
}

TEST_CASE("wald statistic hand case") {
    const auto out = wald_statistic(vec({1.0, -1.0}), vec({1.0, 1.0}), with_lag(0));
    CHECK(std::abs(out.alpha_hat) == 0.0);
    CHECK(out.denominator == doctest::Approx(2.0));
    CHECK(out.statistic == 0.0);
    CHECK_FALSE(out.decide_h1);
    CHECK_FALSE(out.degenerate);
    CHECK(out.truncation_lag == 0);
}

TEST_CASE("wald statistic degenerate input") {
    const CVector v = virtual_steering(0.1, 8).values;
    auto out = wald_statistic(v, v, DetectorConfig{});
    CHECK(out.degenerate);
    CHECK_FALSE(out.decide_h1);
    DetectorConfig strict;
    strict.degenerate_policy = DegeneratePolicy::error;
    CHECK_THROWS_AS(wald_statistic(v, v, strict), DegenerateStatistic);
    CHECK_THROWS_AS(wald_statistic(v, CVector::Zero(8), DetectorConfig{}), std::invalid_argument);
}

TEST_CASE("wald statistic is scale invariant and matches the estimator form") {
    RandomStream rng(1234);
    const Complex scales[] = {2.0, kJ, Complex(-0.5, 0.5)};
    int degenerate = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 4 + trial % 60;
        const CVector x = random_vector(n, rng);
        const CVector v = random_vector(n, rng);
        const auto cfg = with_lag(trial % 3);
        const auto base = wald_statistic(x, v, cfg);
        if (base.degenerate) {
            // The truncated estimator can be indefinite at tiny N.
            ++degenerate;
            continue;
        }
        CHECK(base.statistic >= 0.0);
        CHECK(base.decide_h1 == (base.statistic > base.threshold));
        for (const auto& k : scales) {
            const auto scaled = wald_statistic(CVector(k * x), v, cfg);
            CHECK(std::abs(scaled.statistic - base.statistic) <= 1e-9 * base.statistic);
        }
        // 2 N |alpha_hat|^2 / (A_N^{-2} B_N), A_N = ||v||^2 / N, B_N = v^H G v / N.
        const double a_n = v.squaredNorm() / double(n);
        const double b_n = base.denominator / double(n);
        const double estimator_form = 2.0 * double(n) * std::norm(base.alpha_hat) * a_n * a_n / b_n;
        CHECK(estimator_form == doctest::Approx(base.statistic).epsilon(1e-10));
    }
    CHECK(degenerate < 50);
}

TEST_CASE("white gaussian null distribution is chi-square with two degrees of freedom") {
    constexpr std::size_t kN = 4096;
    constexpr std::size_t kTrials = 100000;
    const CVector v = virtual_steering(0.0, kN).values;
    const auto cfg = with_lag(0);
    std::vector<double> stats;
    stats.reserve(kTrials);
    for (std::size_t t = 0; t < kTrials; ++t) {
        RandomStream rng = make_stream(99, t);
        stats.push_back(wald_statistic(random_vector(kN, rng), v, cfg).statistic);
    }
    std::sort(stats.begin(), stats.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < kTrials; ++i) {
        const double f = 1.0 - std::exp(-stats[i] / 2.0);
        ks = std::max({ks, double(i + 1) / kTrials - f, f - double(i) / kTrials});
    }
    CHECK(ks < 0.01);
}

TEST_CASE("cost grows linearly in N") {
    RandomStream rng(6);
    auto time_for = [&](std::size_t n) {
        const CVector x = random_vector(n, rng);
        const CVector v = virtual_steering(0.2, n).values;
        const auto cfg = with_lag(8);
        double sink = 0.0;
        double best = 1e300;
        for (int rep = 0; rep < 5; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            for (int i = 0; i < 20; ++i) {
                sink += wald_statistic(x, v, cfg).statistic;
            }
            const auto t1 = std::chrono::steady_clock::now();
            best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
        }
        CHECK(sink > 0.0);
        return best;
    };
    const double small = time_for(1 << 15);
    const double large = time_for(1 << 16);
    CHECK(large / small < 3.0);
}

}  // TEST_SUITE
