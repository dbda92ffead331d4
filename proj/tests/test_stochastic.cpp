#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "caprisk/rng.hpp"
#include "caprisk/stochastic.hpp"
#include "test_util.hpp"

using namespace caprisk;
using caprisk::test::make_series;
using caprisk::test::make_series_at;
using caprisk::test::raw_walk;

TEST_CASE("increments are per-day differences") {
    const auto d = increments(make_series("a", {0.10, 0.11, 0.12}));
    REQUIRE(d.size() == 2);
    CHECK(d[0] == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(d[1] == doctest::Approx(0.01).epsilon(1e-12));

    // A two-day gap normalizes to a per-day rate.
    const auto gap = increments(make_series_at("b", {0, 2}, {0.10, 0.12}));
    REQUIRE(gap.size() == 1);
    CHECK(gap[0] == doctest::Approx(0.01).epsilon(1e-12));

    const auto flat = increments(make_series("c", {0.5, 0.5, 0.5}));
    REQUIRE(flat.size() == 2);
    CHECK(flat[0] == 0.0);
    CHECK(flat[1] == 0.0);

    CHECK_THROWS_AS(increments(make_series("d", {0.5})), InsufficientDataError);
}

TEST_CASE("drift estimator is the sample mean") {
    CHECK(estimate_drift(std::vector<double>{0.01, 0.01, 0.01}) == doctest::Approx(0.01));
    CHECK(estimate_drift(std::vector<double>{0.02, 0.00}) == doctest::Approx(0.01));
    CHECK(estimate_drift(std::vector<double>{-0.01, 0.01}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(estimate_drift(std::vector<double>{}), InsufficientDataError);
}

TEST_CASE("variance estimator is the unbiased sample variance") {
    CHECK(estimate_variance(std::vector<double>{0.01, 0.01, 0.01}) == 0.0);
    CHECK(estimate_variance(std::vector<double>{0.0, 0.02}) ==
          doctest::Approx(0.0002).epsilon(1e-12));
    CHECK_THROWS_AS(estimate_variance(std::vector<double>{0.1}), InsufficientDataError);
}

TEST_CASE("estimators recover the parameters of a generated walk") {
    // Unit-variance daily walk, estimated over 1e5 increments.
    const CapacitySeries path = raw_walk(4242, 100'001, 0.0, 1.0);
    const auto d = increments(path);
    REQUIRE(d.size() == 100'000);
    const double n = static_cast<double>(d.size());
    CHECK(std::fabs(estimate_drift(d)) <= 4.0 / std::sqrt(n));
    CHECK(estimate_variance(d) == doctest::Approx(1.0).epsilon(0.02));

    const CapacitySeries drifty = raw_walk(7, 50'001, 0.003, 0.05);
    const auto dd = increments(drifty);
    CHECK(std::fabs(estimate_drift(dd) - 0.003) <= 4.0 * 0.05 / std::sqrt(50'000.0));
    CHECK(estimate_variance(dd) == doctest::Approx(0.0025).epsilon(0.03));
}

TEST_CASE("normality check accepts normal increments and rejects heavy tails") {
    const CounterRng rng(5150, 0);
    std::vector<double> normal_draws;
    normal_draws.reserve(10'000);
    for (int i = 0; i < 10'000; ++i) normal_draws.push_back(rng.normal(i));
    const NormalityReport ok = normality_check(normal_draws);
    CHECK(ok.passed);
    CHECK(ok.p_value >= 0.05);

    // Cauchy via inverse transform: wildly heavy tails.
    std::vector<double> cauchy;
    cauchy.reserve(10'000);
    for (int i = 0; i < 10'000; ++i) {
        cauchy.push_back(std::tan(std::numbers::pi * (rng.u01(i) - 0.5)));
    }
    const NormalityReport bad = normality_check(cauchy);
    CHECK_FALSE(bad.passed);
    CHECK(bad.statistic > 1e3);

    CHECK_THROWS_AS(normality_check(std::vector<double>(7, 0.1)), InsufficientDataError);
}

TEST_CASE("normality check calibrates near the nominal level") {
    // At alpha = 0.05 a correct test passes true normal samples ~95% of
    // the time; 1000 seeds at n = 1e4 keeps the binomial noise small.
    int passes = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        const CounterRng rng(9000 + static_cast<std::uint64_t>(t), 1);
        std::vector<double> xs;
        xs.reserve(10'000);
        for (int i = 0; i < 10'000; ++i) xs.push_back(rng.normal(i));
        if (normality_check(xs).passed) ++passes;
    }
    const double rate = static_cast<double>(passes) / trials;
    CHECK(rate >= 0.93);
    CHECK(rate <= 0.97);
}

TEST_CASE("zero skew leaves only the kurtosis term in the statistic") {
    // Symmetric three-point increments repeated: skewness is exactly zero.
    std::vector<double> d;
    for (int i = 0; i < 30; ++i) {
        d.push_back(-0.01);
        d.push_back(0.0);
        d.push_back(0.01);
    }
    const NormalityReport r = normality_check(d);
    // m2 = 2c^2/3, m4 = 2c^4/3 => excess kurtosis = 3/2 - 3 = -3/2.
    const double n = static_cast<double>(d.size());
    const double expected = n / 6.0 * (1.5 * 1.5 / 4.0);
    CHECK(r.statistic == doctest::Approx(expected).epsilon(1e-9));
    CHECK(r.p_value == doctest::Approx(std::exp(-0.5 * expected)).epsilon(1e-12));
}

TEST_CASE("constant increments are treated as degenerate-normal") {
    const NormalityReport r = normality_check(std::vector<double>(20, 0.004));
    CHECK(r.passed);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("complementary normal cdf matches high-precision references") {
    CHECK(norm_cdf_complement(0.0) == 0.5);
    CHECK(norm_cdf_complement(1.0) ==
          doctest::Approx(0.15865525393145705141).epsilon(1e-13));
    CHECK(norm_cdf_complement(-3.0) ==
          doctest::Approx(0.99865010196836990547).epsilon(1e-13));
    CHECK(norm_cdf_complement(2.5) ==
          doctest::Approx(0.006209665325776135167).epsilon(1e-12));
    CHECK(norm_cdf_complement(5.0) ==
          doctest::Approx(2.8665157187919391167e-7).epsilon(1e-12));
    CHECK(norm_cdf_complement(8.0) ==
          doctest::Approx(6.2209605742717841235e-16).epsilon(1e-10));
}

TEST_CASE("complementary normal cdf symmetry and monotonicity") {
    SequentialRng rng(11);
    double prev = 1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double x = -8.0 + 16.0 * i / 1000.0;
        const double v = norm_cdf_complement(x);
        CHECK(std::fabs(v + norm_cdf_complement(-x) - 1.0) <= 1e-12);
        CHECK(v <= prev);
        prev = v;
    }
    for (int i = 0; i < 200; ++i) {
        const double x = 16.0 * (rng.next_u01() - 0.5);
        CHECK(std::fabs(norm_cdf_complement(x) + norm_cdf_complement(-x) - 1.0) <= 1e-12);
    }
}

TEST_CASE("log complementary cdf agrees with the direct value and far tail") {
    for (double x : {-3.0, 0.0, 1.0, 5.0, 10.0, 25.0, 29.9}) {
        CHECK(log_norm_cdf_complement(x) ==
              doctest::Approx(std::log(norm_cdf_complement(x))).epsilon(1e-12));
    }
    // mpmath references beyond the erfc range.
    CHECK(log_norm_cdf_complement(35.0) ==
          doctest::Approx(-616.9751012619225134732).epsilon(1e-13));
    CHECK(log_norm_cdf_complement(50.0) ==
          doctest::Approx(-1254.831361139419901254).epsilon(1e-13));
    CHECK(log_norm_cdf_complement(100.0) ==
          doctest::Approx(-5005.524208694205088626).epsilon(1e-13));
    // Continuity across the series cutover at x = 30.
    const double below = log_norm_cdf_complement(std::nextafter(30.0, 0.0));
    const double above = log_norm_cdf_complement(30.0);
    CHECK(std::fabs(below - above) < 1e-9);
}

TEST_CASE("hitting probability analytic anchors") {
    const IncrementStats unit{0.0, 1.0, 100};

    SUBCASE("zero headroom is a certain hit") {
        for (double mu : {-0.3, 0.0, 0.7}) {
            const IncrementStats s{mu, 0.5, 10};
            CHECK(std::fabs(hitting_probability(Headroom{0.0}, Horizon{12.0}, s).probability -
                            1.0) <= 1e-12);
        }
    }

    SUBCASE("driftless case reduces to the reflection principle") {
        CHECK(hitting_probability(Headroom{1.0}, Horizon{1.0}, unit).probability ==
              doctest::Approx(0.31731050786291410283).epsilon(1e-12));
        SequentialRng rng(23);
        for (int i = 0; i < 500; ++i) {
            const double y = 0.01 + rng.next_u01();
            const double sigma2 = 0.01 + rng.next_u01();
            const double t = 0.5 + 200.0 * rng.next_u01();
            const IncrementStats s{0.0, sigma2, 10};
            const double p = hitting_probability(Headroom{y}, Horizon{t}, s).probability;
            const double expected = 2.0 * norm_cdf_complement(y / std::sqrt(sigma2 * t));
            CHECK(std::fabs(p - expected) <= 1e-9);
        }
    }

    SUBCASE("negative drift at long horizons approaches exp(2 y mu / sigma2)") {
        const IncrementStats s{-0.1, 1.0, 10};
        CHECK(std::fabs(hitting_probability(Headroom{1.0}, Horizon{1e6}, s).probability -
                        0.81873075307798185867) <= 1e-9);
        SequentialRng rng(29);
        for (int i = 0; i < 200; ++i) {
            const double y = 0.05 + rng.next_u01();
            const double mu = -(0.01 + 0.3 * rng.next_u01());
            const double sigma2 = 0.1 + rng.next_u01();
            const IncrementStats st{mu, sigma2, 10};
            const double p = hitting_probability(Headroom{y}, Horizon{1e6}, st).probability;
            CHECK(std::fabs(p - std::exp(2.0 * y * mu / sigma2)) <= 1e-6);
        }
    }

    SUBCASE("general closed-form values match an mpmath reference") {
        const IncrementStats mid{0.003, 2e-4, 10};
        CHECK(hitting_probability(Headroom{0.25}, Horizon{60.0}, mid).probability ==
              doctest::Approx(0.33970155730768889495).epsilon(1e-12));
        const IncrementStats neg{-0.002, 5e-4, 10};
        CHECK(hitting_probability(Headroom{0.15}, Horizon{45.0}, neg).probability ==
              doctest::Approx(0.15858426867731554687).epsilon(1e-12));
    }
}

TEST_CASE("hitting probability overflow guard") {
    // exponent 2 y mu / sigma2 = 700.00000...: the guarded log-space path.
    const IncrementStats g{0.01, 1e-5, 10};
    CHECK(hitting_probability(Headroom{0.35}, Horizon{35.0}, g).probability ==
          doctest::Approx(0.5106545813492936443).epsilon(1e-11));
    // exponent 699.6: the direct path, adjacent parameters, smooth value.
    CHECK(hitting_probability(Headroom{0.3498}, Horizon{35.0}, g).probability ==
          doctest::Approx(0.51492180419756585358).epsilon(1e-11));
    // exponent 2000.
    const IncrementStats x{0.2, 1e-4, 10};
    CHECK(hitting_probability(Headroom{0.5}, Horizon{2.4}, x).probability ==
          doctest::Approx(0.1010929180713228945).epsilon(1e-11));
}

TEST_CASE("hitting probability is monotone in horizon and headroom") {
    SequentialRng rng(101);
    for (int i = 0; i < 1000; ++i) {
        const double mu = 0.2 * (rng.next_u01() - 0.5);
        const double sigma2 = 1e-4 + 0.05 * rng.next_u01();
        const double y = 0.01 + 0.8 * rng.next_u01();
        const double t1 = 1.0 + 100.0 * rng.next_u01();
        const double t2 = t1 + 100.0 * rng.next_u01();
        const IncrementStats s{mu, sigma2, 10};
        const double p1 = hitting_probability(Headroom{y}, Horizon{t1}, s).probability;
        const double p2 = hitting_probability(Headroom{y}, Horizon{t2}, s).probability;
        CHECK(p2 >= p1 - 1e-12);
        const double y2 = y + rng.next_u01();
        const double q = hitting_probability(Headroom{y2}, Horizon{t1}, s).probability;
        CHECK(q <= p1 + 1e-12);
    }
}

TEST_CASE("degenerate zero-variance stats resolve deterministically") {
    const Horizon t{30.0};
    CHECK(hitting_probability(Headroom{0.02}, t, {0.001, 0.0, 5}).probability == 1.0);
    CHECK(hitting_probability(Headroom{0.05}, t, {0.001, 0.0, 5}).probability == 0.0);
    CHECK(hitting_probability(Headroom{0.0}, t, {-0.001, 0.0, 5}).probability == 1.0);
    CHECK(hitting_probability(Headroom{0.05}, t, {0.0, 0.0, 5}).probability == 0.0);
    CHECK(hitting_probability(Headroom{0.05}, t, {-0.01, 0.0, 5}).probability == 0.0);
    // Boundary: the drift line reaches y exactly at t.
    CHECK(hitting_probability(Headroom{0.03}, t, {0.001, 0.0, 5}).probability == 1.0);
}

TEST_CASE("hitting probability rejects invalid inputs") {
    const IncrementStats ok{0.0, 1.0, 10};
    CHECK_THROWS_AS(hitting_probability(Headroom{-0.1}, Horizon{1.0}, ok), ValidationError);
    CHECK_THROWS_AS(hitting_probability(Headroom{0.1}, Horizon{0.0}, ok), ValidationError);
    CHECK_THROWS_AS(hitting_probability(Headroom{0.1}, Horizon{1.0}, {0.0, -1.0, 10}),
                    ValidationError);
}

TEST_CASE("risk profile composes estimation, gating and the closed form") {
    const CapacitySeries walk = raw_walk(97, 101, 0.001, 0.02, 0.3);
    const std::vector<Horizon> horizons = {{30.0}, {60.0}, {90.0}};
    const auto profile = risk_profile(walk, horizons);
    REQUIRE(profile.size() == 3);

    const auto d = increments(walk);
    const IncrementStats stats{estimate_drift(d), estimate_variance(d),
                               static_cast<int>(d.size())};
    const Headroom y = headroom(walk);
    for (std::size_t i = 0; i < profile.size(); ++i) {
        CHECK(profile[i].probability ==
              hitting_probability(y, horizons[i], stats).probability);
        CHECK(profile[i].stats.mu == stats.mu);
    }
    // Non-decreasing across the growing horizons.
    CHECK(profile[0].probability <= profile[1].probability + 1e-12);
    CHECK(profile[1].probability <= profile[2].probability + 1e-12);
}

TEST_CASE("risk profile on a calm low-variance system starts near zero and grows") {
    const CapacitySeries calm = raw_walk(55, 121, 1e-5, 0.004, 0.45);
    const std::vector<Horizon> horizons = {{30.0}, {60.0}, {90.0}};
    const auto profile = risk_profile(calm, horizons);
    CHECK(profile[0].probability < 0.01);
    CHECK(profile[2].probability >= profile[0].probability);
}

TEST_CASE("risk profile raises a gate error carrying the report") {
    // A few huge jumps in otherwise small increments: kurtosis explodes.
    std::vector<double> used(40, 0.3);
    const CounterRng rng(3, 0);
    for (std::size_t i = 1; i < used.size(); ++i) {
        used[i] = used[i - 1] + 0.0005 * rng.normal(i);
    }
    used[10] += 0.2;
    used[25] -= 0.2;
    const CapacitySeries spiky = make_series("spiky", used);
    const std::vector<Horizon> horizons = {{30.0}};
    try {
        risk_profile(spiky, horizons);
        FAIL("expected NormalityGateError");
    } catch (const NormalityGateError& e) {
        CHECK_FALSE(e.report.passed);
        CHECK(e.report.p_value < 0.05);
    }
}
