#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fieldkde/rng.hpp"
#include "fieldkde/stats.hpp"

using namespace fieldkde;

TEST_CASE("normal quantile inverts the CDF") {
    CHECK(stats::normal_quantile(0.5) == 0.0);
    CHECK(stats::normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(stats::normal_quantile(0.0013498980316300945) ==
          doctest::Approx(-3.0).epsilon(1e-11));
    for (int i = 1; i <= 999; ++i) {
        double p = i / 1000.0;
        CHECK(stats::normal_cdf(stats::normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    }
    // far tails round-trip too
    for (double p : {1e-12, 1e-9, 1e-6, 1.0 - 1e-9}) {
        double z = stats::normal_quantile(p);
        CHECK(stats::normal_cdf(z) == doctest::Approx(p).epsilon(1e-8));
    }
    CHECK_THROWS_AS(stats::normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(stats::normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("KS statistic matches the dense-grid oracle") {
    const std::size_t n = 500;
    std::vector<double> sample(n);
    for (std::size_t i = 0; i < n; ++i)
        sample[i] = stats::normal_quantile(
            rng::to_unit_open(rng::hash_counters(42, 0, rng::Role::Scalar, i)));
    std::sort(sample.begin(), sample.end());
    auto cdf = [](double t) { return stats::normal_cdf(t); };
    double exact = stats::ks_statistic(sample, cdf);
    double grid = stats::ks_statistic_grid(sample, cdf, -6.0, 6.0, 20001);
    CHECK(std::fabs(exact - grid) < 1e-3);
    CHECK(exact >= grid - 1e-12);  // the sup is attained at jump points
    CHECK(exact <= 1.0);
    CHECK(exact >= 0.0);
}

TEST_CASE("KS statistic on tiny hand cases") {
    // single observation at the median: D = 1/2
    std::vector<double> one = {0.0};
    CHECK(stats::ks_statistic(one, [](double t) { return stats::normal_cdf(t); }) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("linear fit recovers an exact line") {
    std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> ys = {-0.5, -1.5, -2.5, -3.5};
    auto fit = stats::linear_fit(xs, ys);
    CHECK(fit.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("mean and standard error") {
    std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
    auto ms = stats::mean_se(xs);
    CHECK(ms.mean == doctest::Approx(2.5).epsilon(1e-15));
    // sd = sqrt(5/3), se = sd/2
    CHECK(ms.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("parallel_for is deterministic and complete") {
    const std::size_t n = 1000;
    for (int workers : {1, 3, 8}) {
        std::vector<double> slots(n, 0.0);
        stats::parallel_for(n, workers, [&](std::size_t i) {
            slots[i] = std::sqrt(static_cast<double>(i));
        });
        stats::KahanSum s;
        for (double v : slots) s.add(v);
        static double reference = 0.0;
        if (workers == 1) reference = s.value();
        CHECK(s.value() == reference);
    }
}
