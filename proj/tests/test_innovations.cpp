#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fieldkde/innovations.hpp"
#include "fieldkde/stats.hpp"

using namespace fieldkde;

namespace {

IndexPoint origin1() { return IndexPoint({0}); }

}  // namespace

TEST_CASE("rademacher support") {
    InnovationSpec spec{InnovationDist::Rademacher, 1.0};
    InnovationPatch patch = draw_patch(spec, Region::cube(1, 500), 3, 0);
    bool saw_plus = false, saw_minus = false;
    for (double v : patch.values) {
        CHECK((v == 1.0 || v == -1.0));
        saw_plus = saw_plus || v == 1.0;
        saw_minus = saw_minus || v == -1.0;
    }
    CHECK(saw_plus);
    CHECK(saw_minus);
}

TEST_CASE("patch determinism and window extension") {
    InnovationSpec spec{InnovationDist::Normal, 1.0};
    Region small = Region::cube(2, 4);
    Region big = Region::cube(2, 9);
    InnovationPatch a = draw_patch(spec, small, 11, 5);
    InnovationPatch b = draw_patch(spec, small, 11, 5);
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
    // point-keyed generation: the big window restricted to the small one is identical
    InnovationPatch c = draw_patch(spec, big, 11, 5);
    for (const auto& p : small.points()) CHECK(a.at(p) == c.at(p));
    // different stream gives different values
    InnovationPatch d = draw_patch(spec, small, 11, 6);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        any_diff = any_diff || a.values[i] != d.values[i];
    CHECK(any_diff);
}

TEST_CASE("normal sample mean obeys the CLT bound") {
    InnovationSpec spec{InnovationDist::Normal, 1.0};
    const std::size_t n = 100000;
    InnovationPatch patch = draw_patch(spec, Region::cube(1, static_cast<int>(n)), 1234, 0);
    auto ms = stats::mean_se(patch.values);
    CHECK(std::fabs(ms.mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    // variance sanity at 5 sigma of the chi-square fluctuation
    double ss = 0.0;
    for (double v : patch.values) ss += v * v;
    ss /= static_cast<double>(n);
    CHECK(std::fabs(ss - 1.0) < 5.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST_CASE("couple_at_origin changes exactly the origin") {
    InnovationSpec spec{InnovationDist::Normal, 1.0};
    Region window = Region::ball(2, 3);
    InnovationPatch patch = draw_patch(spec, window, 77, 0);
    InnovationPatch coupled = couple_at_origin(patch, spec);
    std::size_t diffs = 0;
    for (std::size_t i = 0; i < patch.values.size(); ++i)
        if (patch.values[i] != coupled.values[i]) ++diffs;
    CHECK(diffs == 1);
    IndexPoint origin({0, 0});
    CHECK(patch.at(origin) != coupled.at(origin));
    // idempotent substream: same prime draw both times
    InnovationPatch again = couple_at_origin(patch, spec);
    CHECK(coupled.at(origin) == again.at(origin));
    // origin outside the window
    Box off;
    off.lo = {2, 2};
    off.hi = {4, 4};
    InnovationPatch shifted = draw_patch(spec, Region::box(off), 77, 0);
    CHECK_THROWS_AS(couple_at_origin(shifted, spec), std::invalid_argument);
}

TEST_CASE("coupled difference has norm sqrt(2) for standard normal") {
    InnovationSpec spec{InnovationDist::Normal, 1.0};
    Region window = Region::cube(1, 1);  // only the origin
    const int reps = 10000;
    std::vector<double> sq(reps);
    for (int r = 0; r < reps; ++r) {
        InnovationPatch patch = draw_patch(spec, window, 19, static_cast<std::uint64_t>(r));
        InnovationPatch coupled = couple_at_origin(patch, spec);
        double d = patch.values[0] - coupled.values[0];
        sq[static_cast<std::size_t>(r)] = d * d;
    }
    auto ms = stats::mean_se(sq);
    // E(ε-ε')² = 2
    CHECK(std::fabs(ms.mean - 2.0) < 3.0 * ms.se);
}

TEST_CASE("marginal law of the replaced value (KS)") {
    InnovationSpec spec{InnovationDist::Normal, 1.0};
    Region window = Region::cube(1, 1);
    const int reps = 4000;
    std::vector<double> primes(reps);
    for (int r = 0; r < reps; ++r) {
        InnovationPatch patch = draw_patch(spec, window, 4242, static_cast<std::uint64_t>(r));
        primes[static_cast<std::size_t>(r)] = couple_at_origin(patch, spec).values[0];
    }
    std::sort(primes.begin(), primes.end());
    double d = stats::ks_statistic(primes, [&](double t) { return spec.cdf(t); });
    CHECK(d < 1.63 / std::sqrt(static_cast<double>(reps)));  // 1% critical value
}

TEST_CASE("p-norms match the quadrature oracle") {
    for (auto dist : {InnovationDist::Normal, InnovationDist::Uniform,
                      InnovationDist::Exponential, InnovationDist::Rademacher}) {
        InnovationSpec spec{dist, 1.0};
        for (double p : {1.0, 2.0, 3.0, 4.5}) {
            double closed = spec.diff_p_norm(p);
            double quad = spec.diff_p_norm_quadrature(p);
            CHECK(std::fabs(closed - quad) < 1e-6 * std::max(1.0, closed));
        }
        // second moments are exact
        CHECK(spec.p_norm(2.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(spec.diff_p_norm(2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("moment transforms are unbiased in distribution") {
    // uniform has variance sigma², exponential is centered
    for (auto dist : {InnovationDist::Uniform, InnovationDist::Exponential}) {
        InnovationSpec spec{dist, 1.0};
        InnovationPatch patch = draw_patch(spec, Region::cube(1, 60000), 5150, 0);
        auto ms = stats::mean_se(patch.values);
        CHECK(std::fabs(ms.mean) < 4.0 * ms.se + 1e-3);
        double ss = 0.0;
        for (double v : patch.values) ss += v * v;
        ss /= static_cast<double>(patch.values.size());
        CHECK(ss == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("invalid specs are rejected") {
    CHECK_THROWS_AS(InnovationSpec::parse("cauchy"), std::invalid_argument);
    CHECK_THROWS_AS(InnovationSpec::parse("normal", -1.0), std::invalid_argument);
    InnovationSpec spec{InnovationDist::Normal, 1.0};
    CHECK_THROWS_AS(spec.p_norm(0.5), std::invalid_argument);
    (void)origin1;
}
