#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fieldkde/fields.hpp"
#include "fieldkde/quadrature.hpp"
#include "fieldkde/rng.hpp"
#include "fieldkde/stats.hpp"

using namespace fieldkde;

namespace {

InnovationSpec normal1() { return {InnovationDist::Normal, 1.0}; }

FieldSpec delta_field() {
    return FieldSpec::linear(CoefficientMap::stored(1, {{IndexPoint({0}), 1.0}}), normal1());
}

FieldSpec geometric_field(int radius = 0) {
    return FieldSpec::linear(CoefficientMap::geometric(1, 1.0, 0.5, radius), normal1());
}

// Standard error of the mean from batch means; robust to site dependence.
double batch_se(const std::vector<double>& xs, std::size_t batches) {
    std::size_t per = xs.size() / batches;
    std::vector<double> means;
    for (std::size_t b = 0; b < batches; ++b) {
        double m = 0.0;
        for (std::size_t i = b * per; i < (b + 1) * per; ++i) m += xs[i];
        means.push_back(m / static_cast<double>(per));
    }
    return stats::mean_se(means).se;
}

}  // namespace

TEST_CASE("identity and zero filters") {
    Region region = Region::cube(1, 64);
    FieldSample x = linear_sample(delta_field(), region, 5, 0);
    InnovationPatch patch =
        draw_patch(normal1(), Region::box(region.bounding_box()), 5, 0);
    for (std::size_t i = 0; i < x.values.size(); ++i)
        CHECK(x.values[i] == patch.values[i]);

    FieldSpec zero = FieldSpec::linear(CoefficientMap::stored(1, {{IndexPoint({0}), 0.0}}),
                                       normal1());
    FieldSample z = linear_sample(zero, region, 5, 0);
    for (double v : z.values) CHECK(v == 0.0);
}

TEST_CASE("geometric filter variance matches the series") {
    FieldSpec spec = geometric_field(20);
    Region region = Region::cube(1, 100000);
    FieldSample x = linear_sample(spec, region, 31, 0);
    std::vector<double> sq(x.values.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = x.values[i] * x.values[i];
    double mean_sq = stats::mean_se(sq).mean;
    double se = batch_se(sq, 100);
    CHECK(std::fabs(mean_sq - 5.0 / 3.0) < 3.0 * se);
}

TEST_CASE("field samples regenerate bit-identically") {
    FieldSpec spec = geometric_field();
    Region region = Region::cube(1, 256);
    FieldSample a = linear_sample(spec, region, 7, 3);
    FieldSample b = linear_sample(spec, region, 7, 3);
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("volterra samples") {
    VolterraPairs pairs =
        VolterraPairs::make(1, {{IndexPoint({1}), IndexPoint({2}), 0.5}});
    FieldSpec spec = FieldSpec::volterra(pairs, normal1());
    Region region = Region::cube(1, 100000);
    FieldSample x = volterra_sample(spec, region, 13, 0);

    // X_i = 0.5 ε_{i-1} ε_{i-2} pathwise
    InnovationPatch patch =
        draw_patch(normal1(), Region::box(region.bounding_box().inflated(2)), 13, 0);
    for (int i : {0, 1, 57}) {
        IndexPoint site({i});
        double expect = 0.5 * patch.at(site - IndexPoint({1})) * patch.at(site - IndexPoint({2}));
        CHECK(x.at_index(*region.index_of(site)) == doctest::Approx(expect).epsilon(1e-15));
    }

    auto ms = stats::mean_se(x.values);
    CHECK(std::fabs(ms.mean) < 4.0 * batch_se(x.values, 100));
    std::vector<double> sq(x.values.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = x.values[i] * x.values[i];
    CHECK(std::fabs(stats::mean_se(sq).mean - 0.25) < 3.0 * batch_se(sq, 100));

    FieldSpec empty = FieldSpec::volterra(VolterraPairs::make(1, {}), normal1());
    FieldSample z = volterra_sample(empty, Region::cube(1, 32), 1, 0);
    for (double v : z.values) CHECK(v == 0.0);

    CHECK_THROWS_AS(
        VolterraPairs::make(1, {{IndexPoint({1}), IndexPoint({1}), 0.3}}),
        std::invalid_argument);
}

TEST_CASE("subordination") {
    FieldSpec spec = geometric_field();
    Region region = Region::cube(1, 512);
    FieldSample x = linear_sample(spec, region, 21, 0);

    FieldSample same = subordinate(x, SubordinationMap::parse("identity"));
    for (std::size_t i = 0; i < x.values.size(); ++i) CHECK(same.values[i] == x.values[i]);

    FieldSample zero = subordinate(x, SubordinationMap::parse("zero"));
    for (double v : zero.values) CHECK(v == 0.0);
    CHECK(SubordinationMap::parse("zero").lipschitz() == 0.0);

    SubordinationMap tanh_map = SubordinationMap::parse("tanh");
    FieldSample y = subordinate(x, tanh_map);
    for (double v : y.values) CHECK((v > -1.0 && v < 1.0));
    for (std::size_t i = 1; i < x.values.size(); ++i)
        CHECK(std::fabs(y.values[i] - y.values[i - 1]) <=
              tanh_map.lipschitz() * std::fabs(x.values[i] - x.values[i - 1]) + 1e-15);
}

TEST_CASE("gaussian linear marginal density") {
    // a0=1: standard normal
    DensityModel f1 = marginal_density_linear_gaussian(delta_field());
    CHECK(f1(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
    // a0=2: N(0,4)
    FieldSpec doubled =
        FieldSpec::linear(CoefficientMap::stored(1, {{IndexPoint({0}), 2.0}}), normal1());
    CHECK(marginal_density_linear_gaussian(doubled)(0.0) ==
          doctest::Approx(0.19947114020071635).epsilon(1e-12));
    // geometric: N(0, 5/3)
    DensityModel fg = marginal_density_linear_gaussian(geometric_field());
    double expect = 1.0 / std::sqrt(2.0 * 3.14159265358979323846 * (5.0 / 3.0));
    CHECK(std::fabs(fg(0.0) - expect) < 1e-10);

    CHECK_THROWS_AS(
        marginal_density_linear_gaussian(
            FieldSpec::linear(CoefficientMap::stored(1, {{IndexPoint({0}), 1.0}}),
                              InnovationSpec{InnovationDist::Uniform, 1.0})),
        std::invalid_argument);
    // all-zero field: degenerate marginal
    CHECK_THROWS_AS(
        marginal_density_linear_gaussian(FieldSpec::linear(
            CoefficientMap::stored(1, {{IndexPoint({0}), 0.0}}), normal1())),
        std::invalid_argument);
}

TEST_CASE("sampled marginal matches the exact density (KS)") {
    // moderate dependence keeps the empirical-CDF inflation inside the 1.5x
    // slack of the iid critical value
    FieldSpec spec =
        FieldSpec::linear(CoefficientMap::geometric(1, 1.0, 0.25), normal1());
    DensityModel f = marginal_density_linear_gaussian(spec);
    Region region = Region::cube(1, 100000);
    FieldSample x = linear_sample(spec, region, 2024, 0);
    std::vector<double> sorted = x.values;
    std::sort(sorted.begin(), sorted.end());
    double d = stats::ks_statistic(sorted, [&](double t) { return f.cdf(t); });
    CHECK(d < 1.36 / std::sqrt(1e5) * 1.5);
}

TEST_CASE("pair densities") {
    // independent case: product law, zero gap
    PairDensity ind = pair_density_linear_gaussian(delta_field(), IndexPoint({5}));
    CHECK(ind.covariance == 0.0);
    CHECK_FALSE(ind.degenerate);
    CHECK(ind.sup_product_gap(4.0, 20) < 1e-12);

    // MA(1): correlation 1/2 at lag 1
    FieldSpec ma1 = FieldSpec::linear(
        CoefficientMap::stored(1, {{IndexPoint({0}), 1.0}, {IndexPoint({1}), 1.0}}), normal1());
    PairDensity pd = pair_density_linear_gaussian(ma1, IndexPoint({1}));
    CHECK(pd.variance == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(pd.correlation() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_FALSE(pd.degenerate);
    CHECK(pd.sup_product_gap(4.0, 30) > 0.0);
    CHECK(std::isfinite(pd.sup_product_gap(4.0, 30)));

    // no overlapping lags: independent again
    PairDensity far = pair_density_linear_gaussian(ma1, IndexPoint({3}));
    CHECK(far.covariance == 0.0);

    CHECK_THROWS_AS(pair_density_linear_gaussian(ma1, IndexPoint({0})), std::invalid_argument);
}

TEST_CASE("linear split") {
    FieldSpec spec = geometric_field();
    LinearSplit full = linear_split(spec, spec.coeffs.radius());
    CHECK(full.tail_variance == 0.0);
    CHECK(full.inner_entries.size() == spec.coeffs.entries_within().size());

    LinearSplit one = linear_split(spec, 1);
    CHECK(std::fabs(one.tail_variance - 1.0 / 6.0) < 1e-9);

    FieldSpec id = delta_field();
    LinearSplit zero = linear_split(id, 0);
    CHECK(zero.tail_variance == 0.0);
    REQUIRE(zero.inner_entries.size() == 1);
    CHECK(zero.inner_entries[0].second == 1.0);
}

TEST_CASE("truncation consistency under radius doubling") {
    const int r1 = 4, r2 = 8;
    FieldSpec narrow = geometric_field(r1);
    FieldSpec wide = geometric_field(r2);
    Region region = Region::cube(1, 4096);
    FieldSample a = linear_sample(narrow, region, 404, 0);
    FieldSample b = linear_sample(wide, region, 404, 0);
    double ss = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        double d = a.values[i] - b.values[i];
        ss += d * d;
    }
    double rms = std::sqrt(ss / static_cast<double>(a.values.size()));
    double bound = std::sqrt(narrow.coeffs.law_l2_tail(r1));
    CHECK(rms <= 1.25 * bound);
    CHECK(rms > 0.0);
}

TEST_CASE("stationarity: disjoint translates are exchangeable") {
    FieldSpec spec = geometric_field();
    Region region = Region::cube(1, 320);
    const int reps = 200;
    std::vector<double> diffs(reps);
    for (int r = 0; r < reps; ++r) {
        FieldSample x = sample_field(spec, region, 888, static_cast<std::uint64_t>(r));
        double ma = 0.0, mb = 0.0;
        for (int i = 0; i < 100; ++i) {
            ma += x.values[static_cast<std::size_t>(i)];
            mb += x.values[static_cast<std::size_t>(i) + 200];
        }
        diffs[static_cast<std::size_t>(r)] = (ma - mb) / 100.0;
    }
    // sign-flip permutation test on the paired block means
    double t_obs = 0.0;
    for (double d : diffs) t_obs += d;
    t_obs = std::fabs(t_obs);
    int exceed = 0;
    const int flips = 400;
    for (int f = 0; f < flips; ++f) {
        double t = 0.0;
        for (int r = 0; r < reps; ++r) {
            std::uint64_t h = rng::hash_counters(99, static_cast<std::uint64_t>(f),
                                                 rng::Role::Scalar,
                                                 static_cast<std::uint64_t>(r));
            t += (h & 1) ? diffs[static_cast<std::size_t>(r)]
                         : -diffs[static_cast<std::size_t>(r)];
        }
        if (std::fabs(t) >= t_obs) ++exceed;
    }
    double p_value = static_cast<double>(exceed) / flips;
    CHECK(p_value > 0.05);
}

TEST_CASE("numeric baseline density approximates the exact law") {
    DensityModel base = DensityModel::numeric_baseline(delta_field(), 300000, 77);
    DensityModel exact = DensityModel::exact_normal(1.0);
    for (double x : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0})
        CHECK(base(x) == doctest::Approx(exact(x)).epsilon(0.05));
    CHECK(base.mass_within(8.0) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("window budget guard") {
    FieldSpec spec = geometric_field();
    CHECK_THROWS_AS(linear_sample(spec, Region::cube(1, 4096), 1, 0, 128),
                    std::runtime_error);
    FieldSpec vol = FieldSpec::volterra(
        VolterraPairs::make(1, {{IndexPoint({1}), IndexPoint({2}), 0.5}}), normal1());
    CHECK_THROWS_AS(volterra_sample(vol, Region::cube(1, 4096), 1, 0, 128),
                    std::runtime_error);
}

TEST_CASE("exact density integrates to one") {
    DensityModel f = marginal_density_linear_gaussian(geometric_field());
    double mass = quadrature::integrate([&](double x) { return f(x); }, -12.0 * f.sd(),
                                        12.0 * f.sd(), 1e-12, 1e-12);
    CHECK(std::fabs(mass - 1.0) < 1e-8);
    CHECK(f.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("coefficient map internals") {
    CoefficientMap g = CoefficientMap::geometric(2, 1.0, 0.5, 3);
    CHECK(g.value(IndexPoint({0, 0})) == 1.0);
    CHECK(g.value(IndexPoint({1, -1})) == 0.5);
    CHECK(g.value(IndexPoint({4, 0})) == 0.0);  // beyond truncation
    CHECK(g.entries_within(1).size() == 9);
    // stored duplicate rejection
    CHECK_THROWS_AS(
        CoefficientMap::stored(1, {{IndexPoint({1}), 0.5}, {IndexPoint({1}), 0.25}}),
        std::invalid_argument);
    // law tails: certified series against a long plain sum
    double tail = g.law_weighted_abs_tail(2, 2.5);
    double oracle = 0.0;
    for (long k = 3; k <= 200; ++k) {
        double shell = std::pow(2.0 * k + 1.0, 2) - std::pow(2.0 * k - 1.0, 2);
        oracle += std::pow(static_cast<double>(k), 2.5) * shell * std::pow(0.5, k);
    }
    CHECK(tail == doctest::Approx(oracle).epsilon(1e-10));
}
