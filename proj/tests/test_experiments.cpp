#include <doctest.h>

#include <cmath>
#include <vector>

#include "fieldkde/experiments.hpp"

using namespace fieldkde;

namespace {

InnovationSpec normal1() { return {InnovationDist::Normal, 1.0}; }

FieldSpec geometric_field() {
    return FieldSpec::linear(CoefficientMap::geometric(1, 1.0, 0.5), normal1());
}

FieldSpec stored_geometric_field(int d, int radius) {
    std::vector<std::pair<IndexPoint, double>> entries;
    Region support = Region::ball(d, radius);
    for (const auto& s : support.points())
        entries.emplace_back(s, std::pow(2.0, -static_cast<double>(s.sup_norm())));
    return FieldSpec::linear(CoefficientMap::stored(d, std::move(entries)), normal1());
}

bool all_pass(const std::vector<Assertion>& as) {
    for (const auto& a : as)
        if (!a.pass) return false;
    return true;
}

const Assertion* find_assertion(const std::vector<Assertion>& as, const std::string& needle) {
    for (const auto& a : as)
        if (a.name.find(needle) != std::string::npos) return &a;
    return nullptr;
}

}  // namespace

TEST_CASE("l1 rate on a short ladder") {
    Kernel epan = Kernel::make(KernelFamily::Epanechnikov);
    BandwidthSchedule b3{BandwidthSchedule::Rule::PowerLaw, 1.0 / 3.0, 3.0, 0.1};
    RateReport r =
        run_l1_rate(geometric_field(), epan, {128, 256, 512, 1024}, b3, 30, 2025, 1);
    REQUIRE(r.rows.size() == 4);
    CHECK(all_pass(r.assertions));
    CHECK(r.slope < -0.2);
    CHECK(r.kappa > 0.0);
    for (const auto& row : r.rows) CHECK(row.stderr_ > 0.0);
    CHECK(r.tail_mass < 1e-10);

    CHECK_THROWS_AS(run_l1_rate(geometric_field(), epan, {128, 256, 512, 1024}, b3, 0, 1, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_l1_rate(geometric_field(), epan, {128, 256, 512}, b3, 10, 1, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        run_l1_rate(geometric_field(), epan, {128, 256, 256, 512}, b3, 10, 1, 1),
        std::invalid_argument);
}

TEST_CASE("clt anchor: independent field reduces to the classical setting") {
    FieldSpec indep =
        FieldSpec::linear(CoefficientMap::stored(1, {{IndexPoint({0}), 1.0}}), normal1());
    Kernel epan = Kernel::make(KernelFamily::Epanechnikov);
    BandwidthSchedule b3{BandwidthSchedule::Rule::PowerLaw, 1.0 / 3.0, 3.0, 0.1};
    Region region = Region::cube(1, 4096);
    CltReport r = run_clt(indep, epan, {-1.0, 0.0, 1.0}, region, b3, 1200, 7, 1);
    CHECK(all_pass(r.assertions));
    for (const auto& row : r.rows) {
        if (row.x == 0.0)
            // f(0)∫K² = 0.3989...·0.6 = 0.23936 for the standard normal marginal
            CHECK(row.gamma == doctest::Approx(0.23936).epsilon(1e-4));
        else
            CHECK(row.gamma ==
                  doctest::Approx(0.6 * 0.3989422804014327 * std::exp(-0.5)).epsilon(1e-10));
    }
    CHECK(r.max_offdiag_corr < 0.1);

    CHECK_THROWS_WITH_AS(
        run_clt(indep, epan, {-1.0, -1.0}, region, b3, 100, 7, 1),
        "clt: distinct points required", std::invalid_argument);
}

TEST_CASE("f-centering is gated by |Λ|b³ -> 0") {
    FieldSpec indep =
        FieldSpec::linear(CoefficientMap::stored(1, {{IndexPoint({0}), 1.0}}), normal1());
    Kernel epan = Kernel::make(KernelFamily::Epanechnikov);
    Region region = Region::cube(1, 4096);
    // beta = 1/3 sits exactly on the boundary: |Λ| b³ = 1, refused
    BandwidthSchedule b3{BandwidthSchedule::Rule::PowerLaw, 1.0 / 3.0, 3.0, 0.1};
    CHECK_THROWS_AS(run_clt(indep, epan, {-1.0, 1.0}, region, b3, 50, 7, 1, 0.05, 0.1, 0.15,
                            /*center_at_f=*/true),
                    std::runtime_error);
    // beta = 0.4: |Λ| b³ = |Λ|^{-0.2} -> 0, admitted
    BandwidthSchedule b4{BandwidthSchedule::Rule::PowerLaw, 0.4, 3.0, 0.1};
    CltReport r = run_clt(indep, epan, {-1.0, 1.0}, region, b4, 800, 7, 1, 0.08, 0.15, 0.25,
                          /*center_at_f=*/true);
    for (const auto& row : r.rows) CHECK(row.expected == doctest::Approx(row.gamma / 0.6));
}

TEST_CASE("berry-esseen report structure and guards") {
    Kernel epan = Kernel::make(KernelFamily::Epanechnikov);
    FieldSpec ma1 = FieldSpec::linear(
        CoefficientMap::stored(1, {{IndexPoint({0}), 1.0}, {IndexPoint({1}), 0.5}}), normal1());
    BerryEsseenReport r =
        run_berry_esseen(ma1, epan, 1.0, {256, 1024, 4096}, 3.0, 10.0, 2.0, 400, 11, 1);
    REQUIRE(r.rows.size() == 3);
    for (const auto& row : r.rows) {
        CHECK(row.value >= 0.0);
        CHECK(row.value <= 1.0);
        CHECK(row.theta_ref == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
        CHECK(row.bandwidth ==
              doctest::Approx(std::pow(static_cast<double>(row.size), -1.0 / 3.0))
                  .epsilon(1e-12));
    }

    // degenerate all-zero field: an error, not NaN
    FieldSpec zero =
        FieldSpec::linear(CoefficientMap::stored(1, {{IndexPoint({0}), 0.0}}), normal1());
    CHECK_THROWS(run_berry_esseen(zero, epan, 0.0, {256, 1024}, 3.0, 10.0, 2.0, 200, 1, 1));
}

TEST_CASE("moment inequality audit, including exact-zero rows") {
    FieldSpec field = stored_geometric_field(1, 4);
    Kernel epan = Kernel::make(KernelFamily::Epanechnikov);
    Region region = Region::cube(1, 64);
    InequalityAudit audit = audit_moment_inequality(field, epan, region, {1, 4}, {0.5}, {2.0},
                                                    {}, 0.5, 400, 99, 1);
    REQUIRE(audit.rows.size() == 2);
    CHECK(all_pass(audit.assertions));
    for (const auto& row : audit.rows) CHECK(row.pass);
    // full window: both sides vanish identically
    const InequalityRow& full = audit.rows[1];
    CHECK(full.m == 4);
    CHECK(full.lhs == 0.0);
    CHECK(full.rhs == 0.0);
    CHECK(full.ratio == 0.0);
    // live tail: a real inequality with positive slack
    CHECK(audit.rows[0].lhs > 0.0);
    CHECK(audit.rows[0].ratio < 1.0);

    // zero weights: both sides vanish
    std::vector<double> zero_w(region.cardinality(), 0.0);
    InequalityAudit zw = audit_moment_inequality(field, epan, region, {1}, {0.5}, {2.0}, zero_w,
                                                 0.5, 200, 99, 1);
    CHECK(zw.rows[0].lhs == 0.0);
    CHECK(zw.rows[0].rhs == 0.0);
    CHECK(zw.rows[0].pass);

    CHECK_THROWS_AS(audit_moment_inequality(field, epan, region, {0}, {0.5}, {2.0}, {}, 0.5,
                                            200, 99, 1),
                    std::invalid_argument);
}

TEST_CASE("single-site norm audit over a (m,b,p) grid") {
    FieldSpec field = stored_geometric_field(1, 4);
    Kernel tri = Kernel::make(KernelFamily::Triangular);
    InequalityAudit audit =
        audit_kbar_norm(field, tri, {1, 4}, {0.5, 0.25}, {2.0, 4.0}, 0.5, 600, 5, 1);
    REQUIRE(audit.rows.size() == 8);
    CHECK(all_pass(audit.assertions));
    for (const auto& row : audit.rows) {
        CHECK(row.pass);
        if (row.m == 4) {
            CHECK(row.lhs == 0.0);
            CHECK(row.rhs == 0.0);
        } else {
            CHECK(row.rhs > 0.0);
        }
    }
}

TEST_CASE("mn limits audit: truncated profiles satisfy all trends") {
    std::vector<double> ladder;
    for (int k = 4; k <= 20; ++k) ladder.push_back(std::pow(2.0, -k));
    for (int d : {1, 2}) {
        FieldSpec field = stored_geometric_field(d, d == 1 ? 4 : 2);
        DependenceProfile prof =
            DependenceProfile::exact_linear(field.coeffs, field.innovation);
        MnReport r = audit_mn_limits(prof, d, ladder);
        REQUIRE(r.rows.size() == 17);
        CHECK(all_pass(r.assertions));
        CHECK(r.rows.back().m_n > r.rows.front().m_n);
        CHECK(r.rows.back().mnd_b < 0.5);
        // m_n^d b -> 0 monotonically beyond some k
        std::size_t k0 = 0;
        for (std::size_t i = 1; i < r.rows.size(); ++i)
            if (r.rows[i].mnd_b >= r.rows[i - 1].mnd_b) k0 = i;
        CHECK(k0 + 4 < r.rows.size());
        for (std::size_t i = k0 + 1; i < r.rows.size(); ++i)
            CHECK(r.rows[i].mnd_b < r.rows[i - 1].mnd_b);
    }
}

TEST_CASE("mn limits audit: slow geometric tails break monotonicity but not the bound") {
    // rho = 1/2 with an infinite tail: m_n overshoots and falls back, so the
    // monotonicity assertion honestly fails; the closing bound still holds on
    // every row.
    DependenceProfile prof = DependenceProfile::exact_linear(
        CoefficientMap::geometric(1, 1.0, 0.5), normal1(), /*infinite_law=*/true);
    std::vector<double> ladder;
    for (int k = 4; k <= 12; ++k) ladder.push_back(std::pow(2.0, -k));
    MnReport r = audit_mn_limits(prof, 1, ladder);
    const Assertion* mono = find_assertion(r.assertions, "nondecreasing");
    REQUIRE(mono != nullptr);
    CHECK_FALSE(mono->pass);
    const Assertion* bound = find_assertion(r.assertions, "sqrt(r(m_n))");
    REQUIRE(bound != nullptr);
    CHECK(bound->pass);
}

TEST_CASE("assumption audit") {
    Kernel epan = Kernel::make(KernelFamily::Epanechnikov);
    BandwidthSchedule b3{BandwidthSchedule::Rule::PowerLaw, 1.0 / 3.0, 3.0, 0.1};
    FieldSpec field = geometric_field();
    DependenceProfile prof = DependenceProfile::exact_linear(field.coeffs, field.innovation);
    std::vector<std::size_t> sizes = {128, 256, 512, 1024, 2048, 4096, 8192};
    AssumptionReport r = audit_assumptions(field, epan, b3, sizes, prof);
    CHECK(r.all_pass());
    CHECK(r.passes({"A1", "A2", "A3", "A4", "B1", "B2", "B3"}));

    // beta close to 1: |Λ|b is tiny at small sizes -> A3 flagged
    BandwidthSchedule b99{BandwidthSchedule::Rule::PowerLaw, 0.99, 3.0, 0.1};
    AssumptionReport bad = audit_assumptions(field, epan, b99, sizes, prof);
    CHECK_FALSE(bad.passes({"A3"}));
    CHECK(bad.passes({"A1", "A2", "A4"}));

    // Monte Carlo profile: A4 not certifiable
    DependenceProfile mc = DependenceProfile::monte_carlo(field, 2.0, 200, 3);
    AssumptionReport un = audit_assumptions(field, epan, b3, sizes, mc);
    CHECK_FALSE(un.passes({"A4"}));
}

TEST_CASE("reports are identical across worker counts") {
    FieldSpec field = stored_geometric_field(1, 4);
    Kernel epan = Kernel::make(KernelFamily::Epanechnikov);
    InequalityAudit a = audit_kbar_norm(field, epan, {1}, {0.25}, {2.0}, 0.5, 500, 12, 1);
    InequalityAudit b = audit_kbar_norm(field, epan, {1}, {0.25}, {2.0}, 0.5, 500, 12, 3);
    CHECK(to_csv(a) == to_csv(b));

    BandwidthSchedule b3{BandwidthSchedule::Rule::PowerLaw, 1.0 / 3.0, 3.0, 0.1};
    RateReport ra = run_l1_rate(geometric_field(), epan, {128, 256, 512, 1024}, b3, 12, 5, 1);
    RateReport rb = run_l1_rate(geometric_field(), epan, {128, 256, 512, 1024}, b3, 12, 5, 4);
    CHECK(to_csv(ra) == to_csv(rb));
}

TEST_CASE("csv schemas are stable") {
    MnRow row;
    row.bandwidth = 0.0625;
    row.v_n = 4;
    row.m_n = 4;
    row.mnd_b = 0.25;
    row.tail_term = 0.0;
    row.sqrt_r = 0.0;
    MnReport r;
    r.d = 1;
    r.rows.push_back(row);
    CHECK(to_csv(r) == "bandwidth,v_n,m_n,mnd_b,tail_term,sqrt_r\n0.0625,4,4,0.25,0,0\n");
}
