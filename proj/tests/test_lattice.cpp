#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "fieldkde/lattice.hpp"
#include "fieldkde/rng.hpp"

using namespace fieldkde;

namespace {

// Brute-force overlap oracle: count pairs by direct membership scan.
std::size_t overlap_oracle(const Region& r, const IndexPoint& shift) {
    std::size_t n = 0;
    for (const auto& p : r.points()) {
        IndexPoint q = p + shift;
        for (const auto& other : r.points())
            if (other == q) {
                ++n;
                break;
            }
    }
    return n;
}

IndexPoint pt(std::initializer_list<std::int32_t> c) { return IndexPoint(c); }

}  // namespace

TEST_CASE("cube cardinality and enumeration") {
    CHECK(Region::cube(2, 3).cardinality() == 9);
    CHECK(Region::cube(1, 1).cardinality() == 1);
    CHECK(Region::cube(1, 1).points()[0] == pt({0}));
    CHECK(Region::cube(3, 4).cardinality() == 64);
    // L^d exactly, including an enumeration oracle for a small case
    Region r = Region::cube(2, 2);
    REQUIRE(r.cardinality() == 4);
    CHECK(r.points()[0] == pt({0, 0}));
    CHECK(r.points()[1] == pt({0, 1}));
    CHECK(r.points()[2] == pt({1, 0}));
    CHECK(r.points()[3] == pt({1, 1}));

    CHECK_THROWS_AS(Region::cube(0, 3), std::invalid_argument);
    CHECK_THROWS_AS(Region::cube(2, 0), std::invalid_argument);
}

TEST_CASE("ball cardinality") {
    // enumeration oracle: {-1,0,1}^2
    std::size_t count = 0;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) ++count;
    CHECK(Region::ball(2, 1).cardinality() == count);
    CHECK(Region::ball(1, 0).cardinality() == 1);
    CHECK(Region::ball(1, 0).points()[0] == pt({0}));
    for (int d = 1; d <= 3; ++d)
        for (int r = 0; r <= 2; ++r)
            CHECK(Region::ball(d, r).cardinality() ==
                  static_cast<std::size_t>(std::pow(2 * r + 1, d)));
    CHECK_THROWS_AS(Region::ball(1, -1), std::invalid_argument);
}

TEST_CASE("lexicographic order") {
    CHECK(lex_compare(pt({0, 1}), pt({1, 0})) < 0);
    CHECK(lex_compare(pt({1, 1}), pt({1, 2})) < 0);
    CHECK(lex_compare(pt({2, 5}), pt({2, 5})) == 0);
    CHECK_THROWS_AS(lex_compare(pt({1}), pt({1, 2})), std::invalid_argument);

    // total order: antisymmetry, transitivity, unique sorted enumeration
    std::vector<IndexPoint> pts;
    std::uint64_t h = 42;
    for (int i = 0; i < 64; ++i) {
        h = rng::splitmix64(h);
        pts.push_back(pt({static_cast<std::int32_t>(h % 7) - 3,
                          static_cast<std::int32_t>((h >> 8) % 7) - 3}));
    }
    for (const auto& a : pts)
        for (const auto& b : pts) {
            int ab = lex_compare(a, b), ba = lex_compare(b, a);
            CHECK(ab == -ba);
            if (ab == 0) CHECK(a == b);
            for (const auto& c : pts)
                if (ab < 0 && lex_compare(b, c) < 0) CHECK(lex_compare(a, c) < 0);
        }
    Region region = Region::ball(2, 2);
    auto sorted = region.points();
    CHECK(std::is_sorted(sorted.begin(), sorted.end(), lex_less));
    for (std::size_t i = 1; i < sorted.size(); ++i)
        CHECK(lex_compare(sorted[i - 1], sorted[i]) < 0);
}

TEST_CASE("overlap counts on cubes") {
    Region cube = Region::cube(2, 3);
    CHECK(cube.overlap_count(pt({0, 0})) == 9);
    CHECK(cube.overlap_count(pt({1, 0})) == 6);  // oracle: 2 columns x 3 rows survive
    CHECK(overlap_oracle(cube, pt({1, 0})) == 6);
    CHECK(cube.overlap_count(pt({5, 5})) == 0);
    CHECK_THROWS_AS(cube.overlap_count(pt({1})), std::invalid_argument);
}

TEST_CASE("overlap properties against the brute-force oracle") {
    Region base = Region::cube(2, 5);
    Region thinned = Region::random_subset(base, 0.6, 7);
    std::vector<Region> regions;
    regions.push_back(base);
    regions.push_back(thinned);
    regions.push_back(Region::ball(2, 2));
    for (const auto& region : regions) {
        std::size_t total = 0;
        for (int a = -6; a <= 6; ++a)
            for (int b = -6; b <= 6; ++b) {
                IndexPoint shift = pt({a, b});
                std::size_t got = region.overlap_count(shift);
                CHECK(got == overlap_oracle(region, shift));
                CHECK(got == region.overlap_count(-shift));
                CHECK(got <= region.cardinality());
                if (shift.is_origin()) CHECK(got == region.cardinality());
                else CHECK(got < region.cardinality());
                total += got;
            }
        // Σ_j |Λ∩(Λ-j)| over all shifts with nonzero overlap = |Λ|²
        CHECK(total == region.cardinality() * region.cardinality());
    }
}

TEST_CASE("box fast path agrees with the generic membership scan") {
    Region cube = Region::cube(3, 4);
    std::uint64_t h = 99;
    for (int i = 0; i < 50; ++i) {
        h = rng::splitmix64(h);
        IndexPoint shift = pt({static_cast<std::int32_t>(h % 9) - 4,
                               static_cast<std::int32_t>((h >> 16) % 9) - 4,
                               static_cast<std::int32_t>((h >> 32) % 9) - 4});
        CHECK(cube.overlap_count(shift) == cube.overlap_count_generic(shift));
    }
}

TEST_CASE("random subsets") {
    Region base = Region::cube(2, 4);
    CHECK(Region::random_subset(base, 1.0, 123).cardinality() == 16);
    Region a = Region::random_subset(base, 0.5, 5);
    Region b = Region::random_subset(base, 0.5, 5);
    REQUIRE(a.cardinality() == b.cardinality());
    for (std::size_t i = 0; i < a.cardinality(); ++i) CHECK(a.points()[i] == b.points()[i]);
    Region c = Region::random_subset(base, 0.5, 6);
    bool same = a.cardinality() == c.cardinality();
    if (same)
        for (std::size_t i = 0; i < a.cardinality(); ++i)
            same = same && a.points()[i] == c.points()[i];
    CHECK_FALSE(same);
    CHECK_THROWS_AS(Region::random_subset(base, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(Region::random_subset(base, 1.5, 1), std::invalid_argument);
    // tiny keep probability on a tiny region: empty results must throw
    Region one = Region::cube(1, 1);
    bool threw = false;
    for (std::uint64_t s = 0; s < 64 && !threw; ++s) {
        try {
            Region::random_subset(one, 1e-12, s);
        } catch (const std::invalid_argument&) {
            threw = true;
        }
    }
    CHECK(threw);
}

TEST_CASE("index_of matches enumeration") {
    for (const Region& region : {Region::cube(2, 3), Region::ball(2, 1)}) {
        const auto& pts = region.points();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            auto idx = region.index_of(pts[i]);
            REQUIRE(idx.has_value());
            CHECK(*idx == i);
        }
        CHECK_FALSE(region.index_of(pt({9, 9})).has_value());
    }
}

TEST_CASE("sup norm") {
    CHECK(pt({0, 0}).sup_norm() == 0);
    CHECK(pt({0, 0}).is_origin());
    CHECK(pt({-3, 2}).sup_norm() == 3);
    CHECK(pt({1, -5, 2}).sup_norm() == 5);
}
