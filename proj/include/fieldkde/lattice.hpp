#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace fieldkde {

// A point of Z^d.  The dimension is a runtime value; experiments sweep d in
// {1,2,3} and nothing here assumes a compile-time bound.
struct IndexPoint {
    std::vector<std::int32_t> coords;

    IndexPoint() = default;
    explicit IndexPoint(std::vector<std::int32_t> c) : coords(std::move(c)) {}
    IndexPoint(std::initializer_list<std::int32_t> c) : coords(c) {}

    int dim() const { return static_cast<int>(coords.size()); }

    // sup norm |i| = max_k |i_k|
    std::int32_t sup_norm() const;

    bool is_origin() const { return sup_norm() == 0; }

    IndexPoint operator+(const IndexPoint& o) const;
    IndexPoint operator-(const IndexPoint& o) const;
    IndexPoint operator-() const;

    bool operator==(const IndexPoint& o) const { return coords == o.coords; }

    std::string to_string() const;
};

// Total lexicographic order: i < j iff i_1 < j_1, or i_k < j_k with equal
// leading coordinates.  Returns -1, 0 or +1.  Throws on dimension mismatch.
int lex_compare(const IndexPoint& a, const IndexPoint& b);

inline bool lex_less(const IndexPoint& a, const IndexPoint& b) {
    return lex_compare(a, b) < 0;
}

struct IndexPointHash {
    std::size_t operator()(const IndexPoint& p) const;
};

// Axis-aligned integer box [lo_1,hi_1] x ... x [lo_d,hi_d], used as the
// dense-storage fast path for cubic windows.  Enumeration is row-major with
// the first coordinate most significant, which coincides with the
// lexicographic order.
struct Box {
    std::vector<std::int32_t> lo, hi;  // inclusive

    int dim() const { return static_cast<int>(lo.size()); }
    std::size_t size() const;
    bool contains(const IndexPoint& p) const;
    // Linear offset of p in enumeration order; p must lie in the box.
    std::size_t offset(const IndexPoint& p) const;
    std::vector<std::size_t> strides() const;
    Box inflated(int radius) const;
};

// A finite observation region of Z^d with lexicographic enumeration, hashed
// membership, and shift-overlap counting.  Immutable after construction.
class Region {
  public:
    Region() = default;  // empty placeholder; constructors below build real regions

    // {0,...,L-1}^d
    static Region cube(int d, int side);
    // sup-norm ball {i : |i| <= radius}
    static Region ball(int d, int radius);
    // arbitrary box
    static Region box(Box b);
    // arbitrary point set (deduplicated, sorted)
    static Region from_points(int d, std::vector<IndexPoint> pts);
    // Bernoulli-thinned subset, deterministic in seed.  Throws if the result
    // is empty (the caller decides whether to redraw).
    static Region random_subset(const Region& base, double keep_prob, std::uint64_t seed);

    int dim() const { return dim_; }
    std::size_t cardinality() const { return pts_.size(); }
    const std::vector<IndexPoint>& points() const { return pts_; }

    bool contains(const IndexPoint& p) const;
    // Position of p in the lexicographic enumeration, if p is a member.
    std::optional<std::uint32_t> index_of(const IndexPoint& p) const;

    // |Λ ∩ (Λ - shift)| = #{i in Λ : i + shift in Λ}
    std::size_t overlap_count(const IndexPoint& shift) const;
    // Reference implementation without the box shortcut; used by tests.
    std::size_t overlap_count_generic(const IndexPoint& shift) const;

    bool is_box() const { return box_.has_value(); }
    const std::optional<Box>& as_box() const { return box_; }
    Box bounding_box() const;

  private:
    void build_index();

    int dim_ = 0;
    std::vector<IndexPoint> pts_;  // lex sorted
    std::unordered_map<IndexPoint, std::uint32_t, IndexPointHash> index_;
    std::optional<Box> box_;
};

}  // namespace fieldkde
