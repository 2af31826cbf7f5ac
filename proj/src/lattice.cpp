#include "fieldkde/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "fieldkde/rng.hpp"

namespace fieldkde {

namespace {

void require_same_dim(const IndexPoint& a, const IndexPoint& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                                    std::to_string(b.dim()));
}

}  // namespace

std::int32_t IndexPoint::sup_norm() const {
    std::int32_t m = 0;
    for (std::int32_t c : coords) m = std::max(m, std::abs(c));
    return m;
}

IndexPoint IndexPoint::operator+(const IndexPoint& o) const {
    require_same_dim(*this, o);
    IndexPoint r = *this;
    for (int k = 0; k < dim(); ++k) r.coords[k] += o.coords[k];
    return r;
}

IndexPoint IndexPoint::operator-(const IndexPoint& o) const {
    require_same_dim(*this, o);
    IndexPoint r = *this;
    for (int k = 0; k < dim(); ++k) r.coords[k] -= o.coords[k];
    return r;
}

IndexPoint IndexPoint::operator-() const {
    IndexPoint r = *this;
    for (auto& c : r.coords) c = -c;
    return r;
}

std::string IndexPoint::to_string() const {
    std::ostringstream out;
    out << "(";
    for (int k = 0; k < dim(); ++k) out << (k ? "," : "") << coords[k];
    out << ")";
    return out.str();
}

int lex_compare(const IndexPoint& a, const IndexPoint& b) {
    require_same_dim(a, b);
    for (int k = 0; k < a.dim(); ++k) {
        if (a.coords[k] < b.coords[k]) return -1;
        if (a.coords[k] > b.coords[k]) return 1;
    }
    return 0;
}

std::size_t IndexPointHash::operator()(const IndexPoint& p) const {
    std::uint64_t h = 0x6a09e667f3bcc908ULL;
    for (std::int32_t c : p.coords)
        h = rng::splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(c)));
    return static_cast<std::size_t>(h);
}

std::size_t Box::size() const {
    std::size_t n = 1;
    for (int k = 0; k < dim(); ++k) {
        if (hi[k] < lo[k]) return 0;
        n *= static_cast<std::size_t>(hi[k] - lo[k] + 1);
    }
    return n;
}

bool Box::contains(const IndexPoint& p) const {
    if (p.dim() != dim()) return false;
    for (int k = 0; k < dim(); ++k)
        if (p.coords[k] < lo[k] || p.coords[k] > hi[k]) return false;
    return true;
}

std::vector<std::size_t> Box::strides() const {
    std::vector<std::size_t> s(lo.size());
    std::size_t acc = 1;
    for (int k = dim() - 1; k >= 0; --k) {
        s[k] = acc;
        acc *= static_cast<std::size_t>(hi[k] - lo[k] + 1);
    }
    return s;
}

std::size_t Box::offset(const IndexPoint& p) const {
    std::size_t off = 0;
    std::size_t acc = 1;
    for (int k = dim() - 1; k >= 0; --k) {
        off += static_cast<std::size_t>(p.coords[k] - lo[k]) * acc;
        acc *= static_cast<std::size_t>(hi[k] - lo[k] + 1);
    }
    return off;
}

Box Box::inflated(int radius) const {
    Box b = *this;
    for (int k = 0; k < dim(); ++k) {
        b.lo[k] -= radius;
        b.hi[k] += radius;
    }
    return b;
}

namespace {

// Enumerate a box in lexicographic order.
std::vector<IndexPoint> box_points(const Box& b) {
    std::vector<IndexPoint> pts;
    pts.reserve(b.size());
    IndexPoint p;
    p.coords.assign(b.lo.begin(), b.lo.end());
    const int d = b.dim();
    if (b.size() == 0) return pts;
    while (true) {
        pts.push_back(p);
        int k = d - 1;
        while (k >= 0) {
            if (p.coords[k] < b.hi[k]) {
                ++p.coords[k];
                break;
            }
            p.coords[k] = b.lo[k];
            --k;
        }
        if (k < 0) break;
    }
    return pts;
}

}  // namespace

Region Region::cube(int d, int side) {
    if (d < 1) throw std::invalid_argument("region_cube: dimension must be >= 1");
    if (side < 1) throw std::invalid_argument("region_cube: side length must be >= 1");
    Box b;
    b.lo.assign(d, 0);
    b.hi.assign(d, side - 1);
    return box(std::move(b));
}

Region Region::ball(int d, int radius) {
    if (d < 1) throw std::invalid_argument("region_ball: dimension must be >= 1");
    if (radius < 0) throw std::invalid_argument("region_ball: radius must be >= 0");
    Box b;
    b.lo.assign(d, -radius);
    b.hi.assign(d, radius);
    return box(std::move(b));
}

Region Region::box(Box b) {
    Region r;
    r.dim_ = b.dim();
    r.pts_ = box_points(b);
    r.box_ = std::move(b);
    r.build_index();
    return r;
}

Region Region::from_points(int d, std::vector<IndexPoint> pts) {
    if (d < 1) throw std::invalid_argument("region: dimension must be >= 1");
    for (const auto& p : pts)
        if (p.dim() != d) throw std::invalid_argument("region: point dimension mismatch");
    std::sort(pts.begin(), pts.end(), lex_less);
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.empty()) throw std::invalid_argument("region: empty point set");
    Region r;
    r.dim_ = d;
    r.pts_ = std::move(pts);
    r.build_index();
    return r;
}

Region Region::random_subset(const Region& base, double keep_prob, std::uint64_t seed) {
    if (!(keep_prob > 0.0) || keep_prob > 1.0)
        throw std::invalid_argument("random_subset: keep_prob must be in (0,1]");
    std::vector<IndexPoint> pts;
    pts.reserve(base.cardinality());
    for (const auto& p : base.points()) {
        double u = rng::to_unit_open(rng::hash_point(seed, 0, rng::Role::RegionThin, p));
        if (u < keep_prob) pts.push_back(p);
    }
    if (pts.empty())
        throw std::invalid_argument("random_subset: thinning produced an empty region");
    if (pts.size() == base.cardinality() && base.is_box()) return base;
    return from_points(base.dim(), std::move(pts));
}

void Region::build_index() {
    index_.reserve(pts_.size() * 2);
    for (std::uint32_t k = 0; k < pts_.size(); ++k) index_.emplace(pts_[k], k);
}

bool Region::contains(const IndexPoint& p) const {
    if (p.dim() != dim_) return false;
    if (box_) return box_->contains(p);
    return index_.count(p) > 0;
}

std::optional<std::uint32_t> Region::index_of(const IndexPoint& p) const {
    if (p.dim() != dim_) return std::nullopt;
    if (box_) {
        if (!box_->contains(p)) return std::nullopt;
        return static_cast<std::uint32_t>(box_->offset(p));
    }
    auto it = index_.find(p);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Region::overlap_count(const IndexPoint& shift) const {
    if (shift.dim() != dim_)
        throw std::invalid_argument("region_overlap: shift dimension mismatch");
    if (box_) {
        // Π_k max(0, extent_k - |shift_k|); must agree with the generic path.
        std::size_t n = 1;
        for (int k = 0; k < dim_; ++k) {
            long extent = box_->hi[k] - box_->lo[k] + 1;
            long remain = extent - std::labs(static_cast<long>(shift.coords[k]));
            if (remain <= 0) return 0;
            n *= static_cast<std::size_t>(remain);
        }
        return n;
    }
    return overlap_count_generic(shift);
}

std::size_t Region::overlap_count_generic(const IndexPoint& shift) const {
    if (shift.dim() != dim_)
        throw std::invalid_argument("region_overlap: shift dimension mismatch");
    std::size_t n = 0;
    for (const auto& p : pts_) {
        IndexPoint q = p + shift;
        if (box_ ? box_->contains(q) : index_.count(q) > 0) ++n;
    }
    return n;
}

Box Region::bounding_box() const {
    if (box_) return *box_;
    Box b;
    b.lo.assign(dim_, 0);
    b.hi.assign(dim_, 0);
    for (int k = 0; k < dim_; ++k) {
        std::int32_t lo = pts_.front().coords[k], hi = lo;
        for (const auto& p : pts_) {
            lo = std::min(lo, p.coords[k]);
            hi = std::max(hi, p.coords[k]);
        }
        b.lo[k] = lo;
        b.hi[k] = hi;
    }
    return b;
}

}  // namespace fieldkde
