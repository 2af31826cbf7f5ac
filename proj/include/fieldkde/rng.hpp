#pragma once

#include <cstdint>

#include "fieldkde/lattice.hpp"

namespace fieldkde {

// Counter-based generation: every draw is a pure function of
// (master_seed, stream_id, role, lattice point, extra counters).  This makes
// replicates independent of worker count and lets a window be enlarged
// without disturbing values already drawn.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Role tags keep the independent sub-streams of one (seed, stream) pair
// from colliding.
enum class Role : std::uint64_t {
    Innovation = 1,       // the base field ε
    InnovationPrime = 2,  // the independent copy ε'
    KbarInner = 3,        // nested Monte Carlo draws inside a conditional expectation
    RegionThin = 4,       // Bernoulli thinning of a region
    Scalar = 5,           // generic keyed scalar stream
};

struct KeyHash {
    std::uint64_t state = 0x93c467e37db0c7a4ULL;

    void absorb(std::uint64_t w) { state = splitmix64(state ^ w); }
    std::uint64_t finish() const { return splitmix64(state); }
};

inline std::uint64_t hash_point(std::uint64_t seed, std::uint64_t stream, Role role,
                                const IndexPoint& p) {
    KeyHash h;
    h.absorb(seed);
    h.absorb(stream);
    h.absorb(static_cast<std::uint64_t>(role));
    for (std::int32_t c : p.coords) h.absorb(static_cast<std::uint64_t>(static_cast<std::int64_t>(c)));
    return h.finish();
}

inline std::uint64_t hash_counters(std::uint64_t seed, std::uint64_t stream, Role role,
                                   std::uint64_t c0, std::uint64_t c1 = 0) {
    KeyHash h;
    h.absorb(seed);
    h.absorb(stream);
    h.absorb(static_cast<std::uint64_t>(role));
    h.absorb(c0);
    h.absorb(c1);
    return h.finish();
}

// Uniform on the open interval (0,1); safe for log() and quantile transforms.
inline double to_unit_open(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace rng
}  // namespace fieldkde
