#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fieldkde/lattice.hpp"
#include "fieldkde/rng.hpp"

namespace fieldkde {

enum class InnovationDist { Normal, Uniform, Exponential, Rademacher };

// An i.i.d. innovation law.  All four menu entries are centered; sigma is
// the standard deviation.  Every law here has all moments finite, so the
// p-norm accessors are total for p >= 1.
struct InnovationSpec {
    InnovationDist dist = InnovationDist::Normal;
    double sigma = 1.0;

    double mean() const { return 0.0; }
    double variance() const { return sigma * sigma; }

    // ||ε_0||_p (closed form, except the exponential case which falls back
    // to quadrature over the law).
    double p_norm(double p) const;
    // ||ε_0 - ε'_0||_p for an independent copy ε'.  Closed form for the
    // whole menu; the quadrature route below is kept as the independent
    // cross-check.
    double diff_p_norm(double p) const;
    // Iterated one-dimensional quadrature over the product law, cached per
    // (spec, p).
    double diff_p_norm_quadrature(double p) const;

    // Map one hashed 64-bit word to a draw from the law.
    double transform(std::uint64_t h) const;

    double density(double x) const;  // marginal density (Rademacher: throws)
    double cdf(double x) const;

    std::string name() const;

    static InnovationSpec parse(const std::string& name, double sigma = 1.0);
};

// Finite materialization of the infinite innovation field on a window.
// Values are keyed per point, so enlarging the window preserves existing
// draws, and patches regenerate bit-identically from
// (master_seed, stream_id, window).
struct InnovationPatch {
    Region window;
    std::vector<double> values;  // aligned with window.points()
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    double at(const IndexPoint& p) const;
    const double* data() const { return values.data(); }
};

InnovationPatch draw_patch(const InnovationSpec& spec, const Region& window,
                           std::uint64_t master_seed, std::uint64_t stream_id);

// The coupled field ε*: equal to the input everywhere except the origin,
// where an independent draw ε'_0 (its own substream) is substituted.
// Throws if the origin is not in the window.
InnovationPatch couple_at_origin(const InnovationPatch& patch, const InnovationSpec& spec);

}  // namespace fieldkde
