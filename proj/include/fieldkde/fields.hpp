#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "fieldkde/innovations.hpp"
#include "fieldkde/lattice.hpp"

namespace fieldkde {

enum class CoefficientLaw { Stored, Geometric, Polynomial };

// Coefficients a_s of a linear filter on Z^d.  Stored maps are exact and
// finitely supported; decay laws (c·rho^{|s|}, c·(1+|s|)^{-gamma}) carry a
// truncation radius for sampling plus certified tail sums of the untruncated
// law.  |s| is the sup norm throughout.
class CoefficientMap {
  public:
    CoefficientMap() = default;  // empty stored map (the zero filter)

    static CoefficientMap stored(int d, std::vector<std::pair<IndexPoint, double>> entries);
    // radius == 0 selects the smallest R whose certified L2 tail is below
    // l2_tol * (L2 norm of the law).
    static CoefficientMap geometric(int d, double c, double rho, int radius = 0,
                                    double l2_tol = 1e-6);
    static CoefficientMap polynomial(int d, double c, double gamma, int radius,
                                     double l2_tol = 1e-6);

    int dim() const { return dim_; }
    CoefficientLaw law() const { return law_; }
    int radius() const { return radius_; }
    double geometric_ratio() const { return rho_; }
    double scale() const { return c_; }
    double decay_gamma() const { return gamma_; }

    // Coefficient of the *sampled* (truncated) field: law value for
    // |s| <= radius, zero beyond.
    double value(const IndexPoint& s) const;

    // Support entries of the truncated field with |s| <= m, in lexicographic
    // order.  m < 0 means the full truncation radius.
    std::vector<std::pair<IndexPoint, double>> entries_within(int m = -1) const;

    // Σ_{|s|<=m} a_s^2 of the truncated field.
    double sum_sq_within(int m) const;
    // Σ_{m<|s|<=radius} a_s^2 (exact tail of the truncated field).
    double truncated_l2_tail(int m) const;

    // Tails of the untruncated law (certified series for decay laws; exact
    // finite sums for stored maps):  Σ_{|s|>m} a_s^2  and  Σ_{|s|>m} |s|^w |a_s|.
    // Divergent certified tails return +infinity.
    double law_l2_tail(int m) const;
    double law_weighted_abs_tail(int m, double w) const;
    bool law_tail_finite(double w) const;

    std::string describe() const;

  private:
    void build_entries();

    int dim_ = 1;
    CoefficientLaw law_ = CoefficientLaw::Stored;
    double c_ = 1.0, rho_ = 0.5, gamma_ = 3.0;
    int radius_ = 0;
    std::vector<std::pair<IndexPoint, double>> entries_;  // lex sorted, truncated support
};

// Second-order Volterra coefficients a_{s1,s2}, finitely supported, with a
// zero diagonal (a_{s,s} = 0 is required, not assumed).
struct VolterraPairs {
    int dim = 1;
    std::vector<std::tuple<IndexPoint, IndexPoint, double>> pairs;

    static VolterraPairs make(int d, std::vector<std::tuple<IndexPoint, IndexPoint, double>> pairs);
    int max_radius() const;
};

struct SubordinationMap {
    enum class Kind { Identity, Tanh, ScaledAbs, Zero };
    Kind kind = Kind::Identity;
    double scale = 1.0;

    double operator()(double x) const;
    double lipschitz() const;
    std::string name() const;
    static SubordinationMap parse(const std::string& name, double scale = 1.0);
};

enum class FieldKind { Linear, Volterra, Subordinated };

// A Bernoulli-shift field specification: X_i = g(ε_{i-s}, s in Z^d).
struct FieldSpec {
    FieldKind kind = FieldKind::Linear;
    int dim = 1;
    InnovationSpec innovation;

    CoefficientMap coeffs;                    // Linear
    VolterraPairs pairs;                      // Volterra
    std::shared_ptr<const FieldSpec> inner;   // Subordinated
    SubordinationMap map;                     // Subordinated

    static FieldSpec linear(CoefficientMap coeffs, InnovationSpec innovation);
    static FieldSpec volterra(VolterraPairs pairs, InnovationSpec innovation);
    static FieldSpec subordinated(FieldSpec inner, SubordinationMap map);

    // Radius of the innovation window one site depends on.
    int window_radius() const;
    const InnovationSpec& base_innovation() const;
};

struct FieldProvenance {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;
    int truncation_radius = 0;
};

struct FieldSample {
    Region region;
    std::vector<double> values;  // aligned with region.points()
    FieldSpec spec;
    FieldProvenance provenance;

    double at_index(std::size_t k) const { return values[k]; }
};

// Configurable guard against runaway window materialization.
inline constexpr std::size_t kDefaultWindowBudget = (1u << 26);  // points

FieldSample sample_field(const FieldSpec& spec, const Region& region,
                         std::uint64_t seed, std::uint64_t stream,
                         std::size_t window_budget = kDefaultWindowBudget);

FieldSample linear_sample(const FieldSpec& spec, const Region& region,
                          std::uint64_t seed, std::uint64_t stream,
                          std::size_t window_budget = kDefaultWindowBudget);

FieldSample volterra_sample(const FieldSpec& spec, const Region& region,
                            std::uint64_t seed, std::uint64_t stream,
                            std::size_t window_budget = kDefaultWindowBudget);

FieldSample subordinate(const FieldSample& sample, const SubordinationMap& map);

// Single-site evaluation from a patch (used by the dependence-measure Monte
// Carlo, which couples two evaluations through one patch).
double evaluate_site(const FieldSpec& spec, const InnovationPatch& patch, const IndexPoint& site);

// Split of a linear field at window radius m: the coefficients measurable
// from the window and the exact variance of the discarded tail (of the
// truncated field actually sampled).
struct LinearSplit {
    std::vector<std::pair<IndexPoint, double>> inner_entries;
    double tail_variance = 0.0;
};
LinearSplit linear_split(const FieldSpec& spec, int m);

// Marginal density models.
class DensityModel {
  public:
    enum class Kind { ExactNormal, NumericBaseline };

    static DensityModel exact_normal(double variance);
    // Frozen KDE baseline on an independent mega-sample of the field.
    static DensityModel numeric_baseline(const FieldSpec& spec, std::size_t n_points,
                                         std::uint64_t seed);

    Kind kind() const { return kind_; }
    double operator()(double x) const;
    double cdf(double x) const;          // ExactNormal only
    double sd() const { return sd_; }
    double variance() const { return sd_ * sd_; }
    double lipschitz_bound() const;
    double mass_within(double a) const;  // ∫_{-a}^{a} f
    double second_moment() const;

  private:
    DensityModel() = default;
    Kind kind_ = Kind::ExactNormal;
    double sd_ = 1.0;
    // baseline table
    double grid_lo_ = 0.0, grid_step_ = 0.0;
    std::vector<double> grid_values_;
};

// Exact N(0, σ_ε² Σ a_s²) marginal for Gaussian linear specs (throws on any
// other kind).  The variance is the truncated sum plus the certified law
// tail.
DensityModel marginal_density_linear_gaussian(const FieldSpec& spec);

// Exact joint law of (X_0, X_i) for Gaussian linear specs.
struct PairDensity {
    double variance = 1.0;
    double covariance = 0.0;
    bool degenerate = false;  // |correlation| == 1 up to tolerance

    double correlation() const { return covariance / variance; }
    double operator()(double x, double y) const;
    // Numeric sup over a grid of |f_{0,i}(x,y) - f(x) f(y)|.
    double sup_product_gap(double halfwidth, int grid) const;
};
PairDensity pair_density_linear_gaussian(const FieldSpec& spec, const IndexPoint& i);

}  // namespace fieldkde
