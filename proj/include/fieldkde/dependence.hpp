#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fieldkde/fields.hpp"

namespace fieldkde {

// δ_{i,p} = ||X_i - X_i*||_p where X* replaces ε_0 by an independent copy.
// Exact for linear fields, Rosenthal-bounded for Volterra fields, Monte
// Carlo otherwise.  Monte Carlo profiles carry standard errors and cannot
// certify tail sums.
class DependenceProfile {
  public:
    enum class Mode { ExactLinear, VolterraBound, MonteCarlo };

    // infinite_law = false describes the truncated field actually sampled
    // (tails vanish beyond the truncation radius); true describes the
    // untruncated decay law, with certified series tails.
    static DependenceProfile exact_linear(CoefficientMap coeffs, InnovationSpec innovation,
                                          bool infinite_law = false);
    static DependenceProfile volterra_bound(VolterraPairs pairs, InnovationSpec innovation,
                                            double c_p);
    static DependenceProfile monte_carlo(FieldSpec spec, double p, int replicates,
                                         std::uint64_t seed);

    Mode mode() const { return mode_; }
    int dim() const { return dim_; }

    double delta(const IndexPoint& i, double p) const;
    double delta2(const IndexPoint& i) const { return delta(i, 2.0); }
    std::optional<double> delta_se(const IndexPoint& i) const;  // MonteCarlo mode

    // Σ_{|i|>m} |i|^w δ_{i,p}.  Certified (exact finite sums, or series with
    // a rigorous remainder for decay laws).  Divergent certified tails
    // return +infinity; Monte Carlo profiles throw (an MC head cannot
    // certify an infinite tail).
    double tail_sum(int m, double w, double p = 2.0) const;
    bool tail_certified() const { return mode_ != Mode::MonteCarlo; }
    bool tail_finite(double w) const;

  private:
    DependenceProfile() = default;
    Mode mode_ = Mode::ExactLinear;
    int dim_ = 1;
    CoefficientMap coeffs_;
    InnovationSpec innovation_;
    bool infinite_law_ = false;
    VolterraPairs pairs_;
    double c_p_ = 1.0;
    // MC table (memoized per queried point)
    double mc_p_ = 2.0;
    mutable std::vector<std::pair<IndexPoint, std::pair<double, double>>> mc_table_;
    FieldSpec mc_spec_;
    int mc_replicates_ = 0;
    std::uint64_t mc_seed_ = 0;

    double volterra_delta(const IndexPoint& i, double p) const;
};

// δ_{i,p} = |a_i| ||ε_0 - ε'_0||_p for the linear field.
double delta_linear(const CoefficientMap& coeffs, const InnovationSpec& innovation,
                    const IndexPoint& i, double p);

// Rosenthal bound pieces for the Volterra field:
//   A_i = Σ_{s} a_{s,i}^2 + Σ_{s} a_{i,s}^2,   B_i likewise with |a|^p,
//   bound = C_p A_i^{1/2} ||ε||_2 ||ε||_p + C_p B_i^{1/p} ||ε||_p^2.
struct VolterraBound {
    double a_i = 0.0;
    double b_i = 0.0;
    double bound = 0.0;
};
VolterraBound delta_volterra_bound(const VolterraPairs& pairs, const InnovationSpec& innovation,
                                   const IndexPoint& i, double p, double c_p);

// Direct Monte Carlo of the definition: mean of |X_i - X_i*|^p over
// replicates, p-th root, with a delta-method standard error.
struct McDelta {
    double estimate = 0.0;
    double se = 0.0;
};
McDelta delta_mc(const FieldSpec& spec, const IndexPoint& i, double p, int replicates,
                 std::uint64_t seed, int workers = 1);

// The truncation schedule of the m-dependent approximation:
//   v_n = [b^{-1/(2d)}],
//   m_n = max{v_n, [(b^{-3} Σ_{|i|>v_n} |i|^{5d/2} δ_i)^{1/(3d)}] + 1},
// together with the diagnostic tail term r(m_n)/(m_n^d b)^{3/2}.
struct TruncationSchedule {
    int d = 1;
    double bandwidth = 0.0;
    long v_n = 0;
    long m_n = 0;
    long big_m_n = 0;  // M_n = 2 m_n + 1
    double r_mn = 0.0;       // Σ_{|i|>m_n} |i|^{5d/2} δ_i
    double tail_term = 0.0;  // r(m_n) / (m_n^d b)^{3/2}
};
TruncationSchedule mn_schedule(const DependenceProfile& profile, int d, double b);

// Integer part with a one-sided nudge so representable-integer boundaries
// (e.g. 0.04^{-1/2} = 5) floor the intended way.
long integer_part(double x);

// Stability coefficient v(m) = ||X_0 - E(X_0 | H_m)||_2^2.  Exact tail
// variance for linear fields; nested Monte Carlo fallback otherwise.
double stability_v(const FieldSpec& spec, int m,
                   int outer_replicates = 4000, int inner_replicates = 256,
                   std::uint64_t seed = 17);

// Berry-Esseen decay exponents.
double theta_exponent(double alpha, double tau, double p);
double theta_remark5(double alpha);

}  // namespace fieldkde
