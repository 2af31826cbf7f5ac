#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fieldkde/fields.hpp"
#include "fieldkde/quadrature.hpp"

namespace fieldkde {

enum class KernelFamily { Triangular, Epanechnikov, Quartic, GaussianCutoff };

// A Lipschitz probability kernel with constants certified once at
// construction by high-accuracy quadrature.  The rectangular kernel is
// refused (not Lipschitz).
class Kernel {
  public:
    static Kernel make(KernelFamily family, double cutoff = 8.0);
    static Kernel parse(const std::string& name, double cutoff = 8.0);

    double operator()(double u) const;
    double support() const { return support_; }  // K vanishes for |u| > support
    double lipschitz() const { return lipschitz_; }
    bool nonnegative() const { return true; }

    double integral() const { return integral_; }            // ∫K (certified == 1)
    double square_integral() const { return square_; }       // ∫K²
    double abs_integral() const { return abs_; }             // ∫|K|
    double u2_abs_integral() const { return u2_abs_; }       // ∫u²|K|
    double abs_u_abs_integral() const { return u_abs_; }     // ∫|u||K|
    double abs_pow_integral(double tau) const;               // ∫|K|^τ

    KernelFamily family() const { return family_; }
    std::string name() const;

  private:
    Kernel() = default;
    void certify();

    KernelFamily family_ = KernelFamily::Epanechnikov;
    double cutoff_ = 8.0;   // GaussianCutoff only
    double norm_ = 1.0;     // GaussianCutoff renormalization
    double support_ = 1.0;
    double lipschitz_ = 1.0;
    double integral_ = 1.0, square_ = 0.0, abs_ = 0.0, u2_abs_ = 0.0, u_abs_ = 0.0;
};

struct BandwidthSchedule {
    enum class Rule { PowerLaw, BerryEsseen, Fixed };
    Rule rule = Rule::PowerLaw;
    double beta = 1.0 / 3.0;  // b = |Λ|^{-beta}
    double tau = 3.0;         // b = |Λ|^{2/τ - 1}
    double fixed = 0.1;

    // Throws a flagged error when the scheduled value violates b in (0,1)
    // or |Λ|·b > 1.
    double bandwidth(std::size_t region_size) const;
    std::string describe() const;
};

struct DensityEstimate {
    std::vector<double> xs;
    std::vector<double> values;
    double bandwidth = 0.0;
    std::string kernel;
    std::uint64_t sample_seed = 0;
    std::uint64_t sample_stream = 0;
};

// Parzen-Rosenblatt values (1/(n b)) Σ_i K((x - X_i)/b); reference
// implementation (plain double loop) used as the oracle for the pruned path.
std::vector<double> kde_values_naive(std::span<const double> sample, const Kernel& kernel,
                                     double b, std::span<const double> points);
// Support-pruned path: sorts the sample once and visits only
// |x - X_i| <= support·b per evaluation point.
std::vector<double> kde_values(std::span<const double> sample, const Kernel& kernel,
                               double b, std::span<const double> points);

DensityEstimate estimate(const FieldSample& sample, const Kernel& kernel, double b,
                         std::span<const double> points);

// E f_n(x) = ∫ K(t) f(x - b t) dt by adaptive quadrature.
double expected_fn(const DensityModel& density, const Kernel& kernel, double b, double x);

// Conditional smoothing of the kernel term for linear fields:
// K̄_i(x) = E( K((x - X_i)/b) | ε_{i-s}, |s| <= m ).  The window part S_m is
// read off the patch; the tail is integrated by Gauss-Hermite quadrature
// when the innovations are Gaussian and by nested Monte Carlo (own
// substream, fixed inner count) otherwise.
class MDependentSmoother {
  public:
    MDependentSmoother(const FieldSpec& linear_spec, int m, Kernel kernel, double b,
                       int gh_nodes = 64, int inner_mc = 512);

    double inner_sum(const InnovationPatch& patch, const IndexPoint& site) const;
    double full_sum(const InnovationPatch& patch, const IndexPoint& site) const;
    double k_term(const InnovationPatch& patch, const IndexPoint& site, double x) const;
    double kbar(const InnovationPatch& patch, const IndexPoint& site, double x) const;

    double tail_sd() const { return tail_sd_; }

  private:
    FieldSpec spec_;
    int m_ = 0;
    Kernel kernel_;
    double b_ = 0.0;
    double tail_sd_ = 0.0;
    bool gaussian_tail_ = false;
    int inner_mc_ = 512;
    std::vector<std::pair<IndexPoint, double>> inner_entries_;
    std::vector<std::pair<IndexPoint, double>> full_entries_;
    std::vector<std::pair<IndexPoint, double>> tail_entries_;
    quadrature::GaussHermite gh_;
};

// Single-site K̄ (regenerates the sample's patch from provenance).
double kbar(const FieldSample& sample, int m, const Kernel& kernel, double b, double x,
            const IndexPoint& site, int gh_nodes = 64, int inner_mc = 512);

// f̄_n(x) = (1/(|Λ| b)) Σ_i K̄_i(x); equals estimate() exactly when m covers
// the coefficient support.
DensityEstimate estimate_bar(const FieldSample& sample, int m, const Kernel& kernel, double b,
                             std::span<const double> points, int gh_nodes = 64,
                             int inner_mc = 512);

struct L1Result {
    double value = 0.0;      // trapezoid integral of |f_n - f| over [-A, A]
    double tail_mass = 0.0;  // reported f-mass outside [-A, A]
};
// Requires est.xs to be a uniform grid with step <= b/10 spanning [-A, A].
L1Result l1_distance(const DensityEstimate& est, const DensityModel& density, double a);

// CSV serialization: columns x, fn, and optionally efn / f.
std::string density_estimate_csv(const DensityEstimate& est,
                                 std::span<const double> efn = {},
                                 std::span<const double> f = {});

}  // namespace fieldkde
