#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fieldkde/dependence.hpp"
#include "fieldkde/kde.hpp"

namespace fieldkde {

// Every report carries its assertion outcomes; the CLI prints one line per
// assertion and exits nonzero if any fails.  CSV emission is byte-stable:
// fixed column order, "%.17g" floats, fixed row order.
struct Assertion {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RateRow {
    std::size_t size = 0;    // |Λ|
    double bandwidth = 0.0;
    double value = 0.0;      // replicate-mean L1 error
    double stderr_ = 0.0;
    double bound_shape = 0.0;  // (b + 1/sqrt(|Λ| b))^{2/3}
};
struct RateReport {
    std::vector<RateRow> rows;
    double slope = 0.0;
    double intercept = 0.0;
    double kappa = 0.0;  // max over rows of value / bound_shape
    double tail_mass = 0.0;
    std::vector<Assertion> assertions;
};
RateReport run_l1_rate(const FieldSpec& field, const Kernel& kernel,
                       const std::vector<std::size_t>& sizes, const BandwidthSchedule& schedule,
                       int replicates, std::uint64_t seed, int workers,
                       double slope_limit = -2.0 / 9.0 + 0.02);

struct CltPointRow {
    double x = 0.0;
    double ks = 0.0;
    double gamma = 0.0;     // f(x) ∫K²
    double emp_var = 0.0;   // empirical Var of sqrt(|Λ|b)(f_n - E f_n)
    double expected = 0.0;  // E f_n(x)
};
struct CltReport {
    std::size_t size = 0;
    double bandwidth = 0.0;
    int replicates = 0;
    std::vector<CltPointRow> rows;
    std::vector<std::vector<double>> covariance;
    double max_offdiag_corr = 0.0;
    std::vector<Assertion> assertions;
};
CltReport run_clt(const FieldSpec& field, const Kernel& kernel, std::vector<double> points,
                  const Region& region, const BandwidthSchedule& schedule, int replicates,
                  std::uint64_t seed, int workers, double ks_limit = 0.05,
                  double corr_limit = 0.1, double var_rel_tol = 0.15,
                  bool center_at_f = false);

struct BerryEsseenRow {
    std::size_t size = 0;
    double bandwidth = 0.0;
    double value = 0.0;  // empirical D_n(x)
    int replicates = 0;
    double theta_ref = 0.0;
};
struct BerryEsseenReport {
    double x = 0.0;
    double tau = 3.0, alpha = 10.0, p = 2.0;
    std::vector<BerryEsseenRow> rows;
    double decay_fit = 0.0;  // informational log-log slope
    std::vector<Assertion> assertions;
};
BerryEsseenReport run_berry_esseen(const FieldSpec& field, const Kernel& kernel, double x,
                                   const std::vector<std::size_t>& sizes, double tau,
                                   double alpha, double p, int replicates, std::uint64_t seed,
                                   int workers);

struct InequalityRow {
    std::string config;
    long m = 0;
    double bandwidth = 0.0;
    double p = 2.0;
    double lhs = 0.0;
    double se = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool pass = false;
};
struct InequalityAudit {
    std::vector<InequalityRow> rows;
    std::vector<Assertion> assertions;
};

// ||Σ_i a_i (K_i(x) - K̄_i(x))||_p  <=  (8 m^d / b) (p Σ a_i²)^{1/2} Σ_{|i|>m} δ_{i,p}
// LHS by Monte Carlo over replicates; RHS exact from the certified profile.
InequalityAudit audit_moment_inequality(const FieldSpec& field, const Kernel& kernel,
                                        const Region& region,
                                        const std::vector<long>& m_grid,
                                        const std::vector<double>& b_grid,
                                        const std::vector<double>& p_grid,
                                        const std::vector<double>& weights, double x,
                                        int replicates, std::uint64_t seed, int workers);

// Single-site version:  ||K_0(x) - K̄_0(x)||_p <= (sqrt(2p)/b) Σ_{|j|>m} δ_{j,p}.
InequalityAudit audit_kbar_norm(const FieldSpec& field, const Kernel& kernel,
                                const std::vector<long>& m_grid,
                                const std::vector<double>& b_grid,
                                const std::vector<double>& p_grid, double x, int replicates,
                                std::uint64_t seed, int workers);

struct MnRow {
    double bandwidth = 0.0;
    long v_n = 0;
    long m_n = 0;
    double mnd_b = 0.0;      // m_n^d · b
    double tail_term = 0.0;  // r(m_n)/(m_n^d b)^{3/2}
    double sqrt_r = 0.0;     // sqrt(r(m_n))
};
struct MnReport {
    int d = 1;
    std::vector<MnRow> rows;
    std::vector<Assertion> assertions;
};
MnReport audit_mn_limits(const DependenceProfile& profile, int d,
                         const std::vector<double>& b_ladder);

struct AssumptionItem {
    std::string name;
    bool pass = false;
    std::string evidence;
};
struct AssumptionReport {
    std::vector<AssumptionItem> items;
    bool all_pass() const;
    bool passes(const std::vector<std::string>& names) const;
};
AssumptionReport audit_assumptions(const FieldSpec& field, const Kernel& kernel,
                                   const BandwidthSchedule& schedule,
                                   const std::vector<std::size_t>& sizes,
                                   const DependenceProfile& profile);

// CSV emission (schemas documented in the README).
std::string to_csv(const RateReport&);
std::string to_csv(const CltReport&);
std::string to_csv(const BerryEsseenReport&);
std::string to_csv(const InequalityAudit&);
std::string to_csv(const MnReport&);
std::string to_csv(const AssumptionReport&);

std::string format_double(double v);  // "%.17g"

}  // namespace fieldkde
