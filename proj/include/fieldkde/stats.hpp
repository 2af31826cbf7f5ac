#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fieldkde {
namespace stats {

double normal_pdf(double x);
double normal_cdf(double x);
// Quantile of the standard normal law (Wichura's PPND16 rational
// approximation, accurate to ~1e-15 over (0,1)).
double normal_quantile(double p);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
    std::size_t n = 0;
};
MeanSe mean_se(std::span<const double> xs);

// Exact Kolmogorov statistic sup_t |F_hat(t) - G(t)| against a continuous
// CDF, evaluated at the sorted-sample jump points.
double ks_statistic(std::span<const double> sample_sorted,
                    const std::function<double(double)>& cdf);

// Dense-grid approximation of the same sup; the tests use it as an
// independent oracle for ks_statistic.
double ks_statistic_grid(std::span<const double> sample_sorted,
                         const std::function<double(double)>& cdf,
                         double lo, double hi, std::size_t grid_points);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};
LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys);

// Kahan-compensated accumulator; keeps reductions reproducible to the last
// ulp regardless of operand magnitudes.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        double y = v - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

// Deterministic task map: fn(i) for i in [0,n).  Assignment is static and
// results must be written to per-index slots, so output does not depend on
// the worker count.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace stats
}  // namespace fieldkde
