#pragma once

#include <functional>
#include <vector>

namespace fieldkde {
namespace quadrature {

// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a,b].
// Throws on non-convergence within the subdivision budget.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, double rel_tol = 1e-12, int max_depth = 30);

struct GaussHermite {
    // Nodes/weights for ∫ f(t) e^{-t^2} dt ≈ Σ w_i f(t_i).
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Golub-Welsch nodes via the symmetric tridiagonal Jacobi matrix.
GaussHermite gauss_hermite(int n);

// E f(Z) for Z ~ N(mu, sigma^2) using a precomputed Gauss-Hermite rule.
double gauss_hermite_expectation(const GaussHermite& rule,
                                 const std::function<double(double)>& f,
                                 double mu, double sigma);

}  // namespace quadrature
}  // namespace fieldkde
