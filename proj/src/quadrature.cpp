#include "fieldkde/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fieldkde {
namespace quadrature {

namespace {

// Gauss-Kronrod 7/15 abscissae and weights on [-1,1].
const double kXgk[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
    -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
    0.207784955007898,  0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
const double kWgk[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
const double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                       0.417959183673469};

struct Segment {
    double value;
    double error;
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fk[15];
    for (int i = 0; i < 15; ++i) fk[i] = f(c + h * kXgk[i]);
    double resk = 0.0;
    for (int i = 0; i < 15; ++i) resk += kWgk[i] * fk[i];
    double resg = kWg[3] * fk[7];
    for (int i = 0; i < 3; ++i) resg += kWg[i] * (fk[2 * i + 1] + fk[13 - 2 * i]);
    Segment s;
    s.value = resk * h;
    s.error = std::fabs((resk - resg) * h);
    return s;
}

struct Piece {
    double a, b;
    Segment seg;
};

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 double rel_tol, int max_depth) {
    if (a == b) return 0.0;
    // Global-budget adaptive scheme: repeatedly bisect the worst segment
    // until the summed error estimate meets the tolerance.
    const std::size_t max_pieces = static_cast<std::size_t>(1) << std::min(max_depth, 14);
    std::vector<Piece> pieces;
    pieces.push_back({a, b, gk15(f, a, b)});
    for (;;) {
        double value = 0.0, error = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            value += pieces[i].seg.value;
            error += pieces[i].seg.error;
            if (pieces[i].seg.error > pieces[worst].seg.error) worst = i;
        }
        double tol = std::max(abs_tol, rel_tol * std::fabs(value));
        if (error <= tol) return value;
        if (pieces.size() >= max_pieces) {
            if (error > tol * 64.0 && error > 1e-11 * (1.0 + std::fabs(value)))
                throw std::runtime_error("quadrature: failed to converge");
            return value;
        }
        Piece w = pieces[worst];
        double mid = 0.5 * (w.a + w.b);
        pieces[worst] = {w.a, mid, gk15(f, w.a, mid)};
        pieces.push_back({mid, w.b, gk15(f, mid, w.b)});
    }
}

GaussHermite gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
    // Jacobi matrix of the (physicists') Hermite polynomials: zero diagonal,
    // off-diagonal sqrt(k/2).
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double off = std::sqrt(static_cast<double>(k) / 2.0);
        jacobi(k, k - 1) = off;
        jacobi(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("gauss_hermite: eigensolver failed");
    GaussHermite rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mu0 = std::sqrt(3.14159265358979323846);  // ∫ e^{-x²} dx
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = solver.eigenvalues()(i);
        double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

double gauss_hermite_expectation(const GaussHermite& rule, const std::function<double(double)>& f,
                                 double mu, double sigma) {
    // E f(N(mu, sigma²)) = π^{-1/2} Σ w_i f(mu + sqrt(2) sigma t_i)
    const double inv_sqrt_pi = 0.5641895835477562869;
    const double scale = 1.4142135623730950488 * sigma;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(mu + scale * rule.nodes[i]);
    return acc * inv_sqrt_pi;
}

}  // namespace quadrature
}  // namespace fieldkde
