#include "fieldkde/innovations.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "fieldkde/quadrature.hpp"
#include "fieldkde/stats.hpp"

namespace fieldkde {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;

double lgamma_pos(double x) { return std::lgamma(x); }

// E|Z|^p for Z ~ N(0,1):  2^{p/2} Γ((p+1)/2) / sqrt(π)
double normal_abs_moment(double p) {
    return std::exp(0.5 * p * 0.6931471805599453094 + lgamma_pos(0.5 * (p + 1.0)) -
                    0.5723649429247000870);  // log sqrt(pi)
}

}  // namespace

double InnovationSpec::transform(std::uint64_t h) const {
    const double u = rng::to_unit_open(h);
    switch (dist) {
        case InnovationDist::Normal:
            return sigma * stats::normal_quantile(u);
        case InnovationDist::Uniform:
            return sigma * kSqrt3 * (2.0 * u - 1.0);
        case InnovationDist::Exponential:
            return sigma * (-std::log1p(-u) - 1.0);
        case InnovationDist::Rademacher:
            return (h >> 63) ? sigma : -sigma;
    }
    throw std::logic_error("unknown innovation distribution");
}

double InnovationSpec::p_norm(double p) const {
    if (!(p >= 1.0)) throw std::invalid_argument("p_norm: p must be >= 1");
    switch (dist) {
        case InnovationDist::Normal:
            return sigma * std::pow(normal_abs_moment(p), 1.0 / p);
        case InnovationDist::Uniform: {
            double a = sigma * kSqrt3;
            return a * std::pow(1.0 / (p + 1.0), 1.0 / p);
        }
        case InnovationDist::Exponential: {
            // E|E-1|^p = e^{-1} (Γ(p+1) + ∫_0^1 t^p e^t dt)
            double head = quadrature::integrate(
                [p](double t) { return std::pow(t, p) * std::exp(t); }, 0.0, 1.0, 1e-14, 1e-13);
            double m = std::exp(-1.0) * (std::exp(lgamma_pos(p + 1.0)) + head);
            return sigma * std::pow(m, 1.0 / p);
        }
        case InnovationDist::Rademacher:
            return sigma;
    }
    throw std::logic_error("unknown innovation distribution");
}

double InnovationSpec::diff_p_norm(double p) const {
    if (!(p >= 1.0)) throw std::invalid_argument("diff_p_norm: p must be >= 1");
    switch (dist) {
        case InnovationDist::Normal:
            // ε - ε' ~ N(0, 2σ²)
            return sigma * 1.4142135623730950488 * std::pow(normal_abs_moment(p), 1.0 / p);
        case InnovationDist::Uniform: {
            // triangular law on [-2a, 2a]: E|T|^p = 2^{p+1} a^p / ((p+1)(p+2))
            double a = sigma * kSqrt3;
            double m = std::pow(2.0, p + 1.0) * std::pow(a, p) / ((p + 1.0) * (p + 2.0));
            return std::pow(m, 1.0 / p);
        }
        case InnovationDist::Exponential:
            // difference of independent exponentials is Laplace: E|L|^p = Γ(p+1)
            return sigma * std::exp(lgamma_pos(p + 1.0) / p);
        case InnovationDist::Rademacher:
            // |ε - ε'| is 0 or 2 with probability 1/2 each
            return sigma * std::pow(2.0, 1.0 - 1.0 / p);
    }
    throw std::logic_error("unknown innovation distribution");
}

double InnovationSpec::diff_p_norm_quadrature(double p) const {
    if (!(p >= 1.0)) throw std::invalid_argument("diff_p_norm_quadrature: p must be >= 1");
    struct Key {
        int dist;
        double sigma, p;
        bool operator<(const Key& o) const {
            return std::tie(dist, sigma, p) < std::tie(o.dist, o.sigma, o.p);
        }
    };
    static std::map<Key, double> cache;
    static std::mutex mu;
    Key key{static_cast<int>(dist), sigma, p};
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    double value;
    if (dist == InnovationDist::Rademacher) {
        value = sigma * std::pow(2.0, 1.0 - 1.0 / p);
    } else {
        double lo, hi;
        switch (dist) {
            case InnovationDist::Normal:
                lo = -10.0 * sigma;
                hi = 10.0 * sigma;
                break;
            case InnovationDist::Uniform:
                lo = -kSqrt3 * sigma;
                hi = kSqrt3 * sigma;
                break;
            default:  // Exponential, centered: support [-σ, ∞)
                lo = -sigma;
                hi = 45.0 * sigma;
                break;
        }
        auto inner = [&](double y) {
            return quadrature::integrate(
                [&](double x) { return std::pow(std::fabs(x - y), p) * density(x); }, lo, hi,
                1e-13, 1e-11);
        };
        double moment = quadrature::integrate([&](double y) { return inner(y) * density(y); },
                                              lo, hi, 1e-12, 1e-10);
        value = std::pow(moment, 1.0 / p);
    }
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(key, value);
    return value;
}

double InnovationSpec::density(double x) const {
    switch (dist) {
        case InnovationDist::Normal:
            return stats::normal_pdf(x / sigma) / sigma;
        case InnovationDist::Uniform: {
            double a = sigma * kSqrt3;
            return (x >= -a && x <= a) ? 1.0 / (2.0 * a) : 0.0;
        }
        case InnovationDist::Exponential: {
            double t = x / sigma + 1.0;
            return t >= 0.0 ? std::exp(-t) / sigma : 0.0;
        }
        case InnovationDist::Rademacher:
            throw std::invalid_argument("Rademacher innovations have no density");
    }
    throw std::logic_error("unknown innovation distribution");
}

double InnovationSpec::cdf(double x) const {
    switch (dist) {
        case InnovationDist::Normal:
            return stats::normal_cdf(x / sigma);
        case InnovationDist::Uniform: {
            double a = sigma * kSqrt3;
            if (x <= -a) return 0.0;
            if (x >= a) return 1.0;
            return (x + a) / (2.0 * a);
        }
        case InnovationDist::Exponential: {
            double t = x / sigma + 1.0;
            return t >= 0.0 ? 1.0 - std::exp(-t) : 0.0;
        }
        case InnovationDist::Rademacher:
            if (x < -sigma) return 0.0;
            if (x < sigma) return 0.5;
            return 1.0;
    }
    throw std::logic_error("unknown innovation distribution");
}

std::string InnovationSpec::name() const {
    switch (dist) {
        case InnovationDist::Normal: return "normal";
        case InnovationDist::Uniform: return "uniform";
        case InnovationDist::Exponential: return "exponential";
        case InnovationDist::Rademacher: return "rademacher";
    }
    return "?";
}

InnovationSpec InnovationSpec::parse(const std::string& name, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("innovation: sigma must be > 0");
    InnovationSpec s;
    s.sigma = sigma;
    if (name == "normal") s.dist = InnovationDist::Normal;
    else if (name == "uniform") s.dist = InnovationDist::Uniform;
    else if (name == "exponential") s.dist = InnovationDist::Exponential;
    else if (name == "rademacher") s.dist = InnovationDist::Rademacher;
    else throw std::invalid_argument("unknown innovation distribution: " + name);
    return s;
}

double InnovationPatch::at(const IndexPoint& p) const {
    auto idx = window.index_of(p);
    if (!idx) throw std::out_of_range("patch: point " + p.to_string() + " outside window");
    return values[*idx];
}

InnovationPatch draw_patch(const InnovationSpec& spec, const Region& window,
                           std::uint64_t master_seed, std::uint64_t stream_id) {
    if (!(spec.sigma > 0.0)) throw std::invalid_argument("draw_patch: invalid innovation spec");
    InnovationPatch patch;
    patch.window = window;
    patch.master_seed = master_seed;
    patch.stream_id = stream_id;
    patch.values.resize(window.cardinality());
    const auto& pts = window.points();
    for (std::size_t k = 0; k < pts.size(); ++k) {
        std::uint64_t h = rng::hash_point(master_seed, stream_id, rng::Role::Innovation, pts[k]);
        patch.values[k] = spec.transform(h);
    }
    return patch;
}

InnovationPatch couple_at_origin(const InnovationPatch& patch, const InnovationSpec& spec) {
    IndexPoint origin;
    origin.coords.assign(patch.window.dim(), 0);
    auto idx = patch.window.index_of(origin);
    if (!idx) throw std::invalid_argument("couple_at_origin: origin not in window");
    InnovationPatch coupled = patch;
    std::uint64_t h = rng::hash_point(patch.master_seed, patch.stream_id,
                                      rng::Role::InnovationPrime, origin);
    coupled.values[*idx] = spec.transform(h);
    return coupled;
}

}  // namespace fieldkde
