#include "fieldkde/kde.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fieldkde/stats.hpp"

namespace fieldkde {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double gauss(double u) { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

}  // namespace

Kernel Kernel::make(KernelFamily family, double cutoff) {
    Kernel k;
    k.family_ = family;
    switch (family) {
        case KernelFamily::Triangular:
            k.support_ = 1.0;
            k.lipschitz_ = 1.0;
            break;
        case KernelFamily::Epanechnikov:
            k.support_ = 1.0;
            k.lipschitz_ = 1.5;
            break;
        case KernelFamily::Quartic:
            k.support_ = 1.0;
            // max |K'| = (15/4) max |u(1-u²)| at u = 1/sqrt(3)
            k.lipschitz_ = 15.0 / 4.0 * (2.0 / (3.0 * 1.7320508075688772935));
            break;
        case KernelFamily::GaussianCutoff: {
            // The jump at ±cutoff must stay below the certification tolerance;
            // cutoff >= 6 keeps it under 7e-9.
            if (!(cutoff >= 6.0))
                throw std::invalid_argument("gaussian_cutoff: cutoff must be >= 6");
            k.cutoff_ = cutoff;
            k.support_ = cutoff;
            k.norm_ = 1.0 - 2.0 * stats::normal_cdf(-cutoff);
            k.lipschitz_ = std::exp(-0.5) * kInvSqrt2Pi / k.norm_;
            break;
        }
    }
    k.certify();
    return k;
}

Kernel Kernel::parse(const std::string& name, double cutoff) {
    if (name == "triangular") return make(KernelFamily::Triangular);
    if (name == "epanechnikov") return make(KernelFamily::Epanechnikov);
    if (name == "quartic") return make(KernelFamily::Quartic);
    if (name == "gaussian_cutoff") return make(KernelFamily::GaussianCutoff, cutoff);
    if (name == "rectangular")
        throw std::invalid_argument("rectangular kernel refused: not Lipschitz");
    throw std::invalid_argument("unknown kernel: " + name);
}

double Kernel::operator()(double u) const {
    double a = std::fabs(u);
    if (a > support_) return 0.0;
    switch (family_) {
        case KernelFamily::Triangular:
            return 1.0 - a;
        case KernelFamily::Epanechnikov:
            return 0.75 * (1.0 - u * u);
        case KernelFamily::Quartic: {
            double t = 1.0 - u * u;
            return 0.9375 * t * t;
        }
        case KernelFamily::GaussianCutoff:
            return gauss(u) / norm_;
    }
    return 0.0;
}

void Kernel::certify() {
    auto self = [this](double u) { return (*this)(u); };
    integral_ = quadrature::integrate(self, -support_, support_, 1e-13, 1e-13);
    if (std::fabs(integral_ - 1.0) > 1e-10)
        throw std::runtime_error("kernel certification failed: ∫K = " +
                                 std::to_string(integral_));
    square_ = quadrature::integrate([&](double u) { return self(u) * self(u); }, -support_,
                                    support_, 1e-13, 1e-13);
    abs_ = quadrature::integrate([&](double u) { return std::fabs(self(u)); }, -support_,
                                 support_, 1e-13, 1e-13);
    u2_abs_ = quadrature::integrate([&](double u) { return u * u * std::fabs(self(u)); },
                                    -support_, support_, 1e-13, 1e-13);
    u_abs_ = quadrature::integrate([&](double u) { return std::fabs(u) * std::fabs(self(u)); },
                                   -support_, support_, 1e-13, 1e-13);
    // Lipschitz spot check on a dense grid.
    const int n = 4096;
    double prev_u = -support_, prev_k = self(prev_u);
    for (int i = 1; i <= n; ++i) {
        double u = -support_ + 2.0 * support_ * i / n;
        double kv = self(u);
        if (std::fabs(kv - prev_k) > lipschitz_ * (u - prev_u) + 1e-9)
            throw std::runtime_error("kernel certification failed: Lipschitz constant too small");
        prev_u = u;
        prev_k = kv;
    }
}

double Kernel::abs_pow_integral(double tau) const {
    if (!(tau > 0.0)) throw std::invalid_argument("kernel: tau must be > 0");
    auto self = [this](double u) { return (*this)(u); };
    return quadrature::integrate([&](double u) { return std::pow(std::fabs(self(u)), tau); },
                                 -support_, support_, 1e-12, 1e-12);
}

std::string Kernel::name() const {
    switch (family_) {
        case KernelFamily::Triangular: return "triangular";
        case KernelFamily::Epanechnikov: return "epanechnikov";
        case KernelFamily::Quartic: return "quartic";
        case KernelFamily::GaussianCutoff: {
            char buf[48];
            std::snprintf(buf, sizeof buf, "gaussian_cutoff(%g)", cutoff_);
            return buf;
        }
    }
    return "?";
}

double BandwidthSchedule::bandwidth(std::size_t region_size) const {
    if (region_size < 2) throw std::invalid_argument("bandwidth: region size must be >= 2");
    const double n = static_cast<double>(region_size);
    double b = 0.0;
    switch (rule) {
        case Rule::PowerLaw:
            if (!(beta > 0.0 && beta < 1.0))
                throw std::invalid_argument("bandwidth: beta must be in (0,1)");
            b = std::pow(n, -beta);
            break;
        case Rule::BerryEsseen:
            if (!(tau > 2.0 && tau <= 3.0))
                throw std::invalid_argument("bandwidth: tau must satisfy 2 < tau <= 3");
            b = std::pow(n, 2.0 / tau - 1.0);
            break;
        case Rule::Fixed:
            b = fixed;
            break;
    }
    if (!(b > 0.0 && b < 1.0))
        throw std::runtime_error("bandwidth schedule violates b in (0,1): b=" +
                                 std::to_string(b) + " at |Λ|=" + std::to_string(region_size));
    if (!(n * b > 1.0))
        throw std::runtime_error("bandwidth schedule violates |Λ|b > 1: |Λ|b=" +
                                 std::to_string(n * b));
    return b;
}

std::string BandwidthSchedule::describe() const {
    char buf[64];
    switch (rule) {
        case Rule::PowerLaw:
            std::snprintf(buf, sizeof buf, "power(beta=%g)", beta);
            break;
        case Rule::BerryEsseen:
            std::snprintf(buf, sizeof buf, "berry-esseen(tau=%g)", tau);
            break;
        case Rule::Fixed:
            std::snprintf(buf, sizeof buf, "fixed(%g)", fixed);
            break;
    }
    return buf;
}

std::vector<double> kde_values_naive(std::span<const double> sample, const Kernel& kernel,
                                     double b, std::span<const double> points) {
    if (!(b > 0.0)) throw std::invalid_argument("kde: bandwidth must be > 0");
    if (sample.empty()) throw std::invalid_argument("kde: empty sample");
    std::vector<double> out(points.size());
    const double scale = 1.0 / (static_cast<double>(sample.size()) * b);
    for (std::size_t j = 0; j < points.size(); ++j) {
        stats::KahanSum s;
        for (double x : sample) s.add(kernel((points[j] - x) / b));
        out[j] = s.value() * scale;
    }
    return out;
}

std::vector<double> kde_values(std::span<const double> sample, const Kernel& kernel, double b,
                               std::span<const double> points) {
    if (!(b > 0.0)) throw std::invalid_argument("kde: bandwidth must be > 0");
    if (sample.empty()) throw std::invalid_argument("kde: empty sample");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double reach = kernel.support() * b;
    const double scale = 1.0 / (static_cast<double>(sample.size()) * b);
    std::vector<double> out(points.size());
    for (std::size_t j = 0; j < points.size(); ++j) {
        const double x = points[j];
        auto lo = std::lower_bound(sorted.begin(), sorted.end(), x - reach);
        auto hi = std::upper_bound(lo, sorted.end(), x + reach);
        stats::KahanSum s;
        for (auto it = lo; it != hi; ++it) s.add(kernel((x - *it) / b));
        out[j] = s.value() * scale;
    }
    return out;
}

DensityEstimate estimate(const FieldSample& sample, const Kernel& kernel, double b,
                         std::span<const double> points) {
    DensityEstimate est;
    est.xs.assign(points.begin(), points.end());
    est.values = kde_values(sample.values, kernel, b, points);
    est.bandwidth = b;
    est.kernel = kernel.name();
    est.sample_seed = sample.provenance.master_seed;
    est.sample_stream = sample.provenance.stream_id;
    return est;
}

double expected_fn(const DensityModel& density, const Kernel& kernel, double b, double x) {
    if (!(b > 0.0)) throw std::invalid_argument("expected_fn: bandwidth must be > 0");
    return quadrature::integrate(
        [&](double t) { return kernel(t) * density(x - b * t); }, -kernel.support(),
        kernel.support(), 1e-10, 1e-10);
}

MDependentSmoother::MDependentSmoother(const FieldSpec& linear_spec, int m, Kernel kernel,
                                       double b, int gh_nodes, int inner_mc)
    : spec_(linear_spec), m_(m), kernel_(std::move(kernel)), b_(b), inner_mc_(inner_mc) {
    if (linear_spec.kind != FieldKind::Linear)
        throw std::invalid_argument("m-dependent smoothing requires a linear field spec");
    if (m < 0) throw std::invalid_argument("m-dependent smoothing: m must be >= 0");
    if (!(b > 0.0)) throw std::invalid_argument("m-dependent smoothing: b must be > 0");
    LinearSplit split = linear_split(linear_spec, m);
    inner_entries_ = std::move(split.inner_entries);
    tail_sd_ = std::sqrt(split.tail_variance);
    full_entries_ = linear_spec.coeffs.entries_within();
    for (const auto& e : full_entries_)
        if (e.first.sup_norm() > m) tail_entries_.push_back(e);
    gaussian_tail_ = linear_spec.innovation.dist == InnovationDist::Normal;
    if (gaussian_tail_ && tail_sd_ > 0.0) gh_ = quadrature::gauss_hermite(gh_nodes);
}

double MDependentSmoother::inner_sum(const InnovationPatch& patch, const IndexPoint& site) const {
    double acc = 0.0;
    for (const auto& [s, a] : inner_entries_) acc += a * patch.at(site - s);
    return acc;
}

double MDependentSmoother::full_sum(const InnovationPatch& patch, const IndexPoint& site) const {
    double acc = 0.0;
    for (const auto& [s, a] : full_entries_) acc += a * patch.at(site - s);
    return acc;
}

double MDependentSmoother::k_term(const InnovationPatch& patch, const IndexPoint& site,
                                  double x) const {
    return kernel_((x - full_sum(patch, site)) / b_);
}

double MDependentSmoother::kbar(const InnovationPatch& patch, const IndexPoint& site,
                                double x) const {
    const double s_m = inner_sum(patch, site);
    if (tail_sd_ == 0.0) return kernel_((x - s_m) / b_);
    if (gaussian_tail_) {
        return quadrature::gauss_hermite_expectation(
            gh_, [&](double t) { return kernel_((x - s_m - t) / b_); }, 0.0, tail_sd_);
    }
    // Nested Monte Carlo on the tail, keyed per (patch stream, site, draw).
    stats::KahanSum acc;
    for (int j = 0; j < inner_mc_; ++j) {
        double t = 0.0;
        for (std::size_t e = 0; e < tail_entries_.size(); ++e) {
            rng::KeyHash h;
            h.absorb(patch.master_seed);
            h.absorb(patch.stream_id);
            h.absorb(static_cast<std::uint64_t>(rng::Role::KbarInner));
            for (std::int32_t c : site.coords)
                h.absorb(static_cast<std::uint64_t>(static_cast<std::int64_t>(c)));
            h.absorb(static_cast<std::uint64_t>(j));
            h.absorb(static_cast<std::uint64_t>(e));
            t += tail_entries_[e].second * spec_.innovation.transform(h.finish());
        }
        acc.add(kernel_((x - s_m - t) / b_));
    }
    return acc.value() / inner_mc_;
}

namespace {

InnovationPatch regenerate_patch(const FieldSample& sample) {
    Box win = sample.region.bounding_box().inflated(sample.provenance.truncation_radius);
    return draw_patch(sample.spec.base_innovation(), Region::box(win),
                      sample.provenance.master_seed, sample.provenance.stream_id);
}

}  // namespace

double kbar(const FieldSample& sample, int m, const Kernel& kernel, double b, double x,
            const IndexPoint& site, int gh_nodes, int inner_mc) {
    MDependentSmoother sm(sample.spec, m, kernel, b, gh_nodes, inner_mc);
    InnovationPatch patch = regenerate_patch(sample);
    return sm.kbar(patch, site, x);
}

DensityEstimate estimate_bar(const FieldSample& sample, int m, const Kernel& kernel, double b,
                             std::span<const double> points, int gh_nodes, int inner_mc) {
    MDependentSmoother sm(sample.spec, m, kernel, b, gh_nodes, inner_mc);
    if (sm.tail_sd() == 0.0) {
        // m covers the whole support: Kbar_i == K_i pathwise, so fbar_n is
        // exactly f_n.
        return estimate(sample, kernel, b, points);
    }
    InnovationPatch patch = regenerate_patch(sample);
    DensityEstimate est;
    est.xs.assign(points.begin(), points.end());
    est.values.resize(points.size());
    const double scale = 1.0 / (static_cast<double>(sample.region.cardinality()) * b);
    for (std::size_t j = 0; j < points.size(); ++j) {
        stats::KahanSum s;
        for (const auto& site : sample.region.points()) s.add(sm.kbar(patch, site, points[j]));
        est.values[j] = s.value() * scale;
    }
    est.bandwidth = b;
    est.kernel = kernel.name();
    est.sample_seed = sample.provenance.master_seed;
    est.sample_stream = sample.provenance.stream_id;
    return est;
}

L1Result l1_distance(const DensityEstimate& est, const DensityModel& density, double a) {
    if (est.xs.size() < 2) throw std::invalid_argument("l1_distance: need a grid");
    const double h = est.xs[1] - est.xs[0];
    if (!(h > 0.0)) throw std::invalid_argument("l1_distance: grid must be increasing");
    for (std::size_t j = 1; j < est.xs.size(); ++j)
        if (std::fabs(est.xs[j] - est.xs[j - 1] - h) > 1e-9 * h)
            throw std::invalid_argument("l1_distance: grid must be uniform");
    if (h > est.bandwidth / 10.0 * (1.0 + 1e-12))
        throw std::invalid_argument("l1_distance: unresolved grid (step must be <= b/10)");
    if (est.xs.front() > -a + 0.5 * h || est.xs.back() < a - 0.5 * h)
        throw std::invalid_argument("l1_distance: grid does not cover [-A, A]");

    stats::KahanSum s;
    for (std::size_t j = 0; j < est.xs.size(); ++j) {
        double w = (j == 0 || j + 1 == est.xs.size()) ? 0.5 : 1.0;
        s.add(w * std::fabs(est.values[j] - density(est.xs[j])));
    }
    L1Result out;
    out.value = s.value() * h;
    out.tail_mass = 1.0 - density.mass_within(a);
    return out;
}

std::string density_estimate_csv(const DensityEstimate& est, std::span<const double> efn,
                                 std::span<const double> f) {
    if (!efn.empty() && efn.size() != est.xs.size())
        throw std::invalid_argument("estimate csv: efn length mismatch");
    if (!f.empty() && f.size() != est.xs.size())
        throw std::invalid_argument("estimate csv: f length mismatch");
    std::string out = "x,fn";
    if (!efn.empty()) out += ",efn";
    if (!f.empty()) out += ",f";
    out += "\n";
    char buf[40];
    auto put = [&](double v) {
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        out.append(buf, res.ptr);
    };
    for (std::size_t j = 0; j < est.xs.size(); ++j) {
        put(est.xs[j]);
        out += ',';
        put(est.values[j]);
        if (!efn.empty()) {
            out += ',';
            put(efn[j]);
        }
        if (!f.empty()) {
            out += ',';
            put(f[j]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace fieldkde
