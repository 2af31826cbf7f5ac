#include "fieldkde/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "fieldkde/stats.hpp"

namespace fieldkde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Number of sup-norm-k shells points: |{i : |i| = k}|.
double shell_count(int d, long k) {
    if (k == 0) return 1.0;
    return std::pow(2.0 * k + 1.0, d) - std::pow(2.0 * k - 1.0, d);
}

// Σ_{k>m} k^w N_k(d) ρ^k with a certified geometric remainder bound.
double geometric_shell_tail(int m, double w, int d, double rho) {
    if (!(rho > 0.0)) return 0.0;
    if (rho >= 1.0) return kInf;
    double sum = 0.0;
    double rho_k = std::pow(rho, m + 1);
    for (long k = m + 1;; ++k) {
        double t = std::pow(static_cast<double>(k), w) * shell_count(d, k) * rho_k;
        sum += t;
        double q = rho * std::pow((k + 1.0) / k, w + d - 1.0);
        if (q < 1.0) {
            double rem = t * q / (1.0 - q);
            if (rem <= 1e-14 * sum + 1e-300) break;
        }
        rho_k *= rho;
        if (k > m + 100000) throw std::runtime_error("geometric tail: series did not settle");
    }
    return sum;
}

// Σ_{k>m} k^w N_k(d) (1+k)^{-γ}; +inf unless γ > w + d.
double polynomial_shell_tail(int m, double w, int d, double gamma) {
    if (!(gamma > w + d)) return kInf;
    double sum = 0.0;
    const double lead = 2.0 * d * std::pow(3.0, d - 1.0);  // N_k <= 2d(3k)^{d-1} for k >= 1
    for (long k = m + 1;; ++k) {
        double t = std::pow(static_cast<double>(k), w) * shell_count(d, k) *
                   std::pow(1.0 + k, -gamma);
        sum += t;
        double s = w + d - 1.0 - gamma;  // < -1
        double rem = lead * std::pow(static_cast<double>(k), s + 1.0) / (-s - 1.0);
        if (rem <= 1e-12 * sum + 1e-300) break;
        if (k > m + 10000000) throw std::runtime_error("polynomial tail: series did not settle");
    }
    return sum;
}

std::vector<IndexPoint> centered_box_points(int d, int radius) {
    Region r = Region::ball(d, radius);
    return r.points();
}

}  // namespace

CoefficientMap CoefficientMap::stored(int d, std::vector<std::pair<IndexPoint, double>> entries) {
    if (d < 1) throw std::invalid_argument("coefficients: dimension must be >= 1");
    CoefficientMap m;
    m.dim_ = d;
    m.law_ = CoefficientLaw::Stored;
    int radius = 0;
    for (auto& [s, a] : entries) {
        if (s.dim() != d) throw std::invalid_argument("coefficients: point dimension mismatch");
        radius = std::max(radius, static_cast<int>(s.sup_norm()));
        (void)a;
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return lex_less(a.first, b.first); });
    for (std::size_t i = 1; i < entries.size(); ++i)
        if (entries[i].first == entries[i - 1].first)
            throw std::invalid_argument("coefficients: duplicate entry at " +
                                        entries[i].first.to_string());
    m.radius_ = radius;
    m.entries_ = std::move(entries);
    return m;
}

CoefficientMap CoefficientMap::geometric(int d, double c, double rho, int radius, double l2_tol) {
    if (d < 1) throw std::invalid_argument("coefficients: dimension must be >= 1");
    if (!(rho > 0.0 && rho < 1.0))
        throw std::invalid_argument("geometric coefficients: rho must be in (0,1)");
    CoefficientMap m;
    m.dim_ = d;
    m.law_ = CoefficientLaw::Geometric;
    m.c_ = c;
    m.rho_ = rho;
    if (radius <= 0) {
        // Smallest R whose certified L2 tail is below l2_tol of the field L2 norm.
        double total = 1.0 + geometric_shell_tail(0, 0.0, d, rho * rho);  // Σ N_k ρ^{2k}
        double budget = l2_tol * l2_tol * total;
        radius = 1;
        while (geometric_shell_tail(radius, 0.0, d, rho * rho) > budget) ++radius;
    }
    m.radius_ = radius;
    m.build_entries();
    return m;
}

CoefficientMap CoefficientMap::polynomial(int d, double c, double gamma, int radius,
                                          double l2_tol) {
    if (d < 1) throw std::invalid_argument("coefficients: dimension must be >= 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("polynomial coefficients: gamma must be > 0");
    CoefficientMap m;
    m.dim_ = d;
    m.law_ = CoefficientLaw::Polynomial;
    m.c_ = c;
    m.gamma_ = gamma;
    if (radius <= 0) {
        if (!(2.0 * gamma > d))
            throw std::invalid_argument("polynomial coefficients: not square-summable");
        double total = 1.0 + polynomial_shell_tail(0, 0.0, d, 2.0 * gamma);
        double budget = l2_tol * l2_tol * total;
        radius = 1;
        while (polynomial_shell_tail(radius, 0.0, d, 2.0 * gamma) > budget) ++radius;
    }
    m.radius_ = radius;
    m.build_entries();
    return m;
}

void CoefficientMap::build_entries() {
    entries_.clear();
    for (const auto& s : centered_box_points(dim_, radius_)) {
        double a = law_ == CoefficientLaw::Geometric
                       ? c_ * std::pow(rho_, s.sup_norm())
                       : c_ * std::pow(1.0 + s.sup_norm(), -gamma_);
        entries_.emplace_back(s, a);
    }
}

double CoefficientMap::value(const IndexPoint& s) const {
    if (s.dim() != dim_) throw std::invalid_argument("coefficients: dimension mismatch");
    int n = s.sup_norm();
    if (n > radius_) return 0.0;
    switch (law_) {
        case CoefficientLaw::Geometric:
            return c_ * std::pow(rho_, n);
        case CoefficientLaw::Polynomial:
            return c_ * std::pow(1.0 + n, -gamma_);
        case CoefficientLaw::Stored: {
            auto it = std::lower_bound(entries_.begin(), entries_.end(), s,
                                       [](const auto& e, const IndexPoint& p) {
                                           return lex_less(e.first, p);
                                       });
            if (it != entries_.end() && it->first == s) return it->second;
            return 0.0;
        }
    }
    return 0.0;
}

std::vector<std::pair<IndexPoint, double>> CoefficientMap::entries_within(int m) const {
    if (m < 0 || m >= radius_) return entries_;
    std::vector<std::pair<IndexPoint, double>> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_)
        if (e.first.sup_norm() <= m) out.push_back(e);
    return out;
}

double CoefficientMap::sum_sq_within(int m) const {
    stats::KahanSum s;
    for (const auto& e : entries_)
        if (m < 0 || e.first.sup_norm() <= m) s.add(e.second * e.second);
    return s.value();
}

double CoefficientMap::truncated_l2_tail(int m) const {
    if (m >= radius_) return 0.0;
    stats::KahanSum s;
    for (const auto& e : entries_)
        if (e.first.sup_norm() > m) s.add(e.second * e.second);
    return s.value();
}

double CoefficientMap::law_l2_tail(int m) const {
    switch (law_) {
        case CoefficientLaw::Stored:
            return truncated_l2_tail(m);
        case CoefficientLaw::Geometric:
            return c_ * c_ * geometric_shell_tail(m, 0.0, dim_, rho_ * rho_);
        case CoefficientLaw::Polynomial:
            return c_ * c_ * polynomial_shell_tail(m, 0.0, dim_, 2.0 * gamma_);
    }
    return 0.0;
}

double CoefficientMap::law_weighted_abs_tail(int m, double w) const {
    switch (law_) {
        case CoefficientLaw::Stored: {
            stats::KahanSum s;
            for (const auto& e : entries_) {
                int n = e.first.sup_norm();
                if (n > m) s.add(std::pow(static_cast<double>(n), w) * std::fabs(e.second));
            }
            return s.value();
        }
        case CoefficientLaw::Geometric:
            return std::fabs(c_) * geometric_shell_tail(m, w, dim_, rho_);
        case CoefficientLaw::Polynomial:
            return std::fabs(c_) * polynomial_shell_tail(m, w, dim_, gamma_);
    }
    return 0.0;
}

bool CoefficientMap::law_tail_finite(double w) const {
    switch (law_) {
        case CoefficientLaw::Stored: return true;
        case CoefficientLaw::Geometric: return true;
        case CoefficientLaw::Polynomial: return gamma_ > w + dim_;
    }
    return false;
}

std::string CoefficientMap::describe() const {
    switch (law_) {
        case CoefficientLaw::Stored:
            return "stored(R=" + std::to_string(radius_) + ")";
        case CoefficientLaw::Geometric:
            return "geometric(rho=" + std::to_string(rho_) + ",R=" + std::to_string(radius_) + ")";
        case CoefficientLaw::Polynomial:
            return "polynomial(gamma=" + std::to_string(gamma_) + ",R=" + std::to_string(radius_) +
                   ")";
    }
    return "?";
}

VolterraPairs VolterraPairs::make(int d,
                                  std::vector<std::tuple<IndexPoint, IndexPoint, double>> pairs) {
    if (d < 1) throw std::invalid_argument("volterra: dimension must be >= 1");
    for (const auto& [s1, s2, a] : pairs) {
        if (s1.dim() != d || s2.dim() != d)
            throw std::invalid_argument("volterra: pair dimension mismatch");
        if (s1 == s2 && a != 0.0)
            throw std::invalid_argument("volterra: diagonal coefficients must vanish");
    }
    VolterraPairs v;
    v.dim = d;
    v.pairs = std::move(pairs);
    return v;
}

int VolterraPairs::max_radius() const {
    int r = 0;
    for (const auto& [s1, s2, a] : pairs) {
        r = std::max(r, static_cast<int>(s1.sup_norm()));
        r = std::max(r, static_cast<int>(s2.sup_norm()));
        (void)a;
    }
    return r;
}

double SubordinationMap::operator()(double x) const {
    switch (kind) {
        case Kind::Identity: return x;
        case Kind::Tanh: return scale * std::tanh(x);
        case Kind::ScaledAbs: return scale * std::fabs(x);
        case Kind::Zero: return 0.0;
    }
    return x;
}

double SubordinationMap::lipschitz() const {
    switch (kind) {
        case Kind::Identity: return 1.0;
        case Kind::Tanh: return std::fabs(scale);
        case Kind::ScaledAbs: return std::fabs(scale);
        case Kind::Zero: return 0.0;
    }
    return 1.0;
}

std::string SubordinationMap::name() const {
    switch (kind) {
        case Kind::Identity: return "identity";
        case Kind::Tanh: return "tanh";
        case Kind::ScaledAbs: return "scaled_abs";
        case Kind::Zero: return "zero";
    }
    return "?";
}

SubordinationMap SubordinationMap::parse(const std::string& name, double scale) {
    SubordinationMap m;
    m.scale = scale;
    if (name == "identity") m.kind = Kind::Identity;
    else if (name == "tanh") m.kind = Kind::Tanh;
    else if (name == "scaled_abs") m.kind = Kind::ScaledAbs;
    else if (name == "zero") m.kind = Kind::Zero;
    else throw std::invalid_argument("unknown subordination map: " + name);
    return m;
}

FieldSpec FieldSpec::linear(CoefficientMap coeffs, InnovationSpec innovation) {
    FieldSpec s;
    s.kind = FieldKind::Linear;
    s.dim = coeffs.dim();
    s.coeffs = std::move(coeffs);
    s.innovation = innovation;
    return s;
}

FieldSpec FieldSpec::volterra(VolterraPairs pairs, InnovationSpec innovation) {
    FieldSpec s;
    s.kind = FieldKind::Volterra;
    s.dim = pairs.dim;
    s.pairs = std::move(pairs);
    s.innovation = innovation;
    return s;
}

FieldSpec FieldSpec::subordinated(FieldSpec inner, SubordinationMap map) {
    FieldSpec s;
    s.kind = FieldKind::Subordinated;
    s.dim = inner.dim;
    s.innovation = inner.base_innovation();
    s.inner = std::make_shared<FieldSpec>(std::move(inner));
    s.map = map;
    return s;
}

int FieldSpec::window_radius() const {
    switch (kind) {
        case FieldKind::Linear: return coeffs.radius();
        case FieldKind::Volterra: return pairs.max_radius();
        case FieldKind::Subordinated: return inner->window_radius();
    }
    return 0;
}

const InnovationSpec& FieldSpec::base_innovation() const {
    if (kind == FieldKind::Subordinated) return inner->base_innovation();
    return innovation;
}

namespace {

Region make_window(const Region& region, int radius, std::size_t budget) {
    Box win = region.bounding_box().inflated(radius);
    if (win.size() > budget)
        throw std::runtime_error("window materialization exceeds the memory budget (" +
                                 std::to_string(win.size()) + " > " + std::to_string(budget) +
                                 " points)");
    return Region::box(win);
}

// Signed stride offsets of the filter taps inside a dense box window.
std::vector<std::ptrdiff_t> tap_offsets(const Box& win,
                                        const std::vector<std::pair<IndexPoint, double>>& entries) {
    auto strides = win.strides();
    std::vector<std::ptrdiff_t> off(entries.size());
    for (std::size_t e = 0; e < entries.size(); ++e) {
        std::ptrdiff_t o = 0;
        for (int k = 0; k < win.dim(); ++k)
            o += static_cast<std::ptrdiff_t>(entries[e].first.coords[k]) *
                 static_cast<std::ptrdiff_t>(strides[k]);
        off[e] = o;
    }
    return off;
}

}  // namespace

FieldSample linear_sample(const FieldSpec& spec, const Region& region, std::uint64_t seed,
                          std::uint64_t stream, std::size_t window_budget) {
    if (spec.kind != FieldKind::Linear)
        throw std::invalid_argument("linear_sample: spec is not a linear field");
    const int radius = spec.coeffs.radius();
    Region window = make_window(region, radius, window_budget);
    InnovationPatch patch = draw_patch(spec.innovation, window, seed, stream);
    const auto entries = spec.coeffs.entries_within();
    const auto offsets = tap_offsets(*window.as_box(), entries);

    FieldSample out;
    out.region = region;
    out.spec = spec;
    out.provenance = {seed, stream, radius};
    out.values.reserve(region.cardinality());
    const double* eps = patch.data();
    for (const auto& site : region.points()) {
        std::ptrdiff_t base = static_cast<std::ptrdiff_t>(window.as_box()->offset(site));
        double acc = 0.0;
        for (std::size_t e = 0; e < entries.size(); ++e)
            acc += entries[e].second * eps[base - offsets[e]];
        out.values.push_back(acc);
    }
    return out;
}

FieldSample volterra_sample(const FieldSpec& spec, const Region& region, std::uint64_t seed,
                            std::uint64_t stream, std::size_t window_budget) {
    if (spec.kind != FieldKind::Volterra)
        throw std::invalid_argument("volterra_sample: spec is not a Volterra field");
    const int radius = spec.pairs.max_radius();
    Region window = make_window(region, radius, window_budget);
    InnovationPatch patch = draw_patch(spec.innovation, window, seed, stream);

    const auto& box = *window.as_box();
    auto strides = box.strides();
    std::vector<std::ptrdiff_t> off1, off2;
    std::vector<double> coefs;
    for (const auto& [s1, s2, a] : spec.pairs.pairs) {
        std::ptrdiff_t o1 = 0, o2 = 0;
        for (int k = 0; k < box.dim(); ++k) {
            o1 += static_cast<std::ptrdiff_t>(s1.coords[k]) *
                  static_cast<std::ptrdiff_t>(strides[k]);
            o2 += static_cast<std::ptrdiff_t>(s2.coords[k]) *
                  static_cast<std::ptrdiff_t>(strides[k]);
        }
        off1.push_back(o1);
        off2.push_back(o2);
        coefs.push_back(a);
    }

    FieldSample out;
    out.region = region;
    out.spec = spec;
    out.provenance = {seed, stream, radius};
    out.values.reserve(region.cardinality());
    const double* eps = patch.data();
    for (const auto& site : region.points()) {
        std::ptrdiff_t base = static_cast<std::ptrdiff_t>(box.offset(site));
        double acc = 0.0;
        for (std::size_t e = 0; e < coefs.size(); ++e)
            acc += coefs[e] * eps[base - off1[e]] * eps[base - off2[e]];
        out.values.push_back(acc);
    }
    return out;
}

FieldSample subordinate(const FieldSample& sample, const SubordinationMap& map) {
    FieldSample out = sample;
    out.spec = FieldSpec::subordinated(sample.spec, map);
    for (auto& v : out.values) v = map(v);
    return out;
}

FieldSample sample_field(const FieldSpec& spec, const Region& region, std::uint64_t seed,
                         std::uint64_t stream, std::size_t window_budget) {
    switch (spec.kind) {
        case FieldKind::Linear:
            return linear_sample(spec, region, seed, stream, window_budget);
        case FieldKind::Volterra:
            return volterra_sample(spec, region, seed, stream, window_budget);
        case FieldKind::Subordinated: {
            FieldSample inner = sample_field(*spec.inner, region, seed, stream, window_budget);
            FieldSample out = subordinate(inner, spec.map);
            out.spec = spec;
            return out;
        }
    }
    throw std::logic_error("unknown field kind");
}

double evaluate_site(const FieldSpec& spec, const InnovationPatch& patch, const IndexPoint& site) {
    switch (spec.kind) {
        case FieldKind::Linear: {
            double acc = 0.0;
            for (const auto& [s, a] : spec.coeffs.entries_within()) acc += a * patch.at(site - s);
            return acc;
        }
        case FieldKind::Volterra: {
            double acc = 0.0;
            for (const auto& [s1, s2, a] : spec.pairs.pairs)
                acc += a * patch.at(site - s1) * patch.at(site - s2);
            return acc;
        }
        case FieldKind::Subordinated:
            return spec.map(evaluate_site(*spec.inner, patch, site));
    }
    throw std::logic_error("unknown field kind");
}

LinearSplit linear_split(const FieldSpec& spec, int m) {
    if (spec.kind != FieldKind::Linear)
        throw std::invalid_argument("linear_split: spec is not a linear field");
    if (m < 0) throw std::invalid_argument("linear_split: window radius must be >= 0");
    LinearSplit out;
    out.inner_entries = spec.coeffs.entries_within(m);
    out.tail_variance = spec.innovation.variance() * spec.coeffs.truncated_l2_tail(m);
    return out;
}

DensityModel DensityModel::exact_normal(double variance) {
    if (!(variance > 0.0))
        throw std::invalid_argument("density: degenerate marginal law (zero variance)");
    DensityModel m;
    m.kind_ = Kind::ExactNormal;
    m.sd_ = std::sqrt(variance);
    return m;
}

DensityModel DensityModel::numeric_baseline(const FieldSpec& spec, std::size_t n_points,
                                            std::uint64_t seed) {
    if (n_points < 1000)
        throw std::invalid_argument("numeric baseline: needs at least 1000 sample points");
    // Pool sites from consecutive cube chunks (stationarity makes every site
    // draw from the marginal law).
    const int d = spec.dim;
    int side = std::max<int>(2, static_cast<int>(std::llround(
                                    std::pow(65536.0, 1.0 / static_cast<double>(d)))));
    Region chunk = Region::cube(d, side);
    std::vector<double> xs;
    xs.reserve(n_points + chunk.cardinality());
    std::uint64_t stream = 0;
    while (xs.size() < n_points) {
        FieldSample s = sample_field(spec, chunk, seed, stream++);
        xs.insert(xs.end(), s.values.begin(), s.values.end());
    }
    xs.resize(n_points);

    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
    if (!(var > 0.0)) throw std::invalid_argument("numeric baseline: degenerate sample");
    double sd = std::sqrt(var);

    const double bw = 0.25 * 1.06 * sd * std::pow(static_cast<double>(n_points), -0.2);
    const double lo = -10.0 * sd, hi = 10.0 * sd;
    const double step = bw / 4.0;
    const std::size_t bins = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;

    std::vector<double> counts(bins, 0.0);
    for (double x : xs) {
        if (x < lo || x > hi) continue;
        auto b = static_cast<std::size_t>((x - lo) / step);
        if (b >= bins) b = bins - 1;
        counts[b] += 1.0;
    }
    // Epanechnikov smoothing of the binned counts.
    const long reach = static_cast<long>(std::ceil(bw / step));
    std::vector<double> values(bins, 0.0);
    const double norm = 1.0 / (static_cast<double>(n_points) * bw);
    for (std::size_t j = 0; j < bins; ++j) {
        double x = lo + static_cast<double>(j) * step;
        double acc = 0.0;
        long j0 = std::max<long>(0, static_cast<long>(j) - reach);
        long j1 = std::min<long>(static_cast<long>(bins) - 1, static_cast<long>(j) + reach);
        for (long i = j0; i <= j1; ++i) {
            double u = (x - (lo + static_cast<double>(i) * step + 0.5 * step)) / bw;
            if (std::fabs(u) < 1.0) acc += counts[static_cast<std::size_t>(i)] * 0.75 * (1.0 - u * u);
        }
        values[j] = acc * norm;
    }

    DensityModel m;
    m.kind_ = Kind::NumericBaseline;
    m.sd_ = sd;
    m.grid_lo_ = lo;
    m.grid_step_ = step;
    m.grid_values_ = std::move(values);
    return m;
}

double DensityModel::operator()(double x) const {
    if (kind_ == Kind::ExactNormal) return stats::normal_pdf(x / sd_) / sd_;
    double pos = (x - grid_lo_) / grid_step_;
    if (pos <= 0.0 || pos >= static_cast<double>(grid_values_.size() - 1)) return 0.0;
    auto j = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(j);
    return grid_values_[j] * (1.0 - frac) + grid_values_[j + 1] * frac;
}

double DensityModel::cdf(double x) const {
    if (kind_ != Kind::ExactNormal)
        throw std::invalid_argument("density: cdf is only available for the exact kind");
    return stats::normal_cdf(x / sd_);
}

double DensityModel::lipschitz_bound() const {
    if (kind_ == Kind::ExactNormal) {
        // max |f'| of N(0, σ²) is attained at ±σ.
        return std::exp(-0.5) * 0.3989422804014326779 / (sd_ * sd_);
    }
    double m = 0.0;
    for (std::size_t j = 1; j < grid_values_.size(); ++j)
        m = std::max(m, std::fabs(grid_values_[j] - grid_values_[j - 1]) / grid_step_);
    return m;
}

double DensityModel::mass_within(double a) const {
    if (kind_ == Kind::ExactNormal) return cdf(a) - cdf(-a);
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < grid_values_.size(); ++j) {
        double x0 = grid_lo_ + static_cast<double>(j) * grid_step_;
        double x1 = x0 + grid_step_;
        if (x1 < -a || x0 > a) continue;
        acc += 0.5 * (grid_values_[j] + grid_values_[j + 1]) * grid_step_;
    }
    return acc;
}

double DensityModel::second_moment() const {
    if (kind_ == Kind::ExactNormal) return sd_ * sd_;
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < grid_values_.size(); ++j) {
        double x = grid_lo_ + (static_cast<double>(j) + 0.5) * grid_step_;
        acc += x * x * 0.5 * (grid_values_[j] + grid_values_[j + 1]) * grid_step_;
    }
    return acc;
}

DensityModel marginal_density_linear_gaussian(const FieldSpec& spec) {
    if (spec.kind != FieldKind::Linear || spec.innovation.dist != InnovationDist::Normal)
        throw std::invalid_argument(
            "marginal density: closed form requires a Gaussian linear spec");
    double sum_sq = spec.coeffs.sum_sq_within(-1) + spec.coeffs.law_l2_tail(spec.coeffs.radius());
    return DensityModel::exact_normal(spec.innovation.variance() * sum_sq);
}

double PairDensity::operator()(double x, double y) const {
    double rho = correlation();
    double det = 1.0 - rho * rho;
    if (det <= 0.0) throw std::invalid_argument("pair density: degenerate correlation");
    double q = (x * x - 2.0 * rho * x * y + y * y) / (variance * det);
    return std::exp(-0.5 * q) / (2.0 * 3.14159265358979323846 * variance * std::sqrt(det));
}

double PairDensity::sup_product_gap(double halfwidth, int grid) const {
    double sd = std::sqrt(variance);
    double sup = 0.0;
    for (int ix = 0; ix <= grid; ++ix) {
        double x = -halfwidth * sd + 2.0 * halfwidth * sd * ix / grid;
        double fx = stats::normal_pdf(x / sd) / sd;
        for (int iy = 0; iy <= grid; ++iy) {
            double y = -halfwidth * sd + 2.0 * halfwidth * sd * iy / grid;
            double fy = stats::normal_pdf(y / sd) / sd;
            sup = std::max(sup, std::fabs((*this)(x, y) - fx * fy));
        }
    }
    return sup;
}

PairDensity pair_density_linear_gaussian(const FieldSpec& spec, const IndexPoint& i) {
    if (spec.kind != FieldKind::Linear || spec.innovation.dist != InnovationDist::Normal)
        throw std::invalid_argument("pair density: closed form requires a Gaussian linear spec");
    if (i.dim() != spec.dim) throw std::invalid_argument("pair density: dimension mismatch");
    if (i.is_origin()) throw std::invalid_argument("pair density: the shift must be nonzero");
    double var =
        spec.innovation.variance() *
        (spec.coeffs.sum_sq_within(-1) + spec.coeffs.law_l2_tail(spec.coeffs.radius()));
    stats::KahanSum cov;
    for (const auto& [s, a] : spec.coeffs.entries_within())
        cov.add(a * spec.coeffs.value(s + i));
    PairDensity pd;
    pd.variance = var;
    pd.covariance = spec.innovation.variance() * cov.value();
    pd.degenerate = 1.0 - std::fabs(pd.correlation()) < 1e-9;
    return pd;
}

}  // namespace fieldkde
