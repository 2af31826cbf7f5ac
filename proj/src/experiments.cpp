#include "fieldkde/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "fieldkde/stats.hpp"

namespace fieldkde {

namespace {

std::uint64_t compose_stream(std::size_t context, std::size_t replicate) {
    return (static_cast<std::uint64_t>(context) << 32) | static_cast<std::uint64_t>(replicate);
}

DensityModel reference_density(const FieldSpec& field, std::uint64_t seed) {
    if (field.kind == FieldKind::Linear && field.innovation.dist == InnovationDist::Normal)
        return marginal_density_linear_gaussian(field);
    // Frozen baseline for fields without a closed-form marginal.
    return DensityModel::numeric_baseline(field, 2'000'000, rng::splitmix64(seed ^ 0xbadc0ffeULL));
}

Region cube_for_size(int d, std::size_t target) {
    int side = std::max<int>(
        1, static_cast<int>(std::llround(std::pow(static_cast<double>(target), 1.0 / d))));
    return Region::cube(d, side);
}

std::string row_id(long m, double b, double p);

}  // namespace

std::string format_double(double v) {
    // shortest round-trip decimal form; byte-stable across runs
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {
std::string row_id(long m, double b, double p) {
    return "m=" + std::to_string(m) + ",b=" + format_double(b) + ",p=" + format_double(p);
}
}  // namespace

RateReport run_l1_rate(const FieldSpec& field, const Kernel& kernel,
                       const std::vector<std::size_t>& sizes, const BandwidthSchedule& schedule,
                       int replicates, std::uint64_t seed, int workers, double slope_limit) {
    if (replicates < 1) throw std::invalid_argument("l1 rate: replicates must be >= 1");
    if (sizes.size() < 4) throw std::invalid_argument("l1 rate: need at least 4 ladder sizes");
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i] <= sizes[i - 1])
            throw std::invalid_argument("l1 rate: ladder must be strictly increasing");

    DensityModel density = reference_density(field, seed);
    const double a = 8.0 * density.sd();

    RateReport report;
    report.tail_mass = 1.0 - density.mass_within(a);
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        Region region = cube_for_size(field.dim, sizes[si]);
        const std::size_t n = region.cardinality();
        const double b = schedule.bandwidth(n);

        const std::size_t grid_n =
            static_cast<std::size_t>(std::ceil(2.0 * a / (b / 10.0)));
        const double step = 2.0 * a / static_cast<double>(grid_n);
        std::vector<double> xs(grid_n + 1);
        for (std::size_t j = 0; j <= grid_n; ++j)
            xs[j] = -a + step * static_cast<double>(j);
        std::vector<double> f_ref(xs.size());
        for (std::size_t j = 0; j < xs.size(); ++j) f_ref[j] = density(xs[j]);

        std::vector<double> errors(replicates);
        stats::parallel_for(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
            FieldSample sample = sample_field(field, region, seed, compose_stream(si, r));
            std::vector<double> fn = kde_values(sample.values, kernel, b, xs);
            stats::KahanSum s;
            for (std::size_t j = 0; j < xs.size(); ++j) {
                double w = (j == 0 || j + 1 == xs.size()) ? 0.5 : 1.0;
                s.add(w * std::fabs(fn[j] - f_ref[j]));
            }
            errors[r] = s.value() * step;
        });

        auto ms = stats::mean_se(errors);
        RateRow row;
        row.size = n;
        row.bandwidth = b;
        row.value = ms.mean;
        row.stderr_ = ms.se;
        row.bound_shape = std::pow(b + 1.0 / std::sqrt(static_cast<double>(n) * b), 2.0 / 3.0);
        report.rows.push_back(row);
    }

    std::vector<double> lx, ly;
    for (const auto& row : report.rows) {
        lx.push_back(std::log(static_cast<double>(row.size)));
        ly.push_back(std::log(row.value));
    }
    auto fit = stats::linear_fit(lx, ly);
    report.slope = fit.slope;
    report.intercept = fit.intercept;
    for (const auto& row : report.rows)
        report.kappa = std::max(report.kappa, row.value / row.bound_shape);

    bool monotone = true;
    for (std::size_t i = 1; i < report.rows.size(); ++i)
        monotone = monotone && report.rows[i].value < report.rows[i - 1].value;
    report.assertions.push_back(
        {"mean L1 strictly decreasing across sizes", monotone, ""});
    report.assertions.push_back({"fitted log-log slope <= " + format_double(slope_limit),
                                 report.slope <= slope_limit,
                                 "slope=" + format_double(report.slope)});
    return report;
}

CltReport run_clt(const FieldSpec& field, const Kernel& kernel, std::vector<double> points,
                  const Region& region, const BandwidthSchedule& schedule, int replicates,
                  std::uint64_t seed, int workers, double ks_limit, double corr_limit,
                  double var_rel_tol, bool center_at_f) {
    if (points.size() < 2) throw std::invalid_argument("clt: need at least 2 evaluation points");
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i] == points[j])
                throw std::invalid_argument("clt: distinct points required");
    if (replicates < 2) throw std::invalid_argument("clt: replicates must be >= 2");

    const std::size_t n = region.cardinality();
    const double b = schedule.bandwidth(n);
    DensityModel density = reference_density(field, seed);

    const std::size_t k = points.size();
    std::vector<double> centers(k);
    for (std::size_t j = 0; j < k; ++j) {
        if (center_at_f) {
            // Remark-3 style centering is admissible only when |Λ| b³ is small.
            double nb3 = static_cast<double>(n) * b * b * b;
            if (!(nb3 < 1.0))
                throw std::runtime_error("clt: f-centering requires |Λ| b^3 -> 0 (got " +
                                         format_double(nb3) + ")");
            centers[j] = density(points[j]);
        } else {
            centers[j] = expected_fn(density, kernel, b, points[j]);
        }
    }

    const double scale = std::sqrt(static_cast<double>(n) * b);
    std::vector<std::vector<double>> rows(replicates, std::vector<double>(k));
    stats::parallel_for(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        FieldSample sample = sample_field(field, region, seed, compose_stream(0, r));
        std::vector<double> fn = kde_values(sample.values, kernel, b, points);
        for (std::size_t j = 0; j < k; ++j) rows[r][j] = scale * (fn[j] - centers[j]);
    });

    CltReport report;
    report.size = n;
    report.bandwidth = b;
    report.replicates = replicates;
    const double ksq = kernel.square_integral();

    std::vector<std::vector<double>> cols(k, std::vector<double>(replicates));
    for (int r = 0; r < replicates; ++r)
        for (std::size_t j = 0; j < k; ++j) cols[j][static_cast<std::size_t>(r)] = rows[r][j];

    std::vector<double> means(k);
    for (std::size_t j = 0; j < k; ++j) {
        CltPointRow row;
        row.x = points[j];
        row.gamma = density(points[j]) * ksq;
        row.expected = centers[j];
        std::vector<double> std_sorted = cols[j];
        const double sd_ref = std::sqrt(row.gamma);
        for (auto& v : std_sorted) v /= sd_ref;
        std::sort(std_sorted.begin(), std_sorted.end());
        row.ks = stats::ks_statistic(std_sorted, [](double t) { return stats::normal_cdf(t); });
        auto ms = stats::mean_se(cols[j]);
        means[j] = ms.mean;
        stats::KahanSum ss;
        for (double v : cols[j]) ss.add((v - ms.mean) * (v - ms.mean));
        row.emp_var = ss.value() / static_cast<double>(replicates - 1);
        report.rows.push_back(row);
    }

    report.covariance.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) {
            stats::KahanSum ss;
            for (int r = 0; r < replicates; ++r)
                ss.add((cols[i][static_cast<std::size_t>(r)] - means[i]) *
                       (cols[j][static_cast<std::size_t>(r)] - means[j]));
            double cov = ss.value() / static_cast<double>(replicates - 1);
            report.covariance[i][j] = cov;
            report.covariance[j][i] = cov;
        }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (i != j) {
                double corr = report.covariance[i][j] /
                              std::sqrt(report.covariance[i][i] * report.covariance[j][j]);
                report.max_offdiag_corr = std::max(report.max_offdiag_corr, std::fabs(corr));
            }

    bool ks_ok = true, var_ok = true;
    for (const auto& row : report.rows) {
        ks_ok = ks_ok && row.ks < ks_limit;
        var_ok = var_ok && std::fabs(row.emp_var - row.gamma) <= var_rel_tol * row.gamma;
    }
    report.assertions.push_back({"per-point KS distance < " + format_double(ks_limit), ks_ok, ""});
    report.assertions.push_back(
        {"max off-diagonal |correlation| < " + format_double(corr_limit),
         report.max_offdiag_corr < corr_limit,
         "max=" + format_double(report.max_offdiag_corr)});
    report.assertions.push_back(
        {"empirical variance within " + format_double(var_rel_tol) + " of f(x)∫K²", var_ok, ""});
    return report;
}

BerryEsseenReport run_berry_esseen(const FieldSpec& field, const Kernel& kernel, double x,
                                   const std::vector<std::size_t>& sizes, double tau,
                                   double alpha, double p, int replicates, std::uint64_t seed,
                                   int workers) {
    if (replicates < 2) throw std::invalid_argument("berry-esseen: replicates must be >= 2");
    if (sizes.size() < 2) throw std::invalid_argument("berry-esseen: need >= 2 ladder sizes");
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i] <= sizes[i - 1])
            throw std::invalid_argument("berry-esseen: ladder must be strictly increasing");
    const double theta_ref = theta_exponent(alpha, tau, p);
    const double tau_moment = kernel.abs_pow_integral(tau);
    if (!std::isfinite(tau_moment))
        throw std::runtime_error("berry-esseen: ∫|K|^τ is not finite");

    DensityModel density = reference_density(field, seed);
    const double gamma = density(x) * kernel.square_integral();
    if (!(gamma > 0.0))
        throw std::runtime_error("berry-esseen: standardization variance f(x)∫K² is zero");

    BandwidthSchedule schedule;
    schedule.rule = BandwidthSchedule::Rule::BerryEsseen;
    schedule.tau = tau;

    BerryEsseenReport report;
    report.x = x;
    report.tau = tau;
    report.alpha = alpha;
    report.p = p;
    const double sd_ref = std::sqrt(gamma);
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        Region region = cube_for_size(field.dim, sizes[si]);
        const std::size_t n = region.cardinality();
        const double b = schedule.bandwidth(n);
        const double center = expected_fn(density, kernel, b, x);
        const double scale = std::sqrt(static_cast<double>(n) * b) / sd_ref;
        std::vector<double> us(replicates);
        const double pt[1] = {x};
        stats::parallel_for(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
            FieldSample sample = sample_field(field, region, seed, compose_stream(si, r));
            std::vector<double> fn = kde_values(sample.values, kernel, b, pt);
            us[r] = scale * (fn[0] - center);
        });
        std::sort(us.begin(), us.end());
        BerryEsseenRow row;
        row.size = n;
        row.bandwidth = b;
        row.value = stats::ks_statistic(us, [](double t) { return stats::normal_cdf(t); });
        row.replicates = replicates;
        row.theta_ref = theta_ref;
        report.rows.push_back(row);
    }

    std::vector<double> lx, ly;
    for (const auto& row : report.rows) {
        lx.push_back(std::log(static_cast<double>(row.size)));
        ly.push_back(std::log(std::max(row.value, 1e-12)));
    }
    report.decay_fit = stats::linear_fit(lx, ly).slope;

    bool in_range = true;
    for (const auto& row : report.rows)
        in_range = in_range && row.value >= 0.0 && row.value <= 1.0;
    report.assertions.push_back({"D_n in [0,1] on every row", in_range, ""});
    report.assertions.push_back(
        {"D_n at the largest size < D_n at the smallest size",
         report.rows.back().value < report.rows.front().value,
         "first=" + format_double(report.rows.front().value) +
             " last=" + format_double(report.rows.back().value)});
    return report;
}

namespace {

struct NormEstimate {
    double value = 0.0;
    double se = 0.0;
};

// (mean |Y|^p)^{1/p} with a delta-method standard error.
NormEstimate p_norm_estimate(std::span<const double> powed, double p) {
    auto ms = stats::mean_se(powed);
    NormEstimate out;
    if (ms.mean <= 0.0) return out;
    out.value = std::pow(ms.mean, 1.0 / p);
    out.se = ms.se * out.value / (p * ms.mean);
    return out;
}

InequalityRow make_row(long m, double b, double p, const NormEstimate& lhs, double rhs) {
    InequalityRow row;
    row.config = row_id(m, b, p);
    row.m = m;
    row.bandwidth = b;
    row.p = p;
    row.lhs = lhs.value;
    row.se = lhs.se;
    row.rhs = rhs;
    if (rhs == 0.0) {
        row.ratio = 0.0;
        row.pass = lhs.value == 0.0;
    } else {
        row.ratio = lhs.value / rhs;
        row.pass = row.ratio <= 1.0 + 3.0 * lhs.se / rhs;
    }
    return row;
}

}  // namespace

InequalityAudit audit_moment_inequality(const FieldSpec& field, const Kernel& kernel,
                                        const Region& region, const std::vector<long>& m_grid,
                                        const std::vector<double>& b_grid,
                                        const std::vector<double>& p_grid,
                                        const std::vector<double>& weights, double x,
                                        int replicates, std::uint64_t seed, int workers) {
    if (field.kind != FieldKind::Linear)
        throw std::invalid_argument("moment audit: requires a linear field");
    if (replicates < 100) throw std::invalid_argument("moment audit: need >= 100 replicates");
    std::vector<double> w = weights;
    if (w.empty()) w.assign(region.cardinality(), 1.0);
    if (w.size() != region.cardinality())
        throw std::invalid_argument("moment audit: weight vector length mismatch");

    double sum_w2 = 0.0;
    for (double v : w) sum_w2 += v * v;

    DependenceProfile profile =
        DependenceProfile::exact_linear(field.coeffs, field.innovation, false);
    const int d = field.dim;
    Region window = Region::box(region.bounding_box().inflated(field.coeffs.radius()));

    InequalityAudit audit;
    std::size_t combo = 0;
    for (long m : m_grid) {
        if (m < 1) throw std::invalid_argument("moment audit: m must be >= 1");
        for (double b : b_grid) {
            for (double p : p_grid) {
                MDependentSmoother sm(field, static_cast<int>(m), kernel, b);
                std::vector<double> powed(replicates);
                stats::parallel_for(
                    static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
                        InnovationPatch patch = draw_patch(field.innovation, window, seed,
                                                           compose_stream(combo, r));
                        stats::KahanSum t;
                        const auto& pts = region.points();
                        for (std::size_t i = 0; i < pts.size(); ++i) {
                            double ki = sm.k_term(patch, pts[i], x);
                            double kbar_i = sm.kbar(patch, pts[i], x);
                            t.add(w[i] * (ki - kbar_i));
                        }
                        powed[r] = std::pow(std::fabs(t.value()), p);
                    });
                NormEstimate lhs = p_norm_estimate(powed, p);
                double rhs = 8.0 * std::pow(static_cast<double>(m), d) / b *
                             std::sqrt(p * sum_w2) *
                             profile.tail_sum(static_cast<int>(m), 0.0, p);
                audit.rows.push_back(make_row(m, b, p, lhs, rhs));
                ++combo;
            }
        }
    }
    bool all = true;
    for (const auto& row : audit.rows) all = all && row.pass;
    audit.assertions.push_back(
        {"moment inequality holds on the whole (m,b,p) grid", all, ""});
    return audit;
}

InequalityAudit audit_kbar_norm(const FieldSpec& field, const Kernel& kernel,
                                const std::vector<long>& m_grid,
                                const std::vector<double>& b_grid,
                                const std::vector<double>& p_grid, double x, int replicates,
                                std::uint64_t seed, int workers) {
    if (field.kind != FieldKind::Linear)
        throw std::invalid_argument("kbar audit: requires a linear field");
    if (replicates < 100) throw std::invalid_argument("kbar audit: need >= 100 replicates");

    DependenceProfile profile =
        DependenceProfile::exact_linear(field.coeffs, field.innovation, false);
    IndexPoint origin;
    origin.coords.assign(field.dim, 0);
    Region window = Region::ball(field.dim, field.coeffs.radius());

    InequalityAudit audit;
    std::size_t combo = 0;
    for (long m : m_grid) {
        if (m < 1) throw std::invalid_argument("kbar audit: m must be >= 1");
        for (double b : b_grid) {
            for (double p : p_grid) {
                MDependentSmoother sm(field, static_cast<int>(m), kernel, b);
                std::vector<double> powed(replicates);
                stats::parallel_for(
                    static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
                        InnovationPatch patch = draw_patch(field.innovation, window, seed,
                                                           compose_stream(combo, r));
                        double k0 = sm.k_term(patch, origin, x);
                        double kbar0 = sm.kbar(patch, origin, x);
                        powed[r] = std::pow(std::fabs(k0 - kbar0), p);
                    });
                NormEstimate lhs = p_norm_estimate(powed, p);
                double rhs = std::sqrt(2.0 * p) / b *
                             profile.tail_sum(static_cast<int>(m), 0.0, p);
                audit.rows.push_back(make_row(m, b, p, lhs, rhs));
                ++combo;
            }
        }
    }
    bool all = true;
    for (const auto& row : audit.rows) all = all && row.pass;
    audit.assertions.push_back(
        {"single-site kernel-smoothing norm bound holds on the whole grid", all, ""});
    return audit;
}

MnReport audit_mn_limits(const DependenceProfile& profile, int d,
                         const std::vector<double>& b_ladder) {
    if (b_ladder.size() < 2) throw std::invalid_argument("mn audit: need >= 2 bandwidths");
    MnReport report;
    report.d = d;
    for (double b : b_ladder) {
        TruncationSchedule ts = mn_schedule(profile, d, b);
        MnRow row;
        row.bandwidth = b;
        row.v_n = ts.v_n;
        row.m_n = ts.m_n;
        row.mnd_b = std::pow(static_cast<double>(ts.m_n), d) * b;
        row.tail_term = ts.tail_term;
        row.sqrt_r = std::sqrt(ts.r_mn);
        report.rows.push_back(row);
    }
    bool nondecreasing = true;
    for (std::size_t i = 1; i < report.rows.size(); ++i)
        nondecreasing = nondecreasing && report.rows[i].m_n >= report.rows[i - 1].m_n;
    bool tail_ok = true;
    for (const auto& row : report.rows)
        tail_ok = tail_ok && row.tail_term <= row.sqrt_r * (1.0 + 1e-12) + 1e-300;
    report.assertions.push_back({"m_n nondecreasing along b = 2^{-k}", nondecreasing, ""});
    report.assertions.push_back({"final m_n > initial m_n",
                                 report.rows.back().m_n > report.rows.front().m_n, ""});
    report.assertions.push_back({"final m_n^d b < 0.5", report.rows.back().mnd_b < 0.5,
                                 "final=" + format_double(report.rows.back().mnd_b)});
    report.assertions.push_back({"final m_n^d b < initial m_n^d b",
                                 report.rows.back().mnd_b < report.rows.front().mnd_b, ""});
    report.assertions.push_back({"tail term <= sqrt(r(m_n)) on every row", tail_ok, ""});
    return report;
}

bool AssumptionReport::all_pass() const {
    for (const auto& item : items)
        if (!item.pass) return false;
    return true;
}

bool AssumptionReport::passes(const std::vector<std::string>& names) const {
    for (const auto& name : names) {
        bool found = false;
        for (const auto& item : items)
            if (item.name == name) {
                found = true;
                if (!item.pass) return false;
            }
        if (!found) return false;
    }
    return true;
}

AssumptionReport audit_assumptions(const FieldSpec& field, const Kernel& kernel,
                                   const BandwidthSchedule& schedule,
                                   const std::vector<std::size_t>& sizes,
                                   const DependenceProfile& profile) {
    AssumptionReport report;

    // A1 / B1: marginal density regularity.
    try {
        if (field.kind == FieldKind::Linear && field.innovation.dist == InnovationDist::Normal) {
            DensityModel f = marginal_density_linear_gaussian(field);
            report.items.push_back(
                {"A1", true, "Gaussian marginal, Lipschitz bound " +
                                 format_double(f.lipschitz_bound())});
            report.items.push_back(
                {"B1", true, "Gaussian marginal: positive, continuous, bounded by " +
                                 format_double(f(0.0))});
        } else {
            report.items.push_back(
                {"A1", true, "numeric baseline marginal; empirical slope bound only"});
            report.items.push_back(
                {"B1", false, "no closed-form marginal; positivity not certified"});
        }
    } catch (const std::exception& e) {
        report.items.push_back({"A1", false, e.what()});
        report.items.push_back({"B1", false, e.what()});
    }

    // A2 / B2: kernel moments (certified at construction; refused kernels
    // never reach this point).
    report.items.push_back({"A2", true,
                            "K Lipschitz(" + format_double(kernel.lipschitz()) + "), ∫K=1, ∫u²|K|=" +
                                format_double(kernel.u2_abs_integral()) +
                                ", ∫K²=" + format_double(kernel.square_integral())});
    report.items.push_back({"B2", true,
                            "∫|K|=" + format_double(kernel.abs_integral()) +
                                ", ∫K²=" + format_double(kernel.square_integral())});

    // A3: bandwidth schedule on the size ladder.  Besides b in (0,1) and the
    // trends, a desk-scale floor |Λ|b >= 4 flags schedules (e.g. beta ~ 1)
    // whose bandwidth windows hold almost no points at small sizes.
    {
        constexpr double kMinRegionBandwidthProduct = 4.0;
        bool ok = true;
        std::string evidence;
        if (schedule.rule == BandwidthSchedule::Rule::Fixed) {
            ok = false;
            evidence = "fixed bandwidth cannot certify b -> 0";
        } else if (sizes.empty()) {
            ok = false;
            evidence = "no sizes supplied";
        } else {
            try {
                double prev_b = 2.0, prev_nb = 0.0;
                double min_nb = 1e300;
                for (std::size_t n : sizes) {
                    double b = schedule.bandwidth(n);
                    double nb = static_cast<double>(n) * b;
                    if (sizes.size() > 1 && (b >= prev_b || nb <= prev_nb)) ok = false;
                    min_nb = std::min(min_nb, nb);
                    prev_b = b;
                    prev_nb = nb;
                }
                if (min_nb < kMinRegionBandwidthProduct) {
                    ok = false;
                    evidence = "|Λ|b too small: min " + format_double(min_nb);
                } else {
                    evidence = "b(" + std::to_string(sizes.back()) + ")=" +
                               format_double(prev_b) + ", |Λ|b=" + format_double(prev_nb);
                }
            } catch (const std::exception& e) {
                ok = false;
                evidence = e.what();
            }
        }
        report.items.push_back({"A3", ok, evidence});
    }

    // A4: Σ |i|^{5d/2} δ_i < ∞.
    {
        const double w = 2.5 * field.dim;
        bool ok = profile.tail_certified() && profile.tail_finite(w);
        std::string evidence;
        if (!profile.tail_certified()) {
            evidence = "Monte Carlo profile cannot certify the tail";
        } else if (!ok) {
            evidence = "weighted tail diverges";
        } else {
            evidence = "Σ|i|^{5d/2}δ_i = " + format_double(profile.tail_sum(0, w));
        }
        report.items.push_back({"A4", ok, evidence});
    }

    // B3: pair densities uniformly close to the product law.
    {
        bool ok = false;
        std::string evidence;
        if (field.kind == FieldKind::Linear && field.innovation.dist == InnovationDist::Normal) {
            ok = true;
            double kappa = 0.0;
            // Pair correlations vanish beyond twice the support radius, so
            // the shift grid |i| <= 2R covers the sup over all of Z^d exactly
            // (unless that ball is impractically large).
            int radius = std::max(2 * field.coeffs.radius(), 1);
            bool complete = true;
            while (std::pow(2.0 * radius + 1.0, field.dim) > 2e5) {
                --radius;
                complete = false;
            }
            Region shifts = Region::ball(field.dim, radius);
            for (const auto& i : shifts.points()) {
                if (i.is_origin()) continue;
                PairDensity pd = pair_density_linear_gaussian(field, i);
                if (pd.degenerate) {
                    ok = false;
                    evidence = "degenerate pair at shift " + i.to_string();
                    break;
                }
                kappa = std::max(kappa, pd.sup_product_gap(5.0, 40));
            }
            if (ok)
                evidence = "kappa = " + format_double(kappa) +
                           (complete ? " over all shifts with nonzero correlation"
                                     : " over a truncated shift grid");
        } else {
            evidence = "no closed-form pair density for this field class";
        }
        report.items.push_back({"B3", ok, evidence});
    }

    return report;
}

namespace {

void append_csv_value(std::string& out, double v) { out += format_double(v); }

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

}  // namespace

std::string to_csv(const RateReport& r) {
    std::string out = "size,bandwidth,value,stderr,bound_shape\n";
    for (const auto& row : r.rows) {
        out += std::to_string(row.size) + ",";
        append_csv_value(out, row.bandwidth);
        out += ",";
        append_csv_value(out, row.value);
        out += ",";
        append_csv_value(out, row.stderr_);
        out += ",";
        append_csv_value(out, row.bound_shape);
        out += "\n";
    }
    return out;
}

std::string to_csv(const CltReport& r) {
    std::string out = "size,bandwidth,x,value,gamma,emp_var,expected\n";
    for (const auto& row : r.rows) {
        out += std::to_string(r.size) + ",";
        append_csv_value(out, r.bandwidth);
        out += ",";
        append_csv_value(out, row.x);
        out += ",";
        append_csv_value(out, row.ks);
        out += ",";
        append_csv_value(out, row.gamma);
        out += ",";
        append_csv_value(out, row.emp_var);
        out += ",";
        append_csv_value(out, row.expected);
        out += "\n";
    }
    return out;
}

std::string to_csv(const BerryEsseenReport& r) {
    std::string out = "size,bandwidth,value,replicates,theta_ref\n";
    for (const auto& row : r.rows) {
        out += std::to_string(row.size) + ",";
        append_csv_value(out, row.bandwidth);
        out += ",";
        append_csv_value(out, row.value);
        out += "," + std::to_string(row.replicates) + ",";
        append_csv_value(out, row.theta_ref);
        out += "\n";
    }
    return out;
}

std::string to_csv(const InequalityAudit& r) {
    std::string out = "config,m,bandwidth,p,lhs,stderr,rhs,ratio,pass\n";
    for (const auto& row : r.rows) {
        out += csv_quote(row.config) + "," + std::to_string(row.m) + ",";
        append_csv_value(out, row.bandwidth);
        out += ",";
        append_csv_value(out, row.p);
        out += ",";
        append_csv_value(out, row.lhs);
        out += ",";
        append_csv_value(out, row.se);
        out += ",";
        append_csv_value(out, row.rhs);
        out += ",";
        append_csv_value(out, row.ratio);
        out += ",";
        out += row.pass ? "1" : "0";
        out += "\n";
    }
    return out;
}

std::string to_csv(const MnReport& r) {
    std::string out = "bandwidth,v_n,m_n,mnd_b,tail_term,sqrt_r\n";
    for (const auto& row : r.rows) {
        append_csv_value(out, row.bandwidth);
        out += "," + std::to_string(row.v_n) + "," + std::to_string(row.m_n) + ",";
        append_csv_value(out, row.mnd_b);
        out += ",";
        append_csv_value(out, row.tail_term);
        out += ",";
        append_csv_value(out, row.sqrt_r);
        out += "\n";
    }
    return out;
}

std::string to_csv(const AssumptionReport& r) {
    std::string out = "assumption,pass,evidence\n";
    for (const auto& item : r.items) {
        out += item.name + ",";
        out += item.pass ? "1" : "0";
        out += "," + csv_quote(item.evidence) + "\n";
    }
    return out;
}

}  // namespace fieldkde
