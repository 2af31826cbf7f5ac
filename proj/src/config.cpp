#include "fieldkde/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace fieldkde {

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void config_error(const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
}

void check_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                const std::string& ctx) {
    if (!obj.is_object()) config_error(ctx + " must be a table");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            config_error("unknown key '" + it.key() + "' in " + ctx);
}

IndexPoint to_point(const std::vector<int>& coords) {
    IndexPoint p;
    p.coords.assign(coords.begin(), coords.end());
    return p;
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

BandwidthSchedule BandwidthConfig::build() const {
    BandwidthSchedule s;
    if (rule == "power") {
        s.rule = BandwidthSchedule::Rule::PowerLaw;
        s.beta = beta;
    } else if (rule == "berry_esseen" || rule == "berry-esseen") {
        s.rule = BandwidthSchedule::Rule::BerryEsseen;
        s.tau = tau;
    } else if (rule == "fixed") {
        s.rule = BandwidthSchedule::Rule::Fixed;
        s.fixed = value;
    } else {
        config_error("unknown bandwidth rule: " + rule);
    }
    return s;
}

Region RegionConfig::build(int d) const {
    if (kind == "cube") return Region::cube(d, size);
    if (kind == "ball") return Region::ball(d, radius);
    if (kind == "random_subset")
        return Region::random_subset(Region::cube(d, size), keep_prob, subset_seed);
    config_error("unknown region kind: " + kind);
}

CoefficientMap CoeffConfig::build(int d) const {
    if (law == "stored") {
        std::vector<std::pair<IndexPoint, double>> pts;
        for (const auto& [coords, value] : entries) pts.emplace_back(to_point(coords), value);
        return CoefficientMap::stored(d, std::move(pts));
    }
    if (law == "geometric") return CoefficientMap::geometric(d, c, rho, radius);
    if (law == "polynomial") {
        if (radius <= 0) config_error("polynomial coefficients need an explicit radius");
        return CoefficientMap::polynomial(d, c, gamma, radius);
    }
    config_error("unknown coefficient law: " + law);
}

FieldSpec FieldConfig::build() const {
    InnovationSpec innov = InnovationSpec::parse(innovation, sigma);
    if (kind == "linear") return FieldSpec::linear(coeffs.build(d), innov);
    if (kind == "volterra") {
        std::vector<std::tuple<IndexPoint, IndexPoint, double>> ps;
        for (const auto& [pts, a] : pairs)
            ps.emplace_back(to_point(pts.first), to_point(pts.second), a);
        return FieldSpec::volterra(VolterraPairs::make(d, std::move(ps)), innov);
    }
    if (kind == "subordinated") {
        if (!inner) config_error("subordinated field needs an inner spec");
        return FieldSpec::subordinated(inner->build(), SubordinationMap::parse(map, map_scale));
    }
    config_error("unknown field kind: " + kind);
}

RunConfig RunConfig::preset(const std::string& experiment) {
    RunConfig c;
    c.experiment = experiment;
    if (experiment == "l1-rate") {
        c.field.d = 1;
        c.field.coeffs.law = "geometric";
        c.field.coeffs.rho = 0.5;
        c.replicates = 200;
        c.sizes = {128, 256, 512, 1024, 2048, 4096, 8192};
    } else if (experiment == "clt") {
        c.field.d = 2;
        c.field.coeffs.law = "geometric";
        c.field.coeffs.rho = 0.05;
        c.replicates = 2000;
        c.region.kind = "cube";
        c.region.size = 64;
        c.sizes = {64 * 64};
        c.points = {-1.0, 0.0, 1.0};
    } else if (experiment == "berry-esseen") {
        c.field.d = 1;
        c.field.coeffs.law = "stored";
        c.field.coeffs.entries = {{{0}, 1.0}, {{1}, 0.5}};
        c.replicates = 2000;
        c.sizes = {256, 512, 1024, 2048, 4096, 8192, 16384};
        c.x = 2.5;
        c.tau = 3.0;
        c.alpha = 10.0;
        c.p = 2.0;
        c.bandwidth.rule = "berry_esseen";
        c.bandwidth.tau = 3.0;
    } else if (experiment == "audit-moment") {
        c.field.d = 1;
        c.field.coeffs.law = "stored";
        c.field.coeffs.entries = {{{-4}, 0.0625}, {{-3}, 0.125}, {{-2}, 0.25}, {{-1}, 0.5},
                                  {{0}, 1.0},     {{1}, 0.5},    {{2}, 0.25},  {{3}, 0.125},
                                  {{4}, 0.0625}};
        c.replicates = 1500;
        c.region.kind = "cube";
        c.region.size = 192;
        c.m_grid = {1, 2, 4};
        c.b_grid = {0.5, 0.25, 0.125};
        c.p_grid = {2.0, 4.0};
        c.x = 0.5;
    } else if (experiment == "audit-kbar") {
        c = preset("audit-moment");
        c.experiment = "audit-kbar";
        c.replicates = 4000;
    } else if (experiment == "audit-mn") {
        c.field.d = 1;
        c.field.coeffs.law = "stored";
        c.field.coeffs.entries = {{{-4}, 0.0625}, {{-3}, 0.125}, {{-2}, 0.25}, {{-1}, 0.5},
                                  {{0}, 1.0},     {{1}, 0.5},    {{2}, 0.25},  {{3}, 0.125},
                                  {{4}, 0.0625}};
        c.k_min = 4;
        c.k_max = 20;
    } else if (experiment == "audit-assumptions") {
        c.field.d = 1;
        c.field.coeffs.law = "geometric";
        c.field.coeffs.rho = 0.5;
        c.sizes = {128, 256, 512, 1024, 2048, 4096, 8192};
    } else {
        config_error("unknown experiment: " + experiment);
    }
    return c;
}

namespace {

void parse_coeffs(const ordered_json& j, CoeffConfig& c) {
    check_keys(j, {"law", "c", "rho", "gamma", "radius", "entries"}, "field.coeffs");
    if (j.contains("law")) c.law = j.at("law").get<std::string>();
    if (j.contains("c")) c.c = j.at("c").get<double>();
    if (j.contains("rho")) c.rho = j.at("rho").get<double>();
    if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
    if (j.contains("radius")) c.radius = j.at("radius").get<int>();
    if (j.contains("entries")) {
        c.entries.clear();
        for (const auto& e : j.at("entries")) {
            if (!e.is_array() || e.size() != 2)
                config_error("field.coeffs.entries items must be [coords, value]");
            c.entries.emplace_back(e.at(0).get<std::vector<int>>(), e.at(1).get<double>());
        }
    }
}

void parse_field(const ordered_json& j, FieldConfig& f) {
    check_keys(j,
               {"kind", "d", "innovation", "sigma", "coeffs", "pairs", "map", "map_scale",
                "inner"},
               "field");
    if (j.contains("kind")) f.kind = j.at("kind").get<std::string>();
    if (j.contains("d")) f.d = j.at("d").get<int>();
    if (j.contains("innovation")) f.innovation = j.at("innovation").get<std::string>();
    if (j.contains("sigma")) f.sigma = j.at("sigma").get<double>();
    if (j.contains("coeffs")) parse_coeffs(j.at("coeffs"), f.coeffs);
    if (j.contains("pairs")) {
        f.pairs.clear();
        for (const auto& e : j.at("pairs")) {
            if (!e.is_array() || e.size() != 3)
                config_error("field.pairs items must be [s1, s2, value]");
            f.pairs.push_back({{e.at(0).get<std::vector<int>>(), e.at(1).get<std::vector<int>>()},
                               e.at(2).get<double>()});
        }
    }
    if (j.contains("map")) f.map = j.at("map").get<std::string>();
    if (j.contains("map_scale")) f.map_scale = j.at("map_scale").get<double>();
    if (j.contains("inner")) {
        f.inner = std::make_shared<FieldConfig>();
        parse_field(j.at("inner"), *f.inner);
    }
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& filename) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw std::invalid_argument("config parse error at " +
                                    (filename.empty() ? std::string("<input>") : filename) + ":" +
                                    std::to_string(line) + ":" + std::to_string(col) + ": " +
                                    e.what());
    }
    check_keys(j,
               {"schema_version", "experiment", "seed", "replicates", "workers", "out", "force",
                "field", "kernel", "bandwidth", "region", "sizes", "points", "x", "tau", "alpha",
                "p", "m_grid", "b_grid", "p_grid", "k_min", "k_max", "profile",
                "weight_exponent", "dump_estimate", "grid"},
               "config");
    if (!j.contains("experiment")) config_error("missing required key 'experiment'");
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != 1)
        config_error("unsupported schema_version (expected 1)");

    RunConfig c = preset(j.at("experiment").get<std::string>());
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("replicates")) c.replicates = j.at("replicates").get<int>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("force")) c.force = j.at("force").get<bool>();
    if (j.contains("field")) parse_field(j.at("field"), c.field);
    if (j.contains("kernel")) {
        const auto& k = j.at("kernel");
        check_keys(k, {"name", "cutoff"}, "kernel");
        if (k.contains("name")) c.kernel.name = k.at("name").get<std::string>();
        if (k.contains("cutoff")) c.kernel.cutoff = k.at("cutoff").get<double>();
    }
    if (j.contains("bandwidth")) {
        const auto& b = j.at("bandwidth");
        check_keys(b, {"rule", "beta", "tau", "value"}, "bandwidth");
        if (b.contains("rule")) c.bandwidth.rule = b.at("rule").get<std::string>();
        if (b.contains("beta")) c.bandwidth.beta = b.at("beta").get<double>();
        if (b.contains("tau")) c.bandwidth.tau = b.at("tau").get<double>();
        if (b.contains("value")) c.bandwidth.value = b.at("value").get<double>();
    }
    if (j.contains("region")) {
        const auto& r = j.at("region");
        check_keys(r, {"kind", "size", "radius", "keep_prob", "subset_seed"}, "region");
        if (r.contains("kind")) c.region.kind = r.at("kind").get<std::string>();
        if (r.contains("size")) c.region.size = r.at("size").get<int>();
        if (r.contains("radius")) c.region.radius = r.at("radius").get<int>();
        if (r.contains("keep_prob")) c.region.keep_prob = r.at("keep_prob").get<double>();
        if (r.contains("subset_seed"))
            c.region.subset_seed = r.at("subset_seed").get<std::uint64_t>();
    }
    if (j.contains("sizes")) c.sizes = j.at("sizes").get<std::vector<std::size_t>>();
    if (j.contains("points")) c.points = j.at("points").get<std::vector<double>>();
    if (j.contains("x")) c.x = j.at("x").get<double>();
    if (j.contains("tau")) c.tau = j.at("tau").get<double>();
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("p")) c.p = j.at("p").get<double>();
    if (j.contains("m_grid")) c.m_grid = j.at("m_grid").get<std::vector<long>>();
    if (j.contains("b_grid")) c.b_grid = j.at("b_grid").get<std::vector<double>>();
    if (j.contains("p_grid")) c.p_grid = j.at("p_grid").get<std::vector<double>>();
    if (j.contains("k_min")) c.k_min = j.at("k_min").get<int>();
    if (j.contains("k_max")) c.k_max = j.at("k_max").get<int>();
    if (j.contains("profile")) {
        const auto& p = j.at("profile");
        check_keys(p, {"source"}, "profile");
        if (p.contains("source")) c.profile_source = p.at("source").get<std::string>();
    }
    if (j.contains("weight_exponent")) c.weight_exponent = j.at("weight_exponent").get<double>();
    if (j.contains("dump_estimate")) c.dump_estimate = j.at("dump_estimate").get<std::string>();
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        check_keys(g, {"lo", "hi", "step"}, "grid");
        RunConfig::Grid grid;
        if (g.contains("lo")) grid.lo = g.at("lo").get<double>();
        if (g.contains("hi")) grid.hi = g.at("hi").get<double>();
        if (g.contains("step")) grid.step = g.at("step").get<double>();
        if (!(grid.step > 0.0) || !(grid.hi > grid.lo))
            config_error("grid requires lo < hi and step > 0");
        c.grid = grid;
    }

    if (c.experiment == "clt") {
        for (std::size_t a = 0; a < c.points.size(); ++a)
            for (std::size_t b = a + 1; b < c.points.size(); ++b)
                if (c.points[a] == c.points[b]) config_error("distinct points required");
    }
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text, path);
}

namespace {

ordered_json coeffs_json(const CoeffConfig& c) {
    ordered_json j;
    j["law"] = c.law;
    if (c.law == "stored") {
        ordered_json entries = ordered_json::array();
        for (const auto& [coords, value] : c.entries)
            entries.push_back(ordered_json::array({coords, value}));
        j["entries"] = entries;
    } else {
        j["c"] = c.c;
        if (c.law == "geometric") j["rho"] = c.rho;
        if (c.law == "polynomial") j["gamma"] = c.gamma;
        j["radius"] = c.radius;
    }
    return j;
}

ordered_json field_json(const FieldConfig& f) {
    ordered_json j;
    j["kind"] = f.kind;
    j["d"] = f.d;
    j["innovation"] = f.innovation;
    j["sigma"] = f.sigma;
    if (f.kind == "linear") j["coeffs"] = coeffs_json(f.coeffs);
    if (f.kind == "volterra") {
        ordered_json pairs = ordered_json::array();
        for (const auto& [pts, a] : f.pairs)
            pairs.push_back(ordered_json::array({pts.first, pts.second, a}));
        j["pairs"] = pairs;
    }
    if (f.kind == "subordinated") {
        j["map"] = f.map;
        j["map_scale"] = f.map_scale;
        if (f.inner) j["inner"] = field_json(*f.inner);
    }
    return j;
}

}  // namespace

std::string RunConfig::to_json_text() const {
    ordered_json j;
    j["schema_version"] = schema_version;
    j["experiment"] = experiment;
    j["seed"] = seed;
    j["replicates"] = replicates;
    j["workers"] = workers;
    j["out"] = out;
    j["force"] = force;
    j["field"] = field_json(field);
    j["kernel"] = {{"name", kernel.name}, {"cutoff", kernel.cutoff}};
    j["bandwidth"] = {{"rule", bandwidth.rule},
                      {"beta", bandwidth.beta},
                      {"tau", bandwidth.tau},
                      {"value", bandwidth.value}};
    j["region"] = {{"kind", region.kind},
                   {"size", region.size},
                   {"radius", region.radius},
                   {"keep_prob", region.keep_prob},
                   {"subset_seed", region.subset_seed}};
    j["sizes"] = sizes;
    j["points"] = points;
    j["x"] = x;
    j["tau"] = tau;
    j["alpha"] = alpha;
    j["p"] = p;
    j["m_grid"] = m_grid;
    j["b_grid"] = b_grid;
    j["p_grid"] = p_grid;
    j["k_min"] = k_min;
    j["k_max"] = k_max;
    j["profile"] = {{"source", profile_source}};
    if (weight_exponent) j["weight_exponent"] = *weight_exponent;
    if (dump_estimate) j["dump_estimate"] = *dump_estimate;
    if (grid) j["grid"] = {{"lo", grid->lo}, {"hi", grid->hi}, {"step", grid->step}};
    return j.dump(2);
}

DependenceProfile RunConfig::build_profile() const {
    FieldSpec spec = field.build();
    switch (spec.kind) {
        case FieldKind::Linear:
            return DependenceProfile::exact_linear(spec.coeffs, spec.innovation,
                                                   profile_source == "law");
        case FieldKind::Volterra:
            return DependenceProfile::volterra_bound(spec.pairs, spec.innovation, 1.0);
        case FieldKind::Subordinated:
            return DependenceProfile::monte_carlo(spec, 2.0, 10000, seed);
    }
    config_error("cannot build a dependence profile for this field");
}

namespace {

ordered_json assertions_json(const std::vector<Assertion>& as) {
    ordered_json arr = ordered_json::array();
    for (const auto& a : as) {
        ordered_json j;
        j["name"] = a.name;
        j["pass"] = a.pass;
        j["detail"] = a.detail;
        arr.push_back(j);
    }
    return arr;
}

ordered_json items_json(const AssumptionReport& r) {
    ordered_json arr = ordered_json::array();
    for (const auto& item : r.items) {
        ordered_json j;
        j["name"] = item.name;
        j["pass"] = item.pass;
        j["evidence"] = item.evidence;
        arr.push_back(j);
    }
    return arr;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::vector<std::string> required_assumptions(const std::string& experiment) {
    if (experiment == "l1-rate") return {"A1", "A2", "A3", "A4"};
    if (experiment == "clt") return {"A3", "A4", "B1", "B2", "B3"};
    if (experiment == "berry-esseen") return {"A3", "B1", "B2"};
    return {};
}

}  // namespace

RunResult run(const RunConfig& config) {
    RunResult result;
    const std::string out_dir = config.out.empty() ? "out" : config.out;
    FieldSpec field = config.field.build();
    Kernel kernel = config.kernel.build();
    BandwidthSchedule schedule = config.bandwidth.build();
    DependenceProfile profile = config.build_profile();

    std::vector<std::size_t> audit_sizes = config.sizes;
    if (audit_sizes.empty() && config.region.kind == "cube")
        audit_sizes = {static_cast<std::size_t>(
            std::pow(static_cast<double>(config.region.size), field.dim))};
    AssumptionReport assumptions =
        audit_assumptions(field, kernel, schedule, audit_sizes, profile);

    auto required = required_assumptions(config.experiment);
    bool gate_ok = assumptions.passes(required);
    if (!gate_ok && !config.force) {
        for (const auto& item : assumptions.items)
            std::cout << "[" << (item.pass ? "PASS" : "FAIL") << "] assumption " << item.name
                      << ": " << item.evidence << "\n";
        std::cout << "[FAIL] required assumptions not satisfied for " << config.experiment
                  << " (use --force to override)\n";
        result.exit_code = 1;
        return result;
    }

    ordered_json results;
    std::string csv;
    std::vector<Assertion> assertions;

    if (config.experiment == "l1-rate") {
        RateReport r = run_l1_rate(field, kernel, config.sizes, schedule, config.replicates,
                                   config.seed, config.workers);
        csv = to_csv(r);
        assertions = r.assertions;
        ordered_json rows = ordered_json::array();
        for (const auto& row : r.rows)
            rows.push_back({{"size", row.size},
                            {"bandwidth", row.bandwidth},
                            {"value", row.value},
                            {"stderr", row.stderr_},
                            {"bound_shape", row.bound_shape}});
        results["rows"] = rows;
        results["slope"] = r.slope;
        results["intercept"] = r.intercept;
        results["kappa"] = r.kappa;
        results["tail_mass"] = r.tail_mass;
        if (config.dump_estimate) {
            // Representative estimate from the largest ladder size, replicate 0.
            int side = std::max<int>(
                1, static_cast<int>(std::llround(std::pow(
                       static_cast<double>(config.sizes.back()), 1.0 / field.dim))));
            Region region = Region::cube(field.dim, side);
            double b = schedule.bandwidth(region.cardinality());
            DensityModel density = marginal_density_linear_gaussian(field);
            std::vector<double> xs;
            if (config.grid) {
                for (double x = config.grid->lo; x <= config.grid->hi + 1e-12;
                     x += config.grid->step)
                    xs.push_back(x);
            } else {
                double a = 8.0 * density.sd();
                std::size_t grid_n =
                    static_cast<std::size_t>(std::ceil(2.0 * a / (b / 10.0)));
                xs.resize(grid_n + 1);
                for (std::size_t j = 0; j <= grid_n; ++j)
                    xs[j] = -a + 2.0 * a * static_cast<double>(j) / static_cast<double>(grid_n);
            }
            FieldSample sample = sample_field(
                field, region, config.seed,
                (static_cast<std::uint64_t>(config.sizes.size() - 1) << 32));
            DensityEstimate est = estimate(sample, kernel, b, xs);
            std::vector<double> efn(xs.size()), fv(xs.size());
            for (std::size_t j = 0; j < xs.size(); ++j) {
                efn[j] = expected_fn(density, kernel, b, xs[j]);
                fv[j] = density(xs[j]);
            }
            std::filesystem::path p = std::filesystem::path(out_dir) / *config.dump_estimate;
            std::filesystem::create_directories(p.parent_path());
            write_file(p.string(), density_estimate_csv(est, efn, fv));
            result.files.push_back(p.string());
        }
    } else if (config.experiment == "clt") {
        Region region = config.region.build(field.dim);
        CltReport r = run_clt(field, kernel, config.points, region, schedule, config.replicates,
                              config.seed, config.workers);
        csv = to_csv(r);
        assertions = r.assertions;
        ordered_json rows = ordered_json::array();
        for (const auto& row : r.rows)
            rows.push_back({{"x", row.x},
                            {"ks", row.ks},
                            {"gamma", row.gamma},
                            {"emp_var", row.emp_var},
                            {"expected", row.expected}});
        results["size"] = r.size;
        results["bandwidth"] = r.bandwidth;
        results["replicates"] = r.replicates;
        results["rows"] = rows;
        results["covariance"] = r.covariance;
        results["max_offdiag_corr"] = r.max_offdiag_corr;
    } else if (config.experiment == "berry-esseen") {
        double w_check = config.weight_exponent.value_or(field.dim * config.alpha);
        if (!profile.tail_certified() || !profile.tail_finite(w_check))
            throw std::runtime_error(
                "berry-esseen: the alpha-weighted dependence tail is not certifiable");
        BerryEsseenReport r =
            run_berry_esseen(field, kernel, config.x, config.sizes, config.tau, config.alpha,
                             config.p, config.replicates, config.seed, config.workers);
        csv = to_csv(r);
        assertions = r.assertions;
        ordered_json rows = ordered_json::array();
        for (const auto& row : r.rows)
            rows.push_back({{"size", row.size},
                            {"bandwidth", row.bandwidth},
                            {"value", row.value},
                            {"replicates", row.replicates},
                            {"theta_ref", row.theta_ref}});
        results["x"] = r.x;
        results["tau"] = r.tau;
        results["alpha"] = r.alpha;
        results["p"] = r.p;
        results["rows"] = rows;
        results["decay_fit"] = r.decay_fit;
    } else if (config.experiment == "audit-moment" || config.experiment == "audit-kbar") {
        InequalityAudit r;
        if (config.experiment == "audit-moment") {
            Region region = config.region.build(field.dim);
            r = audit_moment_inequality(field, kernel, region, config.m_grid, config.b_grid,
                                        config.p_grid, {}, config.x, config.replicates,
                                        config.seed, config.workers);
        } else {
            r = audit_kbar_norm(field, kernel, config.m_grid, config.b_grid, config.p_grid,
                                config.x, config.replicates, config.seed, config.workers);
        }
        csv = to_csv(r);
        assertions = r.assertions;
        ordered_json rows = ordered_json::array();
        for (const auto& row : r.rows)
            rows.push_back({{"config", row.config},
                            {"m", row.m},
                            {"bandwidth", row.bandwidth},
                            {"p", row.p},
                            {"lhs", row.lhs},
                            {"stderr", row.se},
                            {"rhs", row.rhs},
                            {"ratio", row.ratio},
                            {"pass", row.pass}});
        results["rows"] = rows;
    } else if (config.experiment == "audit-mn") {
        std::vector<double> ladder;
        for (int k = config.k_min; k <= config.k_max; ++k) ladder.push_back(std::pow(2.0, -k));
        MnReport r = audit_mn_limits(profile, field.dim, ladder);
        csv = to_csv(r);
        assertions = r.assertions;
        ordered_json rows = ordered_json::array();
        for (const auto& row : r.rows) {
            ordered_json jr = {{"bandwidth", row.bandwidth}, {"v_n", row.v_n},
                               {"m_n", row.m_n},             {"mnd_b", row.mnd_b},
                               {"tail_term", row.tail_term}, {"sqrt_r", row.sqrt_r}};
            if (config.weight_exponent)
                jr["weighted_tail"] =
                    profile.tail_sum(static_cast<int>(row.m_n), *config.weight_exponent);
            rows.push_back(jr);
        }
        results["d"] = r.d;
        results["rows"] = rows;
    } else if (config.experiment == "audit-assumptions") {
        csv = to_csv(assumptions);
        for (const auto& item : assumptions.items)
            assertions.push_back({"assumption " + item.name, item.pass, item.evidence});
    } else {
        config_error("unknown experiment: " + config.experiment);
    }

    std::filesystem::create_directories(out_dir);
    std::filesystem::path base = std::filesystem::path(out_dir) / config.experiment;
    write_file(base.string() + ".csv", csv);

    ordered_json out;
    out["schema_version"] = config.schema_version;
    out["config"] = ordered_json::parse(config.to_json_text());
    out["forced"] = config.force && !gate_ok;
    out["assumptions"] = items_json(assumptions);
    out["results"] = results;
    out["assertions"] = assertions_json(assertions);
    write_file(base.string() + ".json", out.dump(2) + "\n");

    result.files.push_back(base.string() + ".csv");
    result.files.push_back(base.string() + ".json");

    bool all_pass = true;
    for (const auto& a : assertions) {
        std::cout << "[" << (a.pass ? "PASS" : "FAIL") << "] " << a.name;
        if (!a.detail.empty()) std::cout << " (" << a.detail << ")";
        std::cout << "\n";
        all_pass = all_pass && a.pass;
    }
    result.assertions = assertions;
    result.exit_code = all_pass ? 0 : 1;
    return result;
}

}  // namespace fieldkde
