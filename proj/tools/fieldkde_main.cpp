#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fieldkde/config.hpp"

namespace {

using fieldkde::RunConfig;

std::vector<std::string> split(const std::string& s, char del) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, del)) out.push_back(item);
    return out;
}

// "geometric:0.5[:R]" | "polynomial:3.5:R" | "stored" keeps the preset map.
void apply_coeff_flag(RunConfig& config, const std::string& text) {
    auto parts = split(text, ':');
    if (parts.empty()) throw CLI::ValidationError("--coeff", "empty coefficient spec");
    const std::string& law = parts[0];
    if (law == "stored") {
        if (parts.size() != 1)
            throw CLI::ValidationError("--coeff", "stored maps come from a config file");
        return;
    }
    if (law != "geometric" && law != "polynomial")
        throw CLI::ValidationError("--coeff", "unknown law: " + law);
    if (parts.size() < 2 || parts.size() > 3)
        throw CLI::ValidationError("--coeff", "expected law:param[:radius]");
    config.field.coeffs.law = law;
    double param = std::stod(parts[1]);
    if (law == "geometric") config.field.coeffs.rho = param;
    else config.field.coeffs.gamma = param;
    config.field.coeffs.radius = parts.size() == 3 ? std::stoi(parts[2]) : 0;
    if (law == "polynomial" && config.field.coeffs.radius == 0)
        throw CLI::ValidationError("--coeff", "polynomial law needs an explicit radius");
}

// "beta=0.333" | "tau=3" (Berry-Esseen rule) | "fixed=0.1"
void apply_bandwidth_flag(RunConfig& config, const std::string& text) {
    auto eq = text.find('=');
    if (eq == std::string::npos)
        throw CLI::ValidationError("--bandwidth-rule", "expected key=value");
    std::string key = text.substr(0, eq);
    double value = std::stod(text.substr(eq + 1));
    if (key == "beta") {
        config.bandwidth.rule = "power";
        config.bandwidth.beta = value;
    } else if (key == "tau" || key == "berry-esseen") {
        config.bandwidth.rule = "berry_esseen";
        config.bandwidth.tau = value;
    } else if (key == "fixed") {
        config.bandwidth.rule = "fixed";
        config.bandwidth.value = value;
    } else {
        throw CLI::ValidationError("--bandwidth-rule", "unknown rule: " + key);
    }
}

// "name[:cutoff]"
void apply_kernel_flag(RunConfig& config, const std::string& text) {
    auto parts = split(text, ':');
    config.kernel.name = parts[0];
    if (parts.size() == 2) config.kernel.cutoff = std::stod(parts[1]);
    else if (parts.size() > 2) throw CLI::ValidationError("--kernel", "expected name[:cutoff]");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parzen-Rosenblatt density estimation experiments on lattice random fields"};

    std::string experiment;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicates;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
    bool force = false;
    std::optional<std::string> coeff_flag, kernel_flag, bandwidth_flag, grid_flag, dump_flag;
    std::optional<int> dim_flag;
    std::optional<double> weight_exponent, x_flag;

    app.add_option("--experiment,-e", experiment,
                   "l1-rate | clt | berry-esseen | audit-moment | audit-kbar | audit-mn | "
                   "audit-assumptions");
    app.add_option("--config,-c", config_path, "JSON config file (flags override it)");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--replicates", replicates, "Monte Carlo replicates");
    app.add_option("--workers", workers, "worker threads (output is identical for any count)");
    app.add_option("--out,-o", out_dir, "output directory (default env FIELDKDE_OUT or ./out)");
    app.add_flag("--force", force, "run even if required assumptions fail (recorded in report)");
    app.add_option("--coeff", coeff_flag, "coefficient law, e.g. geometric:0.5 or polynomial:4:6");
    app.add_option("--d", dim_flag, "lattice dimension");
    app.add_option("--kernel", kernel_flag,
                   "triangular | epanechnikov | quartic | gaussian_cutoff[:c]");
    app.add_option("--bandwidth-rule", bandwidth_flag, "beta=<β> | tau=<τ> | fixed=<b>");
    app.add_option("--grid", grid_flag,
                   "lo:hi:step evaluation grid for --dump-estimate (default: the L1 grid)");
    app.add_option("--weight-exponent", weight_exponent, "tail weight override (w = d·α style)");
    app.add_option("--x", x_flag, "evaluation point for single-point experiments");
    app.add_option("--dump-estimate", dump_flag, "write a representative estimate CSV (l1-rate)");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig config;
        if (!config_path.empty()) {
            config = RunConfig::from_file(config_path);
            if (!experiment.empty() && experiment != config.experiment) {
                std::cerr << "error: --experiment disagrees with the config file; drop the flag "
                             "or edit the file\n";
                return 2;
            }
        } else if (!experiment.empty()) {
            config = RunConfig::preset(experiment);
        } else {
            std::cerr << "error: --experiment or --config is required\n";
            return 2;
        }

        // Output dir precedence: --out > config file > FIELDKDE_OUT > ./out
        if (const char* env = std::getenv("FIELDKDE_OUT"); env && config.out.empty())
            config.out = env;
        if (seed) config.seed = *seed;
        if (replicates) config.replicates = *replicates;
        if (workers) config.workers = *workers;
        if (out_dir) config.out = *out_dir;
        if (force) config.force = true;
        if (dim_flag) {
            config.field.d = *dim_flag;
            // Preset stored maps are dimension-specific; rebuild them when the
            // dimension comes from a flag rather than a config file.
            if (config_path.empty() && config.field.coeffs.law == "stored") {
                int radius = *dim_flag == 1 ? 4 : 2;
                config.field.coeffs.entries.clear();
                fieldkde::Region support = fieldkde::Region::ball(*dim_flag, radius);
                for (const auto& s : support.points()) {
                    std::vector<int> coords(s.coords.begin(), s.coords.end());
                    config.field.coeffs.entries.emplace_back(
                        coords, std::pow(2.0, -static_cast<double>(s.sup_norm())));
                }
            }
        }
        if (coeff_flag) apply_coeff_flag(config, *coeff_flag);
        if (kernel_flag) apply_kernel_flag(config, *kernel_flag);
        if (bandwidth_flag) apply_bandwidth_flag(config, *bandwidth_flag);
        if (weight_exponent) config.weight_exponent = weight_exponent;
        if (x_flag) config.x = *x_flag;
        if (dump_flag) config.dump_estimate = dump_flag;
        if (grid_flag) {
            auto parts = split(*grid_flag, ':');
            if (parts.size() != 3) {
                std::cerr << "error: --grid expects lo:hi:step\n";
                return 2;
            }
            RunConfig::Grid grid;
            grid.lo = std::stod(parts[0]);
            grid.hi = std::stod(parts[1]);
            grid.step = std::stod(parts[2]);
            config.grid = grid;
        }

        fieldkde::RunResult result = fieldkde::run(config);
        for (const auto& f : result.files) std::cout << "[info] wrote " << f << "\n";
        return result.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
