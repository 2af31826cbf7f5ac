#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fieldkde/experiments.hpp"

namespace fieldkde {

struct KernelConfig {
    std::string name = "epanechnikov";
    double cutoff = 8.0;
    Kernel build() const { return Kernel::parse(name, cutoff); }
};

struct BandwidthConfig {
    std::string rule = "power";  // power | berry_esseen | fixed
    double beta = 1.0 / 3.0;
    double tau = 3.0;
    double value = 0.1;
    BandwidthSchedule build() const;
};

struct RegionConfig {
    std::string kind = "cube";  // cube | ball | random_subset
    int size = 64;              // cube side
    int radius = 1;             // ball radius
    double keep_prob = 1.0;     // random_subset of the cube
    std::uint64_t subset_seed = 0;
    Region build(int d) const;
};

struct CoeffConfig {
    std::string law = "geometric";  // stored | geometric | polynomial
    double c = 1.0;
    double rho = 0.5;
    double gamma = 3.0;
    int radius = 0;  // 0 = auto for decay laws
    std::vector<std::pair<std::vector<int>, double>> entries;  // stored
    CoefficientMap build(int d) const;
};

struct FieldConfig {
    std::string kind = "linear";  // linear | volterra | subordinated
    int d = 1;
    std::string innovation = "normal";
    double sigma = 1.0;
    CoeffConfig coeffs;
    std::vector<std::pair<std::pair<std::vector<int>, std::vector<int>>, double>> pairs;
    std::string map = "identity";
    double map_scale = 1.0;
    std::shared_ptr<FieldConfig> inner;
    FieldSpec build() const;
};

struct RunConfig {
    int schema_version = 1;
    std::string experiment = "l1-rate";
    std::uint64_t seed = 1;
    int replicates = 0;
    int workers = 1;
    std::string out;  // empty = default ("out"; the CLI consults FIELDKDE_OUT first)
    bool force = false;

    FieldConfig field;
    KernelConfig kernel;
    BandwidthConfig bandwidth;
    RegionConfig region;
    std::vector<std::size_t> sizes;
    std::vector<double> points;
    double x = 0.0;
    double tau = 3.0;
    double alpha = 10.0;
    double p = 2.0;
    std::vector<long> m_grid;
    std::vector<double> b_grid;
    std::vector<double> p_grid;
    int k_min = 4, k_max = 20;             // audit-mn ladder b = 2^{-k}
    std::string profile_source = "field";  // field | law
    std::optional<double> weight_exponent;
    std::optional<std::string> dump_estimate;
    struct Grid {
        double lo = -8.0, hi = 8.0, step = 0.01;
    };
    std::optional<Grid> grid;  // evaluation grid override for estimate dumps

    // Acceptance-scale defaults per experiment.
    static RunConfig preset(const std::string& experiment);
    // Strict parse: unknown keys are errors; parse errors carry line/column.
    static RunConfig from_json_text(const std::string& text, const std::string& filename = "");
    static RunConfig from_file(const std::string& path);

    std::string to_json_text() const;  // verbatim echo for reports
    DependenceProfile build_profile() const;
};

struct RunResult {
    int exit_code = 0;
    std::vector<Assertion> assertions;
    std::vector<std::string> files;
};

// Validates, gates on the assumption audit, dispatches, writes
// <experiment>.csv and <experiment>.json into the output directory, and
// prints one pass/fail line per assertion.
RunResult run(const RunConfig& config);

}  // namespace fieldkde
