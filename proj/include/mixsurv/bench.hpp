#pragma once

// Simulation benchmark orchestration (scenarios x replicates x methods),
// real-data runs and the CSV/JSON result files.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixsurv/estimands.hpp"
#include "mixsurv/methods.hpp"
#include "mixsurv/metrics.hpp"
#include "mixsurv/sim_engine.hpp"
#include "mixsurv/uncertainty.hpp"

namespace mixsurv {

inline constexpr const char* kVersion = "0.1.0";

struct BenchConfig {
    std::string preset = "desk";
    std::vector<ScenarioConfig> scenarios;
    int replicates = 50;
    std::size_t n = 1000;
    std::vector<Method> methods;
    int bootstrap = 50;  // B; 0 disables bootstrap intervals
    /// Bootstrap refits reuse the tuning picked on the replicate's own sample.
    bool reuse_tuning_in_bootstrap = true;
    std::size_t metal = 0;              // individual metal j (0-based)
    std::size_t interaction_metal = 2;  // j' for the interaction (0-based)
    std::uint64_t seed = 20240101;
    int workers = 1;
    std::string output_dir = "results";
    std::size_t reference_n = 200000;  // cohort size behind the benchmark t_spec
    MethodSettings settings;

    static BenchConfig desk();
    static BenchConfig paper();
    void validate() const;
    /// Short notes on where this configuration departs from the full protocol.
    std::vector<std::string> deviations() const;
};

nlohmann::json to_json(const BenchConfig& config);
/// Starts from the preset named in `j` (or `preset` when absent) and applies overrides.
BenchConfig bench_config_from_json(const nlohmann::json& j, const std::string& preset = "desk");
BenchConfig bench_preset(const std::string& name);
/// Hash of everything that determines the results (not workers or output_dir).
std::string config_hash(const BenchConfig& config);

/// Seed of one method fit, keyed by (scenario, replicate, method).
std::uint64_t method_seed(std::uint64_t master, int scenario, int replicate, Method m);
/// Cohort stream of one replicate.
Rng replicate_stream(std::uint64_t master, int scenario, int replicate);

struct ScenarioTruth {
    ScenarioConfig config;
    double t_spec = 0.0;
    ProfileBasis basis;
    std::vector<EstimandRequest> requests;
    std::vector<EstimandValue> estimands;
    std::vector<std::vector<CurvePoint>> curves;  // per metal
};

ScenarioTruth scenario_truth(const ScenarioConfig& config, const BenchConfig& bench);

struct MethodRun {
    Method method = Method::cox;
    bool ok = false;
    std::string error;
    double seconds = 0.0;
    std::vector<EstimandValue> estimates;
    std::vector<IntervalEstimate> intervals;  // empty without intervals
    std::vector<std::vector<CurvePoint>> curves;
    nlohmann::json info;
};

/// Fit, point estimates, intervals and curves for one method on one dataset.
MethodRun evaluate_method(Method m, const Dataset& data, const BinGrid& grid, const ProfileBasis& basis,
                          const std::vector<EstimandRequest>& requests, const BenchConfig& config, std::uint64_t seed);

struct CellResult {
    int scenario = 0;
    int replicate = 0;
    MethodRun run;
};

struct SummaryRow {
    int scenario = 0;
    std::string method;
    std::string estimand;
    std::string scale;
    double truth = 0.0;
    MetricsSummary metrics;
    double mise = std::numeric_limits<double>::quiet_NaN();
    std::size_t failed = 0;
};

struct BenchResult {
    BenchConfig config;
    std::vector<ScenarioTruth> truths;
    std::vector<CellResult> cells;
    std::vector<SummaryRow> summary;
    std::size_t failures = 0;
};

/// Runs every cell on `config.workers` threads; results do not depend on the worker count.
BenchResult run_bench(const BenchConfig& config, std::ostream* log = nullptr);
std::vector<SummaryRow> summarize_bench(const BenchResult& result);

void write_estimates_csv(const BenchResult& result, std::ostream& out);
void write_summary_csv(const BenchResult& result, std::ostream& out);
/// Long format with method = "oracle" truth rows.
void write_curves_csv(const BenchResult& result, std::ostream& out);
nlohmann::json bench_manifest(const BenchResult& result);
/// estimates.csv, summary.csv, curves.csv and manifest.json under `dir`.
void write_bench_outputs(const BenchResult& result, const std::string& dir);

struct RealOptions {
    /// Defaults: 80th percentile of the data and sample percentiles.
    std::optional<double> t_spec;
    std::optional<ScenarioConfig> population_profiles;
    int scenario_key = 0;
    int replicate_key = 0;
};

struct RealResult {
    BenchConfig config;
    double t_spec = 0.0;
    std::vector<EstimandRequest> requests;
    std::vector<MethodRun> runs;
    std::vector<std::string> metal_names;
    std::size_t failures = 0;
};

/// Fits every configured method on a user dataset. Throws DataError without events.
RealResult run_real(const Dataset& data, const BenchConfig& config, const RealOptions& options = {});
void write_real_outputs(const RealResult& result, const std::string& dir);

}  // namespace mixsurv
