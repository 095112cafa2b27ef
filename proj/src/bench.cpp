#include "mixsurv/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "mixsurv/stats.hpp"

namespace mixsurv {

// ---- configuration -----------------------------------------------------------

BenchConfig BenchConfig::desk() {
    BenchConfig c;
    c.preset = "desk";
    for (int s : {1, 2, 3}) c.scenarios.push_back(default_scenario(s));
    c.replicates = 50;
    c.bootstrap = 50;
    c.methods.assign(kAllMethods.begin(), kAllMethods.end());
    c.reuse_tuning_in_bootstrap = true;
    c.settings.coxen.omega_grid = {0.0, 0.5, 1.0};
    c.settings.bart = BartOptions::desk();
    c.output_dir = "results/desk";
    return c;
}

BenchConfig BenchConfig::paper() {
    BenchConfig c;
    c.preset = "paper";
    for (int s : {1, 2, 3, 4, 5}) c.scenarios.push_back(default_scenario(s));
    c.replicates = 400;
    c.bootstrap = 100;
    c.methods.assign(kAllMethods.begin(), kAllMethods.end());
    c.reuse_tuning_in_bootstrap = false;
    c.settings.bart = BartOptions::paper();
    c.output_dir = "results/paper";
    return c;
}

BenchConfig bench_preset(const std::string& name) {
    if (name == "desk") return BenchConfig::desk();
    if (name == "paper") return BenchConfig::paper();
    throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
}

void BenchConfig::validate() const {
    if (scenarios.empty()) throw ConfigError("bench needs at least one scenario");
    if (replicates < 1) throw ConfigError("replicates (F) must be positive");
    if (n < 10) throw ConfigError("n must be at least 10");
    if (methods.empty()) throw ConfigError("bench needs at least one method");
    if (bootstrap < 0 || bootstrap == 1) throw ConfigError("bootstrap B must be 0 (off) or at least 2");
    if (workers < 1) throw ConfigError("workers must be positive");
    settings.validate();
    for (const auto& s : scenarios) {
        s.validate();
        if (metal >= s.num_metals || interaction_metal >= s.num_metals) {
            throw ConfigError("estimand metal index exceeds the metals of scenario " + std::to_string(s.scenario_id));
        }
    }
    if (metal == interaction_metal) throw ConfigError("interaction needs two distinct metals");
}

std::vector<std::string> BenchConfig::deviations() const {
    std::vector<std::string> d;
    if (replicates < 400) d.push_back("F = " + std::to_string(replicates) + " replicates instead of 400");
    if (bootstrap < 100) d.push_back("B = " + std::to_string(bootstrap) + " bootstrap resamples instead of 100");
    if (reuse_tuning_in_bootstrap) {
        d.push_back("bootstrap refits reuse the tuning (tau, omega/kappa, P/D) chosen on the replicate's own sample");
    }
    if (settings.coxen.omega_grid.size() < 6) d.push_back("reduced elastic-net omega grid");
    if (settings.bart.draws * settings.bart.thin < 250000) {
        d.push_back("BART schedule burn-in " + std::to_string(settings.bart.burn_in) + ", " +
                    std::to_string(settings.bart.draws) + " draws, thin " + std::to_string(settings.bart.thin));
    }
    return d;
}

nlohmann::json to_json(const BenchConfig& c) {
    nlohmann::json scen = nlohmann::json::array();
    for (const auto& s : c.scenarios) scen.push_back(to_json(s));
    std::vector<std::string> methods;
    for (auto m : c.methods) methods.push_back(to_string(m));
    return {{"preset", c.preset},
            {"scenarios", scen},
            {"replicates", c.replicates},
            {"n", c.n},
            {"methods", methods},
            {"bootstrap", c.bootstrap},
            {"reuse_tuning_in_bootstrap", c.reuse_tuning_in_bootstrap},
            {"metal", c.metal + 1},
            {"interaction", {c.metal + 1, c.interaction_metal + 1}},
            {"seed", c.seed},
            {"workers", c.workers},
            {"output_dir", c.output_dir},
            {"reference_n", c.reference_n},
            {"settings", to_json(c.settings)}};
}

BenchConfig bench_config_from_json(const nlohmann::json& j, const std::string& preset) {
    if (!j.is_object()) throw ConfigError("bench config must be a JSON object");
    try {
        BenchConfig c = bench_preset(j.value("preset", preset));
        if (j.contains("scenarios")) {
            c.scenarios.clear();
            for (const auto& s : j.at("scenarios")) {
                if (s.is_number_integer()) {
                    c.scenarios.push_back(default_scenario(s.get<int>()));
                } else {
                    c.scenarios.push_back(scenario_from_json(s));
                }
            }
        }
        c.replicates = j.value("replicates", c.replicates);
        c.n = j.value("n", c.n);
        if (j.contains("methods")) {
            c.methods.clear();
            for (const auto& m : j.at("methods")) c.methods.push_back(method_from_string(m.get<std::string>()));
        }
        c.bootstrap = j.value("bootstrap", c.bootstrap);
        c.reuse_tuning_in_bootstrap = j.value("reuse_tuning_in_bootstrap", c.reuse_tuning_in_bootstrap);
        if (j.contains("metal")) {
            const int m = j.at("metal").get<int>();
            if (m < 1) throw ConfigError("metal is 1-based");
            c.metal = static_cast<std::size_t>(m - 1);
        }
        if (j.contains("interaction")) {
            const auto pair = j.at("interaction").get<std::vector<int>>();
            if (pair.size() != 2 || pair[0] < 1 || pair[1] < 1) throw ConfigError("interaction needs two 1-based metals");
            if (static_cast<std::size_t>(pair[0] - 1) != c.metal) {
                throw ConfigError("interaction's first metal must be the individual metal");
            }
            c.interaction_metal = static_cast<std::size_t>(pair[1] - 1);
        }
        c.seed = j.value("seed", c.seed);
        c.workers = j.value("workers", c.workers);
        c.output_dir = j.value("output_dir", c.output_dir);
        c.reference_n = j.value("reference_n", c.reference_n);
        if (j.contains("settings")) c.settings = method_settings_from_json(j.at("settings"), c.settings);
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bench config: ") + e.what());
    }
}

std::string config_hash(const BenchConfig& config) {
    nlohmann::json j = to_json(config);
    j.erase("workers");
    j.erase("output_dir");
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << fnv1a(j.dump());
    return out.str();
}

std::uint64_t method_seed(std::uint64_t master, int scenario, int replicate, Method m) {
    return derive_seed(master, {0x3E7D0DULL, static_cast<std::uint64_t>(scenario), static_cast<std::uint64_t>(replicate),
                                static_cast<std::uint64_t>(m)});
}

Rng replicate_stream(std::uint64_t master, int scenario, int replicate) {
    return make_stream(master, {0xC0407ULL, static_cast<std::uint64_t>(scenario), static_cast<std::uint64_t>(replicate)});
}

// ---- truth ---------------------------------------------------------------------

ScenarioTruth scenario_truth(const ScenarioConfig& config, const BenchConfig& bench) {
    ScenarioTruth t{config, reference_t_spec(config, bench.reference_n), ProfileBasis::from_population(config), {}, {}, {}};
    t.requests = standard_requests(bench.metal, bench.interaction_metal, t.t_spec);
    const OracleModel oracle(config);
    for (const auto& r : t.requests) t.estimands.push_back(compute_estimand(oracle, t.basis, r));
    for (std::size_t j = 0; j < config.num_metals; ++j) {
        t.curves.push_back(exposure_response_curve(oracle, t.basis, j, t.t_spec));
    }
    return t;
}

// ---- one method on one dataset -------------------------------------------------

MethodRun evaluate_method(Method m, const Dataset& data, const BinGrid& grid, const ProfileBasis& basis,
                          const std::vector<EstimandRequest>& requests, const BenchConfig& config, std::uint64_t seed) {
    MethodRun run;
    run.method = m;
    const auto start = std::chrono::steady_clock::now();
    try {
        const FittedMethod fit = fit_method(m, data, grid, config.settings, seed);
        run.info = fit.info;
        run.info["tuning"] = to_json(fit.tuning);
        if (fit.bayesian()) {
            const auto draws = draw_estimates(fit, basis, requests);
            for (std::size_t k = 0; k < requests.size(); ++k) {
                std::vector<double> v;
                for (const auto& d : draws) {
                    if (!d[k].degenerate) v.push_back(d[k].value);
                }
                const std::size_t bad = draws.size() - v.size();
                if (v.size() >= 10) {
                    IntervalEstimate iv = posterior_interval(v);
                    iv.degenerate = bad;
                    iv.unreliable = static_cast<double>(bad) > 0.2 * static_cast<double>(draws.size());
                    run.estimates.push_back({iv.point, false});
                    run.intervals.push_back(iv);
                } else {
                    IntervalEstimate iv = percentile_interval(0.0, v, draws.size());
                    iv.source = "posterior";
                    run.estimates.push_back({v.empty() ? 0.0 : mean(v), v.empty()});
                    run.intervals.push_back(iv);
                }
            }
        } else {
            run.estimates = point_estimates(fit, basis, requests);
            if (config.bootstrap >= 2) {
                const Tuning* reuse = config.reuse_tuning_in_bootstrap ? &fit.tuning : nullptr;
                const auto boot = bootstrap(
                    data, requests.size(),
                    [&](const Dataset& resample, std::uint64_t s) {
                        const FittedMethod refit = fit_method(m, resample, grid, config.settings, s, reuse);
                        return point_estimates(refit, basis, requests);
                    },
                    config.bootstrap, derive_seed(seed, {0xB0075ULL}));
                for (std::size_t k = 0; k < requests.size(); ++k) {
                    run.intervals.push_back(percentile_interval(run.estimates[k].value, boot.values[k], boot.resamples));
                }
                run.info["bootstrap_failed_refits"] = boot.failed_refits;
            }
        }
        for (std::size_t j = 0; j < basis.num_metals(); ++j) {
            run.curves.push_back(method_curve(fit, basis, j, requests.front().t_spec));
        }
        run.ok = true;
    } catch (const std::exception& e) {
        run.ok = false;
        run.error = e.what();
        run.estimates.clear();
        run.intervals.clear();
        run.curves.clear();
    }
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

// ---- benchmark ---------------------------------------------------------------

BenchResult run_bench(const BenchConfig& config, std::ostream* log) {
    config.validate();
    BenchResult res;
    res.config = config;
    for (auto sc : config.scenarios) {
        sc.n = config.n;
        res.truths.push_back(scenario_truth(sc, config));
    }
    struct Task {
        std::size_t scenario_index;
        int replicate;
        Method method;
    };
    std::vector<Task> tasks;
    for (std::size_t s = 0; s < res.truths.size(); ++s) {
        for (int f = 0; f < config.replicates; ++f) {
            for (auto m : config.methods) tasks.push_back({s, f, m});
        }
    }
    res.cells.resize(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const Task& t = tasks[i];
            const ScenarioTruth& truth = res.truths[t.scenario_index];
            const int sid = truth.config.scenario_id;
            CellResult& cell = res.cells[i];
            cell.scenario = sid;
            cell.replicate = t.replicate;
            try {
                Rng rng = replicate_stream(config.seed, sid, t.replicate);
                const Cohort cohort = simulate_cohort(truth.config, rng);
                const BinGrid grid = make_bin_grid(cohort.data, config.settings.bins);
                cell.run = evaluate_method(t.method, cohort.data, grid, truth.basis, truth.requests, config,
                                           method_seed(config.seed, sid, t.replicate, t.method));
            } catch (const std::exception& e) {
                cell.run.method = t.method;
                cell.run.ok = false;
                cell.run.error = e.what();
            }
            const std::size_t k = ++done;
            if (log) {
                std::lock_guard<std::mutex> lock(log_mutex);
                *log << "[" << k << "/" << tasks.size() << "] scenario " << sid << " replicate " << t.replicate << ' '
                     << to_string(t.method) << ": " << (cell.run.ok ? "ok" : "FAILED: " + cell.run.error) << " ("
                     << std::fixed << std::setprecision(1) << cell.run.seconds << std::defaultfloat << " s)\n"
                     << std::flush;
            }
        }
    };
    const int nthreads = std::min<int>(config.workers, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nthreads; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& c : res.cells) res.failures += !c.run.ok;
    res.summary = summarize_bench(res);
    return res;
}

std::vector<SummaryRow> summarize_bench(const BenchResult& result) {
    std::vector<SummaryRow> rows;
    for (const auto& truth : result.truths) {
        const int sid = truth.config.scenario_id;
        for (auto m : result.config.methods) {
            std::vector<const MethodRun*> ok;
            std::size_t failed = 0;
            for (const auto& c : result.cells) {
                if (c.scenario != sid || c.run.method != m) continue;
                if (c.run.ok) {
                    ok.push_back(&c.run);
                } else {
                    ++failed;
                }
            }
            for (std::size_t k = 0; k < truth.requests.size(); ++k) {
                std::vector<double> est;
                std::vector<bool> deg;
                std::vector<IntervalEstimate> iv;
                bool have_intervals = !ok.empty();
                for (const auto* r : ok) {
                    est.push_back(r->estimates[k].value);
                    deg.push_back(r->estimates[k].degenerate);
                    if (r->intervals.empty()) {
                        have_intervals = false;
                    } else {
                        iv.push_back(r->intervals[k]);
                    }
                }
                if (!have_intervals) iv.clear();
                SummaryRow row;
                row.scenario = sid;
                row.method = to_string(m);
                row.estimand = to_string(truth.requests[k].kind);
                row.scale = estimand_scale(truth.requests[k].kind);
                row.truth = truth.estimands[k].value;
                row.metrics = summarize(est, deg, iv, row.truth);
                row.failed = failed;
                rows.push_back(row);
            }
            for (std::size_t j = 0; j < truth.curves.size(); ++j) {
                SummaryRow row;
                row.scenario = sid;
                row.method = to_string(m);
                row.estimand = "curve_M" + std::to_string(j + 1);
                row.scale = "survival";
                row.failed = failed;
                std::vector<double> truth_curve;
                for (const auto& p : truth.curves[j]) truth_curve.push_back(p.survival);
                std::vector<std::vector<double>> curves;
                for (const auto* r : ok) {
                    std::vector<double> c;
                    for (const auto& p : r->curves[j]) c.push_back(p.survival);
                    curves.push_back(std::move(c));
                }
                row.metrics.F = curves.size();
                row.metrics.relative_bias = row.metrics.bias = row.metrics.sd = row.metrics.rmse =
                    row.metrics.coverage = row.metrics.median = row.metrics.q25 = row.metrics.q75 =
                        row.metrics.mean_interval_sd = row.truth = std::numeric_limits<double>::quiet_NaN();
                if (!curves.empty()) row.mise = mise(curves, truth_curve);
                rows.push_back(row);
            }
        }
    }
    return rows;
}

// ---- output files ----------------------------------------------------------------

namespace {

std::string num(double v) { return std::isfinite(v) ? format_double(v) : (std::isnan(v) ? "" : (v > 0 ? "inf" : "-inf")); }

void header(std::ostream& out, const BenchConfig& c) { out << "# config_hash=" << config_hash(c) << '\n'; }

}  // namespace

void write_estimates_csv(const BenchResult& r, std::ostream& out) {
    header(out, r.config);
    out << "scenario,method,replicate,estimand,scale,estimate,truth,lower,upper,sd,interval_source,interval_count,"
           "degenerate,unreliable\n";
    for (const auto& c : r.cells) {
        if (!c.run.ok) continue;
        const ScenarioTruth* truth = nullptr;
        for (const auto& t : r.truths) {
            if (t.config.scenario_id == c.scenario) truth = &t;
        }
        for (std::size_t k = 0; k < truth->requests.size(); ++k) {
            const auto kind = truth->requests[k].kind;
            out << c.scenario << ',' << to_string(c.run.method) << ',' << c.replicate << ',' << to_string(kind) << ','
                << estimand_scale(kind) << ',' << num(c.run.estimates[k].value) << ','
                << num(truth->estimands[k].value) << ',';
            if (c.run.intervals.empty()) {
                out << ",,,,,";
            } else {
                const auto& iv = c.run.intervals[k];
                out << num(iv.lower) << ',' << num(iv.upper) << ',' << num(iv.sd) << ',' << iv.source << ','
                    << iv.count << ',';
            }
            out << (c.run.estimates[k].degenerate ? 1 : 0) << ','
                << (!c.run.intervals.empty() && c.run.intervals[k].unreliable ? 1 : 0) << '\n';
        }
    }
}

void write_summary_csv(const BenchResult& r, std::ostream& out) {
    header(out, r.config);
    out << "scenario,method,estimand,scale,F,relative_bias,sd,rmse,coverage,mise,degenerate_count,failed,truth,bias,"
           "median,q25,q75,mean_interval_sd\n";
    for (const auto& row : r.summary) {
        const auto& m = row.metrics;
        out << row.scenario << ',' << row.method << ',' << row.estimand << ',' << row.scale << ',' << m.F << ','
            << num(m.relative_bias) << ',' << num(m.sd) << ',' << num(m.rmse) << ',' << num(m.coverage) << ','
            << num(row.mise) << ',' << m.degenerate << ',' << row.failed << ',' << num(row.truth) << ','
            << num(m.bias) << ',' << num(m.median) << ',' << num(m.q25) << ',' << num(m.q75) << ','
            << num(m.mean_interval_sd) << '\n';
    }
}

void write_curves_csv(const BenchResult& r, std::ostream& out) {
    header(out, r.config);
    out << "scenario,method,replicate,metal,percentile,exposure_value,survival\n";
    for (const auto& t : r.truths) {
        const auto names = t.config.metal_names();
        for (std::size_t j = 0; j < t.curves.size(); ++j) {
            for (const auto& p : t.curves[j]) {
                out << t.config.scenario_id << ",oracle,0," << names[j] << ',' << p.percentile << ','
                    << num(p.exposure) << ',' << num(p.survival) << '\n';
            }
        }
    }
    for (const auto& c : r.cells) {
        if (!c.run.ok) continue;
        for (std::size_t j = 0; j < c.run.curves.size(); ++j) {
            for (const auto& p : c.run.curves[j]) {
                out << c.scenario << ',' << to_string(c.run.method) << ',' << c.replicate << ",M" << j + 1 << ','
                    << p.percentile << ',' << num(p.exposure) << ',' << num(p.survival) << '\n';
            }
        }
    }
}

nlohmann::json bench_manifest(const BenchResult& r) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : r.cells) {
        nlohmann::json cell = {{"scenario", c.scenario},
                               {"replicate", c.replicate},
                               {"method", to_string(c.run.method)},
                               {"status", c.run.ok ? "ok" : "failed"},
                               {"seconds", c.run.seconds},
                               {"info", c.run.info}};
        if (!c.run.ok) cell["error"] = c.run.error;
        cells.push_back(std::move(cell));
    }
    nlohmann::json truths = nlohmann::json::array();
    for (const auto& t : r.truths) {
        nlohmann::json est = nlohmann::json::object();
        for (std::size_t k = 0; k < t.requests.size(); ++k) est[to_string(t.requests[k].kind)] = t.estimands[k].value;
        truths.push_back({{"scenario", t.config.scenario_id}, {"t_spec", t.t_spec}, {"estimands", est}});
    }
    const std::size_t estimands = r.truths.empty() ? 0 : r.truths.front().requests.size();
    return {{"software", std::string("mixsurv ") + kVersion},
            {"config_hash", config_hash(r.config)},
            {"seed", r.config.seed},
            {"workers", r.config.workers},
            {"config", to_json(r.config)},
            {"deviations", r.config.deviations()},
            {"truth", truths},
            {"cells_total", r.cells.size()},
            {"cells_failed", r.failures},
            {"estimate_rows", (r.cells.size() - r.failures) * estimands},
            {"cells", cells}};
}

namespace {

std::ofstream open_output(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    return out;
}

}  // namespace

void write_bench_outputs(const BenchResult& r, const std::string& dir) {
    const std::filesystem::path d(dir);
    std::filesystem::create_directories(d);
    {
        auto out = open_output(d / "estimates.csv");
        write_estimates_csv(r, out);
    }
    {
        auto out = open_output(d / "summary.csv");
        write_summary_csv(r, out);
    }
    {
        auto out = open_output(d / "curves.csv");
        write_curves_csv(r, out);
    }
    auto out = open_output(d / "manifest.json");
    out << bench_manifest(r).dump(2) << '\n';
}

// ---- real data -------------------------------------------------------------------

RealResult run_real(const Dataset& data, const BenchConfig& config, const RealOptions& options) {
    config.settings.validate();
    require_events(data);
    if (config.metal >= data.num_metals() || config.interaction_metal >= data.num_metals()) {
        throw ConfigError("estimand metal index exceeds the dataset's metals");
    }
    RealResult res;
    res.config = config;
    res.metal_names = data.metal_names();
    res.t_spec = options.t_spec ? *options.t_spec : compute_t_spec(data);
    const ProfileBasis basis = options.population_profiles ? ProfileBasis::from_population(*options.population_profiles)
                                                           : ProfileBasis::from_dataset(data);
    res.requests = standard_requests(config.metal, config.interaction_metal, res.t_spec);
    const BinGrid grid = make_bin_grid(data, config.settings.bins);
    for (auto m : config.methods) {
        res.runs.push_back(evaluate_method(m, data, grid, basis, res.requests, config,
                                           method_seed(config.seed, options.scenario_key, options.replicate_key, m)));
        res.failures += !res.runs.back().ok;
    }
    return res;
}

void write_real_outputs(const RealResult& r, const std::string& dir) {
    const std::filesystem::path d(dir);
    std::filesystem::create_directories(d);
    {
        auto out = open_output(d / "real_estimates.csv");
        header(out, r.config);
        out << "method,estimand,scale,estimate,lower,upper,sd,interval_source,degenerate,t_spec\n";
        for (const auto& run : r.runs) {
            if (!run.ok) continue;
            for (std::size_t k = 0; k < r.requests.size(); ++k) {
                const auto kind = r.requests[k].kind;
                out << to_string(run.method) << ',' << to_string(kind) << ',' << estimand_scale(kind) << ','
                    << num(run.estimates[k].value) << ',';
                if (run.intervals.empty()) {
                    out << ",,,,";
                } else {
                    const auto& iv = run.intervals[k];
                    out << num(iv.lower) << ',' << num(iv.upper) << ',' << num(iv.sd) << ',' << iv.source << ',';
                }
                out << (run.estimates[k].degenerate ? 1 : 0) << ',' << num(r.t_spec) << '\n';
            }
        }
    }
    {
        auto out = open_output(d / "real_curves.csv");
        header(out, r.config);
        out << "method,metal,percentile,exposure_value,survival\n";
        for (const auto& run : r.runs) {
            for (std::size_t j = 0; j < run.curves.size(); ++j) {
                for (const auto& p : run.curves[j]) {
                    out << to_string(run.method) << ',' << r.metal_names[j] << ',' << p.percentile << ','
                        << num(p.exposure) << ',' << num(p.survival) << '\n';
                }
            }
        }
    }
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& run : r.runs) {
        nlohmann::json j = {{"method", to_string(run.method)},
                            {"status", run.ok ? "ok" : "failed"},
                            {"seconds", run.seconds},
                            {"info", run.info}};
        if (!run.ok) j["error"] = run.error;
        runs.push_back(std::move(j));
    }
    auto out = open_output(d / "manifest.json");
    out << nlohmann::json{{"software", std::string("mixsurv ") + kVersion},
                          {"config_hash", config_hash(r.config)},
                          {"t_spec", r.t_spec},
                          {"config", to_json(r.config)},
                          {"runs", runs},
                          {"failures", r.failures}}
               .dump(2)
        << '\n';
}

}  // namespace mixsurv
