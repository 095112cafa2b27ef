#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixsurv/bench.hpp"
#include "mixsurv/stats.hpp"

using namespace mixsurv;

namespace {

struct Common {
    std::string config_path;
    std::string preset = "desk";
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string out;
    bool dump_config = false;
};

std::vector<std::string> split_names(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

BenchConfig load_config(const Common& c) {
    BenchConfig cfg;
    if (c.config_path.empty()) {
        cfg = bench_preset(c.preset);
    } else {
        std::ifstream in(c.config_path);
        if (!in) throw ConfigError("cannot open config " + c.config_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(c.config_path + ": " + e.what());
        }
        cfg = bench_config_from_json(j, c.preset);
    }
    if (c.seed) cfg.seed = *c.seed;
    if (c.workers) cfg.workers = *c.workers;
    if (!c.out.empty()) cfg.output_dir = c.out;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "JSON config file");
    app->add_option("--preset", c.preset, "Base preset")->check(CLI::IsMember({"desk", "paper"}));
    app->add_option("--seed", c.seed, "Master seed");
    app->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
    app->add_option("--out", c.out, "Output directory");
    app->add_flag("--dump-config", c.dump_config, "Print the effective config and exit");
}

const ScenarioConfig& pick_scenario(const BenchConfig& cfg, int id) {
    for (const auto& s : cfg.scenarios) {
        if (s.scenario_id == id) return s;
    }
    throw ConfigError("scenario " + std::to_string(id) + " is not in the config");
}

std::vector<std::string> csv_fields(const std::string& line) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    return f;
}

int report(const std::string& dir) {
    const auto path = std::filesystem::path(dir) / "summary.csv";
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string line;
    std::vector<std::string> head;
    const char* keep[] = {"scenario", "method", "estimand", "F", "truth", "relative_bias", "sd", "rmse", "coverage", "mise", "failed"};
    std::vector<std::size_t> idx;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto f = csv_fields(line);
        if (head.empty()) {
            head = f;
            for (const char* k : keep) {
                const auto it = std::find(head.begin(), head.end(), k);
                if (it == head.end()) throw DataError(path.string() + " lacks column " + k);
                idx.push_back(static_cast<std::size_t>(it - head.begin()));
            }
            for (std::size_t i = 0; i < idx.size(); ++i) std::cout << std::setw(i < 3 ? 20 : 12) << keep[i];
            std::cout << '\n';
            continue;
        }
        for (std::size_t i = 0; i < idx.size(); ++i) {
            std::string v = idx[i] < f.size() ? f[idx[i]] : "";
            if (i >= 4 && !v.empty() && keep[i] != std::string("failed")) {
                std::ostringstream s;
                s << std::setprecision(4) << std::stod(v);
                v = s.str();
            }
            std::cout << std::setw(i < 3 ? 20 : 12) << (v.empty() ? "-" : v);
        }
        std::cout << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Survival effects of exposure mixtures: simulation benchmark"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Common common;

    auto* sim = app.add_subcommand("simulate", "Write one simulated cohort as CSV");
    int sim_scenario = 1, sim_replicate = 0;
    std::optional<std::size_t> sim_n;
    add_common(sim, common);
    sim->add_option("--scenario", sim_scenario, "Scenario id")->check(CLI::Range(1, 5));
    sim->add_option("--replicate", sim_replicate, "Replicate index (same stream as bench)");
    sim->add_option("--n", sim_n, "Cohort size");

    auto* truth = app.add_subcommand("truth", "Closed-form estimands and curves of a scenario");
    int truth_scenario = 1;
    add_common(truth, common);
    truth->add_option("--scenario", truth_scenario, "Scenario id")->check(CLI::Range(1, 5));

    auto* bench = app.add_subcommand("bench", "Run the simulation benchmark");
    add_common(bench, common);
    bool quiet = false;
    bench->add_flag("--quiet", quiet, "No progress lines");

    auto* real = app.add_subcommand("fit-real", "Fit all configured methods to a CSV cohort");
    add_common(real, common);
    std::string data_path, metals = "M1,M2,M3,M4,M5", confounders = "sex,bmi,age";
    std::optional<double> t_spec;
    std::optional<int> population;
    int real_replicate = 0, real_scenario = 0;
    real->add_option("--data", data_path, "CSV with id,time,event and covariate columns")->required();
    real->add_option("--metals", metals, "Comma-separated metal columns");
    real->add_option("--confounders", confounders, "Comma-separated confounder columns");
    real->add_option("--t-spec", t_spec, "Evaluation time (default: 80th percentile of follow-up)");
    real->add_option("--population-profiles", population,
                     "Use a scenario's population percentiles and reference t_spec instead of the sample's");
    real->add_option("--seed-scenario", real_scenario, "Scenario key for method seeds");
    real->add_option("--seed-replicate", real_replicate, "Replicate key for method seeds");

    auto* rep = app.add_subcommand("report", "Print summary.csv of a result directory");
    std::string report_dir = "results/desk";
    rep->add_option("dir", report_dir, "Result directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (rep->parsed()) return report(report_dir);

        BenchConfig cfg = load_config(common);
        if (common.dump_config) {
            std::cout << to_json(cfg).dump(2) << '\n';
            return 0;
        }

        if (sim->parsed()) {
            ScenarioConfig sc = pick_scenario(cfg, sim_scenario);
            sc.n = sim_n.value_or(cfg.n);
            Rng rng = replicate_stream(cfg.seed, sc.scenario_id, sim_replicate);
            const Cohort cohort = simulate_cohort(sc, rng);
            if (common.out.empty()) {
                write_dataset_csv(cohort.data, std::cout);
            } else {
                std::ofstream out(common.out, std::ios::binary);
                if (!out) throw ConfigError("cannot write " + common.out);
                write_dataset_csv(cohort.data, out);
            }
            return 0;
        }

        if (truth->parsed()) {
            ScenarioConfig sc = pick_scenario(cfg, truth_scenario);
            const ScenarioTruth t = scenario_truth(sc, cfg);
            nlohmann::json est = nlohmann::json::object();
            for (std::size_t k = 0; k < t.requests.size(); ++k) est[to_string(t.requests[k].kind)] = t.estimands[k].value;
            nlohmann::json curves = nlohmann::json::object();
            const auto names = sc.metal_names();
            for (std::size_t j = 0; j < t.curves.size(); ++j) {
                nlohmann::json pts = nlohmann::json::array();
                for (const auto& p : t.curves[j]) {
                    pts.push_back({{"percentile", p.percentile}, {"exposure", p.exposure}, {"survival", p.survival}});
                }
                curves[names[j]] = pts;
            }
            std::cout << nlohmann::json{{"scenario", sc.scenario_id}, {"t_spec", t.t_spec}, {"estimands", est},
                                        {"curves", curves}}
                             .dump(2)
                      << '\n';
            return 0;
        }

        if (bench->parsed()) {
            const BenchResult r = run_bench(cfg, quiet ? nullptr : &std::cerr);
            write_bench_outputs(r, cfg.output_dir);
            std::cerr << "wrote " << cfg.output_dir << " (" << r.failures << " failed cells)\n";
            return r.failures ? 2 : 0;
        }

        if (real->parsed()) {
            const Dataset data = read_dataset_csv(data_path, split_names(metals), split_names(confounders));
            RealOptions opts;
            opts.t_spec = t_spec;
            if (population) {
                ScenarioConfig sc = default_scenario(*population);
                opts.population_profiles = sc;
                if (!t_spec) opts.t_spec = reference_t_spec(sc, cfg.reference_n);
            }
            opts.scenario_key = real_scenario;
            opts.replicate_key = real_replicate;
            const RealResult r = run_real(data, cfg, opts);
            const std::string dir = common.out.empty() ? "results/real" : common.out;
            write_real_outputs(r, dir);
            for (const auto& run : r.runs) {
                if (!run.ok) std::cerr << to_string(run.method) << " failed: " << run.error << '\n';
            }
            std::cerr << "wrote " << dir << '\n';
            return r.failures ? 2 : 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
