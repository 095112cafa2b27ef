#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mixsurv/bench.hpp"

using namespace mixsurv;

namespace {

BenchConfig small(std::vector<Method> methods, int F, int B) {
    BenchConfig c = BenchConfig::desk();
    c.scenarios = {default_scenario(1)};
    c.methods = std::move(methods);
    c.replicates = F;
    c.bootstrap = B;
    return c;
}

std::string csv(const BenchResult& r, void (*writer)(const BenchResult&, std::ostream&)) {
    std::ostringstream out;
    writer(r, out);
    return out.str();
}

std::size_t count_lines(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) n += line.find(needle) != std::string::npos;
    return n;
}

}  // namespace

TEST_SUITE("bench") {
    TEST_CASE("bookkeeping") {
        const BenchResult r = run_bench(small({Method::cox}, 2, 0), nullptr);
        CHECK(r.failures == 0);
        const std::string est = csv(r, write_estimates_csv);
        for (auto k : kAllEstimands) CHECK(count_lines(est, "," + to_string(k) + ",") == 2);
        const std::string sum = csv(r, write_summary_csv);
        for (auto k : kAllEstimands) CHECK(count_lines(sum, "," + to_string(k) + ",") == 1);
        const std::string cur = csv(r, write_curves_csv);
        CHECK(count_lines(cur, "1,cox,0,M1,") == 19);
        CHECK(count_lines(cur, "1,oracle,0,M3,") == 19);
        CHECK(est.rfind("# config_hash=" + config_hash(r.config), 0) == 0);
        const auto manifest = bench_manifest(r);
        CHECK(manifest["estimate_rows"] == 10);
        CHECK(manifest["cells"].size() == 2);
    }

    TEST_CASE("deterministic across reruns and worker counts") {
        BenchConfig c = small({Method::cox, Method::coxen, Method::gpr}, 3, 5);
        const BenchResult a = run_bench(c, nullptr), b = run_bench(c, nullptr);
        c.workers = 3;
        const BenchResult p = run_bench(c, nullptr);
        for (auto w : {write_estimates_csv, write_summary_csv, write_curves_csv}) {
            CHECK(csv(a, w) == csv(b, w));
            CHECK(csv(a, w) == csv(p, w));
        }
    }

    TEST_CASE("exported cohort round trip") {
        BenchConfig c = small({kAllMethods.begin(), kAllMethods.end()}, 1, 2);
        c.settings.bart.burn_in = 50;
        c.settings.bart.draws = 20;
        c.settings.bart.thin = 2;
        const BenchResult bench = run_bench(c, nullptr);
        REQUIRE(bench.failures == 0);

        ScenarioConfig sc = c.scenarios[0];
        sc.n = c.n;
        Rng rng = replicate_stream(c.seed, sc.scenario_id, 0);
        std::stringstream file;
        write_dataset_csv(simulate_cohort(sc, rng).data, file);
        const Dataset back = read_dataset_csv(file, sc.metal_names(), {"sex", "bmi", "age"});

        RealOptions o;
        o.population_profiles = sc;
        o.t_spec = bench.truths[0].t_spec;
        o.scenario_key = sc.scenario_id;
        o.replicate_key = 0;
        const RealResult real = run_real(back, c, o);
        REQUIRE(real.failures == 0);
        for (std::size_t m = 0; m < real.runs.size(); ++m) {
            const MethodRun& a = bench.cells[m].run;
            const MethodRun& b = real.runs[m];
            CHECK(a.method == b.method);
            for (std::size_t k = 0; k < a.estimates.size(); ++k) {
                CHECK(a.estimates[k].value == b.estimates[k].value);
                CHECK(a.intervals[k].lower == b.intervals[k].lower);
                CHECK(a.intervals[k].upper == b.intervals[k].upper);
            }
        }
    }

    TEST_CASE("no events") {
        ScenarioConfig sc = default_scenario(1);
        sc.n = 100;
        const Dataset d = simulate_cohort(sc).data;
        std::vector<SurvivalRecord> recs;
        for (std::size_t i = 0; i < d.size(); ++i) {
            auto r = d.record(i);
            r.event = false;
            recs.push_back(r);
        }
        CHECK_THROWS_AS(run_real(Dataset(recs, d.metal_names(), d.confounder_names()), small({Method::cox}, 1, 0), {}),
                        DataError);
    }

    TEST_CASE("null-effect cohort") {
        ScenarioConfig sc = default_scenario(1);
        sc.beta.setZero();
        sc.seed = 99;
        const Dataset d = simulate_cohort(sc).data;
        BenchConfig c = small({kAllMethods.begin(), kAllMethods.end()}, 1, 50);
        const RealResult r = run_real(d, c, {});
        int contains = 0;
        const auto k = static_cast<std::size_t>(EstimandKind::mixture_hr);
        for (const auto& run : r.runs) {
            REQUIRE(run.ok);
            MESSAGE(to_string(run.method) << " mixture HR " << run.intervals[k].lower << " " << run.intervals[k].upper);
            contains += run.intervals[k].lower <= 1.0 && 1.0 <= run.intervals[k].upper;
        }
        CHECK(contains >= 7);
    }

    TEST_CASE("configuration") {
        const BenchConfig desk = BenchConfig::desk();
        const BenchConfig back = bench_config_from_json(to_json(desk));
        CHECK(to_json(back) == to_json(desk));
        BenchConfig w = desk;
        w.workers = 8;
        w.output_dir = "elsewhere";
        CHECK(config_hash(w) == config_hash(desk));
        w.seed = 1;
        CHECK(config_hash(w) != config_hash(desk));

        CHECK_THROWS_AS(bench_config_from_json({{"methods", {"cox", "svm"}}}), ConfigError);
        CHECK_THROWS_AS(bench_config_from_json({{"bootstrap", 1}}), ConfigError);
        CHECK_THROWS_AS(bench_config_from_json({{"replicates", 0}}), ConfigError);
        CHECK_THROWS_AS(bench_config_from_json({{"metal", 0}}), ConfigError);
        CHECK_THROWS_AS(bench_preset("huge"), ConfigError);
        const BenchConfig j = bench_config_from_json({{"scenarios", {2, 3}}, {"metal", 2}, {"interaction", {2, 4}}});
        CHECK(j.scenarios.size() == 2);
        CHECK(j.metal == 1);
        CHECK(j.interaction_metal == 3);
        CHECK(BenchConfig::paper().replicates == 400);
        CHECK(BenchConfig::paper().bootstrap == 100);
    }

    TEST_CASE("output files") {
        const BenchResult r = run_bench(small({Method::cox}, 1, 0), nullptr);
        const auto dir = std::filesystem::temp_directory_path() / "mixsurv_bench_test";
        std::filesystem::remove_all(dir);
        write_bench_outputs(r, dir.string());
        for (const char* f : {"estimates.csv", "summary.csv", "curves.csv", "manifest.json"}) {
            CHECK(std::filesystem::exists(dir / f));
        }
        std::ifstream in(dir / "manifest.json");
        const nlohmann::json m = nlohmann::json::parse(in);
        CHECK(m["config_hash"] == config_hash(r.config));
        CHECK(m["cells"][0]["status"] == "ok");
        std::filesystem::remove_all(dir);
    }
}
