// Acceptance run: one PASS/FAIL line per criterion, details in
// <out>/acceptance_report.json, benchmark outputs under <out>/c5 ... <out>/c9.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixsurv/bart.hpp"
#include "mixsurv/bench.hpp"
#include "mixsurv/cox.hpp"
#include "mixsurv/cox_en.hpp"
#include "mixsurv/gpr.hpp"

using namespace mixsurv;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string summary;
    nlohmann::json detail = nlohmann::json::object();
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s << std::setprecision(digits) << v;
    return s.str();
}

// ---- 1: augmentation ----------------------------------------------------------

Verdict augmentation() {
    const std::vector<SurvivalRecord> recs{{"event", 1.5, true, {0.0}, {}}, {"censored", 1.5, false, {0.0}, {}}};
    const Dataset d(recs, {"M1"}, {});
    const AugmentedDataset a = augment(d, BinGrid({0.0, 1.0, 2.0, 3.0}));
    std::map<std::string, std::vector<int>> y;
    for (std::size_t i = 0; i < a.rows(); ++i) y[a.subject_id[i]].push_back(a.y[i]);
    Verdict v;
    v.pass = a.rows() == 4 && y["event"] == std::vector<int>{0, 1} && y["censored"] == std::vector<int>{0, 0};
    v.detail = {{"event", y["event"]}, {"censored", y["censored"]}};
    v.summary = "event at 1.5 -> Y=(" + std::to_string(y["event"].size() > 0 ? y["event"][0] : -1) + "," +
                std::to_string(y["event"].size() > 1 ? y["event"][1] : -1) + "), censored at 1.5 -> Y=(" +
                std::to_string(y["censored"].size() > 0 ? y["censored"][0] : -1) + "," +
                std::to_string(y["censored"].size() > 1 ? y["censored"][1] : -1) + ")";
    return v;
}

// ---- 2: calibration -----------------------------------------------------------

Verdict calibration() {
    const CalibrationReport r = calibrate_defaults(default_scenario(1), 100000);
    Verdict v;
    const bool cens = std::abs(r.censoring_fraction - 0.67) <= 0.03;
    const bool corr = r.min_correlation >= 0.0 && r.max_correlation <= 0.26;
    const bool t = std::abs(r.t_spec - 18.5) <= 0.5;
    v.pass = cens && corr && t;
    v.detail = to_json(r);
    v.summary = "censoring " + fmt(r.censoring_fraction) + ", correlations [" + fmt(r.min_correlation, 3) + ", " +
                fmt(r.max_correlation, 3) + "], t_spec " + fmt(r.t_spec);
    return v;
}

// ---- 3: oracle vs Monte Carlo -------------------------------------------------

struct McProfile {
    double survival = 0.0;  // fraction alive at t_spec
    double events = 0.0;    // events in the hazard window
    double exposure = 0.0;  // person-time in the hazard window
};

McProfile monte_carlo(const ScenarioConfig& config, const ExposureProfile& p, double t, std::size_t draws, Rng& rng) {
    ScenarioConfig sc = config;
    sc.censoring = false;
    const double lo = t - 0.5, hi = t + 0.5;
    McProfile m;
    std::size_t alive = 0;
    for (std::size_t i = 0; i < draws; ++i) {
        const double time = scenario_outcome(p.metals, p.confounders, sc, rng).time;
        alive += time > t;
        if (time > lo) {
            m.exposure += std::min(time, hi) - lo;
            m.events += time < hi;
        }
    }
    m.survival = static_cast<double>(alive) / static_cast<double>(draws);
    return m;
}

// Conditional binomial score test of the window event counts against the true ratio.
double hr_z(const McProfile& a, const McProfile& b, double truth, double h_a, double h_b, nlohmann::json& info) {
    const double n = a.events + b.events;
    const double pi = a.exposure * truth / (a.exposure * truth + b.exposure);
    info["events"] = {a.events, b.events};
    info["estimate"] = b.events > 0 ? (a.events / a.exposure) / (b.events / b.exposure) : std::nan("");
    if (n == 0.0) {
        // No events: consistent with the truth unless it expects some.
        const double mu = a.exposure * h_a + b.exposure * h_b;
        info["expected_events"] = mu;
        return std::exp(-mu) > 0.0027 ? 0.0 : 10.0;
    }
    const double var = n * pi * (1.0 - pi);
    if (var <= 0.0) return a.events == n * pi ? 0.0 : 10.0;
    return (a.events - n * pi) / std::sqrt(var);
}

Verdict oracle_equivalence(std::uint64_t seed) {
    const std::size_t draws = 1000000;
    const BenchConfig bench = BenchConfig::desk();
    Verdict v;
    v.pass = true;
    double worst = 0.0;
    std::string worst_at;
    for (int s = 1; s <= 3; ++s) {
        const ScenarioTruth truth = scenario_truth(default_scenario(s), bench);
        const OracleModel oracle(truth.config);
        std::map<std::vector<double>, McProfile> cache;
        int profile_index = 0;
        auto mc = [&](const ExposureProfile& p) -> const McProfile& {
            std::vector<double> key = p.metals;
            key.insert(key.end(), p.confounders.begin(), p.confounders.end());
            auto it = cache.find(key);
            if (it == cache.end()) {
                Rng rng = make_stream(seed, {0xAC3ULL, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(profile_index++)});
                it = cache.emplace(key, monte_carlo(truth.config, p, truth.t_spec, draws, rng)).first;
            }
            return it->second;
        };
        for (std::size_t k = 0; k < truth.requests.size(); ++k) {
            const EstimandRequest& req = truth.requests[k];
            const auto prof = build_profiles(truth.basis, req);
            const double t = truth.t_spec;
            const double target = truth.estimands[k].value;
            nlohmann::json info = {{"scenario", s}, {"estimand", to_string(req.kind)}, {"truth", target}};
            double z = 0.0;
            switch (req.kind) {
                case EstimandKind::individual_survdiff:
                case EstimandKind::mixture_survdiff: {
                    const McProfile& a = mc(prof[0]);
                    const McProfile& b = mc(prof[1]);
                    const double sa = oracle.survival(prof[0], t), sb = oracle.survival(prof[1], t);
                    const double se = std::sqrt((sa * (1 - sa) + sb * (1 - sb)) / static_cast<double>(draws));
                    const double est = a.survival - b.survival;
                    info["estimate"] = est;
                    info["se"] = se;
                    z = se > 0.0 ? (est - target) / se : (est == target ? 0.0 : 10.0);
                    break;
                }
                case EstimandKind::individual_hr:
                case EstimandKind::mixture_hr: {
                    z = hr_z(mc(prof[0]), mc(prof[1]), target, oracle.hazard(prof[0], t), oracle.hazard(prof[1], t), info);
                    break;
                }
                case EstimandKind::interaction_mult: {
                    // Log-scale delta method with half-count correction.
                    double log_est = 0.0, var = 0.0;
                    const int sign[4] = {1, -1, -1, 1};
                    std::vector<double> events;
                    for (int i = 0; i < 4; ++i) {
                        const McProfile& m = mc(prof[static_cast<std::size_t>(i)]);
                        log_est += sign[i] * std::log((m.events + 0.5) / m.exposure);
                        var += 1.0 / (m.events + 0.5);
                        events.push_back(m.events);
                    }
                    info["events"] = events;
                    info["estimate"] = std::exp(log_est);
                    z = (log_est - std::log(target)) / std::sqrt(var);
                    break;
                }
            }
            info["z"] = z;
            v.detail["checks"].push_back(info);
            if (std::abs(z) > worst) {
                worst = std::abs(z);
                worst_at = "scenario " + std::to_string(s) + " " + to_string(req.kind);
            }
            if (!(std::abs(z) <= 3.0)) v.pass = false;
        }
    }
    v.summary = "15 estimand checks, max |z| " + fmt(worst, 3) + " (" + worst_at + ")";
    return v;
}

// ---- 4: property suite --------------------------------------------------------

Verdict properties() {
    Verdict v;
    ScenarioConfig sc = default_scenario(1);
    sc.n = 1000;
    sc.seed = 4401;
    const Dataset d = simulate_cohort(sc).data;

    const CoxFit ph = fit_cox(d, false);
    const bool score_ok = ph.max_score < 1e-6;

    const auto design = LinearCoxDesign::for_dataset(d, false);
    const CoxEnSolver solver(design->matrix(d), d.times(), d.events(), design->penalized());
    double en_gap = 0.0;
    for (double omega : {0.0, 0.5, 1.0}) {
        const Eigen::VectorXd b = solver.to_original(solver.solve(omega, 0.0, solver.null_fit()));
        en_gap = std::max(en_gap, (b - ph.coef).cwiseAbs().maxCoeff());
    }
    const bool en_ok = en_gap < 1e-4;

    const BinGrid grid = make_bin_grid(d, 5);
    const GprModel gpr = fit_gpr(augment(d, grid), 7);
    const ProfileBasis basis = ProfileBasis::from_population(sc);
    double w_gap = 0.0;
    for (int pct : {10, 50, 90}) {
        ExposureProfile p = basis.median_profile();
        for (std::size_t j = 0; j < p.metals.size(); ++j) p.metals[j] = basis.metal_percentile(j, pct);
        for (int r = 1; r <= grid.bins(); ++r) {
            w_gap = std::max(w_gap, std::abs(gpr.kernel().weights(feature_row(p, grid, r)).sum() - 1.0));
        }
    }
    const bool w_ok = w_gap < 1e-12;

    Rng rng = make_stream(4402, {0x7EEULL});
    std::vector<double> freq(5, 0.0);
    const int trees = 100000;
    for (int i = 0; i < trees; ++i) {
        freq[std::min<std::size_t>(sample_tree_prior(0.95, 2.0, rng).leaves(), 5) - 1] += 1.0 / trees;
    }
    const double expect[5] = {0.05, 0.55, 0.28, 0.09, 0.03};
    double f_gap = 0.0;
    for (std::size_t k = 0; k < 5; ++k) f_gap = std::max(f_gap, std::abs(freq[k] - expect[k]));
    const bool prior_ok = f_gap <= 0.02;

    EstimandRequest req;
    req.kind = EstimandKind::interaction_mult;
    req.metal = 0;
    req.second_metal = 2;
    req.t_spec = compute_t_spec(d);
    const double inter = compute_estimand(CoxModel(ph), basis, req).value;
    const bool inter_ok = std::abs(inter - 1.0) <= 4 * std::numeric_limits<double>::epsilon();

    v.pass = score_ok && en_ok && w_ok && prior_ok && inter_ok;
    v.detail = {{"cox_max_score", ph.max_score},      {"en_kappa0_max_gap", en_gap},  {"gpr_weight_sum_gap", w_gap},
                {"tree_prior_frequencies", freq},      {"tree_prior_max_gap", f_gap}, {"ph_interaction", inter}};
    v.summary = "score " + fmt(ph.max_score, 2) + ", EN gap " + fmt(en_gap, 2) + ", weight gap " + fmt(w_gap, 2) +
                ", prior gap " + fmt(f_gap, 2) + ", interaction-1 " + fmt(inter - 1.0, 2);
    return v;
}

// ---- benchmark helpers --------------------------------------------------------

const SummaryRow* find_row(const BenchResult& r, Method m, const std::string& estimand) {
    for (const auto& row : r.summary) {
        if (row.method == to_string(m) && row.estimand == estimand) return &row;
    }
    return nullptr;
}

BenchResult run_and_save(const BenchConfig& config, const fs::path& dir) {
    const auto start = std::chrono::steady_clock::now();
    BenchResult r = run_bench(config, &std::cerr);
    write_bench_outputs(r, dir.string());
    std::cerr << "  wrote " << dir.string() << " in "
              << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s\n";
    return r;
}

BenchConfig desk_with(int scenario, std::vector<Method> methods, int F, int B) {
    BenchConfig c = BenchConfig::desk();
    c.scenarios = {default_scenario(scenario)};
    c.methods = std::move(methods);
    c.replicates = F;
    c.bootstrap = B;
    return c;
}

// ---- 5: scenario 1 ------------------------------------------------------------

Verdict scenario1(const fs::path& out, int workers) {
    BenchConfig c = desk_with(1, {Method::cox, Method::coxen}, 50, 50);
    c.workers = workers;
    const BenchResult r = run_and_save(c, out / "c5");
    Verdict v;
    v.pass = r.failures == 0;
    std::string s;
    for (Method m : c.methods) {
        const SummaryRow* row = find_row(r, m, to_string(EstimandKind::individual_hr));
        if (!row) {
            v.pass = false;
            continue;
        }
        const double rb = row->metrics.relative_bias, cov = row->metrics.coverage;
        const bool ok = std::abs(rb) <= 0.10 && cov >= 0.85 && cov <= 1.0;
        v.pass = v.pass && ok;
        v.detail[to_string(m)] = {{"relative_bias", rb}, {"coverage", cov}, {"F", row->metrics.F}, {"truth", row->truth}};
        s += (s.empty() ? "" : "; ") + to_string(m) + " rel.bias " + fmt(rb, 3) + " coverage " + fmt(cov, 3);
    }
    v.detail["failed_cells"] = r.failures;
    v.summary = s;
    return v;
}

// ---- 6: scenario 3 ------------------------------------------------------------

Verdict scenario3(const fs::path& out, int workers) {
    BenchConfig c = desk_with(3, {kAllMethods.begin(), kAllMethods.end()}, 50, 50);
    c.workers = workers;
    const BenchResult r = run_and_save(c, out / "c6");
    Verdict v;
    double min_dt = 2.0, max_ph = -1.0;
    std::string s;
    bool complete = true;
    for (Method m : c.methods) {
        for (EstimandKind k : {EstimandKind::individual_hr, EstimandKind::mixture_hr}) {
            const SummaryRow* row = find_row(r, m, to_string(k));
            const double cov = row ? row->metrics.coverage : std::nan("");
            v.detail[to_string(k)][to_string(m)] = cov;
            if (k != EstimandKind::individual_hr) continue;
            if (!std::isfinite(cov)) {
                complete = false;
                continue;
            }
            if (is_discrete_time(m)) {
                min_dt = std::min(min_dt, cov);
            } else {
                max_ph = std::max(max_ph, cov);
            }
            s += (s.empty() ? "" : ", ") + to_string(m) + " " + fmt(cov, 3);
        }
    }
    v.pass = complete && min_dt > max_ph;
    v.detail["failed_cells"] = r.failures;
    v.summary = "individual HR coverage: " + s + " (min discrete-time " + fmt(min_dt, 3) + " vs max PH " +
                fmt(max_ph, 3) + ")";
    return v;
}

// ---- 7: scenario 2 curves -----------------------------------------------------

Verdict scenario2(const fs::path& out, int workers) {
    const std::vector<Method> better{Method::mars, Method::gpr, Method::bart, Method::cox_ps};
    const std::vector<Method> worse{Method::cox, Method::coxen};
    std::vector<Method> all = better;
    all.insert(all.end(), worse.begin(), worse.end());
    BenchConfig c = desk_with(2, all, 50, 0);
    c.workers = workers;
    const BenchResult r = run_and_save(c, out / "c7");
    const std::string curve = "curve_M" + std::to_string(c.metal + 1);
    Verdict v;
    double max_better = 0.0, min_worse = std::numeric_limits<double>::infinity();
    bool in_range = true, complete = true;
    std::string s;
    auto take = [&](Method m, double lo, double hi, bool is_better) {
        const SummaryRow* row = find_row(r, m, curve);
        const double mise = row ? row->mise : std::nan("");
        v.detail["mise"][to_string(m)] = mise;
        s += (s.empty() ? "" : ", ") + to_string(m) + " " + fmt(mise, 3);
        if (!std::isfinite(mise)) {
            complete = false;
            return;
        }
        if (is_better) {
            max_better = std::max(max_better, mise);
        } else {
            min_worse = std::min(min_worse, mise);
        }
        in_range = in_range && mise >= lo / 3.0 && mise <= hi * 3.0;
    };
    for (Method m : better) take(m, 0.0004, 0.0015, true);
    for (Method m : worse) take(m, 0.0025, 0.0043, false);
    const bool ordered = complete && max_better < min_worse;
    v.pass = ordered && in_range;
    v.detail["ordering_holds"] = ordered;
    v.detail["within_3x_of_paper_ranges"] = in_range;
    v.detail["failed_cells"] = r.failures;
    v.summary = curve + " MISE: " + s + "; ordering " + (ordered ? "holds" : "fails") + ", 3x range " +
                (in_range ? "holds" : "fails");
    return v;
}

// ---- 8: determinism -----------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict determinism(const fs::path& out) {
    BenchConfig c = desk_with(1, {Method::cox, Method::cox_ps, Method::coxen, Method::mars, Method::gpr, Method::bart}, 2, 3);
    c.settings.bart.burn_in = 50;
    c.settings.bart.draws = 20;
    c.settings.bart.thin = 2;
    c.workers = 1;
    run_and_save(c, out / "c8" / "workers1");
    c.workers = 3;
    run_and_save(c, out / "c8" / "workers3");
    Verdict v;
    v.pass = true;
    for (const char* f : {"estimates.csv", "summary.csv", "curves.csv"}) {
        const std::string a = slurp(out / "c8" / "workers1" / f), b = slurp(out / "c8" / "workers3" / f);
        const bool same = !a.empty() && a == b;
        v.detail[f] = {{"identical", same}, {"bytes", a.size()}};
        v.pass = v.pass && same;
    }
    v.summary = std::string("estimates/summary/curves CSVs ") + (v.pass ? "byte-identical" : "differ") +
                " for workers 1 vs 3";
    return v;
}

// ---- 9: paper preset ----------------------------------------------------------

Verdict paper_preset(const fs::path& out, int workers) {
    BenchConfig c = BenchConfig::paper();
    c.scenarios = {default_scenario(1)};
    c.replicates = 1;
    c.workers = workers;
    const auto start = std::chrono::steady_clock::now();
    const BenchResult r = run_and_save(c, out / "c9");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Verdict v;
    bool files = true;
    for (const char* f : {"estimates.csv", "summary.csv", "curves.csv", "manifest.json"}) {
        files = files && fs::exists(out / "c9" / f);
    }
    v.pass = r.failures == 0 && files && r.cells.size() == kAllMethods.size();
    v.detail = {{"cells", r.cells.size()}, {"failed_cells", r.failures}, {"seconds", secs}};
    for (const auto& cell : r.cells) v.detail["method_seconds"][to_string(cell.run.method)] = cell.run.seconds;
    v.summary = "paper preset, scenario 1, F=1: " + std::to_string(r.cells.size() - r.failures) + "/" +
                std::to_string(r.cells.size()) + " method cells ok in " + fmt(secs, 4) + " s";
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria 1-9"};
    std::string out = "acceptance_runs";
    std::vector<int> only;
    int workers = 1;
    std::uint64_t seed = 20240101;
    app.add_option("--out", out, "Directory for reports and benchmark outputs");
    app.add_option("--only", only, "Run only these criteria")->delimiter(',')->check(CLI::Range(1, 9));
    app.add_option("--workers", workers, "Worker threads for the benchmark criteria")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Seed for the Monte Carlo check");
    CLI11_PARSE(app, argc, argv);

    const fs::path dir(out);
    fs::create_directories(dir);
    const std::set<int> wanted(only.begin(), only.end());
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"augmentation fidelity", augmentation},
        {"simulation calibration", calibration},
        {"oracle vs Monte Carlo", [&] { return oracle_equivalence(seed); }},
        {"estimator property suite", properties},
        {"scenario 1 bias and coverage", [&] { return scenario1(dir, workers); }},
        {"scenario 3 coverage ordering", [&] { return scenario3(dir, workers); }},
        {"scenario 2 curve MISE", [&] { return scenario2(dir, workers); }},
        {"determinism across workers", [&] { return determinism(dir); }},
        {"paper preset end-to-end", [&] { return paper_preset(dir, workers); }},
    };

    nlohmann::json report = nlohmann::json::object();
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!wanted.empty() && !wanted.count(id)) continue;
        std::cerr << "criterion " << id << ": " << criteria[i].first << " ...\n";
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.summary = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << "criterion " << id << " " << (v.pass ? "PASS" : "FAIL") << ": " << criteria[i].first << ": "
                  << v.summary << " [" << fmt(secs, 3) << " s]" << std::endl;
        report[std::to_string(id)] = {{"name", criteria[i].first}, {"pass", v.pass}, {"summary", v.summary},
                                      {"seconds", secs},           {"detail", v.detail}};
        all = all && v.pass;
        std::ofstream(dir / "acceptance_report.json") << report.dump(2) << '\n';
    }
    return all ? 0 : 1;
}
