#include <doctest.h>

#include <cmath>

#include "mixsurv/cox.hpp"
#include "mixsurv/estimands.hpp"
#include "mixsurv/metrics.hpp"
#include "mixsurv/sim_engine.hpp"

using namespace mixsurv;

namespace {

Dataset with_metals(const std::vector<std::vector<double>>& metals, std::vector<double> times = {}) {
    std::vector<SurvivalRecord> recs;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < metals.size(); ++j) names.push_back("M" + std::to_string(j + 1));
    for (std::size_t i = 0; i < metals[0].size(); ++i) {
        std::vector<double> m;
        for (const auto& col : metals) m.push_back(col[i]);
        recs.push_back({std::to_string(i), times.empty() ? 1.0 + i : times[i], true, m, {}});
    }
    return Dataset(recs, names, {});
}

// Fixed-coefficient Cox model over a linear design; baseline irrelevant for ratios.
CoxModel fixed_cox(std::size_t metals, const Eigen::VectorXd& coef, std::vector<std::string> confounders = {}) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < metals; ++j) names.push_back("M" + std::to_string(j + 1));
    CoxFit fit;
    fit.design = std::make_shared<LinearCoxDesign>(names, confounders, false);
    fit.coef = coef;
    fit.baseline.times = {1.0, 2.0};
    fit.baseline.cumhaz = {0.1, 0.3};
    return CoxModel(fit);
}

class ConstantHazard : public DiscreteTimeModel {
public:
    using DiscreteTimeModel::DiscreteTimeModel;
    double event_probability(const ExposureProfile&, int r) const override { return 0.1 * r; }
};

}  // namespace

TEST_SUITE("estimands") {
    TEST_CASE("evaluation time") {
        std::vector<double> t;
        for (int i = 1; i <= 10; ++i) t.push_back(i);
        CHECK(compute_t_spec(with_metals({std::vector<double>(10, 0.0)}, t)) == doctest::Approx(8.2));
        CHECK(compute_t_spec(with_metals({std::vector<double>(4, 0.0)}, {3, 3, 3, 3})) == 3.0);
    }

    TEST_CASE("profiles") {
        const ProfileBasis one = ProfileBasis::from_dataset(with_metals({{1, 2, 3, 4, 5}}));
        EstimandRequest r;
        r.t_spec = 1.0;
        r.second_metal = 0;
        r.kind = EstimandKind::individual_hr;
        const auto ind = build_profiles(one, r);
        r.kind = EstimandKind::mixture_hr;
        const auto mix = build_profiles(one, r);
        CHECK(ind[0].metals == mix[0].metals);
        CHECK(ind[1].metals == mix[1].metals);

        const ProfileBasis sym = ProfileBasis::from_dataset(with_metals({{-2, -1, 0, 1, 2}, {2, 1, 0, -1, -2}}));
        r.kind = EstimandKind::individual_survdiff;
        const auto p = build_profiles(sym, r);
        CHECK(p[0].metals == std::vector<double>{1, 0});
        CHECK(p[1].metals == std::vector<double>{-1, 0});

        const ProfileBasis pop = ProfileBasis::from_population(default_scenario(1));
        CHECK(std::abs(pop.metal_percentile(0, 25) - 1.60) <= 0.02);
        CHECK(std::abs(pop.metal_percentile(0, 75) - 2.74) <= 0.02);
    }

    TEST_CASE("hazard ratios and survival differences") {
        const ProfileBasis basis = ProfileBasis::from_dataset(with_metals({{-1, -0.5, 0, 0.5, 1}, {0, 1, 2, 3, 4}}));
        REQUIRE(basis.metal_percentile(0, 75) - basis.metal_percentile(0, 25) == doctest::Approx(1.0));
        EstimandRequest r;
        r.t_spec = 1.5;
        r.second_metal = 1;

        const CoxModel null = fixed_cox(2, Eigen::Vector2d::Zero());
        for (auto k : kAllEstimands) {
            r.kind = k;
            const double v = compute_estimand(null, basis, r).value;
            CHECK(v == (estimand_scale(k) == "additive" ? 0.0 : 1.0));
        }

        const CoxModel harmful = fixed_cox(2, Eigen::Vector2d(std::log(2.0), 0.0));
        r.kind = EstimandKind::individual_hr;
        CHECK(compute_estimand(harmful, basis, r).value == doctest::Approx(2.0).epsilon(1e-14));
        r.kind = EstimandKind::individual_survdiff;
        CHECK(compute_estimand(harmful, basis, r).value < 0.0);

        const ScenarioConfig s1 = default_scenario(1);
        const ProfileBasis pop = ProfileBasis::from_population(s1);
        r.kind = EstimandKind::individual_hr;
        r.second_metal = 2;
        const double span = pop.metal_percentile(0, 75) - pop.metal_percentile(0, 25);
        // Metals act on the Weibull scale: with alpha = 1 the hazard ratio is exp(-beta * span).
        CHECK(compute_estimand(OracleModel(s1), pop, r).value == doctest::Approx(std::exp(-s1.beta(0) * span)));
    }

    TEST_CASE("discrete-time reconstruction") {
        const BinGrid g({0.0, 1.0, 3.0, 4.0});
        const ConstantHazard m(g);
        const ExposureProfile p{{0.0}, {}};
        CHECK(m.survival(p, 1.0) == doctest::Approx(0.9));
        CHECK(m.survival(p, 3.0) == doctest::Approx(0.72));
        CHECK(m.survival(p, 4.0) == doctest::Approx(0.504));
        CHECK(m.survival(p, 2.0) == doctest::Approx(0.9 * std::sqrt(0.8)));
        CHECK(m.hazard(p, 2.0) == doctest::Approx(0.1));
        CHECK(m.survival(p, 0.0) == 1.0);
    }

    TEST_CASE("mixture truth against Monte Carlo") {
        const ScenarioConfig s1 = default_scenario(1);
        const ProfileBasis pop = ProfileBasis::from_population(s1);
        EstimandRequest r;
        r.kind = EstimandKind::mixture_survdiff;
        r.t_spec = 18.5;
        const auto prof = build_profiles(pop, r);
        const double truth = compute_estimand(OracleModel(s1), pop, r).value;
        Rng rng = make_stream(1, {0x3C});
        ScenarioConfig nocens = s1;
        nocens.censoring = false;
        double frac[2];
        for (int k = 0; k < 2; ++k) {
            int alive = 0;
            for (int i = 0; i < 1000000; ++i) {
                alive += scenario_outcome(prof[static_cast<std::size_t>(k)].metals, prof[static_cast<std::size_t>(k)].confounders,
                                          nocens, rng)
                             .time > r.t_spec;
            }
            frac[k] = alive / 1e6;
        }
        const double se = std::sqrt(frac[0] * (1 - frac[0]) / 1e6 + frac[1] * (1 - frac[1]) / 1e6);
        CHECK(std::abs(frac[0] - frac[1] - truth) <= 3 * se);
    }

    TEST_CASE("curves") {
        const ScenarioConfig s2 = default_scenario(2);
        const ProfileBasis pop = ProfileBasis::from_population(s2);
        const OracleModel oracle(s2);
        const auto c = exposure_response_curve(oracle, pop, 2, 18.5);
        REQUIRE(c.size() == 19);
        // g enters the Weibull scale, so the falling logistic term in M3 raises the hazard.
        for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i].survival <= c[i - 1].survival);
        CHECK(c.back().survival < c.front().survival);

        const CoxModel null = fixed_cox(5, Eigen::VectorXd::Zero(8), {"sex", "bmi", "age"});
        const auto flat = exposure_response_curve(null, pop, 0, 1.5);
        for (const auto& pt : flat) CHECK(pt.survival == null.survival(pop.median_profile(), 1.5));

        std::vector<double> truth;
        for (const auto& pt : c) truth.push_back(pt.survival);
        CHECK(mise({truth, truth}, truth) == 0.0);
    }

    TEST_CASE("request validation") {
        EstimandRequest r;
        r.kind = EstimandKind::interaction_mult;
        r.metal = 1;
        r.second_metal = 1;
        r.t_spec = 1.0;
        CHECK_THROWS_AS(r.validate(5), ConfigError);
        r.second_metal = 7;
        CHECK_THROWS_AS(r.validate(5), ConfigError);
        CHECK(estimand_from_string("mixture_hr") == EstimandKind::mixture_hr);
        CHECK_THROWS_AS(estimand_from_string("nope"), ConfigError);
    }
}
