#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "mixsurv/cox.hpp"
#include "mixsurv/estimands.hpp"
#include "mixsurv/sim_engine.hpp"
#include "mixsurv/splines.hpp"

using namespace mixsurv;

namespace {

Dataset cohort(int scenario, std::size_t n, std::uint64_t seed) {
    ScenarioConfig sc = default_scenario(scenario);
    sc.n = n;
    sc.seed = seed;
    return simulate_cohort(sc).data;
}

double grid_argmax(const std::function<double(double)>& f, double lo, double hi, double step) {
    double best = lo, fb = f(lo);
    for (double b = lo; b <= hi; b += step) {
        if (f(b) > fb) {
            fb = f(b);
            best = b;
        }
    }
    return best;
}

}  // namespace

TEST_SUITE("cox") {
    TEST_CASE("two-subject likelihood has no finite maximizer") {
        Eigen::MatrixXd X(2, 1);
        X << 1, 0;
        const PartialLikelihood pl(X, Eigen::Vector2d(1, 2), {1, 1});
        for (double b : {-3.0, 0.0, 0.7, 4.0}) {
            CHECK(pl.loglik(Eigen::VectorXd::Constant(1, b)) == doctest::Approx(b - std::log(std::exp(b) + 1.0)));
        }
        const double arg = grid_argmax([&](double b) { return pl.loglik(Eigen::VectorXd::Constant(1, b)); }, -10, 10, 1e-3);
        CHECK(arg > 9.99);
        // Newton walks out until the score drops below tolerance, past the grid edge.
        CHECK(newton_cox(pl, {}, Eigen::VectorXd::Zero(1)).beta(0) > 10.0);
    }

    TEST_CASE("three-subject fit matches grid search") {
        Eigen::MatrixXd X(3, 1);
        X << 1, 0, 1;
        const PartialLikelihood pl(X, Eigen::Vector3d(1, 2, 3), {1, 1, 1});
        auto ll = [](double b) { return b - std::log(2 * std::exp(b) + 1) - std::log(std::exp(b) + 1); };
        CHECK(pl.loglik(Eigen::VectorXd::Constant(1, 0.3)) == doctest::Approx(ll(0.3)));
        const NewtonResult r = newton_cox(pl, {}, Eigen::VectorXd::Zero(1));
        CHECK(r.beta(0) == doctest::Approx(grid_argmax(ll, -10, 10, 1e-4)).epsilon(1e-3));
        CHECK(r.max_score < 1e-6);
    }

    TEST_CASE("null covariate") {
        Dataset d = cohort(1, 3000, 5);
        std::vector<SurvivalRecord> recs;
        Rng rng = make_stream(9, {1});
        for (std::size_t i = 0; i < d.size(); ++i) {
            SurvivalRecord r = d.record(i);
            r.metals = {standard_normal(rng)};
            recs.push_back(r);
        }
        const Dataset noise(recs, {"Z"}, d.confounder_names());
        const CoxFit fit = fit_cox(noise, false);
        CHECK(std::abs(fit.coef(0) / fit.standard_errors()(0)) < 3.0);
    }

    TEST_CASE("scenario 1 coefficients and score") {
        // Metals act on the Weibull scale, so the log-hazard coefficient is -beta.
        const ScenarioConfig sc = default_scenario(1);
        const OracleModel oracle(sc);
        const ProfileBasis basis = ProfileBasis::from_population(sc);
        std::vector<double> err;
        for (std::uint64_t seed = 17; seed < 22; ++seed) {
            const Dataset d = cohort(1, 1000, seed);
            const CoxFit fit = fit_cox(d, false);
            const Eigen::VectorXd se = fit.standard_errors();
            for (Eigen::Index j = 0; j < 5; ++j) CHECK(std::abs(fit.coef(j) + sc.beta(j)) < 3 * se(j));
            CHECK(fit.max_score < 1e-6);
            const CoxModel model(fit);
            const double t = compute_t_spec(d);
            err.push_back(std::abs(model.survival(basis.median_profile(), t) - oracle.survival(basis.median_profile(), t)));
        }
        std::sort(err.begin(), err.end());
        CHECK(err[2] < 0.02);
    }

    TEST_CASE("Breslow baseline") {
        const Dataset d = cohort(1, 400, 3);
        const auto design = LinearCoxDesign::for_dataset(d, false);
        const PartialLikelihood pl(design->matrix(d), d.times(), d.events());
        const auto base = pl.breslow(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(design->columns())));
        double na = 0.0;
        std::size_t k = 0;
        std::vector<std::size_t> order(d.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return d.times()(a) < d.times()(b); });
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (!d.events()[order[i]]) continue;
            na += 1.0 / static_cast<double>(order.size() - i);
            REQUIRE(k < base.times.size());
            CHECK(base.times[k] == d.times()(order[i]));
            CHECK(base.cumhaz[k] * std::exp(-base.offset) == doctest::Approx(na).epsilon(1e-12));
            ++k;
        }

        std::vector<SurvivalRecord> recs;
        for (int i = 0; i < 10; ++i) recs.push_back({std::to_string(i), 1.0 + i, i == 0, {0.1 * i}, {}});
        const Dataset one(recs, {"M1"}, {});
        const PartialLikelihood p1(Eigen::MatrixXd(one.metals()), one.times(), one.events());
        const auto b1 = p1.breslow(Eigen::VectorXd::Zero(1));
        CHECK(b1.cumhaz[0] * std::exp(-b1.offset) == doctest::Approx(0.1));
    }

    TEST_CASE("linear predictor") {
        const auto design = std::make_shared<LinearCoxDesign>(std::vector<std::string>{"M1", "M2"},
                                                              std::vector<std::string>{"C1"}, false);
        CoxFit fit;
        fit.design = design;
        fit.coef = Eigen::Vector3d(1, 0, 0);
        CHECK(cox_linear_predictor(fit, {{0, 0}, {0}}) == 0.0);
        CHECK(cox_linear_predictor(fit, {{2, 5}, {0}}) == 2.0);
    }

    TEST_CASE("interaction estimand on Cox fits") {
        const ScenarioConfig sc = default_scenario(1);
        const Dataset d = cohort(1, 1000, 21);
        const ProfileBasis basis = ProfileBasis::from_population(sc);
        EstimandRequest r;
        r.kind = EstimandKind::interaction_mult;
        r.t_spec = 18.5;
        const CoxModel plain(fit_cox(d, false));
        CHECK(compute_estimand(plain, basis, r).value == 1.0);

        const CoxFit fi = fit_cox(d, true);
        const auto* lin = dynamic_cast<const LinearCoxDesign*>(fi.design.get());
        const double theta = fi.coef(lin->product_column(0, 2));
        const double d0 = basis.metal_percentile(0, 75) - basis.metal_percentile(0, 25);
        const double d2 = basis.metal_percentile(2, 75) - basis.metal_percentile(2, 25);
        CHECK(compute_estimand(CoxModel(fi), basis, r).value == doctest::Approx(std::exp(theta * d0 * d2)).epsilon(1e-12));
    }

    TEST_CASE("heavy smoothing leaves a straight line") {
        const Dataset d = cohort(1, 1000, 4);
        const auto design = std::make_shared<SplineCoxDesign>(d, SplineBasisSpec{});
        const CoxFit fit = fit_cox_psplines_at(d, design, 1e10);
        const ProfileBasis basis = ProfileBasis::from_dataset(d);
        ExposureProfile p = basis.median_profile();
        std::vector<double> x, eta;
        for (int k = 5; k <= 95; k += 5) {
            p.metals[0] = basis.metal_percentile(0, k);
            x.push_back(p.metals[0]);
            eta.push_back(cox_linear_predictor(fit, p));
        }
        const Eigen::Map<Eigen::VectorXd> xv(x.data(), 19), ev(eta.data(), 19);
        Eigen::MatrixXd A(19, 2);
        A.col(0).setOnes();
        A.col(1) = xv;
        const Eigen::VectorXd c = A.colPivHouseholderQr().solve(ev);
        CHECK((A * c - ev).cwiseAbs().maxCoeff() < 1e-3);
    }

    TEST_CASE("smooth of a linear effect covers the true line") {
        const ScenarioConfig sc = default_scenario(1);
        const Dataset d = cohort(1, 1000, 8);
        const CoxFit fit = fit_cox_psplines(d, SplineBasisSpec{});
        const ProfileBasis basis = ProfileBasis::from_dataset(d);
        const Eigen::MatrixXd cov = fit.information.inverse();
        ExposureProfile ref = basis.median_profile(), p = ref;
        int inside = 0;
        for (int k = 5; k <= 95; k += 5) {
            p.metals[0] = basis.metal_percentile(0, k);
            const Eigen::RowVectorXd diff = fit.design->row(p) - fit.design->row(ref);
            const double est = diff.dot(fit.coef);
            const double se = std::sqrt(std::max(0.0, diff.dot(cov * diff.transpose())));
            const double truth = -sc.beta(0) * (p.metals[0] - ref.metals[0]);
            inside += std::abs(est - truth) <= 1.96 * se + 1e-12;
        }
        CHECK(inside >= 17);
    }

    TEST_CASE("scenario 2 log hazard rises with M3") {
        const Dataset d = cohort(2, 1000, 12);
        const CoxFit fit = fit_cox_psplines(d, SplineBasisSpec{});
        const ProfileBasis basis = ProfileBasis::from_dataset(d);
        ExposureProfile lo = basis.median_profile(), hi = lo;
        lo.metals[2] = basis.metal_percentile(2, 5);
        hi.metals[2] = basis.metal_percentile(2, 95);
        CHECK(cox_linear_predictor(fit, hi) > cox_linear_predictor(fit, lo));
    }

    TEST_CASE("no events") {
        ScenarioConfig sc = default_scenario(1);
        sc.n = 50;
        const Dataset d = simulate_cohort(sc).data;
        std::vector<SurvivalRecord> recs;
        for (std::size_t i = 0; i < d.size(); ++i) {
            auto r = d.record(i);
            r.event = false;
            recs.push_back(r);
        }
        CHECK_THROWS_AS(fit_cox(Dataset(recs, d.metal_names(), d.confounder_names()), false), DataError);
    }
}
