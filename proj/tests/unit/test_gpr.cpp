#include <doctest.h>

#include <cmath>

#include "mixsurv/gpr.hpp"
#include "mixsurv/stats.hpp"

using namespace mixsurv;

TEST_SUITE("gpr") {
    TEST_CASE("median heuristic on small sets") {
        Eigen::MatrixXd two(2, 2);
        two << 0, 0, 2, 0;
        CHECK(median_heuristic_rho(two, 1) == 4.0);
        for (int k : {2, 3, 5}) {
            Eigen::MatrixXd rep(2 * k, 2);
            for (int i = 0; i < k; ++i) {
                rep.row(2 * i) = two.row(0);
                rep.row(2 * i + 1) = two.row(1);
            }
            CHECK(median_heuristic_rho(rep, 1) == 4.0);
        }
        Eigen::MatrixXd same = Eigen::MatrixXd::Ones(4, 2);
        CHECK_THROWS_AS(median_heuristic_rho(same, 1), DataError);
    }

    TEST_CASE("median heuristic on standard normal features") {
        Rng rng = make_stream(2, {0x47});
        Eigen::MatrixXd x(10000, 10);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
        const BandwidthSummary b = median_heuristic(x, 5);
        CHECK(b.rows_used == 2000);
        // Squared distances are 2 * chi-square(10): mean 20, median 2 * 9.3418.
        CHECK(std::abs(b.rho - 18.6836) <= 0.5);
        CHECK(b.q10 < b.rho);
        CHECK(b.q90 > b.rho);
        CHECK(median_heuristic(x, 5).rho == b.rho);
    }

    TEST_CASE("weights") {
        Eigen::MatrixXd x(3, 1);
        x << 0, 1000, 2000;
        const Eigen::Vector3d y(0.25, 1, 0);
        const KernelModel far(x, y, 1e-4);
        bool fallback = false;
        const Eigen::VectorXd w = far.weights(Eigen::VectorXd::Zero(1), &fallback);
        CHECK(w(0) == doctest::Approx(1.0));
        CHECK(far.predict(Eigen::VectorXd::Zero(1)) == doctest::Approx(0.25));

        Rng rng = make_stream(3, {0x48});
        Eigen::MatrixXd z(500, 3);
        for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = standard_normal(rng);
        const KernelModel ones(z, Eigen::VectorXd::Ones(500), std::uint64_t{7});
        for (int q = 0; q < 10; ++q) {
            Eigen::VectorXd v(3);
            for (auto& e : v) e = 3.0 * standard_normal(rng);
            CHECK(ones.weights(v).sum() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(ones.predict(v) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    TEST_CASE("uninformative features recover the base rate") {
        Rng rng = make_stream(4, {0x49});
        Eigen::MatrixXd x(100000, 3);
        Eigen::VectorXd y(100000);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = standard_normal(rng);
            y(i) = uniform01(rng) < 0.3;
        }
        const KernelModel m(x, y, std::uint64_t{11});
        for (int q = 0; q < 5; ++q) {
            Eigen::VectorXd v(3);
            for (auto& e : v) e = standard_normal(rng);
            CHECK(std::abs(m.predict(v) - 0.3) <= 0.01);
        }
    }

    TEST_CASE("zero-variance feature") {
        Eigen::MatrixXd x(4, 2);
        x << 1, 0, 2, 0, 3, 0, 4, 0;
        CHECK_THROWS_AS(KernelModel(x, Eigen::VectorXd::Zero(4), std::uint64_t{1}), DataError);
    }
}
