#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "specrank/generators.hpp"
#include "specrank/mle.hpp"
#include "specrank/spectral.hpp"

using namespace specrank;

TEST_CASE("pairwise MLE recovers the closed form") {
    // a single pair with w wins out of L: theta_0 - theta_1 = log(w/(L-w))
    const int L = 10, w = 7;
    std::vector<FullRanking> rankings;
    for (int l = 0; l < L; ++l) rankings.push_back({l < w ? std::vector<std::uint32_t>{0, 1}
                                                          : std::vector<std::uint32_t>{1, 0}});
    const std::vector<double> theta = mle_pl(rankings, 2, 1e-10);
    CHECK(theta[0] - theta[1] == Catch::Approx(std::log(double(w) / (L - w))).margin(1e-8));
    CHECK(theta[0] + theta[1] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("identical rankings are rejected as unrankable") {
    std::vector<FullRanking> rankings(20, FullRanking{{0, 1, 2}});
    CHECK_THROWS_AS(mle_pl(rankings, 3), FitError);
}

TEST_CASE("analytic gradient matches finite differences") {
    PLConfig cfg;
    cfg.n = 8;
    cfg.M = 3;
    cfg.p = 0.6;
    cfg.L = 2;
    cfg.theta_star = score_grid(8);
    cfg.seed = 99;
    const PLSample sample = gen_pl_random(cfg);
    const ComparisonDataset ds = dataset_from_rankings(sample.rankings, 8);

    Rng rng(555);
    const double h = 1e-6;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> theta(8);
        for (double& v : theta) v = (rng.uniform() - 0.5) * 2.0;
        const std::vector<double> g = pl_score_gradient(ds, theta);
        double gsum = 0.0;
        for (std::uint32_t i = 0; i < 8; ++i) {
            std::vector<double> up = theta, dn = theta;
            up[i] += h;
            dn[i] -= h;
            const double fd = (pl_log_likelihood(ds, up) - pl_log_likelihood(ds, dn)) / (2 * h);
            const double scale = std::max(1.0, std::fabs(g[i]));
            CHECK(std::fabs(g[i] - fd) / scale < 1e-5);
            gsum += g[i];
        }
        CHECK(gsum == Catch::Approx(0.0).margin(1e-9));  // shift invariance
    }
}

TEST_CASE("the returned point has a tiny gradient") {
    PLConfig cfg;
    cfg.n = 10;
    cfg.M = 3;
    cfg.p = 0.5;
    cfg.L = 3;
    cfg.theta_star = score_grid(10);
    cfg.seed = 4;
    const PLSample sample = gen_pl_random(cfg);
    const ComparisonDataset ds = dataset_from_rankings(sample.rankings, 10);
    const std::vector<double> theta = mle_pl(sample.rankings, 10, 1e-8);
    const std::vector<double> g = pl_score_gradient(ds, theta);
    for (double v : g) CHECK(std::fabs(v) <= 1e-8);
}

TEST_CASE("warm and cold starts agree") {
    PLConfig cfg;
    cfg.n = 9;
    cfg.M = 3;
    cfg.p = 0.5;
    cfg.L = 4;
    cfg.theta_star = score_grid(9);
    cfg.seed = 17;
    const PLSample sample = gen_pl_random(cfg);
    const ComparisonDataset ds = dataset_from_rankings(sample.rankings, 9);
    const std::vector<double> warm_init = fit(ds, FitScheme::TwoStep).theta;
    const std::vector<double> cold = mle_pl(sample.rankings, 9, 1e-10);
    const std::vector<double> warm = mle_pl(sample.rankings, 9, 1e-10, warm_init);
    for (std::uint32_t i = 0; i < 9; ++i)
        CHECK(cold[i] == Catch::Approx(warm[i]).margin(1e-7));
}

TEST_CASE("two-step spectral tracks the MLE closely") {
    PLConfig cfg;
    cfg.n = 12;
    cfg.M = 3;
    cfg.p = 0.6;
    cfg.L = 10;
    cfg.theta_star = score_grid(12);
    cfg.seed = 23;
    const PLSample sample = gen_pl_random(cfg);
    const ComparisonDataset ds = dataset_from_rankings(sample.rankings, 12);
    const std::vector<double> two_step = fit(ds, FitScheme::TwoStep).theta;
    const std::vector<double> mle = mle_pl(sample.rankings, 12, 1e-9, two_step);
    double diff = 0.0, err = 0.0;
    for (std::uint32_t i = 0; i < 12; ++i) {
        diff += (two_step[i] - mle[i]) * (two_step[i] - mle[i]);
        err += (mle[i] - cfg.theta_star[i]) * (mle[i] - cfg.theta_star[i]);
    }
    CHECK(std::sqrt(diff) < 0.25 * std::sqrt(err));  // much closer to MLE than to truth
}
