#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "specrank/bootstrap.hpp"
#include "specrank/generators.hpp"
#include "test_helpers.hpp"

using namespace specrank;

namespace {

ComparisonDataset demo_dataset(std::uint32_t n = 12, int comparisons = 900,
                               std::uint64_t seed = 5150) {
    FixedGraphConfig cfg;
    cfg.n = n;
    cfg.total_comparisons = std::uint64_t(comparisons);
    cfg.theta_star = score_grid(n);
    cfg.seed = seed;
    cfg.size_menu = {2, 3, 4};
    cfg.strata = {{1.0, 1.0}};
    return gen_fixed_heterogeneous(cfg);
}

BootstrapSpec demo_spec(std::vector<std::uint32_t> items, Side side = Side::two_sided) {
    BootstrapSpec s;
    s.item_set = std::move(items);
    s.side = side;
    s.B = 200;
    s.seed = 99;
    return s;
}

} // namespace

TEST_CASE("quantile is the conservative order statistic") {
    BootstrapResult r;
    for (int i = 1; i <= 100; ++i) r.sorted_draws.push_back(double(i));
    CHECK(r.quantile(0.05) == 95.0);
    CHECK(r.quantile(0.5) == 50.0);
    CHECK(r.quantile(0.999) == 1.0);
    CHECK_THROWS_AS(r.quantile(0.0), ParameterError);
    CHECK_THROWS_AS(r.quantile(1.0), ParameterError);
}

TEST_CASE("all-zero draws give a zero critical value at every level") {
    BootstrapResult r;
    r.sorted_draws.assign(150, 0.0);
    for (double a : {0.01, 0.05, 0.2, 0.5, 0.9}) CHECK(r.quantile(a) == 0.0);
}

TEST_CASE("quantile is nonincreasing in alpha") {
    const ComparisonDataset ds = demo_dataset();
    const SpectralFit f = fit(ds, FitScheme::SetSize);
    const BootstrapResult r = run_bootstrap(ds, f, demo_spec({0, 5}));
    double prev = std::numeric_limits<double>::infinity();
    for (double a = 0.02; a < 1.0; a += 0.02) {
        const double q = r.quantile(a);
        CHECK(q <= prev);
        prev = q;
    }
}

TEST_CASE("same seed and spec give identical draws for any worker count") {
    const ComparisonDataset ds = demo_dataset();
    const SpectralFit f = fit(ds, FitScheme::SetSize);
    BootstrapSpec one = demo_spec({1, 4, 7});
    BootstrapSpec eight = one;
    eight.workers = 8;
    const BootstrapResult a = run_bootstrap(ds, f, one);
    const BootstrapResult b = run_bootstrap(ds, f, one);
    const BootstrapResult c = run_bootstrap(ds, f, eight);
    CHECK(a.draws == b.draws);
    CHECK(a.draws == c.draws);
}

TEST_CASE("two-sided draws dominate one-sided draws on shared multipliers") {
    const ComparisonDataset ds = demo_dataset();
    const SpectralFit f = fit(ds, FitScheme::SetSize);
    const BootstrapContext ctx = make_bootstrap_context(ds, f);
    const std::vector<MaxSpec> specs{{{2, 9}, Side::two_sided}, {{2, 9}, Side::one_sided}};
    const auto draws = bootstrap_draws(ctx, 300, 7, 1, specs);
    REQUIRE(draws[0].size() == draws[1].size());
    for (std::size_t b = 0; b < draws[0].size(); ++b) {
        CHECK(draws[0][b] >= draws[1][b]);
        CHECK(draws[0][b] >= 0.0);
    }
}

TEST_CASE("enlarging the item set never shrinks a draw") {
    const ComparisonDataset ds = demo_dataset();
    const SpectralFit f = fit(ds, FitScheme::SetSize);
    const BootstrapContext ctx = make_bootstrap_context(ds, f);
    const std::vector<MaxSpec> specs{{{3}, Side::two_sided}, {{3, 6, 11}, Side::two_sided}};
    const auto draws = bootstrap_draws(ctx, 250, 31, 1, specs);
    for (std::size_t b = 0; b < draws[0].size(); ++b) CHECK(draws[1][b] >= draws[0][b]);
}

TEST_CASE("grouped mode with singleton groups equals per-comparison mode") {
    ComparisonDataset ds = demo_dataset(10, 500, 77);
    ds.groups.resize(ds.comparisons.size());
    std::iota(ds.groups.begin(), ds.groups.end(), 0u);
    const SpectralFit f = fit(ds, FitScheme::SetSize);
    BootstrapSpec per_cmp = demo_spec({0, 9});
    BootstrapSpec grouped = per_cmp;
    grouped.grouping = Grouping::per_hyperedge;
    const BootstrapResult a = run_bootstrap(ds, f, per_cmp);
    const BootstrapResult b = run_bootstrap(ds, f, grouped);
    CHECK(a.draws == b.draws);
}

TEST_CASE("grouped mode shares one multiplier across a ranking's breakings") {
    // two rankings of three items; per-hyperedge mode has 2 multipliers
    std::vector<FullRanking> rankings{{{0, 1, 2}}, {{2, 1, 0}}};
    for (int extra = 0; extra < 30; ++extra) {
        rankings.push_back({{extra % 3 == 0 ? 0u : 1u, extra % 3 == 0 ? 1u : 0u, 2u}});
        rankings.push_back({{2u, std::uint32_t(extra % 2), std::uint32_t(1 - extra % 2)}});
    }
    const ComparisonDataset ds = dataset_from_rankings(rankings, 3);
    const SpectralFit f = fit(ds, FitScheme::SetSize);
    const BootstrapContext grouped = make_bootstrap_context(ds, f, Grouping::per_hyperedge);
    const BootstrapContext plain = make_bootstrap_context(ds, f, Grouping::per_comparison);
    CHECK(grouped.n_multipliers == ds.group_count());
    CHECK(plain.n_multipliers == ds.comparisons.size());
    CHECK(grouped.n_multipliers < plain.n_multipliers);
    // draws differ between the two modes on the same seed
    const MaxSpec spec{{0, 2}, Side::two_sided};
    const auto da = bootstrap_draws(grouped, 150, 5, 1, std::span<const MaxSpec>(&spec, 1));
    const auto db = bootstrap_draws(plain, 150, 5, 1, std::span<const MaxSpec>(&spec, 1));
    CHECK(da[0] != db[0]);
}

TEST_CASE("parameter validation") {
    const ComparisonDataset ds = demo_dataset(8, 300, 4);
    const SpectralFit f = fit(ds, FitScheme::SetSize);
    SECTION("empty item set") {
        CHECK_THROWS_AS(run_bootstrap(ds, f, demo_spec({})), ParameterError);
    }
    SECTION("item out of range") {
        CHECK_THROWS_AS(run_bootstrap(ds, f, demo_spec({42})), ParameterError);
    }
    SECTION("too few draws") {
        BootstrapSpec s = demo_spec({0});
        s.B = 50;
        CHECK_THROWS_AS(run_bootstrap(ds, f, s), ParameterError);
    }
}

TEST_CASE("draw distribution calibrates the maximum statistic") {
    // With B draws from the same law as the statistic, the exceedance of the
    // level-alpha critical value should be near alpha. Smoke-scale version of
    // the coverage contract; the acceptance suite runs the real one.
    const std::uint32_t n = 15;
    const std::vector<double> truth = score_grid(n);
    const std::vector<std::uint32_t> items{0, 7, 14};
    int exceed = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        FixedGraphConfig cfg;
        cfg.n = n;
        cfg.total_comparisons = 2500;
        cfg.theta_star = truth;
        cfg.seed = derive_seed(31337, std::uint64_t(r));
        cfg.size_menu = {2, 3, 4};
        cfg.strata = {{1.0, 1.0}};
        const ComparisonDataset ds = gen_fixed_heterogeneous(cfg);
        const SpectralFit f = fit(ds, FitScheme::SetSize);
        const BootstrapContext ctx = make_bootstrap_context(ds, f);
        const MaxSpec spec{items, Side::two_sided};
        auto draws = bootstrap_draws(ctx, 200, derive_seed(555, std::uint64_t(r)), 1,
                                     std::span<const MaxSpec>(&spec, 1));
        std::sort(draws[0].begin(), draws[0].end());
        BootstrapResult res;
        res.sorted_draws = std::move(draws[0]);
        double t = 0.0;
        for (std::uint32_t m : items)
            for (std::uint32_t k = 0; k < n; ++k) {
                if (k == m) continue;
                const double dev = (f.theta[k] - f.theta[m]) - (truth[k] - truth[m]);
                t = std::max(t, std::fabs(dev / ctx.sigma(k, m)));
            }
        exceed += (t > res.quantile(0.05));
    }
    // alpha = 0.05 within 5 binomial sigmas (plus approximation slack)
    CHECK(double(exceed) / reps < 0.05 + 5 * 0.0155 + 0.02);
}
