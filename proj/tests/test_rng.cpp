#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "specrank/rng.hpp"

using namespace specrank;

TEST_CASE("streams are deterministic and seed-separated") {
    Rng a(derive_seed(7, 0)), b(derive_seed(7, 0)), c(derive_seed(7, 1));
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next_u64();
        all_equal = all_equal && (va == b.next_u64());
        any_diff = any_diff || (va != c.next_u64());
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("uniform stays in range and below is unbiased enough") {
    Rng rng(123);
    std::vector<std::uint64_t> buckets(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        ++buckets[rng.below(7)];
    }
    for (std::uint64_t b : buckets) {
        // 5 sigma band around 10000 for Binomial(70000, 1/7)
        CHECK(b > 10000 - 5 * 92);
        CHECK(b < 10000 + 5 * 92);
    }
}

TEST_CASE("ziggurat normals match the standard normal law") {
    Rng rng(20240907);
    const int n = 200000;
    std::vector<double> xs(n);
    double mean = 0.0;
    for (double& x : xs) {
        x = rng.normal();
        mean += x;
    }
    mean /= n;
    double var = 0.0, skew = 0.0, kurt = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        var += d * d;
        skew += d * d * d;
        kurt += d * d * d * d;
    }
    var /= n;
    skew /= n * std::pow(var, 1.5);
    kurt /= n * var * var;
    CHECK(std::fabs(mean) < 0.01);
    CHECK(std::fabs(var - 1.0) < 0.02);
    CHECK(std::fabs(skew) < 0.03);
    CHECK(std::fabs(kurt - 3.0) < 0.08);

    // Kolmogorov-Smirnov distance against Phi; 1.36/sqrt(n) ~ 0.003 at 5%.
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double phi = 0.5 * std::erfc(-xs[i] / std::sqrt(2.0));
        ks = std::max(ks, std::fabs(phi - double(i + 1) / n));
        ks = std::max(ks, std::fabs(phi - double(i) / n));
    }
    CHECK(ks < 0.006);

    // Tail mass beyond 1.96 and 3.0.
    const auto beyond = [&](double t) {
        return double(xs.end() - std::lower_bound(xs.begin(), xs.end(), t)) / n;
    };
    CHECK(beyond(1.96) == Catch::Approx(0.025).margin(0.002));
    CHECK(beyond(3.0) == Catch::Approx(0.00135).margin(0.0005));
}
