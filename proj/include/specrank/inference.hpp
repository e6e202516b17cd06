#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "specrank/bootstrap.hpp"
#include "specrank/data.hpp"
#include "specrank/errors.hpp"
#include "specrank/spectral.hpp"

namespace specrank {

// A confidence interval for the population rank of one item. Ranks are
// 1-based; left-sided intervals extend to n.
struct RankInterval {
    std::uint32_t item = 0;
    std::uint32_t lower = 1;
    std::uint32_t upper = 1;
    double alpha = 0.0;
    Side side = Side::two_sided;
};

struct TestDecision {
    std::string kind;
    bool reject = false;
    double alpha = 0.0;
    double quantile = 0.0;
    std::vector<RankInterval> intervals;
    std::vector<std::uint32_t> set1, set2;  // screening sets for set-valued tests
};

// Point ranks of the estimated scores, 1-based, ties broken by smaller index.
inline std::vector<std::uint32_t> point_ranks(std::span<const double> theta) {
    std::vector<std::uint32_t> rank(theta.size(), 1);
    for (std::size_t m = 0; m < theta.size(); ++m)
        for (std::size_t k = 0; k < theta.size(); ++k)
            if (k != m && (theta[k] > theta[m] || (theta[k] == theta[m] && k < m))) ++rank[m];
    return rank;
}

namespace detail {

// Counting construction: items confidently above m push the lower rank up,
// items confidently below pull the upper rank down.
inline RankInterval rank_interval_from_quantile(const BootstrapContext& ctx,
                                                std::span<const double> theta, std::uint32_t m,
                                                double q, Side side, double alpha) {
    RankInterval r;
    r.item = m;
    r.alpha = alpha;
    r.side = side;
    std::uint32_t above = 0, below = 0;
    for (std::uint32_t k = 0; k < ctx.n; ++k) {
        if (k == m) continue;
        const double margin = ctx.sigma(k, m) * q;
        const double diff = theta[k] - theta[m];
        if (diff > margin) ++above;
        if (diff < -margin) ++below;
    }
    r.lower = 1 + above;
    r.upper = (side == Side::two_sided) ? ctx.n - below : ctx.n;
    return r;
}

} // namespace detail

// Simultaneous rank confidence intervals for the items in M at level 1-alpha.
// spec.side selects two-sided [R_L, R_U] or left-sided [R_L, n] intervals.
inline std::vector<RankInterval> rank_cis(const ComparisonDataset& ds, const SpectralFit& fit,
                                          const std::vector<std::uint32_t>& item_set, double alpha,
                                          BootstrapSpec spec) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0,1)");
    spec.item_set = item_set;
    const BootstrapContext ctx = make_bootstrap_context(ds, fit, spec.grouping);
    const MaxSpec ms{spec.item_set, spec.side};
    std::vector<double> draws = std::move(
        bootstrap_draws(ctx, spec.B, spec.seed, spec.workers, std::span<const MaxSpec>(&ms, 1))[0]);
    std::sort(draws.begin(), draws.end());
    BootstrapResult res;
    res.sorted_draws = std::move(draws);
    const double q = res.quantile(alpha);
    std::vector<RankInterval> out;
    out.reserve(item_set.size());
    for (std::uint32_t m : item_set)
        out.push_back(detail::rank_interval_from_quantile(ctx, fit.theta, m, q, spec.side, alpha));
    return out;
}

// Level-alpha test of H0: rank(m) <= K against rank(m) > K, built on the
// left-sided interval: reject when even the optimistic rank exceeds K.
inline TestDecision test_top_k(const ComparisonDataset& ds, const SpectralFit& fit,
                               std::uint32_t m, std::uint32_t K, double alpha,
                               BootstrapSpec spec) {
    if (K < 1 || K > ds.n_items) throw ParameterError("K must lie in [1, n]");
    spec.side = Side::one_sided;
    TestDecision t;
    t.kind = "top-k";
    t.alpha = alpha;
    t.intervals = rank_cis(ds, fit, {m}, alpha, spec);
    t.reject = t.intervals.front().lower > K;
    return t;
}

// Sure-screening set: every item whose left-sided uniform interval cannot rule
// it out of the top K. Contains the true top-K with probability >= 1 - alpha.
inline std::vector<std::uint32_t> screen_top_k(const ComparisonDataset& ds,
                                               const SpectralFit& fit, std::uint32_t K,
                                               double alpha, BootstrapSpec spec) {
    if (K < 1 || K > ds.n_items) throw ParameterError("K must lie in [1, n]");
    spec.side = Side::one_sided;
    std::vector<std::uint32_t> all(ds.n_items);
    for (std::uint32_t i = 0; i < ds.n_items; ++i) all[i] = i;
    const std::vector<RankInterval> cis = rank_cis(ds, fit, all, alpha, spec);
    std::vector<std::uint32_t> keep;
    for (const RankInterval& r : cis)
        if (r.lower <= K) keep.push_back(r.item);
    return keep;
}

namespace detail {

// Returns a copy of `other` remapped onto `base`'s item indexing. Requires the
// two datasets to describe the same item universe.
inline ComparisonDataset align_universe(const ComparisonDataset& base,
                                        const ComparisonDataset& other) {
    if (base.n_items != other.n_items)
        throw ParameterError("datasets have different item universes (" +
                             std::to_string(base.n_items) + " vs " +
                             std::to_string(other.n_items) + " items)");
    if (base.labels.empty() || other.labels.empty()) return other;
    if (base.labels == other.labels) return other;
    std::unordered_map<std::string, std::uint32_t> base_ids;
    for (std::uint32_t i = 0; i < base.labels.size(); ++i) base_ids.emplace(base.labels[i], i);
    std::vector<std::uint32_t> map(other.n_items);
    for (std::uint32_t i = 0; i < other.n_items; ++i) {
        auto it = base_ids.find(other.labels[i]);
        if (it == base_ids.end())
            throw ParameterError("datasets have different item universes: item '" +
                                 other.labels[i] + "' is missing from the first sample");
        map[i] = it->second;
    }
    ComparisonDataset out = other;
    out.labels = base.labels;
    for (Comparison& c : out.comparisons) {
        for (std::uint32_t& u : c.choice_set) u = map[u];
        c.winner = map[c.winner];
    }
    return out;
}

} // namespace detail

// Two-sample test of H0: the rank of item m agrees across samples. Each sample
// gets a two-sided CI at level 1 - alpha/2 (Bonferroni); reject when disjoint.
// Both samples use the same bootstrap seed, so the test is symmetric in the
// order of its arguments.
inline TestDecision two_sample_item_test(const ComparisonDataset& ds1,
                                         const ComparisonDataset& ds2, std::uint32_t m,
                                         double alpha, BootstrapSpec spec,
                                         FitScheme scheme = FitScheme::SetSize) {
    const ComparisonDataset aligned = detail::align_universe(ds1, ds2);
    spec.side = Side::two_sided;
    const SpectralFit f1 = fit(ds1, scheme);
    const SpectralFit f2 = fit(aligned, scheme);
    const double half = alpha / 2.0;
    TestDecision t;
    t.kind = "two-sample-item";
    t.alpha = alpha;
    const RankInterval a = rank_cis(ds1, f1, {m}, half, spec).front();
    const RankInterval b = rank_cis(aligned, f2, {m}, half, spec).front();
    t.intervals = {a, b};
    t.reject = (a.upper < b.lower) || (b.upper < a.lower);
    return t;
}

// Two-sample test of H0: the two top-K sets coincide. Builds a sure-screening
// set per sample at level 1 - alpha/2; reject when the intersection has fewer
// than K items.
inline TestDecision two_sample_topk_test(const ComparisonDataset& ds1,
                                         const ComparisonDataset& ds2, std::uint32_t K,
                                         double alpha, BootstrapSpec spec,
                                         FitScheme scheme = FitScheme::SetSize) {
    const ComparisonDataset aligned = detail::align_universe(ds1, ds2);
    const SpectralFit f1 = fit(ds1, scheme);
    const SpectralFit f2 = fit(aligned, scheme);
    const double half = alpha / 2.0;
    TestDecision t;
    t.kind = "two-sample-topk";
    t.alpha = alpha;
    t.set1 = screen_top_k(ds1, f1, K, half, spec);
    t.set2 = screen_top_k(aligned, f2, K, half, spec);
    std::size_t common = 0;
    for (std::uint32_t item : t.set1)
        common += std::size_t(std::find(t.set2.begin(), t.set2.end(), item) != t.set2.end());
    t.reject = common < K;
    return t;
}

} // namespace specrank
