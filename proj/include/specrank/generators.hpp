#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "specrank/data.hpp"
#include "specrank/errors.hpp"
#include "specrank/rng.hpp"
#include "specrank/variance.hpp"

namespace specrank {

// Plackett-Luce random hypergraph design: every M-subset of [n] is included
// independently with probability p and, when included, compared L times.
struct PLConfig {
    std::uint32_t n = 0;
    int M = 3;
    double p = 0.0;
    int L = 1;
    std::vector<double> theta_star;
    std::uint64_t seed = 0;
};

// Heterogeneous fixed-graph design: set sizes drawn from a menu, sets sampled
// uniformly inside a stratum of the top-scored items, winners drawn from the
// Luce probabilities.
struct FixedGraphConfig {
    std::uint32_t n = 0;
    std::uint64_t total_comparisons = 0;
    std::vector<std::uint32_t> size_menu{2, 3, 4, 5};
    struct Stratum {
        double fraction;      // share of comparisons drawn in this stratum
        double top_fraction;  // the stratum is the top share of items by theta*
    };
    std::vector<Stratum> strata{{0.2, 0.2}, {0.2, 0.5}, {0.6, 1.0}};
    std::vector<double> theta_star;
    // Optional: scores that define the stratum ordering when it should not
    // follow theta_star (two-sample alternatives keep both samples on the
    // design anchored to the base scores). Empty means order by theta_star.
    std::vector<double> stratum_scores;
    std::uint64_t seed = 0;
};

// Descending uniform grid on [-2, 2]; exactly mean zero for every n >= 2.
inline std::vector<double> score_grid(std::uint32_t n) {
    std::vector<double> theta(n);
    for (std::uint32_t i = 0; i < n; ++i) theta[i] = 2.0 - 4.0 * double(i) / double(n - 1);
    return theta;
}

namespace detail {

inline std::uint32_t draw_luce(Rng& rng, std::span<const std::uint32_t> items,
                               std::span<const double> expt) {
    double total = 0.0;
    for (std::uint32_t u : items) total += expt[u];
    double u = rng.uniform() * total;
    for (std::uint32_t item : items) {
        u -= expt[item];
        if (u < 0.0) return item;
    }
    return items.back();
}

} // namespace detail

// Sequential Luce sampling without replacement: a full PL ranking of `items`.
inline FullRanking sample_pl_ranking(Rng& rng, std::span<const std::uint32_t> items,
                                     std::span<const double> expt) {
    std::vector<std::uint32_t> pool(items.begin(), items.end());
    FullRanking r;
    r.ranked_items.reserve(pool.size());
    while (pool.size() > 1) {
        const std::uint32_t chosen = detail::draw_luce(rng, pool, expt);
        r.ranked_items.push_back(chosen);
        pool.erase(std::find(pool.begin(), pool.end(), chosen));
    }
    r.ranked_items.push_back(pool.front());
    return r;
}

inline ComparisonDataset gen_fixed_heterogeneous(const FixedGraphConfig& cfg) {
    if (cfg.n < 2) throw ParameterError("fixed-graph design needs at least 2 items");
    if (cfg.theta_star.size() != cfg.n)
        throw ParameterError("theta_star must have length n");
    if (cfg.total_comparisons == 0) throw ParameterError("total_comparisons must be positive");
    double frac = 0.0;
    for (const auto& s : cfg.strata) frac += s.fraction;
    if (std::fabs(frac - 1.0) > 1e-9)
        throw ParameterError("stratum fractions must sum to 1");

    // Items ordered by score, best first, ties broken by index.
    const std::vector<double>& ranking_scores =
        cfg.stratum_scores.empty() ? cfg.theta_star : cfg.stratum_scores;
    if (ranking_scores.size() != cfg.n)
        throw ParameterError("stratum_scores must have length n");
    std::vector<std::uint32_t> order(cfg.n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return ranking_scores[a] > ranking_scores[b];
    });

    std::vector<double> expt(cfg.n);
    for (std::uint32_t i = 0; i < cfg.n; ++i) expt[i] = std::exp(cfg.theta_star[i]);

    std::vector<std::uint64_t> boundaries;  // cumulative comparison counts per stratum
    std::vector<std::uint32_t> stratum_sizes;
    double cum = 0.0;
    for (const auto& s : cfg.strata) {
        cum += s.fraction;
        boundaries.push_back(std::uint64_t(std::floor(cum * double(cfg.total_comparisons) + 0.5)));
        const auto size = std::uint32_t(std::llround(s.top_fraction * double(cfg.n)));
        if (size < 2)
            throw GenerationError("stratum covering the top " + std::to_string(s.top_fraction) +
                                  " of items has fewer than 2 items");
        stratum_sizes.push_back(size);
    }
    boundaries.back() = cfg.total_comparisons;

    Rng rng(derive_seed(cfg.seed, 0x66697865ULL));
    ComparisonDataset ds;
    ds.n_items = cfg.n;
    ds.comparisons.reserve(cfg.total_comparisons);
    std::size_t stratum = 0;
    for (std::uint64_t l = 0; l < cfg.total_comparisons; ++l) {
        while (l >= boundaries[stratum]) ++stratum;
        const std::uint32_t pool = stratum_sizes[stratum];
        const std::uint32_t size = cfg.size_menu[rng.below(std::uint32_t(cfg.size_menu.size()))];
        if (size > pool)
            throw GenerationError("stratum of " + std::to_string(pool) +
                                  " items cannot host a comparison of size " +
                                  std::to_string(size));
        Comparison c;
        c.choice_set.reserve(size);
        while (c.choice_set.size() < size) {
            const std::uint32_t cand = order[rng.below(pool)];
            if (std::find(c.choice_set.begin(), c.choice_set.end(), cand) == c.choice_set.end())
                c.choice_set.push_back(cand);
        }
        c.winner = detail::draw_luce(rng, c.choice_set, expt);
        ds.comparisons.push_back(std::move(c));
    }
    return ds;
}

struct PLSample {
    std::vector<std::vector<std::uint32_t>> edges;  // sampled M-subsets, lexicographic
    std::vector<FullRanking> rankings;              // L consecutive rankings per edge
    bool sparse_graph_warning = false;

    std::vector<Triple> triples() const {
        std::vector<Triple> out;
        out.reserve(edges.size());
        for (const auto& e : edges) {
            if (e.size() != 3)
                throw ParameterError("edge set is not 3-uniform");
            out.push_back(Triple{e[0], e[1], e[2]});
        }
        return out;
    }
};

inline PLSample gen_pl_random(const PLConfig& cfg) {
    if (cfg.n < 2 || cfg.M < 2 || std::uint32_t(cfg.M) > cfg.n)
        throw ParameterError("PL design requires 2 <= M <= n");
    if (!(cfg.p > 0.0 && cfg.p <= 1.0)) throw ParameterError("p must lie in (0, 1]");
    if (cfg.L < 1) throw ParameterError("L must be >= 1");
    if (cfg.theta_star.size() != cfg.n) throw ParameterError("theta_star must have length n");

    std::vector<double> expt(cfg.n);
    for (std::uint32_t i = 0; i < cfg.n; ++i) expt[i] = std::exp(cfg.theta_star[i]);

    PLSample out;
    {
        // Expected per-item degree below polylog(n) gives too little signal.
        double log_choose = 0.0;
        for (int r = 1; r < cfg.M; ++r)
            log_choose += std::log(double(cfg.n - r)) - std::log(double(r));
        const double expected = std::exp(log_choose) * cfg.p;
        const double ln = std::log(std::max<double>(cfg.n, 3));
        out.sparse_graph_warning = expected < ln * ln;
    }

    Rng rng(derive_seed(cfg.seed, 0x706c67656eULL));
    std::vector<std::uint32_t> combo(cfg.M);
    std::iota(combo.begin(), combo.end(), 0u);
    for (;;) {
        if (rng.uniform() < cfg.p) out.edges.push_back(combo);
        // next lexicographic M-combination of [0, n)
        int pos = cfg.M - 1;
        while (pos >= 0 && combo[pos] == cfg.n - std::uint32_t(cfg.M - pos)) --pos;
        if (pos < 0) break;
        ++combo[pos];
        for (int q = pos + 1; q < cfg.M; ++q) combo[q] = combo[q - 1] + 1;
    }
    if (out.edges.empty())
        throw GenerationError("no comparison tuple was sampled; increase p or n");

    out.rankings.reserve(out.edges.size() * std::size_t(cfg.L));
    for (const auto& edge : out.edges)
        for (int rep = 0; rep < cfg.L; ++rep)
            out.rankings.push_back(sample_pl_ranking(rng, edge, expt));
    return out;
}

// Closed-form 3-way variance under a PLConfig; only M = 3 is supported.
inline VarianceReport var_j_pl_random(const PLConfig& cfg, std::span<const Triple> edges,
                                      std::span<const double> theta, const WeightScheme& scheme,
                                      double d) {
    if (cfg.M != 3)
        throw ParameterError("closed-form PL variance requires M = 3; break larger rankings "
                             "and use the fixed-graph variance instead");
    return var_j_pl_random(cfg.n, edges, theta, scheme, cfg.L, d);
}

} // namespace specrank
