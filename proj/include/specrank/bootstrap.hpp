#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "specrank/data.hpp"
#include "specrank/errors.hpp"
#include "specrank/parallel.hpp"
#include "specrank/rng.hpp"
#include "specrank/spectral.hpp"
#include "specrank/variance.hpp"

namespace specrank {

enum class Side { two_sided, one_sided };
enum class Grouping { per_comparison, per_hyperedge };

struct BootstrapSpec {
    std::vector<std::uint32_t> item_set;  // the set M of items under inference
    Side side = Side::two_sided;
    int B = 500;
    std::uint64_t seed = 0;
    Grouping grouping = Grouping::per_comparison;
    int workers = 1;
};

// Draws of the multiplier statistic, stored by draw index so assembly order
// never depends on scheduling.
struct BootstrapResult {
    std::vector<double> draws;
    std::vector<double> sorted_draws;
    BootstrapSpec spec;

    // Conservative empirical quantile: the ceil((1-alpha) B)-th order statistic.
    double quantile(double alpha) const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0,1)");
        const auto b = std::size_t(sorted_draws.size());
        std::size_t idx = std::size_t(std::ceil((1.0 - alpha) * double(b)));
        idx = std::min(std::max<std::size_t>(idx, 1), b);
        return sorted_draws[idx - 1];
    }
};

// Draw-invariant state shared by all bootstrap draws on one (dataset, fit)
// pair: plug-in J contributions, per-item variances, and the multiplier
// grouping. sigma values are cached per item since sigma_km^2 = var_k + var_m.
struct BootstrapContext {
    const ComparisonDataset* ds = nullptr;
    std::uint32_t n = 0;
    double d = 0.0;
    JContributions j;
    std::vector<double> var_item;
    std::vector<std::uint32_t> multiplier_index;  // per comparison
    std::uint32_t n_multipliers = 0;

    double sigma(std::uint32_t k, std::uint32_t m) const {
        return std::sqrt(var_item[k] + var_item[m]);
    }
};

inline BootstrapContext make_bootstrap_context(const ComparisonDataset& ds,
                                               const SpectralFit& fit,
                                               Grouping grouping = Grouping::per_comparison) {
    BootstrapContext ctx;
    ctx.ds = &ds;
    ctx.n = ds.n_items;
    ctx.d = fit.d;
    ctx.j = j_contributions(ds, fit.theta, fit.scheme, fit.d);
    ctx.var_item = var_j_fixed(ds, fit.theta, fit.scheme, fit.d).var_j;
    const std::size_t m = ds.comparisons.size();
    ctx.multiplier_index.resize(m);
    if (grouping == Grouping::per_hyperedge) {
        for (std::size_t l = 0; l < m; ++l) ctx.multiplier_index[l] = ds.group_of(l);
        ctx.n_multipliers = ds.group_count();
    } else {
        for (std::size_t l = 0; l < m; ++l) ctx.multiplier_index[l] = std::uint32_t(l);
        ctx.n_multipliers = std::uint32_t(m);
    }
    return ctx;
}

// One maximum statistic to evaluate per draw. Several MaxSpecs can share the
// multipliers of a single pass, which the Monte Carlo harness exploits.
struct MaxSpec {
    std::vector<std::uint32_t> items;
    Side side = Side::two_sided;
};

namespace detail {

struct PreparedMax {
    std::vector<std::uint32_t> items;
    Side side;
    std::vector<double> inv_dsigma;  // |items| * n, 0 on the diagonal slot
};

inline PreparedMax prepare_max(const BootstrapContext& ctx, const MaxSpec& spec) {
    if (spec.items.empty()) throw ParameterError("item set M must be nonempty");
    PreparedMax p;
    p.items = spec.items;
    p.side = spec.side;
    p.inv_dsigma.assign(spec.items.size() * ctx.n, 0.0);
    for (std::size_t a = 0; a < spec.items.size(); ++a) {
        const std::uint32_t m = spec.items[a];
        if (m >= ctx.n) throw ParameterError("item " + std::to_string(m) + " out of range");
        for (std::uint32_t k = 0; k < ctx.n; ++k) {
            if (k == m) continue;
            const double s = ctx.sigma(k, m);
            if (!(s > 0.0))
                throw NumericError("sigma_km vanished for pair (" + std::to_string(k) + "," +
                                   std::to_string(m) + ")");
            p.inv_dsigma[a * ctx.n + k] = 1.0 / (ctx.d * s);
        }
    }
    return p;
}

inline double evaluate_max(const PreparedMax& p, std::span<const double> s, std::uint32_t n) {
    double g = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < p.items.size(); ++a) {
        const double sm = s[p.items[a]];
        const double* inv = &p.inv_dsigma[a * n];
        if (p.side == Side::two_sided) {
            for (std::uint32_t k = 0; k < n; ++k) {
                const double v = std::fabs((s[k] - sm) * inv[k]);
                if (v > g) g = v;
            }
        } else {
            for (std::uint32_t k = 0; k < n; ++k) {
                if (k == p.items[a]) continue;
                const double v = (s[k] - sm) * inv[k];
                if (v > g) g = v;
            }
        }
    }
    return g;
}

} // namespace detail

// Runs B multiplier-bootstrap draws and evaluates every MaxSpec on shared
// multipliers. Draw b uses its own stream derived from (seed, b), so results
// are identical for any worker count.
inline std::vector<std::vector<double>> bootstrap_draws(const BootstrapContext& ctx, int B,
                                                        std::uint64_t seed, int workers,
                                                        std::span<const MaxSpec> specs) {
    if (B < 100) throw ParameterError("bootstrap draw count B must be at least 100");
    std::vector<detail::PreparedMax> prepared;
    prepared.reserve(specs.size());
    for (const MaxSpec& s : specs) prepared.push_back(detail::prepare_max(ctx, s));

    std::vector<std::vector<double>> draws(specs.size(), std::vector<double>(std::size_t(B)));
    const std::size_t n_cmp = ctx.ds->comparisons.size();
    parallel_for(std::size_t(B), workers, [&](std::size_t b) {
        Rng rng(derive_seed(seed, b));
        std::vector<double> omega(ctx.n_multipliers);
        for (double& w : omega) w = rng.normal();
        std::vector<double> s(ctx.n, 0.0);
        for (std::size_t l = 0; l < n_cmp; ++l) {
            const double w = omega[ctx.multiplier_index[l]];
            ctx.j.for_each_in_comparison(l, [&](std::uint32_t i, double v) { s[i] += v * w; });
        }
        for (std::size_t q = 0; q < prepared.size(); ++q)
            draws[q][b] = detail::evaluate_max(prepared[q], s, ctx.n);
    });
    return draws;
}

inline BootstrapResult run_bootstrap(const ComparisonDataset& ds, const SpectralFit& fit,
                                     const BootstrapSpec& spec) {
    const BootstrapContext ctx = make_bootstrap_context(ds, fit, spec.grouping);
    const MaxSpec ms{spec.item_set, spec.side};
    BootstrapResult r;
    r.spec = spec;
    r.draws = std::move(
        bootstrap_draws(ctx, spec.B, spec.seed, spec.workers, std::span<const MaxSpec>(&ms, 1))[0]);
    r.sorted_draws = r.draws;
    std::sort(r.sorted_draws.begin(), r.sorted_draws.end());
    return r;
}

} // namespace specrank
