#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "specrank/data.hpp"
#include "specrank/diagnostics.hpp"
#include "specrank/errors.hpp"

namespace specrank {

// Plackett-Luce log-likelihood of the selection events in `ds` at theta. For a
// dataset built by multi-level breaking this equals the full-ranking PL
// likelihood.
inline double pl_log_likelihood(const ComparisonDataset& ds, std::span<const double> theta) {
    std::vector<double> expt(ds.n_items);
    for (std::uint32_t i = 0; i < ds.n_items; ++i) expt[i] = std::exp(theta[i]);
    double ll = 0.0;
    for (const Comparison& c : ds.comparisons) {
        double s = 0.0;
        for (std::uint32_t u : c.choice_set) s += expt[u];
        ll += theta[c.winner] - std::log(s);
    }
    return ll;
}

// Gradient of the PL log-likelihood; component sums vanish, so gradient steps
// stay on the mean-zero subspace.
inline std::vector<double> pl_score_gradient(const ComparisonDataset& ds,
                                             std::span<const double> theta) {
    std::vector<double> expt(ds.n_items);
    for (std::uint32_t i = 0; i < ds.n_items; ++i) expt[i] = std::exp(theta[i]);
    std::vector<double> g(ds.n_items, 0.0);
    for (const Comparison& c : ds.comparisons) {
        double s = 0.0;
        for (std::uint32_t u : c.choice_set) s += expt[u];
        for (std::uint32_t u : c.choice_set) g[u] -= expt[u] / s;
        g[c.winner] += 1.0;
    }
    return g;
}

// Maximum-likelihood PL scores from full rankings: gradient ascent with a
// backtracking (Armijo) line search on the mean-zero subspace, run until the
// gradient infinity-norm drops to tol. `init` is a starting point only; the
// optimum is unique whenever the broken win-graph is strongly connected.
inline std::vector<double> mle_pl(const std::vector<FullRanking>& rankings, std::uint32_t n,
                                  double tol = 1e-8, std::vector<double> init = {},
                                  long max_iter = 100000) {
    if (rankings.empty()) throw ValidationError("no rankings given");
    const ComparisonDataset ds = dataset_from_rankings(rankings, n);
    {
        const GraphDiagnostics diag = check_rankability(ds);
        if (!diag.rankable())
            throw FitError("MLE requires rankable data: " + diag.failures.front());
    }

    std::vector<double> theta;
    if (init.empty()) {
        theta.assign(n, 0.0);
    } else {
        if (init.size() != n) throw ParameterError("init must have length n");
        theta = std::move(init);
        double mean = 0.0;
        for (double v : theta) mean += v;
        mean /= double(n);
        for (double& v : theta) v -= mean;
    }

    double ll = pl_log_likelihood(ds, theta);
    double step = 1.0 / std::sqrt(double(ds.comparisons.size()));
    // Once the Armijo gain s*||g||^2 drops below the floating-point resolution
    // of the log-likelihood, the line search can no longer certify progress;
    // from there on the last accepted (hence curvature-safe) step is applied
    // directly and only the gradient norm is monitored.
    bool fixed_phase = false;
    double guard = std::numeric_limits<double>::infinity();
    std::vector<double> trial(n);
    for (long iter = 0; iter < max_iter; ++iter) {
        const std::vector<double> g = pl_score_gradient(ds, theta);
        double gmax = 0.0, gnorm2 = 0.0;
        for (double v : g) {
            gmax = std::max(gmax, std::fabs(v));
            gnorm2 += v * v;
        }
        if (gmax <= tol) {
            double mean = 0.0;
            for (double v : theta) mean += v;
            mean /= double(n);
            for (double& v : theta) v -= mean;
            return theta;
        }
        if (!fixed_phase &&
            step * gnorm2 < 1e3 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(ll)))
            fixed_phase = true;

        if (fixed_phase) {
            if (gmax > 1.5 * guard) step *= 0.5;  // instability guard
            guard = std::min(guard, gmax);
            for (std::uint32_t i = 0; i < n; ++i) theta[i] += step * g[i];
        } else {
            int shrink = 0;
            for (;;) {
                for (std::uint32_t i = 0; i < n; ++i) trial[i] = theta[i] + step * g[i];
                const double ll_trial = pl_log_likelihood(ds, trial);
                if (ll_trial >= ll + 1e-4 * step * gnorm2) {
                    theta.swap(trial);
                    ll = ll_trial;
                    step *= 1.6;
                    break;
                }
                step *= 0.5;
                if (++shrink > 200)
                    throw NumericError("MLE line search stalled (gradient inf-norm " +
                                       std::to_string(gmax) + ")");
            }
        }
        double tmax = 0.0;
        for (double v : theta) tmax = std::max(tmax, std::fabs(v));
        if (tmax > 40.0)
            throw NumericError("MLE diverged: scores exceed exp-range, the likelihood "
                               "appears unbounded (perfect separation)");
    }
    throw NumericError("MLE did not reach gradient tolerance " + std::to_string(tol) + " in " +
                       std::to_string(max_iter) + " iterations");
}

} // namespace specrank
