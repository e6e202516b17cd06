#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specrank/data.hpp"
#include "specrank/diagnostics.hpp"
#include "specrank/errors.hpp"
#include "specrank/weights.hpp"

namespace specrank {

// Row-stochastic comparison-induced transition matrix.
// P_ij = (1/d) sum_l 1(i,j in A_l) 1(c_l = j) / f(A_l) for i != j; the
// diagonal fills each row to 1.
struct TransitionMatrix {
    std::uint32_t n = 0;
    std::vector<double> p;         // row-major n*n
    double d = 0.0;
    std::vector<double> off_mass;  // per-row off-diagonal sum

    double at(std::uint32_t i, std::uint32_t j) const { return p[std::size_t(i) * n + j]; }
    double* row(std::uint32_t i) { return &p[std::size_t(i) * n]; }
    const double* row(std::uint32_t i) const { return &p[std::size_t(i) * n]; }
};

namespace detail {

// Loss mass of item i in f-units: sum over comparisons i loses of 1/f(A_l).
inline std::vector<double> loss_masses(const ComparisonDataset& ds,
                                       const std::vector<double>& weights) {
    std::vector<double> loss(ds.n_items, 0.0);
    for (std::size_t l = 0; l < ds.comparisons.size(); ++l) {
        const Comparison& c = ds.comparisons[l];
        for (std::uint32_t i : c.choice_set)
            if (i != c.winner) loss[i] += 1.0 / weights[l];
    }
    return loss;
}

inline TransitionMatrix assemble_transition(const ComparisonDataset& ds,
                                            const std::vector<double>& weights,
                                            std::optional<double> d_override) {
    const std::uint32_t n = ds.n_items;
    const std::vector<double> loss = loss_masses(ds, weights);
    const double max_loss = *std::max_element(loss.begin(), loss.end());
    // Default d doubles the worst-case off-diagonal row mass: every diagonal
    // entry lands at or above 1/2, which also makes the chain aperiodic.
    const double d = d_override.value_or(2.0 * max_loss);
    if (!(d > 0.0) || !std::isfinite(d)) throw ParameterError("normalizer d must be positive");
    if (d < max_loss)
        throw ParameterError("normalizer d = " + std::to_string(d) +
                             " is too small: row off-diagonal mass would exceed 1");

    TransitionMatrix t;
    t.n = n;
    t.d = d;
    t.p.assign(std::size_t(n) * n, 0.0);
    for (std::size_t l = 0; l < ds.comparisons.size(); ++l) {
        const Comparison& c = ds.comparisons[l];
        const double inc = 1.0 / (d * weights[l]);
        for (std::uint32_t i : c.choice_set)
            if (i != c.winner) t.p[std::size_t(i) * n + c.winner] += inc;
    }
    t.off_mass.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        t.off_mass[i] = loss[i] / d;
        t.p[std::size_t(i) * n + i] = 1.0 - t.off_mass[i];
    }
    return t;
}

} // namespace detail

// Builds the empirical transition matrix. Requires a rankable dataset (every
// item wins and loses at least once, strongly connected win-graph).
inline TransitionMatrix build_transition(const ComparisonDataset& ds, const WeightScheme& scheme,
                                         std::optional<double> d_override = std::nullopt) {
    const GraphDiagnostics diag = check_rankability(ds);
    if (!diag.rankable()) throw FitError("dataset is not rankable: " + diag.failures.front());
    return detail::assemble_transition(ds, comparison_weights(ds, scheme), d_override);
}

// Population counterpart P*: the winner indicator is replaced by the Luce
// choice probability under theta_star. Satisfies detailed balance with
// pi* proportional to e^{theta*} for every weighting scheme.
inline TransitionMatrix build_population_transition(const ComparisonDataset& ds,
                                                    std::span<const double> theta_star,
                                                    const WeightScheme& scheme,
                                                    std::optional<double> d_override = std::nullopt) {
    validate_dataset(ds);
    if (theta_star.size() != ds.n_items)
        throw ParameterError("theta_star must have length n_items");
    const std::vector<double> weights = comparison_weights(ds, scheme);
    const std::uint32_t n = ds.n_items;
    std::vector<double> expt(n);
    for (std::uint32_t i = 0; i < n; ++i) expt[i] = std::exp(theta_star[i]);

    std::vector<double> off(std::size_t(n) * n, 0.0), loss(n, 0.0);
    for (std::size_t l = 0; l < ds.comparisons.size(); ++l) {
        const Comparison& c = ds.comparisons[l];
        double total = 0.0;
        for (std::uint32_t u : c.choice_set) total += expt[u];
        for (std::uint32_t i : c.choice_set)
            for (std::uint32_t j : c.choice_set) {
                if (i == j) continue;
                const double mass = expt[j] / (total * weights[l]);
                off[std::size_t(i) * n + j] += mass;
                loss[i] += mass;
            }
    }
    const double max_loss = *std::max_element(loss.begin(), loss.end());
    const double d = d_override.value_or(2.0 * max_loss);
    if (d < max_loss) throw ParameterError("normalizer d too small for population transition");

    TransitionMatrix t;
    t.n = n;
    t.d = d;
    t.p.assign(std::size_t(n) * n, 0.0);
    t.off_mass.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < n; ++j)
            if (j != i) t.p[std::size_t(i) * n + j] = off[std::size_t(i) * n + j] / d;
        t.off_mass[i] = loss[i] / d;
        t.p[std::size_t(i) * n + i] = 1.0 - t.off_mass[i];
    }
    return t;
}

struct StationaryResult {
    std::vector<double> pi;
    int iterations = 0;
    double residual = 0.0;
};

// Left power iteration from the uniform vector with L1 renormalization.
// Converges when ||pi^T P - pi^T||_1 <= tol.
inline StationaryResult stationary_distribution(const TransitionMatrix& t, double tol = 1e-10,
                                                int max_iter = 10000,
                                                std::vector<double>* residual_trace = nullptr) {
    const std::uint32_t n = t.n;
    StationaryResult r;
    r.pi.assign(n, 1.0 / n);
    std::vector<double> next(n);
    for (int it = 1; it <= max_iter; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::uint32_t i = 0; i < n; ++i) {
            const double w = r.pi[i];
            const double* row = t.row(i);
            for (std::uint32_t j = 0; j < n; ++j) next[j] += w * row[j];
        }
        double res = 0.0, total = 0.0;
        for (std::uint32_t j = 0; j < n; ++j) {
            res += std::fabs(next[j] - r.pi[j]);
            total += next[j];
        }
        for (std::uint32_t j = 0; j < n; ++j) r.pi[j] = next[j] / total;
        if (residual_trace) residual_trace->push_back(res);
        r.iterations = it;
        r.residual = res;
        if (res <= tol) return r;
    }
    throw NumericError("power iteration did not converge in " + std::to_string(max_iter) +
                       " iterations (residual " + std::to_string(r.residual) + ")");
}

// Centered log scores: theta_i = log pi_i - mean_k log pi_k.
inline std::vector<double> estimate_theta(std::span<const double> pi) {
    std::vector<double> theta(pi.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        if (!(pi[i] > 0.0))
            throw NumericError("stationary component " + std::to_string(i) + " is not positive");
        if (pi[i] < 1e-300)
            throw NumericError("stationary component " + std::to_string(i) +
                               " is denormal; dataset is effectively unrankable");
        theta[i] = std::log(pi[i]);
        mean += theta[i];
    }
    mean /= double(pi.size());
    for (double& v : theta) v -= mean;
    return theta;
}

// Which weighting a fit should use. TwoStep runs a SetSize pass first and
// refits with score weights taken from that pass.
enum class FitScheme { Constant, SetSize, Oracle, TwoStep };

inline std::string fit_scheme_name(FitScheme s) {
    switch (s) {
        case FitScheme::Constant: return "constant";
        case FitScheme::SetSize: return "vanilla";
        case FitScheme::Oracle: return "oracle";
        case FitScheme::TwoStep: return "two-step";
    }
    return "?";
}

struct FitOptions {
    FitScheme scheme = FitScheme::SetSize;
    std::vector<double> oracle_theta;  // required for Oracle
    std::optional<double> d_override;
    double tol = 1e-10;
    int max_iter = 10000;
};

struct SpectralFit {
    std::vector<double> pi_hat;  // sums to 1, all positive
    std::vector<double> theta;   // mean zero
    FitScheme selector = FitScheme::SetSize;
    WeightScheme scheme;         // the weighting actually used (resolved)
    double d = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

namespace detail {

inline SpectralFit fit_with_scheme(const ComparisonDataset& ds, const WeightScheme& scheme,
                                   const FitOptions& opt) {
    SpectralFit f;
    const TransitionMatrix t = build_transition(ds, scheme, opt.d_override);
    StationaryResult s = stationary_distribution(t, opt.tol, opt.max_iter);
    f.pi_hat = std::move(s.pi);
    f.theta = estimate_theta(f.pi_hat);
    f.scheme = scheme;
    f.d = t.d;
    f.iterations = s.iterations;
    f.residual = s.residual;
    return f;
}

} // namespace detail

inline SpectralFit fit(const ComparisonDataset& ds, const FitOptions& opt) {
    SpectralFit f;
    switch (opt.scheme) {
        case FitScheme::Constant:
            f = detail::fit_with_scheme(ds, WeightScheme::constant(), opt);
            break;
        case FitScheme::SetSize:
            f = detail::fit_with_scheme(ds, WeightScheme::set_size(), opt);
            break;
        case FitScheme::Oracle:
            if (opt.oracle_theta.size() != ds.n_items)
                throw ParameterError("oracle scheme requires theta of length n_items");
            f = detail::fit_with_scheme(ds, WeightScheme::scores(opt.oracle_theta), opt);
            break;
        case FitScheme::TwoStep: {
            FitOptions first = opt;
            first.scheme = FitScheme::SetSize;
            const SpectralFit initial = detail::fit_with_scheme(ds, WeightScheme::set_size(), first);
            f = detail::fit_with_scheme(ds, WeightScheme::scores(initial.theta), opt);
            break;
        }
    }
    f.selector = opt.scheme;
    return f;
}

inline SpectralFit fit(const ComparisonDataset& ds, FitScheme scheme,
                       std::vector<double> oracle_theta = {}) {
    FitOptions opt;
    opt.scheme = scheme;
    opt.oracle_theta = std::move(oracle_theta);
    return fit(ds, opt);
}

} // namespace specrank
