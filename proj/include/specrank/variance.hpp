#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "specrank/data.hpp"
#include "specrank/errors.hpp"
#include "specrank/spectral.hpp"
#include "specrank/weights.hpp"

namespace specrank {

// The linearization of the spectral error: theta~_i - theta*_i is
// asymptotically (1/d) sum_l J_il(theta*). Stored sparse by comparison, so
// J[i][l] is nonzero only when i is in A_l.
struct JContributions {
    std::uint32_t n = 0;
    double d = 0.0;
    std::vector<double> tau;            // per-item normalizer tau_i(theta)
    std::vector<std::uint32_t> offsets; // size |D|+1; entries of comparison l
    std::vector<std::uint32_t> items;
    std::vector<double> values;

    // Streams the nonzero entries of comparison l without materializing rows.
    template <typename Fn>
    void for_each_in_comparison(std::size_t l, Fn&& fn) const {
        for (std::uint32_t idx = offsets[l]; idx < offsets[l + 1]; ++idx)
            fn(items[idx], values[idx]);
    }

    // (1/d) sum_l J_il for every item: the plug-in J*_i.
    std::vector<double> j_star() const {
        std::vector<double> s(n, 0.0);
        for (std::size_t idx = 0; idx < items.size(); ++idx) s[items[idx]] += values[idx];
        for (double& v : s) v /= d;
        return s;
    }
};

struct VarianceReport {
    std::vector<double> var_j;  // Var(J*_i | graph)
    std::vector<double> rho;    // per-item normalizer, rho_i = var_j_i^{-1/2}
};

namespace detail {

struct PluginTables {
    double d = 0.0;
    std::vector<double> expt;      // e^{theta_i}
    std::vector<double> set_sum;   // S_l = sum_{u in A_l} e^{theta_u}
    std::vector<double> weights;   // f(A_l)
    std::vector<double> tau_inv;   // (1/d) sum_l 1(i in A_l)(1 - e_i/S_l) e_i / f_l
};

inline PluginTables plugin_tables(const ComparisonDataset& ds, std::span<const double> theta,
                                  const WeightScheme& scheme, double d) {
    if (theta.size() != ds.n_items) throw ParameterError("theta must have length n_items");
    if (!(d > 0.0)) throw ParameterError("normalizer d must be positive");
    PluginTables t;
    t.d = d;
    t.expt.resize(ds.n_items);
    for (std::uint32_t i = 0; i < ds.n_items; ++i) t.expt[i] = std::exp(theta[i]);
    t.weights = comparison_weights(ds, scheme);
    t.set_sum.resize(ds.comparisons.size());
    t.tau_inv.assign(ds.n_items, 0.0);
    for (std::size_t l = 0; l < ds.comparisons.size(); ++l) {
        const Comparison& c = ds.comparisons[l];
        double s = 0.0;
        for (std::uint32_t u : c.choice_set) s += t.expt[u];
        t.set_sum[l] = s;
        for (std::uint32_t i : c.choice_set)
            t.tau_inv[i] += (1.0 - t.expt[i] / s) * t.expt[i] / (d * t.weights[l]);
    }
    for (std::uint32_t i = 0; i < ds.n_items; ++i)
        if (!(t.tau_inv[i] > 0.0))
            throw NumericError("item " + ds.label_of(i) +
                               " appears in no comparison; tau is undefined");
    return t;
}

// Var(J*_i | G) = [sum_l 1(i in A_l)(S_l - e_i) e_i / f_l^2] / [d tau_inv_i]^2.
// d cancels between numerator and denominator, matching the d-invariance of
// the estimator.
inline std::vector<double> var_items(const ComparisonDataset& ds, const PluginTables& t) {
    std::vector<double> num(ds.n_items, 0.0);
    for (std::size_t l = 0; l < ds.comparisons.size(); ++l) {
        const Comparison& c = ds.comparisons[l];
        const double w2 = t.weights[l] * t.weights[l];
        for (std::uint32_t i : c.choice_set)
            num[i] += (t.set_sum[l] - t.expt[i]) * t.expt[i] / w2;
    }
    std::vector<double> var(ds.n_items);
    for (std::uint32_t i = 0; i < ds.n_items; ++i) {
        const double denom = t.d * t.tau_inv[i];  // = sum_l 1(i in A_l)(1 - e_i/S_l) e_i / f_l
        var[i] = num[i] / (denom * denom);
        if (!(var[i] > 0.0))
            throw NumericError("variance of item " + ds.label_of(i) + " is not positive");
    }
    return var;
}

} // namespace detail

// J_il(theta) = tau_i(theta) (1(i in A_l)/f(A_l)) [1(c_l = i) sum_{u != i} e^{theta_u}
//               - e^{theta_i} 1(c_l != i)].
inline JContributions j_contributions(const ComparisonDataset& ds, std::span<const double> theta,
                                      const WeightScheme& scheme, double d) {
    const detail::PluginTables t = detail::plugin_tables(ds, theta, scheme, d);
    JContributions j;
    j.n = ds.n_items;
    j.d = d;
    j.tau.resize(ds.n_items);
    for (std::uint32_t i = 0; i < ds.n_items; ++i) j.tau[i] = 1.0 / t.tau_inv[i];
    j.offsets.reserve(ds.comparisons.size() + 1);
    j.offsets.push_back(0);
    for (std::size_t l = 0; l < ds.comparisons.size(); ++l) {
        const Comparison& c = ds.comparisons[l];
        for (std::uint32_t i : c.choice_set) {
            const double base =
                (i == c.winner) ? (t.set_sum[l] - t.expt[i]) : -t.expt[i];
            j.items.push_back(i);
            j.values.push_back(j.tau[i] * base / t.weights[l]);
        }
        j.offsets.push_back(std::uint32_t(j.items.size()));
    }
    return j;
}

// Per-item conditional variance of J*_i on a fixed graph plus the rho_i
// normalizers; theta may be the truth, a plug-in, or any external vector.
inline VarianceReport var_j_fixed(const ComparisonDataset& ds, std::span<const double> theta,
                                  const WeightScheme& scheme, double d) {
    const detail::PluginTables t = detail::plugin_tables(ds, theta, scheme, d);
    VarianceReport r;
    r.var_j = detail::var_items(ds, t);
    r.rho.resize(ds.n_items);
    for (std::uint32_t i = 0; i < ds.n_items; ++i) r.rho[i] = 1.0 / std::sqrt(r.var_j[i]);
    return r;
}

// Studentizer for the pairwise difference theta~_k - theta~_m: the sum of the
// two marginal variances, the cross-covariance being dropped by construction.
inline double sigma_km(const ComparisonDataset& ds, const SpectralFit& fit, std::uint32_t k,
                       std::uint32_t m) {
    if (k == m) throw ParameterError("sigma_km requires k != m");
    if (k >= ds.n_items || m >= ds.n_items) throw ParameterError("item index out of range");
    const detail::PluginTables t = detail::plugin_tables(ds, fit.theta, fit.scheme, fit.d);
    const std::vector<double> var = detail::var_items(ds, t);
    return std::sqrt(var[k] + var[m]);
}

// Plug-in magnitude of the covariance term that sigma_km drops:
// Cov(J*_k, J*_m | G) = -(tau_k tau_m / d^2) sum_l 1(k,m in A_l) e_k e_m / f_l^2.
// Nonpositive; zero when k and m never share a comparison. Useful as a
// sparse-graph sanity check, since the exact Var(J*_k - J*_m) exceeds
// sigma_km^2 by -2 times this value.
inline double sigma_km_covariance_gap(const ComparisonDataset& ds, const SpectralFit& fit,
                                      std::uint32_t k, std::uint32_t m) {
    if (k == m) throw ParameterError("covariance gap requires k != m");
    if (k >= ds.n_items || m >= ds.n_items) throw ParameterError("item index out of range");
    const detail::PluginTables t = detail::plugin_tables(ds, fit.theta, fit.scheme, fit.d);
    double acc = 0.0;
    for (std::size_t l = 0; l < ds.comparisons.size(); ++l) {
        const Comparison& c = ds.comparisons[l];
        if (!c.contains(k) || !c.contains(m)) continue;
        acc += t.expt[k] * t.expt[m] / (t.weights[l] * t.weights[l]);
    }
    // tau_i / d = 1 / (d tau_inv_i); the d factors cancel as in var_items
    const double scale_k = 1.0 / (t.d * t.tau_inv[k]);
    const double scale_m = 1.0 / (t.d * t.tau_inv[m]);
    return -scale_k * scale_m * acc;
}

// ---- PL random-graph (M = 3) variance -------------------------------------

using Triple = std::array<std::uint32_t, 3>;

namespace detail {

inline double pair_weight(const WeightScheme& scheme, std::uint32_t a, std::uint32_t b) {
    const std::array<std::uint32_t, 2> items{a, b};
    return scheme.evaluate(std::span<const std::uint32_t>(items.data(), items.size()));
}

inline double triple_weight(const WeightScheme& scheme, const Triple& t) {
    return scheme.evaluate(std::span<const std::uint32_t>(t.data(), t.size()));
}

} // namespace detail

// tau_diamond: the expected denominator of J*_i conditional on the sampled
// 3-way hyperedges, with each edge compared L times.
inline std::vector<double> pl_tau_diamond(std::uint32_t n, std::span<const Triple> edges,
                                          std::span<const double> theta,
                                          const WeightScheme& scheme, int L, double d) {
    if (theta.size() != n) throw ParameterError("theta must have length n");
    if (L < 1) throw ParameterError("L must be >= 1");
    if (!(d > 0.0)) throw ParameterError("normalizer d must be positive");
    std::vector<double> expt(n);
    for (std::uint32_t i = 0; i < n; ++i) expt[i] = std::exp(theta[i]);
    std::vector<double> tau_inv(n, 0.0);
    for (const Triple& e : edges) {
        const double s3 = expt[e[0]] + expt[e[1]] + expt[e[2]];
        const double f3 = detail::triple_weight(scheme, e);
        for (int a = 0; a < 3; ++a) {
            const std::uint32_t i = e[a];
            const std::uint32_t j = e[(a + 1) % 3];
            const std::uint32_t k = e[(a + 2) % 3];
            const double ei = expt[i], ej = expt[j], ek = expt[k];
            const double term =
                ej * ek / (s3 * (ei + ej) * detail::pair_weight(scheme, i, j)) +
                ej * ek / (s3 * (ei + ek) * detail::pair_weight(scheme, i, k)) +
                (ej + ek) / (s3 * f3);
            tau_inv[i] += double(L) / d * ei * term;
        }
    }
    std::vector<double> tau(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!(tau_inv[i] > 0.0))
            throw NumericError("item " + std::to_string(i) + " touches no sampled 3-way edge");
        tau[i] = 1.0 / tau_inv[i];
    }
    return tau;
}

// Var(J*_i | sampled edges) for the PL model with 3-way comparisons broken by
// multi-level breaking. Only M = 3 has this closed form; larger rankings go
// through the fixed-graph machinery instead.
inline VarianceReport var_j_pl_random(std::uint32_t n, std::span<const Triple> edges,
                                      std::span<const double> theta, const WeightScheme& scheme,
                                      int L, double d) {
    const std::vector<double> tau = pl_tau_diamond(n, edges, theta, scheme, L, d);
    std::vector<double> expt(n);
    for (std::uint32_t i = 0; i < n; ++i) expt[i] = std::exp(theta[i]);
    VarianceReport r;
    r.var_j.assign(n, 0.0);
    for (const Triple& e : edges) {
        const double s3 = expt[e[0]] + expt[e[1]] + expt[e[2]];
        const double f3 = detail::triple_weight(scheme, e);
        for (int a = 0; a < 3; ++a) {
            const std::uint32_t i = e[a];
            const std::uint32_t j = e[(a + 1) % 3];
            const std::uint32_t k = e[(a + 2) % 3];
            const double ei = expt[i], ej = expt[j], ek = expt[k];
            const double fij = detail::pair_weight(scheme, i, j);
            const double fik = detail::pair_weight(scheme, i, k);
            r.var_j[i] += ei * ((ej + ek) / (f3 * f3) +
                                (ej * ek / s3) * (1.0 / (fik * fik) + 1.0 / (fij * fij)));
        }
    }
    r.rho.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        r.var_j[i] *= double(L) * tau[i] * tau[i] / (d * d);
        if (!(r.var_j[i] > 0.0))
            throw NumericError("PL variance of item " + std::to_string(i) + " is not positive");
        r.rho[i] = 1.0 / std::sqrt(r.var_j[i]);
    }
    return r;
}

} // namespace specrank
