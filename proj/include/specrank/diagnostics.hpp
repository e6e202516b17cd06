#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "specrank/data.hpp"

namespace specrank {

// Comparison-graph health report. Fitting requires rankable() to hold;
// diagnostics themselves never throw.
struct GraphDiagnostics {
    std::uint32_t n_items = 0;
    std::uint64_t n_dagger = 0;   // max per-item comparison count
    std::uint64_t n_ddagger = 0;  // max per-pair co-occurrence count
    std::vector<std::uint64_t> per_item_counts;
    std::vector<std::uint64_t> per_item_win_counts;
    std::vector<std::uint64_t> per_item_loss_counts;
    bool strongly_connected = false;
    // (lambda_min on the complement of span{1}, lambda_max) of the symmetrized
    // plug-in Omega matrix; present only when requested and the chain is usable.
    std::optional<std::pair<double, double>> omega_spectrum;
    double ratio_check = 0.0;  // n_ddagger * sqrt(n) * sqrt(log n) / n_dagger
    std::vector<std::string> failures;

    bool rankable() const { return failures.empty(); }
};

namespace detail {

inline void fill_counts(const ComparisonDataset& ds, GraphDiagnostics& g) {
    g.n_items = ds.n_items;
    g.per_item_counts.assign(ds.n_items, 0);
    g.per_item_win_counts.assign(ds.n_items, 0);
    g.per_item_loss_counts.assign(ds.n_items, 0);
    std::vector<std::uint64_t> pair_keys;
    for (const Comparison& c : ds.comparisons) {
        for (std::uint32_t i : c.choice_set) {
            ++g.per_item_counts[i];
            if (i == c.winner)
                ++g.per_item_win_counts[i];
            else
                ++g.per_item_loss_counts[i];
        }
        for (std::size_t a = 0; a < c.choice_set.size(); ++a)
            for (std::size_t b = a + 1; b < c.choice_set.size(); ++b) {
                const std::uint64_t lo = std::min(c.choice_set[a], c.choice_set[b]);
                const std::uint64_t hi = std::max(c.choice_set[a], c.choice_set[b]);
                pair_keys.push_back((lo << 32) | hi);
            }
    }
    g.n_dagger = 0;
    for (std::uint64_t cnt : g.per_item_counts) g.n_dagger = std::max(g.n_dagger, cnt);
    std::sort(pair_keys.begin(), pair_keys.end());
    g.n_ddagger = 0;
    std::size_t run = 0;
    for (std::size_t i = 0; i < pair_keys.size(); ++i) {
        run = (i > 0 && pair_keys[i] == pair_keys[i - 1]) ? run + 1 : 1;
        g.n_ddagger = std::max<std::uint64_t>(g.n_ddagger, run);
    }
    if (g.n_dagger > 0) {
        const double n = double(ds.n_items);
        g.ratio_check =
            double(g.n_ddagger) * std::sqrt(n) * std::sqrt(std::log(std::max(n, 2.0))) /
            double(g.n_dagger);
    }
}

// Kosaraju with explicit stacks; the win-graph has an edge i -> j whenever
// i and j are compared somewhere and j wins.
inline bool win_graph_strongly_connected(const ComparisonDataset& ds) {
    const std::uint32_t n = ds.n_items;
    std::vector<std::vector<std::uint32_t>> fwd(n), rev(n);
    for (const Comparison& c : ds.comparisons)
        for (std::uint32_t i : c.choice_set)
            if (i != c.winner) {
                fwd[i].push_back(c.winner);
                rev[c.winner].push_back(i);
            }
    auto reaches_all = [n](const std::vector<std::vector<std::uint32_t>>& adj) {
        std::vector<char> seen(n, 0);
        std::vector<std::uint32_t> stack{0};
        seen[0] = 1;
        std::uint32_t count = 1;
        while (!stack.empty()) {
            const std::uint32_t v = stack.back();
            stack.pop_back();
            for (std::uint32_t w : adj[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    ++count;
                    stack.push_back(w);
                }
        }
        return count == n;
    };
    return reaches_all(fwd) && reaches_all(rev);
}

// Spectrum of the symmetrized plug-in Omega, with P built under f = 1 and the
// default normalizer and pi_hat from plain power iteration. Self-contained so
// the diagnostic stays decoupled from the fitting path.
inline std::optional<std::pair<double, double>> omega_spectrum_f1(const ComparisonDataset& ds) {
    const std::uint32_t n = ds.n_items;
    std::vector<double> loss_mass(n, 0.0);
    for (const Comparison& c : ds.comparisons)
        for (std::uint32_t i : c.choice_set)
            if (i != c.winner) loss_mass[i] += 1.0;
    const double d = 2.0 * *std::max_element(loss_mass.begin(), loss_mass.end());
    if (!(d > 0.0)) return std::nullopt;

    std::vector<double> p(std::size_t(n) * n, 0.0);
    for (const Comparison& c : ds.comparisons)
        for (std::uint32_t i : c.choice_set)
            if (i != c.winner) p[std::size_t(i) * n + c.winner] += 1.0 / d;
    for (std::uint32_t i = 0; i < n; ++i)
        p[std::size_t(i) * n + i] = 1.0 - loss_mass[i] / d;

    std::vector<double> pi(n, 1.0 / n), next(n);
    for (int it = 0; it < 20000; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::uint32_t i = 0; i < n; ++i) {
            const double w = pi[i];
            const double* row = &p[std::size_t(i) * n];
            for (std::uint32_t j = 0; j < n; ++j) next[j] += w * row[j];
        }
        double res = 0.0, tot = 0.0;
        for (std::uint32_t j = 0; j < n; ++j) {
            res += std::fabs(next[j] - pi[j]);
            tot += next[j];
        }
        for (std::uint32_t j = 0; j < n; ++j) pi[j] = next[j] / tot;
        if (res <= 1e-12) break;
    }

    Eigen::MatrixXd omega(n, n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            omega(i, j) = (i == j) ? 0.0 : -p[std::size_t(j) * n + i] * pi[j];
    for (std::uint32_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::uint32_t j = 0; j < n; ++j)
            if (j != i) s += p[std::size_t(i) * n + j];
        omega(i, i) = s * pi[i];
    }
    Eigen::MatrixXd sym = 0.5 * (omega + omega.transpose());

    // Householder reflector mapping 1/sqrt(n) onto e1; the trailing
    // (n-1)x(n-1) block of H*S*H is the quadratic form on span{1}^perp.
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
    w(0) -= 1.0;
    const double wn = w.norm();
    Eigen::MatrixXd rot;
    if (wn > 1e-14) {
        w /= wn;
        Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) - 2.0 * w * w.transpose();
        rot = h * sym * h;
    } else {
        rot = sym;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> perp(rot.bottomRightCorner(n - 1, n - 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(sym);
    if (perp.info() != Eigen::Success || full.info() != Eigen::Success) return std::nullopt;
    return std::make_pair(perp.eigenvalues().minCoeff(), full.eigenvalues().maxCoeff());
}

} // namespace detail

// Exact membership / win / loss / pair counts. Connectivity and the Omega
// spectrum are not evaluated here.
inline GraphDiagnostics degree_stats(const ComparisonDataset& ds) {
    validate_dataset(ds);
    GraphDiagnostics g;
    detail::fill_counts(ds, g);
    return g;
}

// Full rankability report: counts, strong connectivity of the win-graph,
// zero-win/zero-loss flags, and (optionally) the plug-in Omega spectrum.
inline GraphDiagnostics check_rankability(const ComparisonDataset& ds,
                                          bool compute_spectrum = false) {
    validate_dataset(ds);
    GraphDiagnostics g;
    detail::fill_counts(ds, g);
    for (std::uint32_t i = 0; i < ds.n_items; ++i) {
        if (g.per_item_win_counts[i] == 0)
            g.failures.push_back("item " + ds.label_of(i) + " has zero wins");
        if (g.per_item_loss_counts[i] == 0)
            g.failures.push_back("item " + ds.label_of(i) + " has zero losses");
    }
    g.strongly_connected = detail::win_graph_strongly_connected(ds);
    if (!g.strongly_connected)
        g.failures.push_back("win-graph is not strongly connected");
    if (compute_spectrum && g.rankable())
        g.omega_spectrum = detail::omega_spectrum_f1(ds);
    return g;
}

} // namespace specrank
