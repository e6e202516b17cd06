#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "specrank/bootstrap.hpp"
#include "specrank/csv.hpp"
#include "specrank/data.hpp"
#include "specrank/errors.hpp"
#include "specrank/generators.hpp"
#include "specrank/inference.hpp"
#include "specrank/mle.hpp"
#include "specrank/parallel.hpp"
#include "specrank/rng.hpp"
#include "specrank/spectral.hpp"

namespace specrank {

// Scenario parameter overrides, parsed from key=value text or CLI flags.
struct MCOverrides {
    std::map<std::string, std::string> kv;

    bool has(const std::string& key) const { return kv.count(key) > 0; }

    void set(const std::string& key, const std::string& value) { kv[key] = value; }

    std::string get(const std::string& key, const std::string& def) const {
        auto it = kv.find(key);
        return it == kv.end() ? def : it->second;
    }

    double get_double(const std::string& key, double def) const {
        auto it = kv.find(key);
        if (it == kv.end()) return def;
        try {
            return std::stod(it->second);
        } catch (...) {
            throw ParameterError("override " + key + "=" + it->second + " is not a number");
        }
    }

    long get_long(const std::string& key, long def) const {
        auto it = kv.find(key);
        if (it == kv.end()) return def;
        try {
            return std::stol(it->second);
        } catch (...) {
            throw ParameterError("override " + key + "=" + it->second + " is not an integer");
        }
    }

    std::vector<double> get_doubles(const std::string& key, std::vector<double> def) const {
        auto it = kv.find(key);
        if (it == kv.end()) return def;
        std::vector<double> out;
        for (const std::string& tok : detail::split(it->second, ',')) {
            try {
                out.push_back(std::stod(detail::trim(tok)));
            } catch (...) {
                throw ParameterError("override " + key + ": bad number '" + tok + "'");
            }
        }
        if (out.empty()) throw ParameterError("override " + key + " is empty");
        return out;
    }

    std::vector<long> get_longs(const std::string& key, std::vector<long> def) const {
        auto it = kv.find(key);
        if (it == kv.end()) return def;
        std::vector<long> out;
        for (double v : get_doubles(key, {})) out.push_back(long(v));
        return out;
    }

    std::vector<std::string> get_strings(const std::string& key,
                                         std::vector<std::string> def) const {
        auto it = kv.find(key);
        if (it == kv.end()) return def;
        std::vector<std::string> out;
        for (const std::string& tok : detail::split(it->second, ','))
            out.push_back(detail::trim(tok));
        return out;
    }
};

// key=value per line; '#' starts a comment.
inline MCOverrides parse_mc_config(std::istream& in) {
    MCOverrides o;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#') continue;
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ParseError(line_no, "expected key=value");
        o.set(detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1)));
    }
    return o;
}

struct MCRow {
    std::vector<std::pair<std::string, std::string>> tags;
    std::vector<std::pair<std::string, double>> values;

    const std::string& tag(const std::string& name) const {
        for (const auto& [k, v] : tags)
            if (k == name) return v;
        throw ParameterError("row has no tag '" + name + "'");
    }

    double value(const std::string& name) const {
        for (const auto& [k, v] : values)
            if (k == name) return v;
        throw ParameterError("row has no value '" + name + "'");
    }
};

// One scenario's aggregate output; CSV mirrors the corresponding result table.
struct MCReport {
    std::string scenario;
    std::vector<MCRow> rows;
    std::uint64_t replications = 0;
    std::uint64_t errored = 0;

    const MCRow* find(const std::vector<std::pair<std::string, std::string>>& want) const {
        for (const MCRow& r : rows) {
            bool ok = true;
            for (const auto& [k, v] : want) {
                bool matched = false;
                for (const auto& [rk, rv] : r.tags)
                    if (rk == k && rv == v) {
                        matched = true;
                        break;
                    }
                if (!matched) {
                    ok = false;
                    break;
                }
            }
            if (ok) return &r;
        }
        return nullptr;
    }

    std::string to_csv() const {
        std::ostringstream out;
        out << "# scenario=" << scenario << " replications=" << replications
            << " errored=" << errored << "\n";
        if (rows.empty()) return out.str();
        for (std::size_t i = 0; i < rows.front().tags.size(); ++i)
            out << (i ? "," : "") << rows.front().tags[i].first;
        for (const auto& [k, v] : rows.front().values) out << "," << k;
        out << "\n";
        char buf[64];
        for (const MCRow& r : rows) {
            for (std::size_t i = 0; i < r.tags.size(); ++i)
                out << (i ? "," : "") << r.tags[i].second;
            for (const auto& [k, v] : r.values) {
                std::snprintf(buf, sizeof buf, "%.10g", v);
                out << "," << buf;
            }
            out << "\n";
        }
        return out.str();
    }
};

namespace detail {

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline FitScheme parse_fit_scheme(const std::string& name) {
    if (name == "constant") return FitScheme::Constant;
    if (name == "vanilla" || name == "size" || name == "set-size") return FitScheme::SetSize;
    if (name == "oracle") return FitScheme::Oracle;
    if (name == "two-step" || name == "two_step" || name == "twostep") return FitScheme::TwoStep;
    throw ParameterError("unknown scheme '" + name + "'");
}

struct Agg {
    double sum = 0.0, sum2 = 0.0;
    std::uint64_t count = 0;
    void add(double v) {
        sum += v;
        sum2 += v * v;
        ++count;
    }
    double mean() const { return count ? sum / double(count) : 0.0; }
    double sd() const {
        if (count < 2) return 0.0;
        const double m = mean();
        return std::sqrt(std::max(0.0, (sum2 - double(count) * m * m) / double(count - 1)));
    }
    double se_mean() const { return count ? sd() / std::sqrt(double(count)) : 0.0; }
    double se_rate() const {
        if (!count) return 0.0;
        const double r = mean();
        return std::sqrt(std::max(0.0, r * (1.0 - r)) / double(count));
    }
};

inline double sorted_quantile(std::vector<double>& draws, double alpha) {
    std::sort(draws.begin(), draws.end());
    BootstrapResult r;
    r.sorted_draws = draws;
    return r.quantile(alpha);
}

// Fixed-graph replication kit shared by T1/T2/T3/PPplot/two-sample scenarios.
struct FixedDesign {
    std::uint32_t n = 50;
    std::vector<double> theta_star;
    int B = 500;
    double alpha = 0.05;

    ComparisonDataset generate(std::uint64_t D, std::uint64_t data_seed,
                               const std::vector<double>& theta,
                               const std::vector<double>& stratum_scores = {}) const {
        FixedGraphConfig cfg;
        cfg.n = n;
        cfg.total_comparisons = D;
        cfg.theta_star = theta;
        cfg.stratum_scores = stratum_scores;
        cfg.seed = data_seed;
        return gen_fixed_heterogeneous(cfg);
    }

    SpectralFit fit_scheme(const ComparisonDataset& ds, FitScheme scheme,
                           const std::vector<double>& oracle_theta) const {
        FitOptions opt;
        opt.scheme = scheme;
        if (scheme == FitScheme::Oracle) opt.oracle_theta = oracle_theta;
        return fit(ds, opt);
    }
};

// max_{m in M} max_{k != m} of the (optionally signed) studentized deviation
// of the estimated score differences from the truth.
inline double t_statistic(const BootstrapContext& ctx, std::span<const double> theta_hat,
                          std::span<const double> theta_star,
                          std::span<const std::uint32_t> item_set, Side side) {
    double t = -std::numeric_limits<double>::infinity();
    for (std::uint32_t m : item_set) {
        for (std::uint32_t k = 0; k < ctx.n; ++k) {
            if (k == m) continue;
            const double dev =
                (theta_hat[k] - theta_hat[m]) - (theta_star[k] - theta_star[m]);
            const double v = dev / ctx.sigma(k, m);
            const double val = (side == Side::two_sided) ? std::fabs(v) : v;
            if (val > t) t = val;
        }
    }
    return t;
}

inline std::vector<std::uint32_t> to_internal_items(const std::vector<long>& one_based,
                                                    std::uint32_t n) {
    std::vector<std::uint32_t> out;
    for (long v : one_based) {
        if (v < 1 || std::uint64_t(v) > n)
            throw ParameterError("item id " + std::to_string(v) + " outside [1, n]");
        out.push_back(std::uint32_t(v - 1));
    }
    return out;
}

} // namespace detail

// ---- scenario runners ------------------------------------------------------

namespace detail {

struct RepBudget {
    std::uint64_t reps = 500;
    int workers = 1;
};

// Runs `reps` independent replications, collecting per-rep payloads and an
// error count; rep r derives all of its randomness from (seed, cell, r).
template <typename Payload, typename Fn>
std::pair<std::vector<std::optional<Payload>>, std::uint64_t> run_reps(
    const RepBudget& budget, std::uint64_t seed, const std::string& cell, Fn&& body) {
    std::vector<std::optional<Payload>> out(budget.reps);
    const std::uint64_t cell_seed = derive_seed(seed, fnv1a64(cell));
    parallel_for(budget.reps, budget.workers, [&](std::size_t r) {
        const std::uint64_t rep_seed = derive_seed(cell_seed, r);
        try {
            out[r] = body(rep_seed);
        } catch (const Error&) {
            out[r] = std::nullopt;
        }
    });
    std::uint64_t errored = 0;
    for (const auto& p : out)
        if (!p) ++errored;
    return {std::move(out), errored};
}

inline MCReport run_t1(const MCOverrides& o, std::uint64_t seed, int workers) {
    FixedDesign design;
    design.n = std::uint32_t(o.get_long("n", 50));
    design.theta_star = score_grid(design.n);
    design.B = int(o.get_long("B", 500));
    design.alpha = o.get_double("alpha", 0.05);
    const auto d_list = o.get_longs("D", {12000, 24000, 36000});
    const auto items = to_internal_items(o.get_longs("items", {8, 20, 30}), design.n);
    const auto schemes = o.get_strings("scheme", {"vanilla", "oracle"});
    RepBudget budget{std::uint64_t(o.get_long("reps", 500)), workers};

    const std::vector<std::uint32_t> true_ranks = point_ranks(design.theta_star);

    struct Rep {
        std::vector<char> cov_theta, cov_rank;
        std::vector<double> length;
    };

    MCReport report;
    report.scenario = "T1";
    report.replications = budget.reps;
    for (const std::string& scheme_name : schemes) {
        const FitScheme scheme = parse_fit_scheme(scheme_name);
        for (long D : d_list) {
            const std::string cell = "T1|D=" + std::to_string(D);
            auto [reps, errored] = run_reps<Rep>(budget, seed, cell, [&](std::uint64_t rs) {
                const ComparisonDataset ds =
                    design.generate(std::uint64_t(D), derive_seed(rs, 1), design.theta_star);
                const SpectralFit f = design.fit_scheme(ds, scheme, design.theta_star);
                const BootstrapContext ctx = make_bootstrap_context(ds, f);
                std::vector<MaxSpec> specs;
                for (std::uint32_t m : items) specs.push_back({{m}, Side::two_sided});
                auto draws = bootstrap_draws(ctx, design.B, derive_seed(rs, 2), 1, specs);
                Rep rep;
                for (std::size_t a = 0; a < items.size(); ++a) {
                    const std::uint32_t m = items[a];
                    const double q = sorted_quantile(draws[a], design.alpha);
                    const double t = t_statistic(ctx, f.theta, design.theta_star,
                                                 std::span<const std::uint32_t>(&m, 1),
                                                 Side::two_sided);
                    const RankInterval ci = rank_interval_from_quantile(
                        ctx, f.theta, m, q, Side::two_sided, design.alpha);
                    rep.cov_theta.push_back(t <= q);
                    rep.cov_rank.push_back(true_ranks[m] >= ci.lower && true_ranks[m] <= ci.upper);
                    rep.length.push_back(double(ci.upper - ci.lower));
                }
                return rep;
            });
            report.errored += errored;
            for (std::size_t a = 0; a < items.size(); ++a) {
                Agg ct, cr, len;
                for (const auto& rep : reps)
                    if (rep) {
                        ct.add(rep->cov_theta[a]);
                        cr.add(rep->cov_rank[a]);
                        len.add(rep->length[a]);
                    }
                MCRow row;
                row.tags = {{"scheme", scheme_name},
                            {"D", std::to_string(D)},
                            {"m", std::to_string(items[a] + 1)}};
                row.values = {{"ec_theta", ct.mean()},   {"se_theta", ct.se_rate()},
                              {"ec_rank", cr.mean()},    {"length", len.mean()},
                              {"se_length", len.se_mean()}, {"reps", double(ct.count)}};
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

inline MCReport run_t2(const MCOverrides& o, std::uint64_t seed, int workers) {
    FixedDesign design;
    design.n = std::uint32_t(o.get_long("n", 50));
    design.theta_star = score_grid(design.n);
    design.B = int(o.get_long("B", 500));
    design.alpha = o.get_double("alpha", 0.05);
    const long K = o.get_long("K", 5);
    std::vector<long> default_ms;
    for (long m = K - 2; m <= K + 5; ++m) default_ms.push_back(m);
    const auto items = to_internal_items(o.get_longs("m", default_ms), design.n);
    const auto d_list = o.get_longs("D", {12000, 24000, 36000});
    const auto schemes = o.get_strings("scheme", {"vanilla", "oracle"});
    RepBudget budget{std::uint64_t(o.get_long("reps", 500)), workers};

    struct Rep {
        std::vector<char> rank_reject, score_reject;
    };

    MCReport report;
    report.scenario = "T2";
    report.replications = budget.reps;
    for (const std::string& scheme_name : schemes) {
        const FitScheme scheme = parse_fit_scheme(scheme_name);
        for (long D : d_list) {
            const std::string cell = "T2|D=" + std::to_string(D);
            auto [reps, errored] = run_reps<Rep>(budget, seed, cell, [&](std::uint64_t rs) {
                const ComparisonDataset ds =
                    design.generate(std::uint64_t(D), derive_seed(rs, 1), design.theta_star);
                const SpectralFit f = design.fit_scheme(ds, scheme, design.theta_star);
                const BootstrapContext ctx = make_bootstrap_context(ds, f);
                std::vector<MaxSpec> specs;
                for (std::uint32_t m : items) specs.push_back({{m}, Side::one_sided});
                auto draws = bootstrap_draws(ctx, design.B, derive_seed(rs, 2), 1, specs);
                Rep rep;
                for (std::size_t a = 0; a < items.size(); ++a) {
                    const std::uint32_t m = items[a];
                    const double q = sorted_quantile(draws[a], design.alpha);
                    const RankInterval ci = rank_interval_from_quantile(
                        ctx, f.theta, m, q, Side::one_sided, design.alpha);
                    rep.rank_reject.push_back(ci.lower > std::uint32_t(K));
                    const double t = t_statistic(ctx, f.theta, design.theta_star,
                                                 std::span<const std::uint32_t>(&m, 1),
                                                 Side::one_sided);
                    rep.score_reject.push_back(t > q);
                }
                return rep;
            });
            report.errored += errored;
            for (std::size_t a = 0; a < items.size(); ++a) {
                Agg rr, sr;
                for (const auto& rep : reps)
                    if (rep) {
                        rr.add(rep->rank_reject[a]);
                        sr.add(rep->score_reject[a]);
                    }
                MCRow row;
                row.tags = {{"scheme", scheme_name},
                            {"D", std::to_string(D)},
                            {"m", std::to_string(items[a] + 1)}};
                row.values = {{"rank_rate", rr.mean()},
                              {"se_rank", rr.se_rate()},
                              {"score_rate", sr.mean()},
                              {"se_score", sr.se_rate()},
                              {"reps", double(rr.count)}};
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

inline MCReport run_t3(const MCOverrides& o, std::uint64_t seed, int workers) {
    FixedDesign design;
    design.n = std::uint32_t(o.get_long("n", 50));
    design.theta_star = score_grid(design.n);
    design.B = int(o.get_long("B", 500));
    design.alpha = o.get_double("alpha", 0.05);
    const auto k_list = o.get_longs("K", {3, 5, 10});
    const auto d_list = o.get_longs("D", {12000, 24000, 36000});
    const auto schemes = o.get_strings("scheme", {"vanilla", "oracle"});
    RepBudget budget{std::uint64_t(o.get_long("reps", 500)), workers};

    std::vector<std::uint32_t> everyone(design.n);
    for (std::uint32_t i = 0; i < design.n; ++i) everyone[i] = i;

    struct Rep {
        char cov_theta = 0;
        std::vector<double> size;
        std::vector<char> covered;
    };

    MCReport report;
    report.scenario = "T3";
    report.replications = budget.reps;
    for (const std::string& scheme_name : schemes) {
        const FitScheme scheme = parse_fit_scheme(scheme_name);
        for (long D : d_list) {
            const std::string cell = "T3|D=" + std::to_string(D);
            auto [reps, errored] = run_reps<Rep>(budget, seed, cell, [&](std::uint64_t rs) {
                const ComparisonDataset ds =
                    design.generate(std::uint64_t(D), derive_seed(rs, 1), design.theta_star);
                const SpectralFit f = design.fit_scheme(ds, scheme, design.theta_star);
                const BootstrapContext ctx = make_bootstrap_context(ds, f);
                const MaxSpec spec{everyone, Side::one_sided};
                auto draws = bootstrap_draws(ctx, design.B, derive_seed(rs, 2), 1,
                                             std::span<const MaxSpec>(&spec, 1));
                const double q = sorted_quantile(draws[0], design.alpha);
                Rep rep;
                rep.cov_theta =
                    t_statistic(ctx, f.theta, design.theta_star, everyone, Side::one_sided) <= q;
                std::vector<std::uint32_t> lower(design.n);
                for (std::uint32_t m = 0; m < design.n; ++m)
                    lower[m] = rank_interval_from_quantile(ctx, f.theta, m, q, Side::one_sided,
                                                           design.alpha)
                                   .lower;
                for (long K : k_list) {
                    std::uint64_t size = 0;
                    bool covered = true;
                    for (std::uint32_t m = 0; m < design.n; ++m) {
                        const bool in_set = lower[m] <= std::uint64_t(K);
                        size += in_set;
                        // items with true rank <= K must be screened in
                        if (!in_set && long(m) + 1 <= K) covered = false;
                    }
                    rep.size.push_back(double(size));
                    rep.covered.push_back(covered);
                }
                return rep;
            });
            report.errored += errored;
            for (std::size_t a = 0; a < k_list.size(); ++a) {
                Agg ct, sz, cov;
                for (const auto& rep : reps)
                    if (rep) {
                        ct.add(rep->cov_theta);
                        sz.add(rep->size[a]);
                        cov.add(rep->covered[a]);
                    }
                MCRow row;
                row.tags = {{"scheme", scheme_name},
                            {"D", std::to_string(D)},
                            {"K", std::to_string(k_list[a])}};
                row.values = {{"mean_size", sz.mean()},  {"se_size", sz.se_mean()},
                              {"ec_rank", cov.mean()},   {"ec_theta", ct.mean()},
                              {"se_theta", ct.se_rate()}, {"reps", double(sz.count)}};
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

// Score vectors for the two-sample alternatives: "alter i" swaps entries of
// the second sample's scores.
inline std::vector<double> two_sample_theta2(const std::vector<double>& theta1,
                                             const std::string& alt_case, long m_one_based,
                                             const std::string& mode) {
    std::vector<double> theta2 = theta1;
    if (alt_case == "null") return theta2;
    if (alt_case.rfind("alter", 0) != 0)
        throw ParameterError("unknown case '" + alt_case + "' (use null or alter1..alter4)");
    const long i = std::stol(alt_case.substr(5));
    if (i < 1) throw ParameterError("bad alternative index in '" + alt_case + "'");
    if (mode == "item") {
        const std::size_t a = std::size_t(m_one_based - 1);
        const std::size_t b = std::size_t(m_one_based - 1 + 3 * i);
        if (b >= theta2.size()) throw ParameterError("alternative swap out of range");
        std::swap(theta2[a], theta2[b]);
    } else {
        // swap the i+2 items ranked (9-i)..10 with items ranked 20..(21+i)
        const long len = i + 2;
        for (long t = 0; t < len; ++t) {
            const std::size_t a = std::size_t(9 - i + t - 1);
            const std::size_t b = std::size_t(20 + t - 1);
            if (b >= theta2.size()) throw ParameterError("alternative swap out of range");
            std::swap(theta2[a], theta2[b]);
        }
    }
    return theta2;
}

inline MCReport run_two_sample(const MCOverrides& o, std::uint64_t seed, int workers,
                               const std::string& mode) {
    FixedDesign design;
    design.n = std::uint32_t(o.get_long("n", 50));
    design.theta_star = score_grid(design.n);
    design.B = int(o.get_long("B", 500));
    design.alpha = o.get_double("alpha", 0.05);
    const long m_one = o.get_long("m", 10);
    const long K = o.get_long("K", 10);
    const auto d_list = o.get_longs("D", {12000, 24000, 36000});
    const auto cases =
        o.get_strings("case", {"null", "alter1", "alter2", "alter3", "alter4"});
    const auto schemes = o.get_strings("scheme", {"vanilla", "oracle"});
    RepBudget budget{std::uint64_t(o.get_long("reps", 500)), workers};
    const double half = design.alpha / 2.0;

    std::vector<std::uint32_t> everyone(design.n);
    for (std::uint32_t i = 0; i < design.n; ++i) everyone[i] = i;
    const std::uint32_t m_idx = std::uint32_t(m_one - 1);

    MCReport report;
    report.scenario = (mode == "item") ? "T_two1" : "T_two2";
    report.replications = budget.reps;
    for (const std::string& scheme_name : schemes) {
        const FitScheme scheme = parse_fit_scheme(scheme_name);
        for (long D : d_list) {
            for (const std::string& cs : cases) {
                const std::vector<double> theta2 =
                    two_sample_theta2(design.theta_star, cs, m_one, mode);
                const std::string cell =
                    report.scenario + "|D=" + std::to_string(D) + "|case=" + cs;
                auto [reps, errored] =
                    run_reps<char>(budget, seed, cell, [&](std::uint64_t rs) -> char {
                        // both samples share the comparison design anchored to
                        // the base score order; the alternative only reshuffles
                        // the winner probabilities
                        const ComparisonDataset ds1 = design.generate(
                            std::uint64_t(D), derive_seed(rs, 1), design.theta_star);
                        const ComparisonDataset ds2 =
                            design.generate(std::uint64_t(D), derive_seed(rs, 3), theta2,
                                            design.theta_star);
                        const std::uint64_t boot_seed = derive_seed(rs, 2);
                        auto one_sample = [&](const ComparisonDataset& ds,
                                              const std::vector<double>& truth) {
                            const SpectralFit f = design.fit_scheme(ds, scheme, truth);
                            const BootstrapContext ctx = make_bootstrap_context(ds, f);
                            const MaxSpec spec{mode == "item"
                                                   ? std::vector<std::uint32_t>{m_idx}
                                                   : everyone,
                                               mode == "item" ? Side::two_sided
                                                              : Side::one_sided};
                            auto draws = bootstrap_draws(ctx, design.B, boot_seed, 1,
                                                         std::span<const MaxSpec>(&spec, 1));
                            const double q = sorted_quantile(draws[0], half);
                            return std::make_tuple(f.theta, ctx, q);
                        };
                        auto [t1, ctx1, q1] = one_sample(ds1, design.theta_star);
                        auto [t2, ctx2, q2] = one_sample(ds2, theta2);
                        if (mode == "item") {
                            const RankInterval a = rank_interval_from_quantile(
                                ctx1, t1, m_idx, q1, Side::two_sided, half);
                            const RankInterval b = rank_interval_from_quantile(
                                ctx2, t2, m_idx, q2, Side::two_sided, half);
                            return char(a.upper < b.lower || b.upper < a.lower);
                        }
                        std::size_t common = 0;
                        for (std::uint32_t m = 0; m < design.n; ++m) {
                            const bool in1 = rank_interval_from_quantile(ctx1, t1, m, q1,
                                                                         Side::one_sided, half)
                                                 .lower <= std::uint64_t(K);
                            const bool in2 = rank_interval_from_quantile(ctx2, t2, m, q2,
                                                                         Side::one_sided, half)
                                                 .lower <= std::uint64_t(K);
                            common += (in1 && in2);
                        }
                        return char(common < std::size_t(K));
                    });
                report.errored += errored;
                Agg rej;
                for (const auto& rep : reps)
                    if (rep) rej.add(*rep);
                MCRow row;
                row.tags = {{"scheme", scheme_name},
                            {"D", std::to_string(D)},
                            {"case", cs}};
                row.values = {{"reject_rate", rej.mean()},
                              {"se", rej.se_rate()},
                              {"reps", double(rej.count)}};
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

inline MCReport run_t5_t9(const MCOverrides& o, std::uint64_t seed, int workers, bool t9) {
    const std::uint32_t n = std::uint32_t(o.get_long("n", 50));
    const int M = int(o.get_long("M", 3));
    const int L = int(o.get_long("L", 10));
    const std::vector<double> theta_star = score_grid(n);
    const auto p_list =
        o.get_doubles("p", t9 ? std::vector<double>{0.02, 0.05, 0.08}
                              : std::vector<double>{0.02, 0.05, 0.08, 0.11, 0.14});
    const auto estimators =
        o.get_strings("estimator", {"vanilla", "oracle", "two-step", "mle"});
    RepBudget budget{std::uint64_t(o.get_long("reps", 500)), workers};
    const double mle_tol = o.get_double("mle_tol", 1e-8);
    const std::size_t n_track = t9 ? std::size_t(o.get_long("track_items", 5)) : 0;

    struct Rep {
        // per estimator: l2 err, linf err, and (for T9) the first few scores
        std::vector<double> l2, linf;
        std::vector<std::vector<double>> head;
        double diff_l2 = 0.0, diff_linf = 0.0;
    };

    MCReport report;
    report.scenario = t9 ? "T9" : "T5";
    report.replications = budget.reps;
    for (double p : p_list) {
        const std::string cell = report.scenario + "|p=" + std::to_string(p);
        auto [reps, errored] = run_reps<Rep>(budget, seed, cell, [&](std::uint64_t rs) {
            PLConfig cfg;
            cfg.n = n;
            cfg.M = M;
            cfg.p = p;
            cfg.L = L;
            cfg.theta_star = theta_star;
            cfg.seed = derive_seed(rs, 1);
            const PLSample sample = gen_pl_random(cfg);
            const ComparisonDataset ds = dataset_from_rankings(sample.rankings, n);

            Rep rep;
            std::vector<double> two_step_theta, mle_theta;
            for (const std::string& est : estimators) {
                std::vector<double> theta;
                if (est == "mle") {
                    if (two_step_theta.empty())
                        two_step_theta = fit(ds, FitScheme::TwoStep).theta;
                    theta = mle_pl(sample.rankings, n, mle_tol, two_step_theta);
                    mle_theta = theta;
                } else {
                    const FitScheme scheme = parse_fit_scheme(est);
                    FitOptions opt;
                    opt.scheme = scheme;
                    if (scheme == FitScheme::Oracle) opt.oracle_theta = theta_star;
                    theta = fit(ds, opt).theta;
                    if (scheme == FitScheme::TwoStep) two_step_theta = theta;
                }
                double l2 = 0.0, linf = 0.0;
                for (std::uint32_t i = 0; i < n; ++i) {
                    const double e = theta[i] - theta_star[i];
                    l2 += e * e;
                    linf = std::max(linf, std::fabs(e));
                }
                rep.l2.push_back(std::sqrt(l2));
                rep.linf.push_back(linf);
                rep.head.emplace_back(theta.begin(),
                                      theta.begin() + std::ptrdiff_t(n_track));
            }
            if (!two_step_theta.empty() && !mle_theta.empty()) {
                double l2 = 0.0, linf = 0.0;
                for (std::uint32_t i = 0; i < n; ++i) {
                    const double e = two_step_theta[i] - mle_theta[i];
                    l2 += e * e;
                    linf = std::max(linf, std::fabs(e));
                }
                rep.diff_l2 = std::sqrt(l2);
                rep.diff_linf = linf;
            }
            return rep;
        });
        report.errored += errored;
        for (std::size_t e = 0; e < estimators.size(); ++e) {
            Agg l2, linf;
            std::vector<Agg> head(n_track);
            for (const auto& rep : reps)
                if (rep) {
                    l2.add(rep->l2[e]);
                    linf.add(rep->linf[e]);
                    for (std::size_t i = 0; i < n_track; ++i) head[i].add(rep->head[e][i]);
                }
            MCRow row;
            char pbuf[32];
            std::snprintf(pbuf, sizeof pbuf, "%g", p);
            row.tags = {{"p", pbuf}, {"estimator", estimators[e]}};
            if (t9) {
                for (std::size_t i = 0; i < n_track; ++i)
                    row.values.emplace_back("sd" + std::to_string(i + 1), head[i].sd());
                row.values.emplace_back("reps", double(l2.count));
            } else {
                row.values = {{"l2", l2.mean()},     {"l2_sd", l2.sd()},
                              {"linf", linf.mean()}, {"linf_sd", linf.sd()},
                              {"reps", double(l2.count)}};
            }
            report.rows.push_back(std::move(row));
        }
        const bool has_two_step =
            std::find(estimators.begin(), estimators.end(), "two-step") != estimators.end();
        const bool has_mle =
            std::find(estimators.begin(), estimators.end(), "mle") != estimators.end();
        if (!t9 && has_two_step && has_mle) {
            Agg dl2, dlinf;
            for (const auto& rep : reps)
                if (rep) {
                    dl2.add(rep->diff_l2);
                    dlinf.add(rep->diff_linf);
                }
            MCRow row;
            char pbuf[32];
            std::snprintf(pbuf, sizeof pbuf, "%g", p);
            row.tags = {{"p", pbuf}, {"estimator", "two-step-mle"}};
            row.values = {{"l2", dl2.mean()},     {"l2_sd", dl2.sd()},
                          {"linf", dlinf.mean()}, {"linf_sd", dlinf.sd()},
                          {"reps", double(dl2.count)}};
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

inline MCReport run_ppplot(const MCOverrides& o, std::uint64_t seed, int workers) {
    FixedDesign design;
    design.n = std::uint32_t(o.get_long("n", 50));
    design.theta_star = score_grid(design.n);
    design.B = int(o.get_long("B", 500));
    const long D = o.get_long("D", 24000);
    const auto items = to_internal_items(o.get_longs("items", {8, 20, 30}), design.n);
    std::vector<double> default_alphas;
    for (int a = 1; a <= 12; ++a) default_alphas.push_back(0.05 * a);
    const auto alphas = o.get_doubles("alpha", default_alphas);
    const auto schemes = o.get_strings("scheme", {"vanilla"});
    RepBudget budget{std::uint64_t(o.get_long("reps", 2000)), workers};

    MCReport report;
    report.scenario = "PPplot";
    report.replications = budget.reps;
    for (const std::string& scheme_name : schemes) {
        const FitScheme scheme = parse_fit_scheme(scheme_name);
        const std::string cell = "PPplot|D=" + std::to_string(D);
        auto [reps, errored] =
            run_reps<std::vector<char>>(budget, seed, cell, [&](std::uint64_t rs) {
                const ComparisonDataset ds =
                    design.generate(std::uint64_t(D), derive_seed(rs, 1), design.theta_star);
                const SpectralFit f = design.fit_scheme(ds, scheme, design.theta_star);
                const BootstrapContext ctx = make_bootstrap_context(ds, f);
                const MaxSpec spec{items, Side::two_sided};
                auto draws = bootstrap_draws(ctx, design.B, derive_seed(rs, 2), 1,
                                             std::span<const MaxSpec>(&spec, 1));
                std::sort(draws[0].begin(), draws[0].end());
                BootstrapResult res;
                res.sorted_draws = std::move(draws[0]);
                const double t =
                    t_statistic(ctx, f.theta, design.theta_star, items, Side::two_sided);
                std::vector<char> exceed;
                exceed.reserve(alphas.size());
                for (double a : alphas) exceed.push_back(t > res.quantile(a));
                return exceed;
            });
        report.errored += errored;
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            Agg ex;
            for (const auto& rep : reps)
                if (rep) ex.add((*rep)[a]);
            MCRow row;
            char abuf[32];
            std::snprintf(abuf, sizeof abuf, "%g", alphas[a]);
            row.tags = {{"scheme", scheme_name}, {"alpha", abuf}};
            row.values = {{"exceedance", ex.mean()},
                          {"se", ex.se_rate()},
                          {"reps", double(ex.count)}};
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

} // namespace detail

// Runs one simulation scenario. Scenario ids mirror the result tables they
// reproduce: T1 (two-sided rank CIs), T2 (top-K test), T3 (sure screening),
// T_two1/T_two2 (two-sample item / top-K set tests), T5 (estimator errors),
// T9 (estimator efficiency), PPplot (bootstrap calibration curve).
inline MCReport monte_carlo_run(const std::string& scenario, const MCOverrides& overrides,
                                std::uint64_t seed, int workers = 1) {
    if (scenario == "T1") return detail::run_t1(overrides, seed, workers);
    if (scenario == "T2") return detail::run_t2(overrides, seed, workers);
    if (scenario == "T3") return detail::run_t3(overrides, seed, workers);
    if (scenario == "T_two1") return detail::run_two_sample(overrides, seed, workers, "item");
    if (scenario == "T_two2") return detail::run_two_sample(overrides, seed, workers, "topk");
    if (scenario == "T5") return detail::run_t5_t9(overrides, seed, workers, false);
    if (scenario == "T9") return detail::run_t5_t9(overrides, seed, workers, true);
    if (scenario == "PPplot") return detail::run_ppplot(overrides, seed, workers);
    throw ParameterError("unknown scenario '" + scenario +
                         "' (expected T1, T2, T3, T_two1, T_two2, T5, T9, or PPplot)");
}

} // namespace specrank
