#pragma once

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specrank/csv.hpp"
#include "specrank/data.hpp"
#include "specrank/diagnostics.hpp"
#include "specrank/errors.hpp"
#include "specrank/inference.hpp"
#include "specrank/io.hpp"
#include "specrank/montecarlo.hpp"
#include "specrank/spectral.hpp"

namespace specrank {
namespace cli {

struct CommonFlags {
    std::string data, data1, data2;
    std::string break_mode;
    std::string scheme = "vanilla";
    std::string items;
    double alpha = 0.05;
    int B = 500;
    std::uint64_t seed = 0;
    std::string side = "two";
    long K = 0;
    std::string format = "csv";
    int workers = 1;
    std::string scenario;
    std::string D;
    std::string reps;
    std::string emit_ppplot;
    std::string config_file;
    std::string mode;
    bool spectrum = false;
    std::string p, L, n, m, alt_case, estimator;
    // simulate-only overrides; empty means "leave the scenario default"
    std::string sim_B, sim_alpha, sim_K, sim_scheme;
};

namespace detail {

inline BreakMode break_mode_of(const CommonFlags& f) {
    if (f.break_mode.empty()) return BreakMode::none;
    if (f.break_mode == "multilevel") return BreakMode::multilevel;
    throw ParameterError("--break only supports 'multilevel'");
}

inline ComparisonDataset load_dataset(const std::string& path, BreakMode mode, std::istream& in) {
    if (path == "-") return parse_choice_csv(in, mode);
    std::ifstream file(path);
    if (!file) throw ValidationError("cannot open data file '" + path + "'");
    return parse_choice_csv(file, mode);
}

struct SchemeFlag {
    FitScheme scheme;
    std::vector<double> oracle_theta;
};

inline SchemeFlag parse_scheme(const std::string& raw, std::uint32_t n_items) {
    SchemeFlag out;
    if (raw == "constant") {
        out.scheme = FitScheme::Constant;
    } else if (raw == "vanilla") {
        out.scheme = FitScheme::SetSize;
    } else if (raw == "two-step") {
        out.scheme = FitScheme::TwoStep;
    } else if (raw.rfind("oracle:", 0) == 0) {
        out.scheme = FitScheme::Oracle;
        const std::string path = raw.substr(7);
        std::ifstream file(path);
        if (!file) throw ValidationError("cannot open oracle score file '" + path + "'");
        out.oracle_theta = read_theta_file(file);
        if (out.oracle_theta.size() != n_items)
            throw ValidationError("oracle score file has " +
                                  std::to_string(out.oracle_theta.size()) + " entries for " +
                                  std::to_string(n_items) + " items");
    } else {
        throw ParameterError("--scheme must be constant, vanilla, oracle:<file>, or two-step");
    }
    return out;
}

inline SpectralFit fit_for(const ComparisonDataset& ds, const CommonFlags& f) {
    const SchemeFlag s = parse_scheme(f.scheme, ds.n_items);
    FitOptions opt;
    opt.scheme = s.scheme;
    opt.oracle_theta = s.oracle_theta;
    return fit(ds, opt);
}

inline std::vector<std::uint32_t> parse_items(const ComparisonDataset& ds,
                                              const std::string& raw) {
    std::vector<std::uint32_t> out;
    for (const std::string& tok : specrank::detail::split(raw, ','))
        out.push_back(resolve_item(ds, specrank::detail::trim(tok)));
    if (out.empty()) throw ParameterError("--items needs at least one item");
    return out;
}

inline Grouping grouping_for(const ComparisonDataset& ds) {
    return ds.has_nontrivial_groups() ? Grouping::per_hyperedge : Grouping::per_comparison;
}

inline nlohmann::json interval_json(const ComparisonDataset& ds, const SpectralFit& f,
                                    const RankInterval& r) {
    const std::vector<std::uint32_t> ranks = point_ranks(f.theta);
    return nlohmann::json{{"item", ds.label_of(r.item)}, {"theta", f.theta[r.item]},
                          {"rank", ranks[r.item]},       {"lower", r.lower},
                          {"upper", r.upper},            {"alpha", r.alpha},
                          {"side", side_name(r.side)}};
}

inline int cmd_fit(const CommonFlags& f, std::istream& in, std::ostream& out) {
    const ComparisonDataset ds = load_dataset(f.data, break_mode_of(f), in);
    const SpectralFit sf = fit_for(ds, f);
    if (f.format == "json") {
        nlohmann::json j{{"n", ds.n_items},
                         {"scheme", fit_scheme_name(sf.selector)},
                         {"d", sf.d},
                         {"iterations", sf.iterations},
                         {"residual", sf.residual},
                         {"theta", sf.theta},
                         {"pi", sf.pi_hat}};
        if (!ds.labels.empty()) j["labels"] = ds.labels;
        out << j.dump(2) << "\n";
    } else {
        write_fit_csv(out, sf, ds);
    }
    return 0;
}

inline int cmd_ci(const CommonFlags& f, std::istream& in, std::ostream& out) {
    const ComparisonDataset ds = load_dataset(f.data, break_mode_of(f), in);
    const SpectralFit sf = fit_for(ds, f);
    BootstrapSpec spec;
    spec.B = f.B;
    spec.seed = f.seed;
    spec.workers = f.workers;
    spec.grouping = grouping_for(ds);

    std::vector<std::uint32_t> requested;
    if (!f.items.empty()) requested = parse_items(ds, f.items);

    std::vector<RankInterval> cis;
    if (f.side == "two" || f.side == "one") {
        if (requested.empty()) throw ParameterError("--items is required for --side two|one");
        spec.side = (f.side == "two") ? Side::two_sided : Side::one_sided;
        cis = rank_cis(ds, sf, requested, f.alpha, spec);
    } else if (f.side == "uniform-one") {
        spec.side = Side::one_sided;
        std::vector<std::uint32_t> all(ds.n_items);
        for (std::uint32_t i = 0; i < ds.n_items; ++i) all[i] = i;
        const std::vector<RankInterval> full = rank_cis(ds, sf, all, f.alpha, spec);
        if (requested.empty()) {
            cis = full;
        } else {
            for (std::uint32_t item : requested) cis.push_back(full[item]);
        }
    } else {
        throw ParameterError("--side must be two, one, or uniform-one");
    }

    if (f.format == "json") {
        nlohmann::json rows = nlohmann::json::array();
        for (const RankInterval& r : cis) rows.push_back(interval_json(ds, sf, r));
        out << rows.dump(2) << "\n";
    } else {
        write_interval_csv(out, ds, sf, cis);
    }
    return 0;
}

inline int cmd_test_topk(const CommonFlags& f, std::istream& in, std::ostream& out) {
    const ComparisonDataset ds = load_dataset(f.data, break_mode_of(f), in);
    if (f.K < 1) throw ParameterError("--K is required and must be >= 1");
    const std::vector<std::uint32_t> requested = parse_items(ds, f.items);
    if (requested.size() != 1) throw ParameterError("test-topk expects exactly one item");
    const SpectralFit sf = fit_for(ds, f);
    BootstrapSpec spec;
    spec.B = f.B;
    spec.seed = f.seed;
    spec.workers = f.workers;
    spec.grouping = grouping_for(ds);
    const TestDecision t =
        test_top_k(ds, sf, requested.front(), std::uint32_t(f.K), f.alpha, spec);
    if (f.format == "json") {
        nlohmann::json j{{"test", t.kind},
                         {"item", ds.label_of(requested.front())},
                         {"K", f.K},
                         {"alpha", t.alpha},
                         {"reject", t.reject},
                         {"lower", t.intervals.front().lower}};
        out << j.dump(2) << "\n";
    } else {
        out << "item,K,alpha,lower,reject\n";
        out << ds.label_of(requested.front()) << "," << f.K << "," << t.alpha << ","
            << t.intervals.front().lower << "," << (t.reject ? 1 : 0) << "\n";
    }
    return 0;
}

inline int cmd_screen(const CommonFlags& f, std::istream& in, std::ostream& out) {
    const ComparisonDataset ds = load_dataset(f.data, break_mode_of(f), in);
    if (f.K < 1) throw ParameterError("--K is required and must be >= 1");
    const SpectralFit sf = fit_for(ds, f);
    BootstrapSpec spec;
    spec.B = f.B;
    spec.seed = f.seed;
    spec.workers = f.workers;
    spec.grouping = grouping_for(ds);
    spec.side = Side::one_sided;
    std::vector<std::uint32_t> all(ds.n_items);
    for (std::uint32_t i = 0; i < ds.n_items; ++i) all[i] = i;
    const std::vector<RankInterval> cis = rank_cis(ds, sf, all, f.alpha, spec);
    std::vector<RankInterval> members;
    for (const RankInterval& r : cis)
        if (r.lower <= std::uint32_t(f.K)) members.push_back(r);
    const std::vector<std::uint32_t> ranks = point_ranks(sf.theta);
    std::sort(members.begin(), members.end(),
              [&](const RankInterval& a, const RankInterval& b) {
                  return ranks[a.item] < ranks[b.item];
              });
    if (f.format == "json") {
        nlohmann::json set = nlohmann::json::array();
        for (const RankInterval& r : members) set.push_back(ds.label_of(r.item));
        nlohmann::json j{{"K", f.K}, {"alpha", f.alpha}, {"size", members.size()}, {"set", set}};
        out << j.dump(2) << "\n";
    } else {
        write_interval_csv(out, ds, sf, members);
    }
    return 0;
}

inline int cmd_two_sample(const CommonFlags& f, std::istream& in, std::ostream& out) {
    const BreakMode bm = break_mode_of(f);
    const ComparisonDataset ds1 = load_dataset(f.data1, bm, in);
    const ComparisonDataset ds2 = load_dataset(f.data2, bm, in);
    const SchemeFlag s = parse_scheme(f.scheme, ds1.n_items);
    if (s.scheme == FitScheme::Oracle)
        throw ParameterError("two-sample mode does not take oracle weights");
    BootstrapSpec spec;
    spec.B = f.B;
    spec.seed = f.seed;
    spec.workers = f.workers;
    spec.grouping = grouping_for(ds1);

    TestDecision t;
    std::string target;
    if (f.mode.rfind("item:", 0) == 0) {
        target = f.mode.substr(5);
        const std::uint32_t m = resolve_item(ds1, target);
        t = two_sample_item_test(ds1, ds2, m, f.alpha, spec, s.scheme);
    } else if (f.mode.rfind("topk:", 0) == 0) {
        target = f.mode.substr(5);
        const long K = std::stol(target);
        if (K < 1) throw ParameterError("topk mode needs K >= 1");
        t = two_sample_topk_test(ds1, ds2, std::uint32_t(K), f.alpha, spec, s.scheme);
    } else {
        throw ParameterError("--mode must be item:<m> or topk:<K>");
    }

    if (f.format == "json") {
        nlohmann::json j{{"test", t.kind}, {"target", target}, {"alpha", t.alpha},
                         {"reject", t.reject}};
        if (!t.intervals.empty()) {
            j["interval1"] = {t.intervals[0].lower, t.intervals[0].upper};
            j["interval2"] = {t.intervals[1].lower, t.intervals[1].upper};
        }
        if (!t.set1.empty() || !t.set2.empty()) {
            nlohmann::json s1 = nlohmann::json::array(), s2 = nlohmann::json::array();
            for (std::uint32_t i : t.set1) s1.push_back(ds1.label_of(i));
            for (std::uint32_t i : t.set2) s2.push_back(ds1.label_of(i));
            j["set1"] = s1;
            j["set2"] = s2;
        }
        out << j.dump(2) << "\n";
    } else {
        out << "test,target,alpha,reject\n";
        out << t.kind << "," << target << "," << t.alpha << "," << (t.reject ? 1 : 0) << "\n";
        if (!t.intervals.empty()) {
            out << "sample,lower,upper\n";
            out << "1," << t.intervals[0].lower << "," << t.intervals[0].upper << "\n";
            out << "2," << t.intervals[1].lower << "," << t.intervals[1].upper << "\n";
        }
    }
    return 0;
}

inline int cmd_simulate(const CommonFlags& f, std::ostream& out, std::ostream& err) {
    if (f.scenario.empty()) throw ParameterError("--scenario is required");
    MCOverrides o;
    if (!f.config_file.empty()) {
        std::ifstream file(f.config_file);
        if (!file) throw ValidationError("cannot open config file '" + f.config_file + "'");
        o = parse_mc_config(file);
    }
    auto maybe = [&](const char* key, const std::string& v) {
        if (!v.empty()) o.set(key, v);
    };
    maybe("D", f.D);
    maybe("reps", f.reps);
    maybe("items", f.items);
    maybe("p", f.p);
    maybe("L", f.L);
    maybe("n", f.n);
    maybe("m", f.m);
    maybe("case", f.alt_case);
    maybe("estimator", f.estimator);
    maybe("K", f.sim_K);
    maybe("B", f.sim_B);
    maybe("alpha", f.sim_alpha);
    maybe("scheme", f.sim_scheme);

    err << "running scenario " << f.scenario << " (seed " << f.seed << ", workers " << f.workers
        << ")\n";
    const MCReport report = monte_carlo_run(f.scenario, o, f.seed, f.workers);
    if (f.format == "json") {
        nlohmann::json rows = nlohmann::json::array();
        for (const MCRow& r : report.rows) {
            nlohmann::json jr;
            for (const auto& [k, v] : r.tags) jr[k] = v;
            for (const auto& [k, v] : r.values) jr[k] = v;
            rows.push_back(jr);
        }
        nlohmann::json j{{"scenario", report.scenario},
                         {"replications", report.replications},
                         {"errored", report.errored},
                         {"rows", rows}};
        out << j.dump(2) << "\n";
    } else {
        out << report.to_csv();
    }
    if (!f.emit_ppplot.empty()) {
        if (report.scenario != "PPplot")
            throw ParameterError("--emit-ppplot requires --scenario PPplot");
        std::ofstream file(f.emit_ppplot);
        if (!file) throw ValidationError("cannot write '" + f.emit_ppplot + "'");
        file << "alpha,exceedance\n";
        for (const MCRow& r : report.rows)
            file << r.tag("alpha") << "," << r.value("exceedance") << "\n";
    }
    return 0;
}

inline int cmd_diagnose(const CommonFlags& f, std::istream& in, std::ostream& out) {
    const ComparisonDataset ds = load_dataset(f.data, break_mode_of(f), in);
    const GraphDiagnostics g = check_rankability(ds, f.spectrum);
    if (f.format == "json") {
        nlohmann::json j{{"n_items", g.n_items},
                         {"comparisons", ds.comparisons.size()},
                         {"n_dagger", g.n_dagger},
                         {"n_ddagger", g.n_ddagger},
                         {"strongly_connected", g.strongly_connected},
                         {"ratio_check", g.ratio_check},
                         {"rankable", g.rankable()},
                         {"failures", g.failures}};
        if (g.omega_spectrum)
            j["omega_spectrum"] = {{"lambda_min_perp", g.omega_spectrum->first},
                                   {"lambda_max", g.omega_spectrum->second}};
        out << j.dump(2) << "\n";
    } else {
        out << "key,value\n";
        out << "n_items," << g.n_items << "\n";
        out << "comparisons," << ds.comparisons.size() << "\n";
        out << "n_dagger," << g.n_dagger << "\n";
        out << "n_ddagger," << g.n_ddagger << "\n";
        out << "strongly_connected," << (g.strongly_connected ? 1 : 0) << "\n";
        out << "ratio_check," << g.ratio_check << "\n";
        out << "rankable," << (g.rankable() ? 1 : 0) << "\n";
        if (g.omega_spectrum) {
            out << "lambda_min_perp," << g.omega_spectrum->first << "\n";
            out << "lambda_max," << g.omega_spectrum->second << "\n";
        }
        for (const std::string& msg : g.failures) out << "failure," << msg << "\n";
    }
    return 0;
}

} // namespace detail

// Entry point shared by the binary and the tests. Returns the process exit
// code: 0 success, 1 validation/usage error, 2 numeric or fit failure.
inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
               std::ostream& err) {
    CLI::App app{"spectral ranking estimation and rank inference for multiway comparisons"};
    app.require_subcommand(1);
    CommonFlags f;

    auto add_common = [&](CLI::App* cmd, bool needs_data) {
        if (needs_data) cmd->add_option("--data", f.data, "comparison CSV ('-' for stdin)")
                ->required();
        cmd->add_option("--break", f.break_mode, "ranking ingestion mode (multilevel)");
        cmd->add_option("--scheme", f.scheme,
                        "weighting: constant|vanilla|oracle:<file>|two-step");
        cmd->add_option("--format", f.format, "output format: csv|json")
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--seed", f.seed, "random seed");
        cmd->add_option("--workers", f.workers, "parallel workers")->check(CLI::Range(1, 256));
    };

    CLI::App* c_fit = app.add_subcommand("fit", "estimate preference scores");
    add_common(c_fit, true);

    CLI::App* c_ci = app.add_subcommand("ci", "rank confidence intervals");
    add_common(c_ci, true);
    c_ci->add_option("--items", f.items, "comma-separated items of interest");
    c_ci->add_option("--alpha", f.alpha, "significance level");
    c_ci->add_option("--B", f.B, "bootstrap draws");
    c_ci->add_option("--side", f.side, "two|one|uniform-one");

    CLI::App* c_topk = app.add_subcommand("test-topk", "test H0: rank(m) <= K");
    add_common(c_topk, true);
    c_topk->add_option("--items", f.items, "the single item m")->required();
    c_topk->add_option("--K", f.K, "top-K threshold")->required();
    c_topk->add_option("--alpha", f.alpha, "significance level");
    c_topk->add_option("--B", f.B, "bootstrap draws");

    CLI::App* c_screen = app.add_subcommand("screen", "top-K sure-screening set");
    add_common(c_screen, true);
    c_screen->add_option("--K", f.K, "top-K threshold")->required();
    c_screen->add_option("--alpha", f.alpha, "significance level");
    c_screen->add_option("--B", f.B, "bootstrap draws");

    CLI::App* c_two = app.add_subcommand("two-sample", "two-sample rank tests");
    c_two->add_option("--data1", f.data1, "first sample CSV")->required();
    c_two->add_option("--data2", f.data2, "second sample CSV")->required();
    c_two->add_option("--break", f.break_mode, "ranking ingestion mode (multilevel)");
    c_two->add_option("--scheme", f.scheme, "weighting: constant|vanilla|two-step");
    c_two->add_option("--mode", f.mode, "item:<m> or topk:<K>")->required();
    c_two->add_option("--alpha", f.alpha, "significance level");
    c_two->add_option("--B", f.B, "bootstrap draws");
    c_two->add_option("--seed", f.seed, "random seed");
    c_two->add_option("--workers", f.workers, "parallel workers");
    c_two->add_option("--format", f.format, "output format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI::App* c_sim = app.add_subcommand("simulate", "Monte Carlo scenario runner");
    c_sim->add_option("--scenario", f.scenario,
                      "T1|T2|T3|T_two1|T_two2|T5|T9|PPplot")->required();
    c_sim->add_option("--config", f.config_file, "key=value override file");
    c_sim->add_option("--D", f.D, "comparison count(s), comma-separated");
    c_sim->add_option("--reps", f.reps, "outer replications");
    c_sim->add_option("--B", f.sim_B, "bootstrap draws");
    c_sim->add_option("--K", f.sim_K, "top-K threshold(s)");
    c_sim->add_option("--items", f.items, "items of interest (1-based grid positions)");
    c_sim->add_option("--alpha", f.sim_alpha, "significance level(s)");
    c_sim->add_option("--p", f.p, "edge sampling probabilities");
    c_sim->add_option("--L", f.L, "comparisons per sampled edge");
    c_sim->add_option("--n", f.n, "number of items");
    c_sim->add_option("--m", f.m, "tested item (1-based grid position)");
    c_sim->add_option("--case", f.alt_case, "two-sample cases (null,alter1..alter4)");
    c_sim->add_option("--estimator", f.estimator, "estimator list for T5/T9");
    c_sim->add_option("--scheme", f.sim_scheme, "weighting scheme(s)");
    c_sim->add_option("--seed", f.seed, "random seed");
    c_sim->add_option("--workers", f.workers, "parallel workers");
    c_sim->add_option("--format", f.format, "output format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    c_sim->add_option("--emit-ppplot", f.emit_ppplot, "write (alpha, exceedance) pairs here");

    CLI::App* c_diag = app.add_subcommand("diagnose", "comparison-graph diagnostics");
    add_common(c_diag, true);
    c_diag->add_flag("--spectrum", f.spectrum, "also compute the Omega spectrum");

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.push_back("specrank");
    for (const std::string& a : args) argv_store.push_back(a);
    std::vector<char*> argv;
    for (std::string& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return 1;
    }

    try {
        if (c_fit->parsed()) return detail::cmd_fit(f, in, out);
        if (c_ci->parsed()) return detail::cmd_ci(f, in, out);
        if (c_topk->parsed()) return detail::cmd_test_topk(f, in, out);
        if (c_screen->parsed()) return detail::cmd_screen(f, in, out);
        if (c_two->parsed()) return detail::cmd_two_sample(f, in, out);
        if (c_sim->parsed()) return detail::cmd_simulate(f, out, err);
        if (c_diag->parsed()) return detail::cmd_diagnose(f, in, out);
        err << "error: no subcommand\n";
        return 1;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const FitError& e) {
        err << "fit error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace cli
} // namespace specrank
