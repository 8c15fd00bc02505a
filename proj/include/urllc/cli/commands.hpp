#pragma once

// Subcommands of the urllc tool. run() parses a command line, computes the
// requested table in memory, then writes it with its manifest. Exit codes:
// 0 success, 2 bad config or usage, 3 bad data, 4 every target infeasible.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "urllc/cli/config.hpp"
#include "urllc/cli/csv.hpp"
#include "urllc/cli/manifest.hpp"
#include "urllc/cli/plot.hpp"
#include "urllc/montecarlo.hpp"
#include "urllc/optimizer.hpp"
#include "urllc/relaying.hpp"

namespace urllc::cli {

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kInfeasible = 4 };

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> samples;
    std::optional<std::string> scheme;
    std::optional<std::string> policy;
    std::optional<double> kappa;
    std::optional<std::string> eps_grid;
    std::optional<std::string> gamma_y;
    std::optional<std::string> mrc_n;
    std::optional<std::string> mu_log;
    // plot
    std::string csv_path;
    std::string figure;
    // replay
    std::string manifest_path;
};

struct Produced {
    std::string subcommand;
    std::string input_text;
    RunConfig cfg;
    std::vector<OutputFile> outputs;
    int exit_code = kOk;
    std::vector<std::string> notes;  // one-line summaries for the terminal
};

namespace detail {

inline void apply_overrides(RunConfig& cfg, const Options& o) {
    auto& sc = cfg.scenario;
    if (o.seed) cfg.simulate.seed = *o.seed;
    if (o.samples) {
        if (*o.samples < 1) throw ConfigError(0, "--samples must be >= 1");
        cfg.simulate.samples = *o.samples;
    }
    if (o.scheme) {
        const Scheme s = parse_scheme(*o.scheme);
        cfg.sweep.schemes = {s};
        cfg.optimizer.space.scheme = s;
    }
    if (o.kappa && !(*o.kappa >= 1.0)) throw ConfigError(0, "--kappa must be >= 1");
    if (o.policy) {
        const PilotKind k = parse_policy(*o.policy);
        cfg.sweep.policies = {k};
        if (k != sc.policy.kind) sc.pilots.reset();
        if (k == PilotKind::ppc) {
            sc.policy = PilotPolicy::ppc(sc.policy.kind == PilotKind::ppc ? sc.policy.kappa : 3.0);
        } else {
            sc.policy = k == PilotKind::apc ? PilotPolicy::apc() : PilotPolicy::perfect_csi();
        }
    }
    if (o.kappa) {
        if (sc.policy.kind != PilotKind::ppc) throw ConfigError(0, "--kappa only applies to the ppc policy");
        sc.policy.kappa = *o.kappa;
        cfg.sweep.kappas = {*o.kappa};
    }
    if (o.eps_grid) cfg.optimizer.eps_grid = parse_eps_grid(*o.eps_grid);
    if (o.gamma_y) sc.conventions.gamma_y = parse_gamma_y(*o.gamma_y);
    if (o.mrc_n) sc.conventions.mrc_n = parse_mrc_n(*o.mrc_n);
    if (o.mu_log) sc.conventions.mu_log = parse_mu_log(*o.mu_log);
    try {
        sc.validate();
        cfg.optimizer.space.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(0, e.what());
    }
}

// Scenario for one sweep row: the base scenario under another policy.
inline ScenarioConfig with_policy(const ScenarioConfig& base, PilotKind kind, double ppc_kappa) {
    ScenarioConfig c = base;
    if (kind != base.policy.kind) c.pilots.reset();
    switch (kind) {
        case PilotKind::apc: c.policy = PilotPolicy::apc(); break;
        case PilotKind::ppc: c.policy = PilotPolicy::ppc(ppc_kappa); break;
        case PilotKind::perfect_csi: c.policy = PilotPolicy::perfect_csi(); break;
    }
    return c;
}

inline double ppc_kappa(const RunConfig& cfg) {
    return cfg.scenario.policy.kind == PilotKind::ppc ? cfg.scenario.policy.kappa : cfg.sweep.kappas.front();
}

inline Produced sweep_snr(const RunConfig& cfg) {
    Produced p;
    std::vector<double> grid = cfg.sweep.snr_db;
    if (grid.empty()) grid = ::urllc::cli::detail::to_grid("-5:1:25", 0);
    CsvWriter csv("sweep_snr", 1, {"snr_db", "scheme", "policy", "epsilon", "n_p_used", "gamma_eff"});
    for (double db : grid) {
        for (Scheme scheme : cfg.sweep.schemes) {
            for (PilotKind kind : cfg.sweep.policies) {
                ScenarioConfig c = with_policy(cfg.scenario, kind, ppc_kappa(cfg));
                c.power = Snr::from_db(db);
                const auto budget = link_budget(c);
                const Probability eps = outage(c, scheme);
                csv.row({fmt_num(db), to_string(scheme), to_string(kind), fmt_prob(eps), std::to_string(budget.pilots),
                         fmt_num(budget.z.linear())});
            }
        }
    }
    p.notes.push_back("sweep_snr: " + std::to_string(csv.rows()) + " rows");
    p.outputs.push_back({"sweep_snr.csv", csv.str()});
    return p;
}

inline Produced sweep_kappa(const RunConfig& cfg) {
    Produced p;
    std::vector<int> ns = cfg.sweep.n;
    if (ns.empty()) ns = ::urllc::cli::detail::to_int_grid("100:50:1000", 0);
    CsvWriter csv("sweep_kappa", 1, {"n", "kappa", "n_p_opt", "gamma_eff"});
    const Snr power = cfg.scenario.power;
    for (int n : ns) {
        for (double kappa : cfg.sweep.kappas) {
            const int np = optimal_pilot_count(n, kappa, power);
            csv.row({std::to_string(n), fmt_num(kappa), std::to_string(np),
                     fmt_num(ppc_effective_snr(n, np, kappa, power).linear())});
        }
    }
    p.notes.push_back("sweep_kappa: " + std::to_string(csv.rows()) + " rows");
    p.outputs.push_back({"sweep_kappa.csv", csv.str()});
    return p;
}

inline Produced optimize(const RunConfig& cfg, Objective objective) {
    Produced p;
    std::vector<Probability> targets;
    for (double e : cfg.optimizer.eps_grid) targets.push_back(Probability(e));
    const auto points = frontier(cfg.scenario, targets, objective, cfg.optimizer.space);
    const std::string name = objective == Objective::latency ? "latency" : "goodput";
    CsvWriter csv(name, 1,
                  {"epsilon_target", "reliability_pct", "n_opt", "n_p_opt", "latency_ms", "goodput_bpcu", "feasible",
                   "achieved_epsilon"});
    bool any = false;
    for (const auto& pt : points) {
        any = any || pt.feasible;
        const double rel = 100.0 * (1.0 - pt.eps_target.value());
        if (pt.feasible) {
            csv.row({fmt_prob(pt.eps_target), fmt_fixed(rel, 6), std::to_string(pt.n_opt), std::to_string(pt.n_p_opt),
                     fmt_num(pt.latency_s * 1e3), fmt_num(pt.goodput), "1", fmt_prob(pt.achieved_eps)});
        } else {
            csv.row({fmt_prob(pt.eps_target), fmt_fixed(rel, 6), "0", "0", "nan", "0", "0",
                     fmt_prob(pt.achieved_eps)});
        }
    }
    p.outputs.push_back({name + ".csv", csv.str()});
    p.notes.push_back(name + ": " + std::to_string(points.size()) + " targets");
    if (!any) {
        p.exit_code = kInfeasible;
        p.notes.push_back("no target is feasible within n in [" + std::to_string(cfg.optimizer.space.n.min) + ", " +
                          std::to_string(cfg.optimizer.space.n.max) + "]");
    }
    return p;
}

inline std::string z_score(double est, double ref, double se) {
    const double diff = std::abs(est - ref);
    if (se > 0.0) return fmt_num(diff / se);
    return diff == 0.0 ? "0" : "inf";
}

inline Produced simulate(const RunConfig& cfg) {
    Produced p;
    SimSpec spec;
    spec.scenario = cfg.scenario;
    spec.samples = cfg.simulate.samples;
    spec.seed = cfg.simulate.seed;
    spec.mode = cfg.simulate.mode;
    spec.workers = cfg.simulate.workers;
    spec.importance = cfg.simulate.importance;

    if (spec.mode == SimMode::estimator_check) {
        CsvWriter csv("simulate_estimator", 1,
                      {"pilot_energy", "quantity", "empirical", "std_err", "analytic", "z_score", "samples", "seed"});
        std::vector<std::optional<double>> energies;
        for (double e : cfg.simulate.pilot_energies) energies.emplace_back(e);
        if (energies.empty()) energies.emplace_back(std::nullopt);
        for (const auto& e : energies) {
            spec.pilot_energy = e;
            const auto s = simulate_estimator(spec);
            const auto ref = mmse_variances(s.pilot_energy);
            csv.row({fmt_num(s.pilot_energy), "sigma2_hat", fmt_num(s.sigma2_hat), fmt_num(s.se_hat),
                     fmt_num(ref.sigma2_hat), z_score(s.sigma2_hat, ref.sigma2_hat, s.se_hat),
                     std::to_string(s.samples), std::to_string(spec.seed)});
            csv.row({fmt_num(s.pilot_energy), "sigma2_tilde", fmt_num(s.sigma2_tilde), fmt_num(s.se_tilde),
                     fmt_num(ref.sigma2_tilde), z_score(s.sigma2_tilde, ref.sigma2_tilde, s.se_tilde),
                     std::to_string(s.samples), std::to_string(spec.seed)});
        }
        p.outputs.push_back({"simulate.csv", csv.str()});
        p.notes.push_back("simulate: estimator check at " + std::to_string(energies.size()) + " pilot energies");
        return p;
    }

    const auto r = simulate_outage(spec);
    const double ref = analytic_reference(spec).value();
    CsvWriter csv("simulate", 1,
                  {"mode", "policy", "snr_db", "samples", "seed", "importance_sampled", "eps_hat", "std_err", "analytic",
                   "z_score"});
    csv.row({to_string(spec.mode), to_string(spec.scenario.policy.kind), fmt_num(spec.scenario.power.db()),
             std::to_string(r.samples_used), std::to_string(spec.seed), r.importance_sampled ? "1" : "0",
             fmt_prob(r.estimate), fmt_prob(r.std_err), fmt_prob(ref), z_score(r.estimate.value(), ref, r.std_err)});
    p.outputs.push_back({"simulate.csv", csv.str()});
    p.notes.push_back("simulate: eps_hat=" + fmt_prob(r.estimate) + " std_err=" + fmt_prob(r.std_err) +
                      " analytic=" + fmt_prob(ref));
    return p;
}

inline Figure parse_figure(const std::string& s) {
    if (s == "fig2") return Figure::fig2;
    if (s == "fig3") return Figure::fig3;
    if (s == "fig4") return Figure::fig4;
    if (s == "fig5") return Figure::fig5;
    throw ConfigError(0, "unknown figure '" + s + "' (fig2, fig3, fig4, fig5)");
}

}  // namespace detail

/// Computes the outputs of one subcommand without touching the filesystem
/// beyond reading inputs.
inline Produced produce(const std::string& sub, const Options& o) {
    if (sub == "plot") {
        const Figure fig = detail::parse_figure(o.figure);
        Produced p;
        std::ifstream f(o.csv_path, std::ios::binary);
        if (!f) throw DataError("cannot read '" + o.csv_path + "'");
        std::ostringstream ss;
        ss << f.rdbuf();
        p.input_text = ss.str();
        const auto table = parse_csv(p.input_text);
        const std::string stem = to_string(fig);
        p.outputs.push_back({stem + ".py", plot_script(table, fig, stem + ".svg")});
        p.notes.push_back("plot: wrote " + stem + ".py (run it to render " + stem + ".svg)");
        p.subcommand = sub;
        return p;
    }

    std::string text;
    if (!o.config_path.empty()) text = read_file(o.config_path);
    RunConfig cfg = parse_config(text);
    detail::apply_overrides(cfg, o);

    Produced p;
    try {
        if (sub == "sweep-snr") p = detail::sweep_snr(cfg);
        else if (sub == "sweep-kappa") p = detail::sweep_kappa(cfg);
        else if (sub == "latency") p = detail::optimize(cfg, Objective::latency);
        else if (sub == "goodput") p = detail::optimize(cfg, Objective::goodput);
        else if (sub == "simulate") p = detail::simulate(cfg);
        else throw ConfigError(0, "unknown subcommand " + sub);
    } catch (const std::domain_error& e) {
        throw DataError(e.what());
    }
    p.subcommand = sub;
    p.input_text = std::move(text);
    p.cfg = std::move(cfg);
    return p;
}

inline std::string manifest_name(const Produced& p) {
    const auto& first = p.outputs.front().name;
    return first.substr(0, first.rfind('.')) + ".manifest.json";
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write '" + path.string() + "'");
    f << content;
    if (!f) throw DataError("write failed for '" + path.string() + "'");
}

namespace detail {

inline void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config_path, "scenario file (key = value with [sections])")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "Monte Carlo seed");
    sub->add_option("--samples", o.samples, "Monte Carlo samples");
    sub->add_option("--scheme", o.scheme, "dt or df")->check(CLI::IsMember({"dt", "df"}));
    sub->add_option("--policy", o.policy, "apc, ppc or pcsi")->check(CLI::IsMember({"apc", "ppc", "pcsi"}));
    sub->add_option("--kappa", o.kappa, "peak pilot power factor");
    sub->add_option("--eps-grid", o.eps_grid, "outage targets, comma list or start:step:stop");
    sub->add_option("--gamma-y-mode", o.gamma_y, "drd or dsd")->check(CLI::IsMember({"drd", "dsd"}));
    sub->add_option("--mrc-n-mode", o.mrc_n, "relay or combined")->check(CLI::IsMember({"relay", "combined"}));
    sub->add_option("--mu-log-mode", o.mu_log, "bits or nats")->check(CLI::IsMember({"bits", "nats"}));
}

inline std::string blob_of(const nlohmann::json& manifest, const std::string& name) {
    for (const auto& f : manifest.at("outputs")) {
        if (f.at("path") == name) return f.at("blob");
    }
    return {};
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Re-executes the command recorded in a manifest in memory and compares
/// the output hashes.
inline int replay(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        err << "replay: " << e.what() << "\n";
        return kDataError;
    }
    std::vector<std::string> argv = m.at("command_line").get<std::vector<std::string>>();
    if (argv.size() < 2 || argv[1] == "replay") {
        err << "replay: manifest does not record a replayable command\n";
        return kDataError;
    }
    argv.emplace_back("--dry-run");
    std::ostringstream produced;
    const int code = run(argv, produced, err);
    if (code != kOk && code != kInfeasible) return code;
    // run() in dry-run mode prints "<path> <blob>" per output.
    std::istringstream lines(produced.str());
    std::string name, blob;
    int mismatches = 0;
    int compared = 0;
    while (lines >> name >> blob) {
        ++compared;
        const auto expect = detail::blob_of(m, name);
        if (expect != blob) {
            ++mismatches;
            err << "replay: " << name << " differs (" << blob << " vs recorded " << expect << ")\n";
        } else {
            out << "replay: " << name << " matches " << blob << "\n";
        }
    }
    if (compared == 0 || mismatches) return kDataError;
    return kOk;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Link-level analysis of short-packet relaying with pilot-based channel estimation", "urllc"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Options o;
    bool dry_run = false;

    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {{"sweep-snr", "outage versus SNR for each scheme and pilot policy"},
                        {"sweep-kappa", "optimal pilot count versus blocklength and kappa"},
                        {"latency", "minimum latency for each outage target"},
                        {"goodput", "maximum goodput for each outage target"},
                        {"simulate", "Monte Carlo check of the analytic outage or the estimator"}};
    for (const auto& s : subs) {
        auto* sub = app.add_subcommand(s.name, s.help);
        detail::add_common(sub, o);
        sub->add_flag("--dry-run", dry_run, "print output hashes instead of writing files");
    }
    auto* plot = app.add_subcommand("plot", "emit a plot script for a table");
    plot->add_option("--csv", o.csv_path, "table written by another subcommand")->required();
    plot->add_option("--figure", o.figure, "fig2, fig3, fig4 or fig5")
        ->required()
        ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5"}));
    plot->add_option("--out", o.out_dir, "output directory")->capture_default_str();
    plot->add_flag("--dry-run", dry_run, "print output hashes instead of writing files");
    auto* rep = app.add_subcommand("replay", "re-run a manifest and compare output hashes");
    rep->add_option("manifest", o.manifest_path, "manifest written by an earlier run")->required();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kConfigError;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "replay") return replay(o.manifest_path, out, err);

    Produced p;
    try {
        p = produce(sub, o);
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return kConfigError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kDataError;
    }

    std::vector<std::string> recorded = args;
    std::erase(recorded, std::string("--dry-run"));
    const auto manifest = make_manifest(recorded, sub, p.input_text, p.cfg, p.outputs);
    if (dry_run) {
        for (const auto& f : p.outputs) out << f.name << " " << git_blob_id(f.content) << "\n";
        return p.exit_code;
    }
    try {
        std::filesystem::create_directories(o.out_dir);
        for (const auto& f : p.outputs) write_file(std::filesystem::path(o.out_dir) / f.name, f.content);
        write_file(std::filesystem::path(o.out_dir) / manifest_name(p), manifest.dump(2) + "\n");
    } catch (const std::filesystem::filesystem_error& e) {
        err << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kDataError;
    }
    for (const auto& n : p.notes) out << n << "\n";
    return p.exit_code;
}

}  // namespace urllc::cli
