// Acceptance gate. One PASS/FAIL line per criterion; exit status is nonzero if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "CLI11.hpp"
#include "urllc/cli/commands.hpp"
#include "urllc/montecarlo.hpp"
#include "urllc/optimizer.hpp"

using namespace urllc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string conventions_line(const Conventions& c) {
    return std::string("mu_log=") + to_string(c.mu_log) + " gamma_y=" + to_string(c.gamma_y) +
           " mrc_n=" + to_string(c.mrc_n) + " power=" + to_string(c.power) +
           " link_model=" + to_string(c.link_model) +
           " latency_counts_pilots=" + (c.latency_counts_pilots ? "true" : "false");
}

// 1. Pilot count trends over n and kappa.
Outcome pilot_trends() {
    Outcome o;
    int checked = 0;
    for (double db : {0.0, 10.0, 20.0}) {
        const Snr p = Snr::from_db(db);
        std::vector<int> prev(3, 0);
        for (int n = 100; n <= 1000; ++n) {
            const double kappas[] = {2.0, 4.0, 8.0};
            int np[3];
            for (int k = 0; k < 3; ++k) np[k] = optimal_pilot_count(n, kappas[k], p);
            for (int k = 0; k < 3; ++k) {
                ++checked;
                if (k > 0 && np[k] > np[k - 1]) {
                    o.pass = false;
                    o.detail += " kappa-trend@n=" + std::to_string(n);
                }
                if (np[k] < prev[k]) {
                    o.pass = false;
                    o.detail += " n-trend@n=" + std::to_string(n);
                }
                prev[k] = np[k];
            }
            if (optimal_pilot_count(n, static_cast<double>(n), p) != 1) {
                o.pass = false;
                o.detail += " kappa=n@n=" + std::to_string(n);
            }
        }
    }
    o.detail = std::to_string(checked) + " grid points, P in {0,10,20} dB" + o.detail;
    return o;
}

// 2. Latency anchors for the cooperative scheme.
Outcome latency_anchors() {
    struct Anchor {
        double db;
        double target;
        std::optional<int> np;
        int np_tol;
        double delay_ms;
    };
    const Anchor anchors[] = {
        {20.0, 1e-3, 11, 2, 4.7},
        {20.0, 1e-4, 15, 3, 9.0},
        {10.0, 1e-3, std::nullopt, 0, 6.29},
        {10.0, 1e-4, std::nullopt, 0, 17.2},
    };
    Outcome o;
    ScenarioConfig cfg;
    cfg.policy = PilotPolicy::ppc(2.0);
    cfg.rate = 0.5;
    SearchSpace space;
    space.scheme = Scheme::decode_forward;
    std::ostringstream ss;
    ss << "[" << conventions_line(cfg.conventions) << "]";
    for (const auto& a : anchors) {
        cfg.power = Snr::from_db(a.db);
        const auto pt = min_latency(cfg, Probability(a.target), space);
        const double ms = pt.latency_s * 1e3;
        bool ok = pt.feasible && std::abs(ms - a.delay_ms) <= 0.2 * a.delay_ms;
        if (a.np) ok = ok && std::abs(pt.n_p_opt - *a.np) <= a.np_tol;
        o.pass = o.pass && ok;
        ss << " " << a.db << "dB/" << a.target << ": n=" << pt.n_opt << " n_p=" << pt.n_p_opt << " delay=" << ms
           << "ms (want " << a.delay_ms << "ms" << (a.np ? ", n_p " + std::to_string(*a.np) : std::string()) << ")"
           << (ok ? "" : " X");
    }
    o.detail = ss.str();
    return o;
}

// 3. Closed form vs quadrature on the operating grid.
Outcome closed_form_accuracy() {
    Outcome o;
    double worst[2] = {0.0, 0.0};
    std::string where[2];
    int points = 0;
    for (int n = 100; n <= 2000; n += 100) {
        for (int ri = 1; ri <= 20; ++ri) {
            const double r = 0.1 * ri;
            for (int db = 0; db <= 25; ++db) {
                const CodingSpec spec{r, n};
                const Snr g = Snr::from_db(db);
                const double exact = outage_rayleigh_exact(spec, g).value();
                if (exact < 1e-5 || exact > 1e-1) continue;
                ++points;
                for (int m = 0; m < 2; ++m) {
                    const auto mode = m == 0 ? MuLogMode::bits : MuLogMode::nats;
                    const double approx = outage_rayleigh_approx(spec, g, mode).value();
                    const double err = std::abs(approx - exact) / exact;
                    if (err > worst[m]) {
                        worst[m] = err;
                        where[m] = "n=" + std::to_string(n) + " R=" + fmt("%.1f", r) + " " + std::to_string(db) + "dB";
                    }
                }
            }
        }
    }
    const bool bits = worst[0] <= 0.10;
    const bool nats = worst[1] <= 0.10;
    o.pass = bits || nats;
    o.detail = std::to_string(points) + " points; worst bits " + fmt("%.3f", worst[0]) + " at " + where[0] +
               "; worst nats " + fmt("%.3f", worst[1]) + " at " + where[1] + "; default mu_log=bits";
    return o;
}

// 4. Monte Carlo coverage and estimator variances.
Outcome monte_carlo() {
    Outcome o;
    std::vector<SimSpec> candidates;
    auto add = [&](SimMode mode, PilotPolicy policy, double db, int n) {
        SimSpec s;
        s.mode = mode;
        s.samples = 10'000'000;
        s.seed = 1000 + candidates.size();
        s.scenario.policy = policy;
        s.scenario.power = Snr::from_db(db);
        s.scenario.n_source = s.scenario.n_relay = n;
        candidates.push_back(s);
    };
    for (double db : {0.0, 5.0, 10.0, 15.0, 20.0, 25.0})
        add(SimMode::direct, PilotPolicy::perfect_csi(), db, 300);
    for (double db : {5.0, 10.0, 15.0, 20.0})
        add(SimMode::direct, PilotPolicy::ppc(3.0), db, 500);
    for (double db : {-5.0, 0.0, 5.0, 10.0})
        add(SimMode::mrc_only, PilotPolicy::perfect_csi(), db, 300);
    for (double db : {-5.0, 0.0, 5.0, 10.0, 15.0})
        add(SimMode::relay_df, PilotPolicy::ppc(3.0), db, 300);
    for (double db : {-5.0, 0.0, 5.0, 10.0, 15.0})
        add(SimMode::relay_df, PilotPolicy::apc(), db, 300);
    for (double db : {0.0, 5.0, 10.0})
        add(SimMode::relay_df, PilotPolicy::perfect_csi(), db, 200);
    for (double db : {0.0, 5.0, 10.0})
        add(SimMode::mrc_only, PilotPolicy::ppc(2.0), db, 400);

    int used = 0;
    int inside = 0;
    std::string misses;
    for (auto& s : candidates) {
        if (used == 20) break;
        const double ref = analytic_reference(s).value();
        if (ref < 1e-4 || ref > 1e-1) continue;
        ++used;
        const auto r = simulate_outage(s);
        const double z = std::abs(r.estimate.value() - ref) / r.std_err;
        if (z <= 3.0) {
            ++inside;
        } else {
            misses += std::string(" ") + to_string(s.mode) + "/" + to_string(s.scenario.policy.kind) + "@" +
                      fmt("%g", s.scenario.power.db()) + "dB z=" + fmt("%.2f", z);
        }
    }
    const bool coverage = used == 20 && inside >= 18;

    int est_ok = 0;
    for (double e : {0.1, 1.0, 10.0, 100.0}) {
        SimSpec s;
        s.mode = SimMode::estimator_check;
        s.samples = 10'000'000;
        s.seed = 77;
        s.pilot_energy = e;
        const auto r = simulate_estimator(s);
        const auto ref = mmse_variances(e);
        const bool ok = std::abs(r.sigma2_hat - ref.sigma2_hat) <= 3.0 * r.se_hat &&
                        std::abs(r.sigma2_tilde - ref.sigma2_tilde) <= 3.0 * r.se_tilde;
        if (ok) ++est_ok;
        else misses += " estimator@E=" + fmt("%g", e);
    }
    o.pass = coverage && est_ok == 4;
    o.detail = std::to_string(inside) + "/" + std::to_string(used) + " scenarios inside 3 sigma; estimator " +
               std::to_string(est_ok) + "/4" + misses;
    return o;
}

ScenarioConfig with_kind(PilotKind kind) {
    ScenarioConfig c;
    c.policy = kind == PilotKind::ppc   ? PilotPolicy::ppc(3.0)
               : kind == PilotKind::apc ? PilotPolicy::apc()
                                        : PilotPolicy::perfect_csi();
    return c;
}

// 5. Orderings across the SNR sweep.
Outcome sweep_orderings() {
    Outcome o;
    double max_gap = 0.0;
    double gap_at = 0.0;
    std::string failures;
    for (int db = -5; db <= 25; ++db) {
        double eps[2][3];
        const PilotKind kinds[] = {PilotKind::apc, PilotKind::ppc, PilotKind::perfect_csi};
        for (int k = 0; k < 3; ++k) {
            auto c = with_kind(kinds[k]);
            c.power = Snr::from_db(db);
            eps[0][k] = outage(c, Scheme::direct).value();
            eps[1][k] = outage(c, Scheme::decode_forward).value();
        }
        for (int k = 0; k < 3; ++k) {
            if (eps[1][k] > eps[0][k]) failures += " DF>DT@" + std::to_string(db);
        }
        for (int s = 0; s < 2; ++s) {
            if (eps[s][2] > eps[s][0] || eps[s][2] > eps[s][1]) failures += " PCSI@" + std::to_string(db);
            const double gap = std::abs(std::log10(eps[s][0] / eps[s][1]));
            if (gap > max_gap) {
                max_gap = gap;
                gap_at = db;
            }
        }
    }
    o.pass = failures.empty() && max_gap < 1.0;
    o.detail = "max |log10(APC/PPC)| = " + fmt("%.3f", max_gap) + " decades at " + fmt("%g", gap_at) + " dB" +
               failures;
    return o;
}

// 6. Goodput frontier properties.
Outcome goodput_properties() {
    Outcome o;
    std::vector<Probability> grid;
    for (double lg = -1.0; lg >= -5.0 - 1e-9; lg -= 0.5) grid.emplace_back(std::pow(10.0, lg));
    SearchSpace space;
    space.scheme = Scheme::decode_forward;
    std::ostringstream ss;
    for (double db : {20.0}) {
        for (double kappa : {2.0, 8.0}) {
            ScenarioConfig cfg;
            cfg.power = Snr::from_db(db);
            cfg.policy = PilotPolicy::ppc(kappa);
            const auto pts = frontier(cfg, grid, Objective::goodput, space);
            for (std::size_t i = 1; i < pts.size(); ++i) {
                const double prev = pts[i - 1].feasible ? pts[i - 1].goodput : 0.0;
                const double cur = pts[i].feasible ? pts[i].goodput : 0.0;
                if (cur > prev) {
                    o.pass = false;
                    ss << " increase@" << db << "dB/k" << kappa << "/" << grid[i].value();
                }
            }
        }
    }
    ScenarioConfig cfg;
    cfg.power = Snr::from_db(20.0);
    cfg.policy = PilotPolicy::ppc(2.0);
    const auto k2 = max_goodput(cfg, Probability(1e-3), space);
    cfg.policy = PilotPolicy::ppc(8.0);
    const auto k8 = max_goodput(cfg, Probability(1e-3), space);
    const bool order = k2.feasible && k8.feasible && k8.goodput >= k2.goodput;
    o.pass = o.pass && order;
    o.detail = "goodput@1e-3,20dB: kappa=2 " + fmt("%.5f", k2.goodput) + ", kappa=8 " + fmt("%.5f", k8.goodput) +
               ss.str();
    return o;
}

// 7. Optimizer against exhaustive scans.
struct Cell {
    int n;
    int n_p;
    double eps;
    int pilots;
    int data;
};

ScenarioConfig split_at(ScenarioConfig c, Scheme scheme, int n, int np) {
    if (scheme == Scheme::direct) {
        c.n_source = c.n_relay = n;
    } else {
        c.n_relay = static_cast<int>(std::lround(n * 0.5));
        c.n_source = n - c.n_relay;
    }
    c.pilots = np;
    return c;
}

Outcome oracle_equivalence() {
    Outcome o;
    int compared = 0;
    std::string failures;
    struct Case {
        Scheme scheme;
        PilotPolicy policy;
        double db;
    };
    const Case cases[] = {
        {Scheme::decode_forward, PilotPolicy::ppc(2.0), 20.0}, {Scheme::decode_forward, PilotPolicy::ppc(8.0), 10.0},
        {Scheme::decode_forward, PilotPolicy::ppc(4.0), 0.0},  {Scheme::direct, PilotPolicy::ppc(3.0), 20.0},
        {Scheme::direct, PilotPolicy::ppc(2.0), 10.0},         {Scheme::decode_forward, PilotPolicy::apc(), 10.0},
        {Scheme::decode_forward, PilotPolicy::perfect_csi(), 5.0},
    };
    const double targets[] = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    for (const auto& cs : cases) {
        ScenarioConfig cfg;
        cfg.policy = cs.policy;
        cfg.power = Snr::from_db(cs.db);
        SearchSpace space;
        space.scheme = cs.scheme;
        space.n = {8, 400};
        std::vector<Cell> cells;
        for (int n = 8; n <= 400; ++n) {
            const auto probe = split_at(cfg, cs.scheme, n, 0);
            const int phase = std::min(probe.n_source, probe.n_relay);
            int lo = 1, hi = phase - 1;
            if (cfg.policy.kind == PilotKind::perfect_csi) lo = hi = 0;
            if (cfg.policy.kind == PilotKind::apc) lo = hi = 1;
            for (int np = lo; np <= hi; ++np) {
                if (cfg.policy.kind == PilotKind::ppc && np * cfg.policy.kappa > phase) break;
                const double eps = outage(split_at(cfg, cs.scheme, n, np), cs.scheme).value();
                const int pilots = cs.scheme == Scheme::direct ? np : 2 * np;
                cells.push_back({n, np, eps, pilots, n - pilots});
            }
        }
        for (double t : targets) {
            std::optional<Cell> gbest, lbest;
            double best_g = -1.0;
            for (const auto& c : cells) {
                if (c.eps > t) continue;
                const double g = (1.0 - static_cast<double>(c.pilots) / c.n) * cfg.rate * (1.0 - c.eps);
                if (g > best_g) {
                    best_g = g;
                    gbest = c;
                }
                int want = 0;
                if (cfg.policy.kind == PilotKind::apc) want = 1;
                if (cfg.policy.kind == PilotKind::ppc)
                    want = optimal_pilot_count(split_at(cfg, cs.scheme, c.n, 0).n_source, cfg.policy.kappa, cfg.power);
                if (c.n_p == want && (!lbest || c.data < lbest->data)) lbest = c;
            }
            const auto gp = max_goodput(cfg, Probability(t), space);
            const auto lat = min_latency(cfg, Probability(t), space);
            compared += 2;
            const bool g_ok = gp.feasible == gbest.has_value() &&
                              (!gbest || (gp.n_opt == gbest->n && gp.n_p_opt == gbest->n_p));
            const bool l_ok = lat.feasible == lbest.has_value() &&
                              (!lbest || (lat.n_opt == lbest->n && lat.n_p_opt == lbest->n_p));
            if (!g_ok) failures += " goodput@" + std::string(to_string(cs.scheme)) + fmt("/%g", cs.db) + fmt("/%g", t);
            if (!l_ok) failures += " latency@" + std::string(to_string(cs.scheme)) + fmt("/%g", cs.db) + fmt("/%g", t);
        }
    }

    int grid_points = 0;
    for (int n : {20, 100, 300, 1000, 2000}) {
        for (double kappa : {1.0, 2.0, 4.0, 8.0, 16.0}) {
            for (double db : {0.0, 10.0, 20.0}) {
                const Snr p = Snr::from_db(db);
                const int hi = max_pilot_count(n, kappa);
                if (hi < 1) continue;
                int arg = 1;
                double best = -1.0;
                for (int np = 1; np <= hi; ++np) {
                    const double v = ppc_effective_snr(n, np, kappa, p).linear();
                    if (v > best) {
                        best = v;
                        arg = np;
                    }
                }
                ++grid_points;
                if (optimal_pilot_count(n, kappa, p) != arg)
                    failures += " n_p@" + std::to_string(n) + fmt("/k%g", kappa) + fmt("/%gdB", db);
            }
        }
    }
    o.pass = failures.empty();
    o.detail = std::to_string(compared) + " optimizer results, " + std::to_string(grid_points) + " pilot grid points" +
               failures;
    return o;
}

// 8. Byte-identical re-runs through the command-line tool.
std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int shell(const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

Outcome determinism(const std::string& tool, const fs::path& work) {
    Outcome o;
    if (tool.empty()) {
        o.pass = false;
        o.detail = "no --tool given";
        return o;
    }
    fs::remove_all(work);
    fs::create_directories(work);
    {
        std::ofstream f(work / "run.conf");
        f << "[scenario]\nsnr_db = 20\n[policy]\nkind = ppc\nkappa = 2\n"
             "[optimizer]\nn_max = 800\neps_grid = 1e-1,1e-2,1e-3,1e-4,1e-5\n"
             "[simulate]\nmode = relay_df\nsamples = 1000000\nseed = 5\n";
    }
    const std::string cfg = (work / "run.conf").string();
    const std::vector<std::pair<std::string, std::string>> runs{
        {"sweep-snr", "sweep_snr"}, {"sweep-kappa", "sweep_kappa"}, {"latency", "latency"},
        {"goodput", "goodput"},     {"simulate", "simulate"},
    };
    int identical = 0;
    for (const auto& [sub, stem] : runs) {
        std::string a, b, ma, mb;
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path out = work / stem;  // same command line both times
            fs::create_directories(out);
            const int code = shell(tool + " " + sub + " --config " + cfg + " --out " + out.string());
            if (code != 0 && code != 4) o.detail += " " + sub + " exit " + std::to_string(code);
            (rep == 0 ? a : b) = slurp(out / (stem + ".csv"));
            (rep == 0 ? ma : mb) = slurp(out / (stem + ".manifest.json"));
        }
        const bool same = !a.empty() && a == b && ma == mb;
        const int replay = shell(tool + " replay " + (work / stem / (stem + ".manifest.json")).string());
        if (same && replay == 0) ++identical;
        else o.detail += " " + sub + (same ? " replay-failed" : " differs");
    }
    o.pass = identical == static_cast<int>(runs.size());
    o.detail = std::to_string(identical) + "/" + std::to_string(runs.size()) + " commands byte-identical and replayed" +
               o.detail;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"urllc acceptance gate"};
    std::string tool;
    std::string work = (fs::temp_directory_path() / "urllc_acceptance").string();
    std::vector<int> only;
    app.add_option("--tool", tool, "path to the urllc executable");
    app.add_option("--work", work, "scratch directory");
    app.add_option("--only", only, "run only these criteria");
    CLI11_PARSE(app, argc, argv);

    struct Criterion {
        int id;
        const char* name;
        double budget_s;  // 0: no runtime bound
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "pilot count trends", 1.0, pilot_trends},
        {2, "latency anchors", 60.0, latency_anchors},
        {3, "closed form vs quadrature", 60.0, closed_form_accuracy},
        {4, "monte carlo concordance", 600.0, monte_carlo},
        {5, "snr sweep orderings", 60.0, sweep_orderings},
        {6, "goodput frontier", 60.0, goodput_properties},
        {7, "oracle equivalence", 120.0, oracle_equivalence},
        {8, "determinism", 0.0, [&] { return determinism(tool, work); }},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.budget_s == 0.0 || secs < c.budget_s;
        const bool pass = out.pass && in_time;
        if (!pass) ++failed;
        std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << " (" << fmt("%.2f", secs) << " s"
                  << (in_time ? "" : ", over budget") << "): " << out.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
