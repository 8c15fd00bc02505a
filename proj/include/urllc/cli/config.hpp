#pragma once

// Run configuration: a flat `key = value` file with [sections]. Comments
// start with '#' or ';'. Lists are comma separated; a range is written
// start:step:stop and includes stop when it lands on the grid.

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "urllc/montecarlo.hpp"
#include "urllc/optimizer.hpp"
#include "urllc/relaying.hpp"

namespace urllc::cli {

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& msg)
        : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + ": " + msg : "config: " + msg),
          line_(line) {}
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    int line_;
};

struct SweepSettings {
    std::vector<double> snr_db;
    std::vector<Scheme> schemes{Scheme::direct, Scheme::decode_forward};
    std::vector<PilotKind> policies{PilotKind::apc, PilotKind::ppc, PilotKind::perfect_csi};
    std::vector<double> kappas{2.0, 4.0, 8.0};
    std::vector<int> n;
};

struct OptimizerSettings {
    SearchSpace space;
    std::vector<double> eps_grid{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
};

struct SimulateSettings {
    SimMode mode = SimMode::relay_df;
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 1;
    ImportanceSampling importance = ImportanceSampling::automatic;
    std::size_t workers = 1;
    std::vector<double> pilot_energies;  // estimator_check; empty: policy default
};

struct RunConfig {
    ScenarioConfig scenario;
    SweepSettings sweep;
    OptimizerSettings optimizer;
    SimulateSettings simulate;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

inline double to_double(const std::string& s, int line) {
    if (s.empty()) throw ConfigError(line, "expected a number, got an empty value");
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
        throw ConfigError(line, "expected a number, got '" + s + "'");
    }
    return v;
}

inline long long to_integer(const std::string& s, int line) {
    if (s.empty()) throw ConfigError(line, "expected an integer, got an empty value");
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || errno == ERANGE) throw ConfigError(line, "expected an integer, got '" + s + "'");
    return v;
}

inline std::uint64_t to_u64(const std::string& s, int line) {
    if (s.empty() || s[0] == '-') throw ConfigError(line, "expected a non-negative integer, got '" + s + "'");
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || errno == ERANGE) throw ConfigError(line, "expected an integer, got '" + s + "'");
    return v;
}

inline int to_int(const std::string& s, int line) {
    const long long v = to_integer(s, line);
    if (v < -2147483647LL || v > 2147483647LL) throw ConfigError(line, "integer out of range: " + s);
    return static_cast<int>(v);
}

inline bool to_bool(const std::string& s, int line) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(line, "expected true or false, got '" + s + "'");
}

// "a,b,c" or "start:step:stop" (or a mix of both, comma separated).
inline std::vector<double> to_grid(const std::string& s, int line) {
    std::vector<double> out;
    for (const auto& item : split(s, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() == 1) {
            out.push_back(to_double(parts[0], line));
        } else if (parts.size() == 3) {
            const double a = to_double(parts[0], line);
            const double step = to_double(parts[1], line);
            const double b = to_double(parts[2], line);
            if (!(step > 0.0) || b < a) throw ConfigError(line, "range needs step > 0 and stop >= start: '" + item + "'");
            const auto count = static_cast<long long>(std::floor((b - a) / step + 1e-9));
            if (count > 1'000'000) throw ConfigError(line, "range has too many points: '" + item + "'");
            for (long long i = 0; i <= count; ++i) out.push_back(a + static_cast<double>(i) * step);
        } else {
            throw ConfigError(line, "bad list item '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError(line, "empty list");
    return out;
}

inline std::vector<int> to_int_grid(const std::string& s, int line) {
    std::vector<int> out;
    for (double v : to_grid(s, line)) {
        if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(line, "expected integers in '" + s + "'");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

}  // namespace detail

inline Scheme parse_scheme(const std::string& s, int line = 0) {
    if (s == "dt") return Scheme::direct;
    if (s == "df") return Scheme::decode_forward;
    throw ConfigError(line, "unknown scheme '" + s + "' (dt, df)");
}

inline PilotKind parse_policy(const std::string& s, int line = 0) {
    if (s == "apc") return PilotKind::apc;
    if (s == "ppc") return PilotKind::ppc;
    if (s == "pcsi") return PilotKind::perfect_csi;
    throw ConfigError(line, "unknown policy '" + s + "' (apc, ppc, pcsi)");
}

inline MuLogMode parse_mu_log(const std::string& s, int line = 0) {
    if (s == "bits") return MuLogMode::bits;
    if (s == "nats") return MuLogMode::nats;
    throw ConfigError(line, "unknown log mode '" + s + "' (bits, nats)");
}

inline GammaYMode parse_gamma_y(const std::string& s, int line = 0) {
    if (s == "drd") return GammaYMode::relay_destination;
    if (s == "dsd") return GammaYMode::source_destination;
    throw ConfigError(line, "unknown gamma_y mode '" + s + "' (drd, dsd)");
}

inline MrcBlocklengthMode parse_mrc_n(const std::string& s, int line = 0) {
    if (s == "relay") return MrcBlocklengthMode::relay_phase;
    if (s == "combined") return MrcBlocklengthMode::combined;
    throw ConfigError(line, "unknown mrc_n mode '" + s + "' (relay, combined)");
}

inline PowerMode parse_power(const std::string& s, int line = 0) {
    if (s == "per_link") return PowerMode::per_link;
    if (s == "total") return PowerMode::total_split;
    throw ConfigError(line, "unknown power mode '" + s + "' (per_link, total)");
}

inline LinkOutageModel parse_link_model(const std::string& s, int line = 0) {
    if (s == "closed_form") return LinkOutageModel::closed_form;
    if (s == "quadrature") return LinkOutageModel::quadrature;
    throw ConfigError(line, "unknown link model '" + s + "' (closed_form, quadrature)");
}

inline SimMode parse_sim_mode(const std::string& s, int line = 0) {
    if (s == "direct") return SimMode::direct;
    if (s == "relay_df") return SimMode::relay_df;
    if (s == "mrc_only") return SimMode::mrc_only;
    if (s == "estimator_check") return SimMode::estimator_check;
    throw ConfigError(line, "unknown simulate mode '" + s + "'");
}

inline ImportanceSampling parse_importance(const std::string& s, int line = 0) {
    if (s == "off") return ImportanceSampling::off;
    if (s == "on") return ImportanceSampling::on;
    if (s == "auto") return ImportanceSampling::automatic;
    throw ConfigError(line, "unknown importance setting '" + s + "' (off, on, auto)");
}

inline std::vector<double> parse_eps_grid(const std::string& s, int line = 0) {
    auto grid = detail::to_grid(s, line);
    for (double e : grid) {
        if (!(e >= kMinTarget * (1.0 - 1e-12) && e <= kMaxTarget * (1.0 + 1e-12))) {
            throw ConfigError(line, "outage target " + detail::trim(std::to_string(e)) + " outside [1e-5, 1e-1]");
        }
    }
    return grid;
}

/// Parses configuration text. Unknown sections or keys are errors so typos
/// do not silently fall back to defaults.
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    auto& sc = cfg.scenario;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    std::map<std::string, int> seen;
    std::optional<double> kappa;
    std::optional<PilotKind> kind;
    int kind_line = 0;

    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        if (const auto c = s.find_first_of("#;"); c != std::string::npos) s.resize(c);
        s = detail::trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(line, "unterminated section header");
            section = detail::trim(std::string_view(s).substr(1, s.size() - 2));
            if (section != "scenario" && section != "policy" && section != "conventions" && section != "sweep" &&
                section != "optimizer" && section != "simulate") {
                throw ConfigError(line, "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "expected key = value");
        const std::string key = detail::trim(std::string_view(s).substr(0, eq));
        const std::string val = detail::trim(std::string_view(s).substr(eq + 1));
        if (section.empty()) throw ConfigError(line, "key '" + key + "' before any [section]");
        const std::string full = section + "." + key;
        if (auto [it, fresh] = seen.emplace(full, line); !fresh) {
            throw ConfigError(line, "duplicate key " + full + " (first set on line " + std::to_string(it->second) + ")");
        }
        auto unknown = [&] { throw ConfigError(line, "unknown key '" + key + "' in [" + section + "]"); };
        auto open_unit = [&](const std::string& v) {
            const double x = detail::to_double(v, line);
            if (!(x > 0.0 && x < 1.0)) throw ConfigError(line, key + " must lie in (0,1)");
            return x;
        };

        try {
            if (section == "scenario") {
                if (key == "snr_db") sc.power = Snr::from_db(detail::to_double(val, line));
                else if (key == "eta") sc.eta = open_unit(val);
                else if (key == "beta") sc.beta = open_unit(val);
                else if (key == "alpha") sc.alpha = detail::to_double(val, line);
                else if (key == "rate") sc.rate = detail::to_double(val, line);
                else if (key == "n_source") sc.n_source = detail::to_int(val, line);
                else if (key == "n_relay") sc.n_relay = detail::to_int(val, line);
                else if (key == "pilots") sc.pilots = detail::to_int(val, line);
                else if (key == "symbol_period") sc.symbol_period = detail::to_double(val, line);
                else unknown();
            } else if (section == "policy") {
                if (key == "kind") {
                    kind = parse_policy(val, line);
                    kind_line = line;
                } else if (key == "kappa") {
                    kappa = detail::to_double(val, line);
                } else {
                    unknown();
                }
            } else if (section == "conventions") {
                auto& cv = sc.conventions;
                if (key == "mu_log") cv.mu_log = parse_mu_log(val, line);
                else if (key == "gamma_y") cv.gamma_y = parse_gamma_y(val, line);
                else if (key == "mrc_n") cv.mrc_n = parse_mrc_n(val, line);
                else if (key == "power") cv.power = parse_power(val, line);
                else if (key == "link_model") cv.link_model = parse_link_model(val, line);
                else if (key == "latency_counts_pilots") cv.latency_counts_pilots = detail::to_bool(val, line);
                else unknown();
            } else if (section == "sweep") {
                auto& sw = cfg.sweep;
                if (key == "snr_db") {
                    sw.snr_db = detail::to_grid(val, line);
                } else if (key == "schemes") {
                    sw.schemes.clear();
                    for (const auto& x : detail::split(val, ',')) sw.schemes.push_back(parse_scheme(x, line));
                } else if (key == "policies") {
                    sw.policies.clear();
                    for (const auto& x : detail::split(val, ',')) sw.policies.push_back(parse_policy(x, line));
                } else if (key == "kappas") {
                    sw.kappas = detail::to_grid(val, line);
                } else if (key == "n") {
                    sw.n = detail::to_int_grid(val, line);
                } else {
                    unknown();
                }
            } else if (section == "optimizer") {
                auto& op = cfg.optimizer;
                if (key == "scheme") op.space.scheme = parse_scheme(val, line);
                else if (key == "n_min") op.space.n.min = detail::to_int(val, line);
                else if (key == "n_max") op.space.n.max = detail::to_int(val, line);
                else if (key == "relay_fraction") op.space.relay_fraction = detail::to_double(val, line);
                else if (key == "workers") op.space.workers = static_cast<std::size_t>(detail::to_u64(val, line));
                else if (key == "eps_grid") op.eps_grid = parse_eps_grid(val, line);
                else unknown();
            } else if (section == "simulate") {
                auto& sm = cfg.simulate;
                if (key == "mode") sm.mode = parse_sim_mode(val, line);
                else if (key == "samples") sm.samples = detail::to_u64(val, line);
                else if (key == "seed") sm.seed = detail::to_u64(val, line);
                else if (key == "importance") sm.importance = parse_importance(val, line);
                else if (key == "workers") sm.workers = static_cast<std::size_t>(detail::to_u64(val, line));
                else if (key == "pilot_energy") sm.pilot_energies = detail::to_grid(val, line);
                else unknown();
            }
        } catch (const std::domain_error& e) {
            throw ConfigError(line, e.what());
        }
    }

    const PilotKind k = kind.value_or(PilotKind::ppc);
    if (k == PilotKind::ppc) {
        sc.policy = PilotPolicy::ppc(kappa.value_or(3.0));
    } else {
        if (kappa) throw ConfigError(seen["policy.kappa"], "kappa only applies to the ppc policy");
        sc.policy = k == PilotKind::apc ? PilotPolicy::apc() : PilotPolicy::perfect_csi();
    }
    try {
        sc.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(kind_line, e.what());
    }
    return cfg;
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError(0, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace urllc::cli
