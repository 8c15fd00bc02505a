#pragma once

// Direct transmission and decode-and-forward relaying with maximum ratio
// combining at the destination. Links: Z = source-destination,
// X = source-relay, Y = relay-destination.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "urllc/estimation.hpp"
#include "urllc/fbl.hpp"
#include "urllc/mathcore.hpp"

namespace urllc {

/// How P maps to transmit power. `per_link`: every active transmitter sends
/// at P. `total_split`: source sends eta*P, relay (1 - eta)*P.
enum class PowerMode { per_link, total_split };

/// Distance used for the relay-destination mean SNR: the relay-destination
/// distance 1 - beta, or the source-destination distance as literally printed.
enum class GammaYMode { relay_destination, source_destination };

/// Data blocklength used for the combined (MRC) outage: the relaying phase
/// alone, or both phases together.
enum class MrcBlocklengthMode { relay_phase, combined };

/// Single-link outage evaluator: closed form or quadrature.
enum class LinkOutageModel { closed_form, quadrature };

enum class Scheme { direct, decode_forward };

inline const char* to_string(PowerMode m) { return m == PowerMode::per_link ? "per_link" : "total"; }
inline const char* to_string(GammaYMode m) { return m == GammaYMode::relay_destination ? "drd" : "dsd"; }
inline const char* to_string(MrcBlocklengthMode m) { return m == MrcBlocklengthMode::relay_phase ? "relay" : "combined"; }
inline const char* to_string(LinkOutageModel m) { return m == LinkOutageModel::closed_form ? "closed_form" : "quadrature"; }
inline const char* to_string(Scheme s) { return s == Scheme::direct ? "dt" : "df"; }

/// Modelling conventions that the analysis leaves open. Every output records
/// the values in force.
struct Conventions {
    MuLogMode mu_log = MuLogMode::bits;
    GammaYMode gamma_y = GammaYMode::relay_destination;
    MrcBlocklengthMode mrc_n = MrcBlocklengthMode::relay_phase;
    PowerMode power = PowerMode::per_link;
    LinkOutageModel link_model = LinkOutageModel::closed_form;
    bool latency_counts_pilots = false;
};

/// Full description of one link-level experiment.
struct ScenarioConfig {
    Snr power = Snr::from_db(10.0);
    double eta = 0.5;
    double beta = 0.5;
    double alpha = 4.0;
    double rate = 0.5;
    int n_source = 300;
    int n_relay = 300;
    std::optional<int> pilots;  // unset: policy default (PPC optimum, 1 for APC, 0 for PCSI)
    PilotPolicy policy = PilotPolicy::ppc(3.0);
    double symbol_period = 8.33e-6;
    Conventions conventions;

    void validate() const {
        if (!(power.linear() > 0.0)) throw std::domain_error("scenario: P must be > 0");
        if (!(eta > 0.0 && eta < 1.0)) throw std::domain_error("scenario: eta must lie in (0,1)");
        if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("scenario: beta must lie in (0,1)");
        if (!(alpha > 0.0)) throw std::domain_error("scenario: alpha must be > 0");
        if (!(rate > 0.0)) throw std::domain_error("scenario: rate must be > 0");
        if (!(symbol_period > 0.0)) throw std::domain_error("scenario: symbol period must be > 0");
        if (n_source < 2 || n_relay < 2) throw std::domain_error("scenario: phase blocklengths must be >= 2");
        policy.validate();
        if (pilots) {
            const int np = *pilots;
            if (policy.kind == PilotKind::perfect_csi && np != 0) {
                throw std::domain_error("scenario: perfect CSI carries no pilots");
            }
            if (policy.kind == PilotKind::apc && np != 1) throw std::domain_error("scenario: APC uses one pilot");
            if (np < 0 || np >= std::min(n_source, n_relay)) {
                throw std::domain_error("scenario: need 0 <= n_p < min(n_S, n_R), got n_p=" + std::to_string(np));
            }
            if (policy.kind == PilotKind::ppc && np * policy.kappa > std::min(n_source, n_relay)) {
                throw std::domain_error("scenario: n_p * kappa exceeds the phase blocklength");
            }
        }
    }
};

/// Distances with the source-destination link normalised to 1.
struct Geometry {
    double sd = 1.0;
    double sr = 0.5;
    double rd = 0.5;
};

inline Geometry geometry(const ScenarioConfig& cfg) { return {1.0, cfg.beta, 1.0 - cfg.beta}; }

/// Average effective SNRs of the three links after the estimation penalty.
struct LinkBudget {
    Snr z;
    Snr x;
    Snr y;
    int pilots = 0;
};

/// Per-link, per-phase mean receive SNRs before any estimation penalty.
inline LinkBudget mean_snrs(const ScenarioConfig& cfg) {
    const auto d = geometry(cfg);
    const double p = cfg.power.linear();
    const bool split = cfg.conventions.power == PowerMode::total_split;
    const double ps = split ? cfg.eta * p : p;
    const double pr = split ? (1.0 - cfg.eta) * p : p;
    const double dy = cfg.conventions.gamma_y == GammaYMode::relay_destination ? d.rd : d.sd;
    return {Snr(ps * std::pow(d.sd, -cfg.alpha)), Snr(ps * std::pow(d.sr, -cfg.alpha)),
            Snr(pr * std::pow(dy, -cfg.alpha)), 0};
}

/// Pilot symbols per phase under the scenario's policy.
inline int pilots_used(const ScenarioConfig& cfg) {
    if (cfg.pilots) return *cfg.pilots;
    switch (cfg.policy.kind) {
        case PilotKind::perfect_csi: return 0;
        case PilotKind::apc: return 1;
        case PilotKind::ppc: return optimal_pilot_count(cfg.n_source, cfg.policy.kappa, cfg.power);
    }
    return 0;
}

/// Effective SNR per link. Z and X are trained in the broadcast phase
/// (n_source channel uses), Y in the relaying phase (n_relay).
inline LinkBudget link_budget(const ScenarioConfig& cfg) {
    cfg.validate();
    const auto mean = mean_snrs(cfg);
    const int np = pilots_used(cfg);
    if (cfg.policy.kind == PilotKind::perfect_csi) return {mean.z, mean.x, mean.y, 0};
    auto eff = [&](int n, Snr p) { return estimate_link(cfg.policy, n, np, p).gamma_eff; };
    return {eff(cfg.n_source, mean.z), eff(cfg.n_source, mean.x), eff(cfg.n_relay, mean.y), np};
}

/// Single-link outage at data blocklength n and mean SNR `mean_snr`, using
/// the scenario's link model.
inline Probability link_outage(const ScenarioConfig& cfg, int n, Snr mean_snr) {
    const CodingSpec spec{cfg.rate, n};
    if (mean_snr.linear() <= 0.0) return Probability(1.0);
    if (cfg.conventions.link_model == LinkOutageModel::quadrature) return outage_rayleigh_exact(spec, mean_snr);
    return outage_rayleigh_approx(spec, mean_snr, cfg.conventions.mu_log);
}

/// Outage of point-to-point transmission over the source-destination link.
inline Probability outage_direct(const ScenarioConfig& cfg) {
    const auto budget = link_budget(cfg);
    return link_outage(cfg, cfg.n_source - budget.pilots, budget.z);
}

/// Outage after maximum ratio combining of two independent Rayleigh branches
/// with mean SNRs g1 and g2: the conditional error averaged over the
/// hypoexponential density of their sum.
inline Probability outage_mrc(Snr g1, Snr g2, const CodingSpec& spec) {
    spec.validate();
    double hi = std::max(g1.linear(), g2.linear());
    double lo = std::min(g1.linear(), g2.linear());
    if (!(lo > 0.0)) throw std::domain_error("outage_mrc requires both mean SNRs > 0");

    const bool equal = hi - lo < 1e-6 * hi;
    const double inv_hi = 1.0 / hi;
    const double rate_gap = (hi - lo) / (hi * lo);  // 1/lo - 1/hi
    auto density = [&](double x) -> double {
        if (equal) {
            const double m = 0.5 * (hi + lo);
            return x * std::exp(-x / m) / (m * m);
        }
        // (e^{-x/hi} - e^{-x/lo}) / (hi - lo), without cancellation
        return std::exp(-x * inv_hi) * -std::expm1(-x * rate_gap) / (hi - lo);
    };
    auto integrand = [&](double x) { return detail::conditional_error(x, spec.n, spec.rate) * density(x); };

    std::vector<double> cuts = detail::transition_points(spec, 1.0);
    for (double f : {1.0, 5.0, 20.0, 40.0}) {
        cuts.push_back(f * lo);
        cuts.push_back(f * hi);
    }
    const double value = integrate_or_throw(integrand, Interval{0.0, std::numeric_limits<double>::infinity()}, kOutageTolerance, cuts);
    return Probability::clamped(value);
}

/// Per-link outages and the composite decode-and-forward outage.
struct OutageBreakdown {
    Probability z;
    Probability x;
    Probability srd;
    Probability df;
};

/// eps_X eps_Z + (1 - eps_X) eps_SRD: the relay fails to decode and the direct
/// copy fails, or the relay decodes and the combined copy fails.
inline Probability compose_df(Probability eps_x, Probability eps_z, Probability eps_srd) {
    return Probability::clamped(eps_x * eps_z + (1.0 - eps_x) * eps_srd);
}

/// Blocklengths of the data parts of each phase.
struct DataLengths {
    int source = 0;
    int relay = 0;
    int mrc = 0;
};

inline DataLengths data_lengths(const ScenarioConfig& cfg, int pilots) {
    DataLengths d{cfg.n_source - pilots, cfg.n_relay - pilots, 0};
    d.mrc = cfg.conventions.mrc_n == MrcBlocklengthMode::relay_phase ? d.relay : d.source + d.relay;
    if (d.source < 1 || d.relay < 1) throw std::domain_error("no channel uses left for data after pilots");
    return d;
}

inline OutageBreakdown outage_df(const ScenarioConfig& cfg) {
    const auto budget = link_budget(cfg);
    const auto len = data_lengths(cfg, budget.pilots);
    const auto ez = link_outage(cfg, len.source, budget.z);
    const auto ex = link_outage(cfg, len.source, budget.x);
    Probability esrd(1.0);
    if (budget.z.linear() > 0.0 && budget.y.linear() > 0.0) {
        esrd = outage_mrc(budget.z, budget.y, CodingSpec{cfg.rate, len.mrc});
    } else if (budget.z.linear() > 0.0 || budget.y.linear() > 0.0) {
        esrd = link_outage(cfg, len.mrc, Snr(budget.z.linear() + budget.y.linear()));
    }
    return {ez, ex, esrd, compose_df(ex, ez, esrd)};
}

inline Probability outage(const ScenarioConfig& cfg, Scheme scheme) {
    return scheme == Scheme::direct ? outage_direct(cfg) : outage_df(cfg).df;
}

/// Transmission delay of n_data channel uses, in seconds.
inline double latency(const ScenarioConfig& cfg, int n_data) {
    if (n_data < 1) throw std::domain_error("latency requires n_data >= 1");
    return cfg.symbol_period * n_data;
}

/// Delivered bits per channel use net of pilot overhead and failures.
inline double goodput(int n, int n_p, double rate, Probability eps) {
    if (n < 1 || n_p < 0 || n_p >= n) throw std::domain_error("goodput requires 0 <= n_p < n");
    if (!(rate >= 0.0)) throw std::domain_error("goodput requires R >= 0");
    return (1.0 - static_cast<double>(n_p) / n) * rate * (1.0 - eps.value());
}

/// Channel-use accounting of one transmission under a scheme.
struct ChannelUses {
    int total = 0;
    int pilots = 0;
    int data = 0;
};

inline ChannelUses channel_uses(const ScenarioConfig& cfg, Scheme scheme, int pilots) {
    if (scheme == Scheme::direct) return {cfg.n_source, pilots, cfg.n_source - pilots};
    return {cfg.n_source + cfg.n_relay, 2 * pilots, cfg.n_source + cfg.n_relay - 2 * pilots};
}

/// Channel uses charged to latency: data only unless the convention adds pilots.
inline int latency_uses(const ScenarioConfig& cfg, const ChannelUses& uses) {
    return cfg.conventions.latency_counts_pilots ? uses.total : uses.data;
}

}  // namespace urllc
